"""Unlabelled Markov-equivalence classes of small MAGs and their imset verdicts.

Every MAG is isomorphic to one whose directed edges point from lower to
higher id, so enumerating those (``generators.all_topological_mags``)
reaches every unlabelled class.  Classes are keyed by the parametrizing-set
family S(G) minimised over vertex relabellings; graphs are Markov equivalent
exactly when their S(G) agree.

Work is split into shards by the MAG induced on the first ``prefix``
vertices.  Each shard's class keys and first representatives are written to
``<dir>/shards/<id>.json`` so a run can resume; shards are merged in shard
order, which makes the chosen representatives independent of ``jobs``.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .graph_core import Admg, format_graph, is_ancestral, is_maximal
from .heads import pset_bits
from .markov_props import Verdict, verdict


# ---------------------------------------------------------------------------
# canonical keys


class Canonizer:
    """Minimum of the permuted S(G) family over vertex relabellings.

    Only relabellings that list vertices by increasing signature (the number
    of member sets of each size containing the vertex) are tried.  The
    signature is relabelling-invariant, so the minimum is still a canonical
    form, and typically few relabellings remain.
    """

    def __init__(self, n: int):
        self.n = n
        self._maps: dict = {}

    def _map(self, perm: tuple) -> list[int]:
        m = self._maps.get(perm)
        if m is None:
            m = []
            for S in range(1 << self.n):
                T = 0
                for v in range(self.n):
                    if S >> v & 1:
                        T |= 1 << perm[v]
                m.append(T)
            self._maps[perm] = m
        return m

    def relabellings(self, sets: list[int]) -> Iterator[tuple]:
        n = self.n
        sig = [[0] * (n + 1) for _ in range(n)]
        for S in sets:
            k = bin(S).count("1")
            for v in range(n):
                if S >> v & 1:
                    sig[v][k] += 1
        groups: dict = {}
        for v in range(n):
            groups.setdefault(tuple(sig[v]), []).append(v)
        ordered = [groups[k] for k in sorted(groups)]
        starts = list(itertools.accumulate([0] + [len(g) for g in ordered]))
        for choice in itertools.product(*(itertools.permutations(g) for g in ordered)):
            perm = [0] * n
            for start, grp in zip(starts, choice):
                for off, v in enumerate(grp):
                    perm[v] = start + off
            yield tuple(perm)

    def key(self, family: int) -> int:
        sets = [S for S in range(1 << self.n) if family >> S & 1]
        best = None
        for perm in self.relabellings(sets):
            m = self._map(perm)
            k = 0
            for S in sets:
                k |= 1 << m[S]
            if best is None or k < best:
                best = k
        return best


def graph_code(g: Admg) -> tuple:
    return (g.n, tuple(sorted(g.directed)), tuple(sorted(g.bidirected)))


def graph_from_code(code) -> Admg:
    n, d, b = code
    return Admg(n, [tuple(e) for e in d], [tuple(e) for e in b])


# ---------------------------------------------------------------------------
# enumeration


def _extend(prefix: Admg, n: int) -> Iterator[Admg]:
    """All topologically labelled MAGs on n vertices restricting to ``prefix``."""
    pairs = [[(i, j) for i in range(j)] for j in range(n)]

    def rec(j, directed, bidirected):
        if j == n:
            yield Admg(n, directed, bidirected)
            return
        for states in itertools.product((0, 1, 2), repeat=j):
            d = directed + [p for p, s in zip(pairs[j], states) if s == 1]
            b = bidirected + [p for p, s in zip(pairs[j], states) if s == 2]
            g = Admg(j + 1, d, b)
            if is_ancestral(g) and is_maximal(g):
                yield from rec(j + 1, d, b)

    yield from rec(prefix.n, sorted(prefix.directed), sorted(prefix.bidirected))


def shards(n: int, prefix: int | None = None) -> list[Admg]:
    """Topologically labelled MAGs on the first ``prefix`` vertices."""
    from .generators import all_topological_mags

    if prefix is None:
        prefix = min(n, 4)
    return list(all_topological_mags(prefix))


def labelled_mags(n: int) -> Iterator[Admg]:
    for s in shards(n):
        yield from _extend(s, n)


def _run_shard(args) -> dict:
    n, code, connected_only = args
    canon = _canonizer(n)
    seen_labelled = set()
    classes: dict = {}
    count = 0
    for g in _extend(graph_from_code(code), n):
        count += 1
        if connected_only and not g.skeleton_connected():
            continue
        fam = pset_bits(g)
        if fam in seen_labelled:
            continue
        seen_labelled.add(fam)
        k = canon.key(fam)
        if k not in classes:
            classes[k] = graph_code(g)
    return {"graphs": count, "classes": {str(k): v for k, v in classes.items()}}


_CANON: dict = {}


def _canonizer(n: int) -> Canonizer:
    if n not in _CANON:
        _CANON[n] = Canonizer(n)
    return _CANON[n]


def enumerate_classes(
    n: int,
    connected_only: bool = False,
    jobs: int = 1,
    resume: str | os.PathLike | None = None,
    log=None,
) -> dict[int, Admg]:
    """Canonical class key -> representative MAG, for every unlabelled class."""
    if not 1 <= n <= 7:
        raise ValueError("census supports 1 <= n <= 7")
    todo = [graph_code(s) for s in shards(n)]
    out_dir = Path(resume) / "shards" if resume is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    results: list = [None] * len(todo)
    pending = []
    for k, code in enumerate(todo):
        f = out_dir / f"{k:05d}.json" if out_dir is not None else None
        if f is not None and f.exists():
            results[k] = json.loads(f.read_text())
        else:
            pending.append(k)

    def store(k, res):
        results[k] = res
        if out_dir is not None:
            tmp = out_dir / f"{k:05d}.json.tmp"
            tmp.write_text(json.dumps(res))
            tmp.replace(out_dir / f"{k:05d}.json")
        if log is not None:
            done = sum(r is not None for r in results)
            log(f"shard {k} done ({done}/{len(todo)}), {res['graphs']} graphs")

    args = [(n, todo[k], connected_only) for k in pending]
    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            for k, res in zip(pending, ex.map(_run_shard, args, chunksize=1)):
                store(k, res)
    else:
        for k, a in zip(pending, args):
            store(k, _run_shard(a))
    merged: dict[int, Admg] = {}
    for res in results:
        for key, code in res["classes"].items():
            key = int(key)
            if key not in merged:
                merged[key] = code
    return {k: graph_from_code(merged[k]) for k in sorted(merged)}


def enumerate_mags(n: int, connected_only: bool = False, jobs: int = 1) -> Iterator[Admg]:
    """One representative per unlabelled Markov-equivalence class, by key order."""
    yield from enumerate_classes(n, connected_only, jobs).values()


# ---------------------------------------------------------------------------
# classification


@dataclass
class CensusRecord:
    n: int
    class_id: int
    key: int
    graph: Admg
    verdict: Verdict
    connected: bool


@dataclass
class CensusReport:
    n: int
    connected_only: bool
    records: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def total(self) -> int:
        return len(self.records)

    def failures(self) -> list[CensusRecord]:
        return [r for r in self.records if not r.verdict.perfectly_markovian]

    def non_combinatorial(self) -> list[CensusRecord]:
        return [r for r in self.records if not r.verdict.combinatorial]

    def counts(self) -> dict:
        cells: dict = {}
        for r in self.records:
            v = r.verdict
            cell = (v.combinatorial, v.structural is not None, v.markovian, v.perfectly_markovian)
            cells[cell] = cells.get(cell, 0) + 1
        return {
            "n": self.n,
            "connected_only": self.connected_only,
            "classes": self.total,
            "imperfect": len(self.failures()),
            "non_combinatorial": len(self.non_combinatorial()),
            "non_structural": sum(r.verdict.structural is None for r in self.records),
            "cells": {f"comb={a} struct={b} markov={c} perfect={d}": k for (a, b, c, d), k in sorted(cells.items())},
            "seconds": round(self.seconds, 2),
        }

    def write(self, out_dir: str | os.PathLike) -> Path:
        """CSV summary plus one graph file per class; returns the CSV path."""
        out = Path(out_dir)
        gdir = out / "graphs"
        gdir.mkdir(parents=True, exist_ok=True)
        path = out / f"census_n{self.n}{'_connected' if self.connected_only else ''}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["class_id", "representative_file", "combinatorial", "structural_k", "perfectly_markovian"])
            for r in self.records:
                name = f"n{self.n}_{r.class_id:05d}.mag"
                (gdir / name).write_text(format_graph(r.graph))
                v = r.verdict
                w.writerow([r.class_id, f"graphs/{name}", v.combinatorial, v.structural if v.structural else "", v.perfectly_markovian])
        (out / f"census_n{self.n}_summary.json").write_text(json.dumps(self.counts(), indent=2) + "\n")
        return path


def _classify(args) -> Verdict:
    code, max_n = args
    g = graph_from_code(code)
    return verdict(g, max_n=max_n, all_triples_check=False, check_faithful="none")


def census_report(
    n: int,
    connected_only: bool = False,
    jobs: int = 1,
    resume: str | os.PathLike | None = None,
    log=None,
) -> CensusReport:
    """Classify the canonical representative of every class.

    Verdicts run in elementary mode (exact for semigraphoids) and take
    faithfulness of structural imsets from the theorem.
    """
    t0 = time.time()
    classes = enumerate_classes(n, connected_only, jobs, resume, log)
    codes = [graph_code(g) for g in classes.values()]
    args = [(c, max(n, 6)) for c in codes]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            verdicts = list(ex.map(_classify, args, chunksize=16))
    else:
        verdicts = [_classify(a) for a in args]
    rep = CensusReport(n, connected_only)
    for cid, ((key, g), v) in enumerate(zip(classes.items(), verdicts)):
        rep.records.append(CensusRecord(n, cid, key, g, v, g.skeleton_connected()))
    rep.seconds = time.time() - t0
    return rep


def same_class(g1: Admg, g2: Admg) -> bool:
    """Same unlabelled Markov-equivalence class (S(G) equal up to relabelling)."""
    if g1.n != g2.n:
        return False
    c = _canonizer(g1.n)
    return c.key(pset_bits(g1)) == c.key(pset_bits(g2))
