"""Markov property lists, graph models, equivalence and perfect-Markovianness verdicts.

Both models compared by ``verdict`` are semigraphoids: the m-separation model
of a MAG, and the model of a structural imset.  A semigraphoid is fixed by
its elementary statements, so comparing elementary statements decides
equality of the full models.  ``verdict`` still compares every disjoint
triple by default; ``all_triples_check=False`` restricts to elementary ones.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import semigraphoid
from .graph_core import (
    Admg,
    CITriple,
    all_triples,
    bits,
    canonical_order,
    m_connected,
    m_separated,
    popcount,
)
from .heads import enumerate_heads, is_simple, pset_bits
from .imset_algebra import (
    ModelOracle,
    is_combinatorial,
    is_structural,
    standard_imset,
    sum_semi_elementary,
)


@dataclass
class IndependenceList:
    """Ordered CI statements with a note on where each came from."""

    n: int
    triples: list = field(default_factory=list)
    provenance: list = field(default_factory=list)

    def add(self, t: CITriple, note: str = ""):
        self.triples.append(t)
        self.provenance.append(note)

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def as_set(self) -> set:
        return {t.canonical() for t in self.triples}

    def imset(self):
        return sum_semi_elementary(self.n, self.triples)

    def verify(self, g: Admg) -> "IndependenceList":
        for t, note in zip(self.triples, self.provenance):
            if not m_separated(g, t):
                raise AssertionError(f"{g.fmt_triple(t)} ({note}) does not hold in the graph")
        return self

    def format(self, g: Admg) -> str:
        return "\n".join(g.fmt_triple(t) for t in self.triples)


def _rank(order: Sequence[int], n: int) -> list[int]:
    rank = [0] * n
    for r, v in enumerate(order):
        rank[v] = r
    return rank


def prefix_masks(order: Sequence[int]) -> list[int]:
    """prefix[r] = first r vertices of the order."""
    out = [0]
    for v in order:
        out.append(out[-1] | 1 << v)
    return out


def ordered_local_markov(g: Admg, order: Sequence[int] | None = None) -> IndependenceList:
    """<v, A - mb(v,A) - v | mb(v,A)> for every ancestral A with v its last vertex."""
    order = canonical_order(g) if order is None else tuple(order)
    rank = _rank(order, g.n)
    out = IndependenceList(g.n)
    seen = set()
    for A in range(1, 1 << g.n):
        if g.ancestors(A) != A:
            continue
        v = max(bits(A), key=rank.__getitem__)
        mb = g.markov_blanket(v, A)
        rest = A & ~mb & ~(1 << v)
        if not rest:
            continue
        t = CITriple(1 << v, rest, mb)
        if t.canonical() in seen:
            continue
        seen.add(t.canonical())
        out.add(t, f"ancestral set {g.fmt(A)}")
    return out.verify(g)


def graph_model(g: Admg, scope: str = "elementary") -> set:
    if scope not in ("elementary", "all-triples"):
        raise ValueError(f"unknown scope {scope!r}")
    return {t for t in all_triples(g.n, scope == "elementary") if not m_connected(g, t.A, t.B, t.C)}


def markov_equivalent(g1: Admg, g2: Admg) -> bool:
    if g1.n != g2.n:
        raise ValueError("graphs on different vertex sets")
    return pset_bits(g1) == pset_bits(g2)


def simple_decomposition(g: Admg, order: Sequence[int] | None = None) -> IndependenceList:
    """Non-overlapping list of statements whose imsets sum to u_G, for simple MAGs.

    For vertex i with two-element heads {i,j_1} < ... < {i,j_k} (nested
    tails) and C_0 = pa(i), C_l = tail(i,j_l) + j_l, the list is
    <i, [i-1] - C_k | C_k> followed by <i, tail(i,j_{l+1}) - C_l | C_l> for
    l = k-1, ..., 0.
    """
    if not is_simple(g):
        raise ValueError("graph has a head with more than two vertices")
    order = canonical_order(g) if order is None else tuple(order)
    rank = _rank(order, g.n)
    prefix = prefix_masks(order)
    pairs: dict = {v: [] for v in range(g.n)}
    for rec in enumerate_heads(g, order):
        if popcount(rec.head) == 2:
            pairs[rec.max_vertex].append(rec)
    out = IndependenceList(g.n)
    for i in order:
        recs = sorted(pairs[i], key=lambda r: (popcount(r.tail), rank[max(bits(r.head & ~(1 << i)))]))
        chain = [g.pa[i]]
        tails = [g.pa[i]]
        for r in recs:
            j = r.head & ~(1 << i)
            if r.tail & tails[-1] != tails[-1]:
                raise AssertionError("tails of two-element heads are not nested")
            tails.append(r.tail)
            chain.append(r.tail | j)
        earlier = prefix[rank[i]]
        stmts = []
        top = earlier & ~chain[-1]
        stmts.append((top, chain[-1], "prefix"))
        for lvl in range(len(recs) - 1, -1, -1):
            stmts.append((tails[lvl + 1] & ~chain[lvl], chain[lvl], f"level {lvl}"))
        for B, C, note in stmts:
            if B:
                out.add(CITriple(1 << i, B, C), f"vertex {g.labels[i]}, {note}")
    out.verify(g)
    if out.imset() != standard_imset(g):
        raise AssertionError("simple-MAG list does not sum to the standard imset")
    return out


@dataclass
class Verdict:
    combinatorial: bool
    structural: int | None  # least k found with k*u_G combinatorial, None if not structural
    markovian: bool
    faithful: bool
    perfectly_markovian: bool
    faithful_basis: str = ""  # "theorem" or "checked"
    missing: list = field(default_factory=list)  # separations not represented (first few)
    lp_calls: int = 0

    def record(self) -> dict:
        return {
            "combinatorial": self.combinatorial,
            "structural": self.structural if self.structural is not None else False,
            "markovian": self.markovian,
            "faithful": self.faithful,
            "perfectly_markovian": self.perfectly_markovian,
        }


def verdict(
    g: Admg,
    max_n: int = 6,
    all_triples_check: bool = True,
    check_faithful: str = "spot",
    spot_checks: int = 20,
    seed: int = 0,
) -> Verdict:
    """Classify u_G: combinatorial, structural, Markovian, faithful.

    ``check_faithful`` is "spot" (LP-check a seeded sample of non-separated
    elementary statements), "all" or "none"; faithfulness of a structural
    u_G is otherwise recorded from the general theorem.
    """
    if g.n > max_n:
        raise ValueError(f"graph has {g.n} vertices; verdict bound is {max_n}")
    u = standard_imset(g)
    cert = is_combinatorial(u)
    combinatorial = cert is not None
    if cert is None:
        cert = is_structural(u)
    if cert is None:
        return Verdict(False, None, False, False, False, "undefined")
    oracle = ModelOracle(u, cert)
    separated, connected = [], []
    for t in all_triples(g.n, elementary=True):
        (connected if m_connected(g, t.A, t.B, t.C) else separated).append(t)
    missing = []
    if all_triples_check:
        for t in all_triples(g.n):
            if not m_connected(g, t.A, t.B, t.C) and not oracle.represents(t):
                missing.append(t)
    else:
        for t in separated:
            if not oracle.represents(t):
                missing.append(t)
    markovian = not missing
    faithful = True
    basis = "theorem"
    if check_faithful != "none":
        pool = connected
        if check_faithful == "spot" and len(pool) > spot_checks:
            pool = random.Random(seed).sample(pool, spot_checks)
        for t in pool:
            if oracle.represents(t):
                faithful = False
                break
        basis = "checked" if check_faithful == "all" else "theorem+spot"
    return Verdict(
        combinatorial,
        cert.k,
        markovian,
        faithful,
        markovian and faithful,
        basis,
        missing[:10],
        oracle.lp_calls,
    )


# ---------------------------------------------------------------------------
# closure under graphoid-type rules


def order_from_graph(g: Admg) -> list[int]:
    """Strict partial order from the directed edges: below[v] = an(v) - v."""
    return [g.an[v] & ~(1 << v) for v in range(g.n)]


def graphoid_closure(
    start: Iterable[CITriple],
    n: int,
    rules: Iterable[str] = (semigraphoid.SEMIGRAPHOID,),
    below: list[int] | None = None,
) -> set:
    """Every triple (canonical form) derivable from ``start`` under ``rules``.

    Works on elementary statements; the semigraphoid rules are always
    applied since they are what makes the elementary representation exact.
    """
    rules = set(rules) | {semigraphoid.SEMIGRAPHOID}
    seed = []
    for t in start:
        for e in t.elementary_parts():
            seed.append(((e.A).bit_length() - 1, (e.B).bit_length() - 1, e.C))
    closed = semigraphoid.close(seed, n, rules, below)
    if not closed:
        return set()
    out = set()
    for t in all_triples(n):
        if all(((e.A).bit_length() - 1, (e.B).bit_length() - 1, e.C) in closed for e in t.elementary_parts()):
            out.add(t)
    return out
