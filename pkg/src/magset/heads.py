"""Heads, tails and the parametrizing sets S(G) of a MAG."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .graph_core import Admg, CITriple, bits, canonical_order, m_connected, popcount, submasks


@dataclass(frozen=True)
class HeadRecord:
    head: int
    tail: int
    max_vertex: int  # last vertex of the head under the topological order used

    @property
    def ht(self) -> int:
        return self.head | self.tail


@dataclass(frozen=True)
class ParametrizingSets:
    """S(G) in increasing mask order with the unique generating head of each set."""

    family: tuple[int, ...]
    head_of: dict

    def __contains__(self, S: int) -> bool:
        return S in self.head_of

    def __len__(self):
        return len(self.family)

    def __iter__(self):
        return iter(self.family)

    def bitfamily(self) -> int:
        """S(G) packed as an integer with bit S set for each member."""
        out = 0
        for S in self.family:
            out |= 1 << S
        return out


def barren(g: Admg, W: int) -> int:
    return g.barren(W)


def is_head(g: Admg, H: int) -> bool:
    if not H or g.barren(H) != H:
        return False
    v = (H & -H).bit_length() - 1
    return g.district(v, g.ancestors(H)) & H == H


def tail_of(g: Admg, H: int) -> int:
    """(dis_{an(H)}(H) - H) | pa(dis_{an(H)}(H))."""
    anH = g.ancestors(H)
    v = (H & -H).bit_length() - 1
    D = g.district(v, anH)
    return (D & ~H) | g.parents(D)


def _rank(order: Sequence[int] | None, n: int) -> list[int]:
    rank = [0] * n
    for r, v in enumerate(order if order is not None else range(n)):
        rank[v] = r
    return rank


def max_vertex(H: int, rank: list[int]) -> int:
    return max(bits(H), key=rank.__getitem__)


def enumerate_heads(g: Admg, order: Sequence[int] | None = None) -> list[HeadRecord]:
    """All heads in increasing mask order, exhaustive over nonempty subsets."""
    order = canonical_order(g) if order is None else order
    rank = _rank(order, g.n)
    out = []
    for H in range(1, 1 << g.n):
        if is_head(g, H):
            out.append(HeadRecord(H, tail_of(g, H), max_vertex(H, rank)))
    return out


def parametrizing_sets(g: Admg, heads: list[HeadRecord] | None = None) -> ParametrizingSets:
    heads = enumerate_heads(g) if heads is None else heads
    head_of = {}
    for rec in heads:
        for A in submasks(rec.tail):
            S = rec.head | A
            if S in head_of:
                raise AssertionError(
                    f"set {g.fmt(S)} generated by heads {g.fmt(head_of[S])} and {g.fmt(rec.head)}"
                )
            head_of[S] = rec.head
    return ParametrizingSets(tuple(sorted(head_of)), head_of)


def pset_bits(g: Admg) -> int:
    """S(G) packed into an integer (bit S set iff S in S(G)); no bookkeeping."""
    out = 0
    an, de = g.an, g.de
    for H in range(1, 1 << g.n):
        anH = 0
        barren = True
        for v in bits(H):
            if de[v] & H != 1 << v:
                barren = False
                break
            anH |= an[v]
        if not barren:
            continue
        v = (H & -H).bit_length() - 1
        D = g.district(v, anH)
        if D & H != H:
            continue
        T = (D & ~H) | g.parents(D)
        for A in submasks(T):
            out |= 1 << (H | A)
    return out


def markov_blanket(g: Admg, v: int, A: int) -> int:
    if g.ancestors(A) != A:
        raise ValueError("A must be an ancestral set")
    if not A >> v & 1 or g.ch[v] & A:
        raise ValueError("v must be a childless member of A")
    return g.markov_blanket(v, A)


def constrained_sets(t: CITriple) -> list[int]:
    """{A'B'C' : 0 < A' <= A, 0 < B' <= B, C' <= C}, sorted."""
    out = set()
    for a in submasks(t.A):
        if not a:
            continue
        for b in submasks(t.B):
            if not b:
                continue
            for c in submasks(t.C):
                out.add(a | b | c)
    return sorted(out)


def missing_set_witness(g: Admg, S: int, pset: ParametrizingSets | None = None) -> CITriple | None:
    """An elementary m-separation <a,b|C> with a,b in S and S <= C+ab, or None.

    Separators are tried by increasing number of vertices outside S.
    """
    if popcount(S) < 2:
        return None
    outside = g.full & ~S
    extras = sorted(submasks(outside), key=lambda m: (popcount(m), m))
    pairs = list(itertools.combinations(bits(S), 2))
    for E in extras:
        for a, b in pairs:
            ab = 1 << a | 1 << b
            C = (S & ~ab) | E
            if not m_connected(g, 1 << a, 1 << b, C):
                return CITriple(1 << a, 1 << b, C)
    return None


def is_simple(g: Admg) -> bool:
    return all(popcount(rec.head) <= 2 for rec in enumerate_heads(g))
