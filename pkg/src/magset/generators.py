"""Seeded random MAGs and small-graph enumerators used by tests and scripts."""

from __future__ import annotations

import itertools
import random
from typing import Iterator

from .graph_core import Admg, bits, is_ancestral, is_maximal, m_connected


def close_to_mag(g: Admg) -> Admg:
    """Add edges between inseparable nonadjacent pairs until the graph is maximal.

    Pairs already related by ancestry get a directed edge (which leaves the
    ancestor relation unchanged), other pairs a bidirected one.
    """
    directed = set(g.directed)
    bidirected = set(g.bidirected)
    h = g
    while True:
        added = False
        for a in range(h.n):
            for b in range(a + 1, h.n):
                if h.adjacent(a, b):
                    continue
                ab = 1 << a | 1 << b
                if not m_connected(h, 1 << a, 1 << b, h.ancestors(ab) & ~ab):
                    continue
                if h.an[b] >> a & 1:
                    directed.add((a, b))
                elif h.an[a] >> b & 1:
                    directed.add((b, a))
                else:
                    bidirected.add((a, b))
                added = True
        if not added:
            return h
        h = Admg(g.n, directed, bidirected, g.labels)


def random_mag(
    rng: random.Random,
    n: int,
    p_edge: float = 0.5,
    p_bidirected: float = 0.4,
    shuffle: bool = False,
) -> Admg:
    """A random MAG: ancestral by construction, then closed to maximality.

    Vertices are topologically ordered by id unless ``shuffle`` relabels them.
    """
    while True:
        pa = [0] * n
        an = [1 << v for v in range(n)]
        directed, bidirected = [], []
        for j in range(n):
            want_bi = []
            for i in range(j):
                if rng.random() >= p_edge:
                    continue
                if rng.random() < p_bidirected:
                    want_bi.append(i)
                else:
                    directed.append((i, j))
                    pa[j] |= 1 << i
            for i in bits(pa[j]):
                an[j] |= an[i]
            for i in want_bi:
                if an[j] >> i & 1:
                    directed.append((i, j))  # i is already an ancestor: i <-> j would break ancestrality
                    pa[j] |= 1 << i
                else:
                    bidirected.append((i, j))
        g = close_to_mag(Admg(n, directed, bidirected))
        if is_ancestral(g) and is_maximal(g):
            break
    if shuffle:
        perm = list(range(n))
        rng.shuffle(perm)
        g = g.relabel(perm)
        g = Admg(n, g.directed, g.bidirected)  # labels follow the new ids
    return g


def random_simple_mag(rng: random.Random, n: int, **kw) -> Admg:
    """Random MAG whose heads all have at most two vertices."""
    from .heads import is_simple

    while True:
        g = random_mag(rng, n, **kw)
        if is_simple(g):
            return g


def random_dag(rng: random.Random, n: int, p_edge: float = 0.5) -> Admg:
    return Admg(n, [(i, j) for j in range(n) for i in range(j) if rng.random() < p_edge])


def random_bidirected(rng: random.Random, n: int, p_edge: float = 0.5) -> Admg:
    return Admg(n, (), [(i, j) for j in range(n) for i in range(j) if rng.random() < p_edge])


def all_topological_mags(n: int) -> Iterator[Admg]:
    """Every MAG whose directed edges point from lower to higher id.

    Each pair i<j is absent, i -> j, or i <-> j; prefixes that are not MAGs
    are pruned, which is sound because induced subgraphs of MAGs are MAGs.
    """
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

    yield from rec(0, [], [])


def all_bidirected(n: int) -> Iterator[Admg]:
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Admg(n, (), [p for k, p in enumerate(pairs) if mask >> k & 1])
