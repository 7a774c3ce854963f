"""Bidirected graphs: rooted block partitions on the dual graph, the induced
non-overlapping decomposition of u_G, and forbidden induced dual subgraphs.

The dual of a bidirected graph joins exactly the nonadjacent pairs.  For a
vertex v that is last in a prefix S, its dual neighbours A inside S are
grouped into blocks A^1..A^m whose members share the same dual neighbours
N^j outside {v} + A (within S).  The conditions checked per (S, v) are

    (i)   equal outside neighbourhood within a block
    (ii)  N^1 <= N^2 <= ... <= N^m
    (iii) two blocks are either not joined at all or completely joined
    (iv)  the block sequence is rooted (recursive, see ``root_tree``)

and the resulting statement per block is <v, A^j | H^j L^j N^j T^j>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from .graph_core import Admg, CITriple, GraphError, bits, dual_graph, popcount
from .heads import constrained_sets, pset_bits
from .imset_algebra import standard_imset
from .markov_props import IndependenceList


def _require_bidirected(g: Admg):
    if g.directed:
        raise GraphError("graph has directed edges; expected a purely bidirected graph")


# ---------------------------------------------------------------------------
# block partitions


@dataclass
class RootTree:
    """Block ``root`` is the root of the consecutive range [lo, hi]."""

    root: int
    lo: int
    hi: int
    high: "RootTree | None" = None  # blocks root+1..hi
    low: "RootTree | None" = None  # blocks lo..root-1

    def nodes(self) -> Iterator["RootTree"]:
        yield self
        if self.high is not None:
            yield from self.high.nodes()
        if self.low is not None:
            yield from self.low.nodes()

    def format(self) -> str:
        parts = [str(self.root + 1)]
        if self.high is not None or self.low is not None:
            hi = self.high.format() if self.high is not None else "-"
            lo = self.low.format() if self.low is not None else "-"
            parts.append(f"(H:{hi} L:{lo})")
        return "".join(parts)


@dataclass
class RootedPartition:
    v: int
    within: int  # the prefix S the partition lives in
    blocks: list  # vertex masks, ascending by outside-neighbour set
    outside: list  # N^j per block
    joined: list  # joined[j][k]: blocks j and k completely joined in the dual
    tree: RootTree | None = None

    @property
    def m(self) -> int:
        return len(self.blocks)

    def union(self, lo: int, hi: int) -> int:
        out = 0
        for j in range(lo, hi + 1):
            out |= self.blocks[j]
        return out

    def format(self, g: Admg) -> str:
        if not self.blocks:
            return f"{g.labels[self.v]}: no dual neighbours"
        bl = " ".join(f"A{j + 1}={g.fmt(B)}/N={g.fmt(N)}" for j, (B, N) in enumerate(zip(self.blocks, self.outside)))
        tree = self.tree.format() if self.tree is not None else "not rooted"
        return f"{g.labels[self.v]}: {bl} root {tree}"


def _ordered_set_partitions(items: list) -> Iterator[list]:
    """Every sequence of nonempty disjoint blocks covering ``items``."""
    if not items:
        yield []
        return
    n = len(items)
    for labels in itertools.product(range(n), repeat=n):
        used = sorted(set(labels))
        if used != list(range(len(used))):
            continue
        yield [[x for x, l in zip(items, labels) if l == b] for b in used]


def _joined_state(dual: list[int], X: int, Y: int) -> int | None:
    """1 if completely joined, 0 if no dual edge, None if partially joined."""
    edges = sum(popcount(dual[x] & Y) for x in bits(X))
    if edges == 0:
        return 0
    if edges == popcount(X) * popcount(Y):
        return 1
    return None


def root_tree(joined: list, lo: int = 0, hi: int | None = None, unique: bool = True) -> RootTree | None:
    """Root decomposition of blocks lo..hi, or None if they are not rooted.

    Block j roots [lo, hi] when j and every block above it are joined to
    every block below it, no block above j is joined to j, and both the
    blocks above and below are rooted themselves.  The root is unique; with
    ``unique`` that is asserted.
    """
    m = len(joined)
    if hi is None:
        hi = m - 1

    @lru_cache(maxsize=None)
    def rec(lo: int, hi: int):
        if lo > hi:
            return ()
        found = []
        for j in range(lo, hi + 1):
            if any(not joined[j][l] for l in range(lo, j)):
                continue
            if any(joined[h][j] or any(not joined[h][l] for l in range(lo, j)) for h in range(j + 1, hi + 1)):
                continue
            high = rec(j + 1, hi)
            low = rec(lo, j - 1)
            if high is None or low is None:
                continue
            found.append(RootTree(j, lo, hi, high or None, low or None))
            if not unique:
                break
        if unique and len(found) > 1:
            raise AssertionError(f"blocks {lo}..{hi} have {len(found)} roots")
        return found[0] if found else None

    if lo > hi:
        return None
    return rec(lo, hi)


def is_rooted(joined: list) -> bool:
    return not joined or root_tree(joined) is not None


def block_partitions(dual: list[int], v: int, within: int, split: bool = True) -> Iterator[RootedPartition]:
    """Block sequences for v in the dual restricted to ``within`` meeting (i)-(iii).

    Blocks group dual neighbours by their outside neighbourhood.  With
    ``split`` every ordered refinement of those groups is also produced
    (the conditions only ask for equal outside neighbourhoods per block, and
    some graphs are rooted only through a refinement).  The coarsest
    grouping comes first.
    """
    A = dual[v] & within
    groups: dict = {}
    for w in bits(A):
        N = dual[w] & within & ~A & ~(1 << v)
        groups[N] = groups.get(N, 0) | 1 << w
    keys = sorted(groups, key=lambda N: (popcount(N), N))
    for a, b in zip(keys, keys[1:]):
        if a & b != a:
            return  # (ii) fails for every partition
    if split:
        options = [list(_ordered_set_partitions(list(bits(groups[N])))) for N in keys]
    else:
        options = [[[list(bits(groups[N]))]] for N in keys]
    for choice in itertools.product(*options):
        blocks, outside = [], []
        for N, part in zip(keys, choice):
            for blk in part:
                blocks.append(sum(1 << x for x in blk))
                outside.append(N)
        m = len(blocks)
        joined = [[False] * m for _ in range(m)]
        ok = True
        for j in range(m):
            for k in range(j + 1, m):
                s = _joined_state(dual, blocks[j], blocks[k])
                if s is None:
                    ok = False
                    break
                joined[j][k] = joined[k][j] = bool(s)
            if not ok:
                break
        if ok:
            yield RootedPartition(v, within, blocks, outside, joined)


def block_partition(dual: list[int], v: int, within: int, split: bool = True) -> RootedPartition | None:
    """First block sequence for v satisfying (i)-(iv), with its root tree attached."""
    for p in block_partitions(dual, v, within, split):
        if not p.blocks:
            return p
        t = root_tree(p.joined)
        if t is not None:
            p.tree = t
            return p
    return None


def partition_failure(dual: list[int], v: int, within: int) -> str:
    """Name the first condition the coarsest block grouping violates, or ''."""
    A = dual[v] & within
    groups: dict = {}
    for w in bits(A):
        N = dual[w] & within & ~A & ~(1 << v)
        groups[N] = groups.get(N, 0) | 1 << w
    keys = sorted(groups, key=lambda N: (popcount(N), N))
    if any(a & b != a for a, b in zip(keys, keys[1:])):
        return "outside neighbourhoods not nested"
    blocks = [groups[N] for N in keys]
    for j, k in itertools.combinations(range(len(blocks)), 2):
        if _joined_state(dual, blocks[j], blocks[k]) is None:
            return "two blocks partially joined"
    p = block_partition(dual, v, within)
    if p is None:
        return "blocks not rooted"
    return ""


# ---------------------------------------------------------------------------
# order search


@dataclass
class RootedWitness:
    order: tuple
    partitions: list  # RootedPartition per position of the order


def rooted_condition(g: Admg, split: bool = True) -> RootedWitness | None:
    """A vertex order under which every prefix-last vertex has a rooted partition.

    Whether v may be last in prefix S depends only on (S, v), so a dynamic
    programme over subsets decides existence exactly.  Among feasible last
    vertices the smallest id is kept, which makes the witness deterministic.
    """
    _require_bidirected(g)
    dual = dual_graph(g)
    n = g.n
    full = (1 << n) - 1
    ok = [False] * (1 << n)
    last = [-1] * (1 << n)
    part: dict = {}
    ok[0] = True
    for S in range(1, 1 << n):
        if popcount(S) > 1 and not any(ok[S & ~(1 << v)] for v in bits(S)):
            continue
        for v in bits(S):
            if not ok[S & ~(1 << v)]:
                continue
            p = block_partition(dual, v, S, split)
            if p is not None:
                ok[S] = True
                last[S] = v
                part[S] = p
                break
    if not ok[full]:
        return None
    order, parts = [], []
    S = full
    while S:
        v = last[S]
        order.append(v)
        parts.append(part[S])
        S &= ~(1 << v)
    return RootedWitness(tuple(reversed(order)), list(reversed(parts)))


def check_order(g: Admg, order: Sequence[int], split: bool = True) -> RootedWitness | None:
    """Witness for a fixed order, or None if some prefix fails."""
    _require_bidirected(g)
    dual = dual_graph(g)
    S = 0
    parts = []
    for v in order:
        S |= 1 << v
        p = block_partition(dual, v, S, split)
        if p is None:
            return None
        parts.append(p)
    return RootedWitness(tuple(order), parts)


# ---------------------------------------------------------------------------
# decomposition


def _statements(p: RootedPartition, dual: list[int]) -> list[tuple[CITriple, str]]:
    out = []
    if not p.blocks:
        return out
    for node in p.tree.nodes():
        j = node.root
        H = p.union(j + 1, node.hi)
        L = p.union(node.lo, j - 1)
        T = 0
        for k in range(0, node.lo):
            if p.joined[j][k]:
                T |= p.blocks[k]
        C = H | L | p.outside[j] | T
        out.append((CITriple(1 << p.v, p.blocks[j], C), f"vertex block {j + 1}"))
    return out


def rooted_decomposition(g: Admg, witness: RootedWitness | None = None, check: bool = True) -> IndependenceList:
    """Statements <v, A^j | H^j L^j N^j T^j> for every vertex and block.

    With ``check`` the constrained sets are asserted pairwise disjoint, to
    cover exactly the disconnected sets, and the semi-elementary sum is
    asserted equal to u_G.
    """
    _require_bidirected(g)
    if witness is None:
        witness = rooted_condition(g)
        if witness is None:
            raise ValueError("graph has no rooted vertex order")
    dual = dual_graph(g)
    out = IndependenceList(g.n)
    for v, p in zip(witness.order, witness.partitions):
        for t, note in _statements(p, dual):
            out.add(t, f"{g.labels[v]} {note}")
    if check:
        owner: dict = {}
        for k, t in enumerate(out.triples):
            for S in constrained_sets(t):
                if S in owner:
                    raise AssertionError(
                        f"statements {g.fmt_triple(out.triples[owner[S]])} and {g.fmt_triple(t)} both constrain {g.fmt(S)}"
                    )
                owner[S] = k
        ps = pset_bits(g)
        disconnected = {S for S in range(1, 1 << g.n) if not ps >> S & 1}
        if set(owner) != disconnected:
            raise AssertionError("constrained sets do not match the disconnected sets")
        out.verify(g)
        if out.imset() != standard_imset(g):
            raise AssertionError("rooted decomposition does not sum to the standard imset")
    return out


# ---------------------------------------------------------------------------
# forbidden induced subgraphs of the dual


def _edges(text: str) -> tuple:
    return tuple(tuple(int(x) - 1 for x in e.split("-")) for e in text.split())


_BASE = "3-2 2-5 5-4 4-3 3-1 1-2"

FORBIDDEN = {
    "a": _edges("1-2 2-3 1-3 1-4 4-2 2-6 6-3 3-5 5-1"),
    "c": _edges("1-3 3-5 5-1 1-4 4-2 2-6 6-4 3-6 2-5"),
    "d": _edges(_BASE + " 2-6 6-5"),
    "e": _edges(_BASE + " 4-6 6-5"),
    "f": _edges("3-2 2-5 5-4 4-3 3-1 1-6 6-3"),
    "g": _edges(_BASE + " 5-6"),
    "h": _edges(_BASE + " 1-6"),
    "i": _edges(_BASE + " 2-6 6-3"),
    "j": _edges("3-2 2-5 5-4 4-3 3-6 6-5 2-1 1-4"),
}
# (b) is the family of chordless cycles of length >= 5, handled separately.

# complement of the 6-chain 1-2-3-4-5-6
FORBIDDEN["chain6"] = tuple(
    p for p in itertools.combinations(range(6), 2) if p not in {(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)}
)

# Patterns whose hit is known to force an imperfect u_G; with (b) this is the
# full list of minimal imperfect duals on at most six vertices.  The drawn
# patterns (f)-(j) give perfectly Markovian graphs when read as duals and are
# only scanned on request.
VERIFIED_PATTERNS = ("a", "b", "c", "chain6", "d", "e")
DRAWN_ONLY = ("f", "g", "h", "i", "j")


def _pattern_adj(edges: tuple) -> list[int]:
    k = 1 + max(max(e) for e in edges)
    adj = [0] * k
    for a, b in edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    return adj


@dataclass(frozen=True)
class ForbiddenHit:
    pattern: str
    vertices: tuple  # graph vertex matched to pattern vertex 1, 2, ...

    def format(self, g: Admg) -> str:
        name = f"({self.pattern})" if self.pattern != "b" else f"(b) k={len(self.vertices)}"
        return f"{name} on {','.join(g.labels[v] for v in self.vertices)}"


def induced_embeddings(adj: list[int], pat: list[int]) -> Iterator[tuple]:
    """Injective maps of pattern vertices into ``adj`` preserving edges and non-edges."""
    n, k = len(adj), len(pat)
    deg = [popcount(a) for a in adj]
    pdeg = [popcount(a) for a in pat]
    # place pattern vertices in BFS-ish order: most constrained first
    seq = sorted(range(k), key=lambda x: -pdeg[x])
    img = [-1] * k

    def rec(pos: int, used: int):
        if pos == k:
            yield tuple(img)
            return
        x = seq[pos]
        for y in range(n):
            if used >> y & 1 or deg[y] < pdeg[x]:
                continue
            good = True
            for q in seq[:pos]:
                if (pat[x] >> q & 1) != (adj[y] >> img[q] & 1):
                    good = False
                    break
            if good:
                img[x] = y
                yield from rec(pos + 1, used | 1 << y)
        img[x] = -1

    yield from rec(0, 0)


def chordless_cycles(adj: list[int], min_len: int = 5) -> list[tuple]:
    """Vertex sequences of induced cycles of length >= min_len, one per vertex set."""
    n = len(adj)
    out = []
    for W in range(1 << n):
        if popcount(W) < min_len:
            continue
        if any(popcount(adj[v] & W) != 2 for v in bits(W)):
            continue
        start = (W & -W).bit_length() - 1
        cyc = [start]
        prev, cur = -1, start
        while True:
            nxt = [u for u in bits(adj[cur] & W) if u != prev]
            u = min(nxt) if prev == -1 else nxt[0]
            if u == start:
                break
            cyc.append(u)
            prev, cur = cur, u
        if len(cyc) == popcount(W):
            out.append(tuple(cyc))
    return out


def forbidden_scan(g: Admg, patterns: Sequence[str] | None = None) -> list[ForbiddenHit]:
    """Induced copies of forbidden duals in dual(g), one hit per (pattern, vertex set).

    ``patterns`` defaults to VERIFIED_PATTERNS; pass "all" to include the
    drawn-only ones.
    """
    _require_bidirected(g)
    dual = dual_graph(g)
    if patterns is None:
        names = list(VERIFIED_PATTERNS)
    elif patterns == "all":
        names = list(VERIFIED_PATTERNS) + list(DRAWN_ONLY)
    else:
        names = list(patterns)
    unknown = set(names) - set(FORBIDDEN) - {"b"}
    if unknown:
        raise ValueError(f"unknown patterns {sorted(unknown)}")
    hits = []
    for name in names:
        if name == "b":
            hits.extend(ForbiddenHit("b", c) for c in chordless_cycles(dual, 5))
            continue
        pat = _pattern_adj(FORBIDDEN[name])
        if len(pat) > g.n:
            continue
        seen = set()
        for emb in induced_embeddings(dual, pat):
            key = sum(1 << v for v in emb)
            if key not in seen:
                seen.add(key)
                hits.append(ForbiddenHit(name, emb))
    return hits


# ---------------------------------------------------------------------------
# unlabelled bidirected graphs


def bidirected_classes(n: int) -> list[Admg]:
    """One bidirected graph per isomorphism class on n vertices.

    Edge sets are visited in increasing bit order; each new one marks its
    whole orbit under vertex permutations as seen, so it is the least member
    of its class.
    """
    pairs = list(itertools.combinations(range(n), 2))
    index = {p: k for k, p in enumerate(pairs)}
    perms = list(itertools.permutations(range(n)))
    seen = set()
    out = []
    for mask in range(1 << len(pairs)):
        if mask in seen:
            continue
        edges = [p for k, p in enumerate(pairs) if mask >> k & 1]
        for perm in perms:
            img = 0
            for a, b in edges:
                x, y = perm[a], perm[b]
                img |= 1 << index[(x, y) if x < y else (y, x)]
            seen.add(img)
        out.append(Admg(n, (), edges))
    return out


@dataclass
class BidirectedReport:
    rooted: bool
    witness_order: tuple | None
    forbidden_hits: list = field(default_factory=list)

    def record(self, g: Admg) -> dict:
        return {
            "rooted": self.rooted,
            "witness_order": [g.labels[v] for v in self.witness_order] if self.witness_order else None,
            "forbidden_hits": [h.format(g) for h in self.forbidden_hits],
        }


def analyse(g: Admg, order: Sequence[int] | None = None) -> BidirectedReport:
    """Rooted condition (searched, or for a fixed order) and forbidden-pattern hits."""
    w = rooted_condition(g) if order is None else check_order(g, order)
    return BidirectedReport(w is not None, w.order if w else None, forbidden_scan(g))
