"""Power DAGs on heads, marginalization sets, and the signed decomposition of u_G.

Everything is relative to a topological order; "i" is the anchor vertex and
the heads of its component are those whose last vertex (under the order) is i.
For heads H, H' we write H ->K H' when marginalizing K (a nonempty subset of
H - i) from G_an(H) leaves H' as the barren part of the district of i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .graph_core import Admg, CITriple, bits, canonical_order, induced_subgraph, is_mag, popcount, submasks
from .heads import HeadRecord, enumerate_heads
from .imset_algebra import Imset, standard_imset, sum_semi_elementary
from .markov_props import IndependenceList, _rank, prefix_masks


def marginalize_step(g: Admg, H: int, K: int, i: int) -> int:
    """The head H' with H ->K H'."""
    if not K or K & ~H or K >> i & 1:
        raise ValueError("K must be a nonempty subset of H - {i}")
    B = g.ancestors(H) & ~K
    return g.barren(g.district(i, B))


def ceiling(g: Admg, W: int) -> int:
    """Vertices of W with no strict ancestor in W."""
    return sum(1 << w for w in bits(W) if g.an[w] & W == 1 << w)


def hamlet(g: Admg, H: int, within: int | None = None) -> int:
    """sib(D) - D for D the district of H in G_an(H); siblings restricted to ``within``."""
    v = (H & -H).bit_length() - 1
    D = g.district(v, g.ancestors(H))
    within = g.full if within is None else within
    return g.siblings(D) & ~D & within


def marginalization_sets(g: Admg, H: int, i: int) -> dict[int, list[int]]:
    """H' -> every K with H ->K H' (brute force over subsets of H - i)."""
    out: dict[int, list[int]] = {}
    rest = H & ~(1 << i)
    for K in submasks(rest):
        if K:
            out.setdefault(marginalize_step(g, H, K, i), []).append(K)
    return out


def minimal_marginalization_set(g: Admg, H: int, H2: int, i: int, within: int | None = None) -> int:
    """K_min for H -> H2: equals H & ceil(ham(H2)); raises if H is not a parent of H2."""
    ks = marginalization_sets(g, H, i).get(H2)
    if not ks:
        raise ValueError("not a parent head")
    kmin = H & ceiling(g, hamlet(g, H2, within))
    if kmin not in ks or any(K & kmin != kmin for K in ks):
        raise AssertionError("minimal marginalization set differs from H & ceil(ham(H'))")
    return kmin


def iter_marginalization_sets(g: Admg, H: int, H2: int, kmin: int) -> Iterator[int]:
    """All valid K for H -> H2: K_min together with any subset of H - (H2 | K_min)."""
    for B in submasks(H & ~(H2 | kmin)):
        yield kmin | B


def _leq(g: Admg, H1: int, H2: int) -> bool:
    """H1 <= H2 in the head partial order (same last vertex assumed)."""
    a1 = g.ancestors(H1)
    return a1 & g.ancestors(H2) == a1


def maximal_parent_head(g: Admg, parents: Sequence[int]) -> int:
    """The maximum of a set of parent heads of one head (sharing the marginalization vertex)."""
    best = None
    for H in parents:
        if best is None or _leq(g, best, H):
            best = H
    if any(not _leq(g, H, best) for H in parents):
        raise AssertionError("parent heads have no maximum")
    return best


@dataclass
class MarginalizationEdge:
    source: int
    target: int
    kmin: int
    ks: list  # every valid K, minimal first
    triple: CITriple | None  # independence for K_min (None if its B side is empty)


@dataclass
class PowerDagComponent:
    i: int
    nodes: list  # HeadRecords, maximal head first
    edges: list = field(default_factory=list)
    mode: str = "complete"

    def in_edges(self, H: int) -> list:
        return [e for e in self.edges if e.target == H]

    def maximal(self) -> HeadRecord:
        return self.nodes[0]

    def to_dot(self, g: Admg) -> str:
        def name(H):
            return ",".join(g.names(H))

        lines = [f"digraph power_dag_{g.labels[self.i]} {{"]
        for rec in self.nodes:
            lines.append(f'  "{name(rec.head)}";')
        for e in self.edges:
            lab = "\\n".join(name(K) for K in e.ks)
            lines.append(f'  "{name(e.source)}" -> "{name(e.target)}" [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines)


def _edge_triple(i: int, src: HeadRecord, dst: HeadRecord, K: int) -> CITriple | None:
    B = src.ht & ~(dst.ht | K)
    C = dst.ht & ~(1 << i)
    if not B:
        return None
    return CITriple(1 << i, B, C)


def heads_of(g: Admg, i: int, order: Sequence[int] | None = None, heads: list | None = None) -> list[HeadRecord]:
    """Heads with last vertex i, the maximal one first, then by decreasing |an(H)|."""
    heads = enumerate_heads(g, order) if heads is None else heads
    mine = [h for h in heads if h.max_vertex == i]
    mine.sort(key=lambda h: (-popcount(g.ancestors(h.head)), h.head))
    top = mine[0]
    if any(not _leq(g, h.head, top.head) for h in mine):
        raise AssertionError("no maximal head")
    return mine


def complete_power_dag(g: Admg, i: int, order: Sequence[int] | None = None, heads=None) -> PowerDagComponent:
    order = canonical_order(g) if order is None else tuple(order)
    rank = _rank(order, g.n)
    prefix = prefix_masks(order)[rank[i] + 1]
    nodes = heads_of(g, i, order, heads)
    rec = {h.head: h for h in nodes}
    comp = PowerDagComponent(i, nodes)
    for h in nodes:
        for H2, ks in sorted(marginalization_sets(g, h.head, i).items()):
            if H2 not in rec:
                raise AssertionError("marginalization left the component")
            kmin = minimal_marginalization_set(g, h.head, H2, i, prefix)
            ks = sorted(ks, key=lambda K: (popcount(K), sorted(rank[v] for v in bits(K))))
            if sorted(ks) != sorted(iter_marginalization_sets(g, h.head, H2, kmin)):
                raise AssertionError("valid marginalization sets are not K_min plus free vertices")
            comp.edges.append(MarginalizationEdge(h.head, H2, kmin, ks, _edge_triple(i, h, rec[H2], kmin)))
    return comp


def refined_power_dag(g: Admg, i: int, order: Sequence[int] | None = None, heads=None) -> PowerDagComponent:
    """One in-edge per non-maximal head H': k = min ceil(ham(H')), source = maximal parent via k."""
    order = canonical_order(g) if order is None else tuple(order)
    rank = _rank(order, g.n)
    prefix = prefix_masks(order)[rank[i] + 1]
    nodes = heads_of(g, i, order, heads)
    rec = {h.head: h for h in nodes}
    comp = PowerDagComponent(i, nodes, mode="refined")
    for h2 in nodes[1:]:
        cands = ceiling(g, hamlet(g, h2.head, prefix))
        k = min(bits(cands), key=rank.__getitem__)
        parents = [h.head for h in nodes if h.head >> k & 1 and k != i and marginalize_step(g, h.head, 1 << k, i) == h2.head]
        if not parents:
            raise AssertionError(f"head {g.fmt(h2.head)} has no parent through {g.labels[k]}")
        src = maximal_parent_head(g, parents)
        comp.edges.append(MarginalizationEdge(src, h2.head, 1 << k, [1 << k], _edge_triple(i, rec[src], h2, 1 << k)))
    return comp


WALK_RULES = ("shorter", "literal", "not-longer")


def refined_power_dag_walk(
    g: Admg, i: int, order: Sequence[int] | None = None, heads=None, rule: str = "shorter"
) -> PowerDagComponent:
    """Downward walk over heads: marginalize only vertices below M(H), keep shortest in-edges.

    Heads are visited by decreasing |an(H)|.  ``rule`` says when an existing
    edge into H' is kept (the step H ->k H' skipped):

        "shorter"     SD(H') <= SD(H) + 1  (replace only on a strictly shorter path)
        "literal"     SD(H') <  SD(H)
        "not-longer"  SD(H') <= SD(H)
    """
    if rule not in WALK_RULES:
        raise ValueError(f"unknown rule {rule!r}")
    order = canonical_order(g) if order is None else tuple(order)
    rank = _rank(order, g.n)
    nodes = heads_of(g, i, order, heads)
    rec = {h.head: h for h in nodes}
    inf = float("inf")
    M = {h.head: None for h in nodes}
    SD = {h.head: inf for h in nodes}
    top = nodes[0].head
    M[top], SD[top] = i, 0
    into: dict[int, tuple[int, int]] = {}
    for h in nodes:
        H = h.head
        if SD[H] == inf:
            continue
        for k in sorted(bits(H & ~(1 << i)), key=rank.__getitem__):
            if rank[k] >= rank[M[H]]:
                continue
            H2 = marginalize_step(g, H, 1 << k, i)
            bound = {"shorter": SD[H] + 1, "literal": SD[H] - 1, "not-longer": SD[H]}[rule]
            if SD[H2] <= bound:
                continue
            into[H2] = (H, k)
            SD[H2] = SD[H] + 1
            M[H2] = k
    comp = PowerDagComponent(i, nodes, mode="refined")
    for h2 in nodes[1:]:
        if h2.head not in into:
            raise AssertionError(f"head {g.fmt(h2.head)} never reached")
        H, k = into[h2.head]
        comp.edges.append(MarginalizationEdge(H, h2.head, 1 << k, [1 << k], _edge_triple(i, rec[H], h2, 1 << k)))
    return comp


def edge_set(comp: PowerDagComponent) -> set:
    return {(e.source, e.target, e.kmin) for e in comp.edges}


def blanket_triple(g: Admg, i: int, order: Sequence[int]) -> CITriple | None:
    """<i, [i-1] - mb(i,[i]) | mb(i,[i])>, None when the first set is empty."""
    rank = _rank(order, g.n)
    upto = prefix_masks(order)[rank[i] + 1]
    mb = g.markov_blanket(i, upto)
    rest = upto & ~mb & ~(1 << i)
    return CITriple(1 << i, rest, mb) if rest else None


def markov_list(g: Admg, mode: str = "refined", order: Sequence[int] | None = None) -> IndependenceList:
    """Blanket statement per vertex plus one statement per single-vertex marginalization
    (complete) or per non-maximal head (refined).  Statements with an empty side are omitted."""
    if mode not in ("complete", "refined"):
        raise ValueError(f"unknown mode {mode!r}")
    order = canonical_order(g) if order is None else tuple(order)
    heads = enumerate_heads(g, order)
    out = IndependenceList(g.n)
    for i in order:
        t = blanket_triple(g, i, order)
        if t is not None:
            out.add(t, f"vertex {g.labels[i]}, blanket")
        if mode == "refined":
            comp = refined_power_dag(g, i, order, heads)
            for e in comp.edges:
                if e.triple is not None:
                    out.add(e.triple, f"{g.fmt(e.source)} -{g.fmt(e.kmin)}-> {g.fmt(e.target)}")
        else:
            seen = set()
            nodes = heads_of(g, i, order, heads)
            rec = {h.head: h for h in nodes}
            for h in nodes:
                for k in bits(h.head & ~(1 << i)):
                    H2 = marginalize_step(g, h.head, 1 << k, i)
                    t = _edge_triple(i, h, rec[H2], 1 << k)
                    if t is not None and t.canonical() not in seen:
                        seen.add(t.canonical())
                        out.add(t, f"{g.fmt(h.head)} -{g.labels[k]}-> {g.fmt(H2)}")
    return out.verify(g)


@dataclass
class SignedDecomposition:
    n: int
    terms: list = field(default_factory=list)  # (sign, CITriple, note)

    def imset(self) -> Imset:
        return sum_semi_elementary(self.n, [t for _, t, _ in self.terms], [s for s, _, _ in self.terms])

    def format(self, g: Admg) -> str:
        return "\n".join(f"{'+' if s > 0 else '-'} {g.fmt_triple(t)}" for s, t, _ in self.terms)


def decompose_standard_imset(g: Admg, order: Sequence[int] | None = None, check: bool = True) -> SignedDecomposition:
    """Blanket term per vertex plus (-1)^{|K|+1} <i, HT - H'T'K | H'T' - i> over every H ->K H'.

    Terms whose middle set is empty are zero imsets and are dropped.  For every
    non-maximal head the signs of its incoming (H, K) pairs must sum to 1.
    """
    order = canonical_order(g) if order is None else tuple(order)
    heads = enumerate_heads(g, order)
    out = SignedDecomposition(g.n)
    for i in order:
        t = blanket_triple(g, i, order)
        if t is not None:
            out.terms.append((1, t, f"vertex {g.labels[i]}, blanket"))
        nodes = heads_of(g, i, order, heads)
        rec = {h.head: h for h in nodes}
        incoming = {h.head: 0 for h in nodes}
        for h in nodes:
            for K in submasks(h.head & ~(1 << i)):
                if not K:
                    continue
                H2 = marginalize_step(g, h.head, K, i)
                sign = 1 if popcount(K) % 2 else -1
                incoming[H2] += sign
                t = _edge_triple(i, h, rec[H2], K)
                if t is not None:
                    out.terms.append((sign, t, f"{g.fmt(h.head)} -{g.fmt(K)}-> {g.fmt(H2)}"))
        for h in nodes[1:]:
            if incoming[h.head] != 1:
                raise AssertionError(f"coefficient sum {incoming[h.head]} at head {g.fmt(h.head)}")
        if incoming[nodes[0].head] != 0:
            raise AssertionError("maximal head has incoming marginalizations")
    if check and out.imset() != standard_imset(g):
        raise AssertionError("signed decomposition does not sum to the standard imset")
    return out


# ---------------------------------------------------------------------------
# district factors


def district_factor(g: Admg, D: int) -> tuple[Admg, int]:
    """Induced graph on D | pa(D) with every pair of outside parents joined.

    A pair is joined by a directed edge when one is an ancestor of the other
    in G, and by a bidirected edge otherwise.  Returns (graph, mask of D in it).
    """
    W = D | g.parents(D)
    sub = induced_subgraph(g, W)
    idx = [v for v in range(g.n) if W >> v & 1]
    outside = [j for j, v in enumerate(idx) if not D >> v & 1]
    directed = {(a, b) for a in range(sub.n) for b in bits(sub.ch[a])}
    bidirected = {(a, b) for a in range(sub.n) for b in bits(sub.sib[a]) if a < b}
    for x in range(len(outside)):
        for y in range(x + 1, len(outside)):
            a, b = outside[x], outside[y]
            if sub.adjacent(a, b):
                continue
            va, vb = idx[a], idx[b]
            if g.an[vb] >> va & 1:
                directed.add((a, b))
            elif g.an[va] >> vb & 1:
                directed.add((b, a))
            else:
                bidirected.add((a, b))
    h = Admg(sub.n, sorted(directed), sorted(bidirected), sub.labels)
    if not is_mag(h):
        raise AssertionError("district factor is not a MAG")
    Dm = sum(1 << j for j, v in enumerate(idx) if D >> v & 1)
    return h, Dm


def district_factor_check(g: Admg, **verdict_kw) -> tuple[bool, bool, list]:
    """(perfectly Markovian for G, conjunction over district factors, per-factor verdicts)."""
    from .markov_props import verdict

    whole = verdict(g, **verdict_kw).perfectly_markovian
    parts = []
    for D in g.districts():
        h, _ = district_factor(g, D)
        parts.append((D, h, verdict(h, **verdict_kw).perfectly_markovian))
    return whole, all(p for _, _, p in parts), parts
