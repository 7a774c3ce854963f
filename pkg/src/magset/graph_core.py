"""Mixed graphs over integer vertex ids, m-separation and MAG validation.

Vertex sets are plain ``int`` bitmasks: vertex ``v`` is bit ``1 << v``.  The
numeric value of the mask gives a total order used wherever a deterministic
tie-break is needed.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class GraphError(ValueError):
    """Malformed graph input (bad syntax, unknown vertex, duplicate edge...)."""

    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class CycleError(GraphError):
    def __init__(self, cycle: Sequence[str]):
        self.cycle = tuple(cycle)
        super().__init__("directed cycle " + " -> ".join(list(cycle) + [cycle[0]]))


# ---------------------------------------------------------------------------
# bitmask helpers


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def vset(items: Iterable[int]) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def popcount(mask: int) -> int:
    return mask.bit_count()


# ---------------------------------------------------------------------------
# CI statements


@dataclass(frozen=True)
class CITriple:
    """The statement A _||_ B | C with A, B nonempty and A, B, C disjoint."""

    A: int
    B: int
    C: int = 0

    def __post_init__(self):
        if not self.A or not self.B:
            raise ValueError("A and B must be nonempty")
        if self.A & self.B or self.A & self.C or self.B & self.C:
            raise ValueError("A, B and C must be pairwise disjoint")

    def canonical(self) -> "CITriple":
        """Symmetric normal form: the side with the smaller mask comes first."""
        if self.A <= self.B:
            return self
        return CITriple(self.B, self.A, self.C)

    @property
    def is_elementary(self) -> bool:
        return popcount(self.A) == 1 and popcount(self.B) == 1

    def elementary_parts(self) -> Iterator["CITriple"]:
        """Elementary triples <a,b|D> with a in A, b in B, C <= D <= ABC - ab.

        A semigraphoid contains this triple iff it contains all of these.
        """
        free = self.A | self.B
        for a in bits(self.A):
            for b in bits(self.B):
                rest = free & ~((1 << a) | (1 << b))
                for extra in submasks(rest):
                    yield CITriple(1 << a, 1 << b, self.C | extra).canonical()


# ---------------------------------------------------------------------------
# graphs


class Admg:
    """Acyclic directed mixed graph on vertices ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of vertices.
    directed : iterable of (a, b)
        Edges ``a -> b``.
    bidirected : iterable of (a, b)
        Edges ``a <-> b`` (order of the pair is irrelevant).
    labels : sequence of str, optional
        External names used for printing and parsing; default ``"1".."n"``.

    Instances are treated as immutable.  Parent/child/sibling masks and the
    reflexive ancestor/descendant masks of every vertex are computed once.
    """

    __slots__ = ("n", "labels", "directed", "bidirected", "pa", "ch", "sib", "an", "de", "full")

    def __init__(self, n: int, directed=(), bidirected=(), labels: Sequence[str] | None = None):
        self.n = n
        self.labels = tuple(labels) if labels is not None else tuple(str(i + 1) for i in range(n))
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise GraphError("labels must be n distinct names")
        self.full = (1 << n) - 1
        self.pa = [0] * n
        self.ch = [0] * n
        self.sib = [0] * n
        seen = set()
        d_edges, b_edges = [], []
        for a, b in directed:
            self._check_pair(a, b, seen)
            self.pa[b] |= 1 << a
            self.ch[a] |= 1 << b
            d_edges.append((a, b))
        for a, b in bidirected:
            self._check_pair(a, b, seen)
            self.sib[a] |= 1 << b
            self.sib[b] |= 1 << a
            b_edges.append((min(a, b), max(a, b)))
        self.directed = frozenset(d_edges)
        self.bidirected = frozenset(b_edges)
        self.an = self._closure(self.pa)
        self.de = self._closure(self.ch)

    def _check_pair(self, a, b, seen):
        if not (0 <= a < self.n and 0 <= b < self.n):
            raise GraphError(f"vertex out of range in edge ({a}, {b})")
        if a == b:
            raise GraphError(f"self-loop at {self.labels[a]}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise GraphError(f"more than one edge between {self.labels[a]} and {self.labels[b]}")
        seen.add(key)

    def _closure(self, step):
        # reflexive transitive closure along `step`, raising on a directed cycle
        n = self.n
        out = [0] * n
        state = [0] * n  # 0 new, 1 on stack, 2 done
        for root in range(n):
            if state[root]:
                continue
            stack = [(root, iter(list(bits(step[root]))))]
            state[root] = 1
            path = [root]
            while stack:
                v, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    acc = 1 << v
                    for w in bits(step[v]):
                        acc |= out[w]
                    out[v] = acc
                    state[v] = 2
                    stack.pop()
                    path.pop()
                elif state[nxt] == 1:
                    cyc = path[path.index(nxt):]
                    if step is self.ch:
                        raise CycleError([self.labels[x] for x in cyc])
                    raise CycleError([self.labels[x] for x in reversed(cyc)])
                elif state[nxt] == 0:
                    state[nxt] = 1
                    path.append(nxt)
                    stack.append((nxt, iter(list(bits(step[nxt])))))
        return out

    # -- reachability ------------------------------------------------------

    def ancestors(self, W: int) -> int:
        acc = 0
        for v in bits(W):
            acc |= self.an[v]
        return acc

    def descendants(self, W: int) -> int:
        acc = 0
        for v in bits(W):
            acc |= self.de[v]
        return acc

    def parents(self, W: int) -> int:
        acc = 0
        for v in bits(W):
            acc |= self.pa[v]
        return acc

    def children(self, W: int) -> int:
        acc = 0
        for v in bits(W):
            acc |= self.ch[v]
        return acc

    def siblings(self, W: int) -> int:
        acc = 0
        for v in bits(W):
            acc |= self.sib[v]
        return acc

    def district(self, v: int, within: int | None = None) -> int:
        """Bidirected-connected component of ``v`` inside the induced graph on ``within``."""
        within = self.full if within is None else within
        comp = 1 << v
        frontier = comp
        while frontier:
            w = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = self.sib[w] & within & ~comp
            comp |= new
            frontier |= new
        return comp

    def districts(self, within: int | None = None) -> list[int]:
        within = self.full if within is None else within
        out, left = [], within
        while left:
            v = (left & -left).bit_length() - 1
            d = self.district(v, within)
            out.append(d)
            left &= ~d
        return out

    def barren(self, W: int) -> int:
        """Vertices of W with no strict descendant in W."""
        out = 0
        for v in bits(W):
            if self.de[v] & W == 1 << v:
                out |= 1 << v
        return out

    def markov_blanket(self, v: int, A: int) -> int:
        """mb(v, A) = (district of v in G_A together with its parents in A) minus v."""
        d = self.district(v, A)
        return (d | (self.parents(d) & A)) & ~(1 << v)

    def adjacent(self, a: int, b: int) -> bool:
        return bool((self.pa[a] | self.ch[a] | self.sib[a]) >> b & 1)

    def neighbours(self, v: int) -> int:
        return self.pa[v] | self.ch[v] | self.sib[v]

    # -- conveniences ------------------------------------------------------

    def mask(self, *labels) -> int:
        """Bitmask of the vertices with the given external labels."""
        idx = {lab: i for i, lab in enumerate(self.labels)}
        m = 0
        for lab in labels:
            m |= 1 << idx[str(lab)]
        return m

    def names(self, W: int) -> list[str]:
        return [self.labels[v] for v in bits(W)]

    def fmt(self, W: int) -> str:
        return "{" + ",".join(self.names(W)) + "}"

    def triple(self, A, B, C=()) -> CITriple:
        """Build a CITriple from label collections (ints or strings)."""
        return CITriple(self.mask(*A), self.mask(*B), self.mask(*C))

    def fmt_triple(self, t: CITriple) -> str:
        s = f"{','.join(self.names(t.A))} _||_ {','.join(self.names(t.B))}"
        return s + f" | {','.join(self.names(t.C))}" if t.C else s

    def edge_count(self) -> int:
        return len(self.directed) + len(self.bidirected)

    def skeleton_connected(self) -> bool:
        if self.n == 0:
            return True
        comp, frontier = 1, 1
        while frontier:
            v = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = self.neighbours(v) & ~comp
            comp |= new
            frontier |= new
        return comp == self.full

    def relabel(self, perm: Sequence[int]) -> "Admg":
        """Graph with vertex v renamed perm[v] (labels travel with the vertices)."""
        labels = [None] * self.n
        for v in range(self.n):
            labels[perm[v]] = self.labels[v]
        return Admg(
            self.n,
            [(perm[a], perm[b]) for a, b in self.directed],
            [(perm[a], perm[b]) for a, b in self.bidirected],
            labels,
        )

    def __eq__(self, other):
        return (
            isinstance(other, Admg)
            and self.n == other.n
            and self.directed == other.directed
            and self.bidirected == other.bidirected
        )

    def __hash__(self):
        return hash((self.n, self.directed, self.bidirected))

    def __repr__(self):
        parts = [f"{self.labels[a]}->{self.labels[b]}" for a, b in sorted(self.directed)]
        parts += [f"{self.labels[a]}<->{self.labels[b]}" for a, b in sorted(self.bidirected)]
        return f"Admg(n={self.n}, {', '.join(parts)})"


# ---------------------------------------------------------------------------
# text formats

_EDGE_RE = re.compile(r"^([^\s<>-]+)\s*(<->|->|<-)\s*([^\s<>-]+)$")


def _natural_key(label: str):
    return (0, int(label), "") if label.lstrip("-").isdigit() else (1, 0, label)


def parse_graph(text: str) -> Admg:
    """Parse the line-oriented graph format.

    ``vertices: a b c`` (optional, fixes the vertex order), then one edge per
    line as ``a -> b``, ``a <- b`` or ``a <-> b``.  ``#`` starts a comment.
    Without a header, labels are sorted numerically when they are all
    integers and lexically otherwise.
    """
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("vertices:"):
            if header is not None:
                raise GraphError("duplicate vertices header", lineno)
            header = line.split(":", 1)[1].replace(",", " ").split()
            if len(set(header)) != len(header):
                raise GraphError("repeated label in vertices header", lineno)
            continue
        m = _EDGE_RE.match(line)
        if not m:
            raise GraphError(f"cannot parse {line!r}", lineno)
        a, op, b = m.groups()
        if op == "<-":
            a, b, op = b, a, "->"
        edges.append((lineno, a, op, b))
    if header is None:
        names = {x for _, a, _, b in edges for x in (a, b)}
        header = sorted(names, key=_natural_key)
    idx = {lab: i for i, lab in enumerate(header)}
    directed, bidirected, seen, seen_op = [], [], {}, {}
    for lineno, a, op, b in edges:
        for x in (a, b):
            if x not in idx:
                raise GraphError(f"vertex {x!r} not declared in header", lineno)
        if a == b:
            raise GraphError(f"self-loop at {a}", lineno)
        key = frozenset((a, b))
        if key in seen:
            first = seen_op[key]
            if op == "->" and first == (b, a):
                raise CycleError([b, a])
            raise GraphError(f"second edge between {a} and {b} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        seen_op[key] = (a, b) if op == "->" else None
        (directed if op == "->" else bidirected).append((idx[a], idx[b]))
    return Admg(len(header), directed, bidirected, header)


def format_graph(g: Admg) -> str:
    lines = ["vertices: " + " ".join(g.labels)]
    lines += [f"{g.labels[a]} -> {g.labels[b]}" for a, b in sorted(g.directed)]
    lines += [f"{g.labels[a]} <-> {g.labels[b]}" for a, b in sorted(g.bidirected)]
    return "\n".join(lines) + "\n"


def to_dot(g: Admg, name: str = "G") -> str:
    out = [f"digraph {name} {{"]
    out += [f'  "{lab}";' for lab in g.labels]
    out += [f'  "{g.labels[a]}" -> "{g.labels[b]}";' for a, b in sorted(g.directed)]
    out += [f'  "{g.labels[a]}" -> "{g.labels[b]}" [dir=both];' for a, b in sorted(g.bidirected)]
    out.append("}")
    return "\n".join(out) + "\n"


def parse_vertex_list(g: Admg, text: str) -> int:
    text = text.strip().strip("{}")
    if not text:
        return 0
    return g.mask(*[t for t in re.split(r"[,\s]+", text) if t])


def parse_triple(g: Admg, text: str) -> CITriple:
    """Parse ``A _||_ B | C`` with comma separated labels (``| C`` optional)."""
    if "_||_" not in text:
        raise GraphError(f"triple needs '_||_': {text!r}")
    left, right = text.split("_||_", 1)
    right, _, cond = right.partition("|")
    try:
        return CITriple(parse_vertex_list(g, left), parse_vertex_list(g, right), parse_vertex_list(g, cond))
    except KeyError as e:
        raise GraphError(f"unknown vertex {e.args[0]!r} in {text!r}") from None
    except ValueError as e:
        raise GraphError(f"{e} in {text!r}") from None


# ---------------------------------------------------------------------------
# operations


def relatives(g: Admg, W: int, kind: str) -> int:
    if kind == "parents":
        return g.parents(W)
    if kind == "children":
        return g.children(W)
    if kind == "siblings":
        return g.siblings(W)
    if kind == "ancestors":
        return g.ancestors(W)
    if kind == "descendants":
        return g.descendants(W)
    if kind == "district":
        if not W:
            raise ValueError("district of the empty set")
        acc = 0
        for v in bits(W):
            acc |= g.district(v)
        return acc
    raise ValueError(f"unknown relation {kind!r}")


def induced_subgraph(g: Admg, W: int) -> Admg:
    """G_W with vertices renumbered 0..|W|-1 in increasing id order; labels kept."""
    keep = list(bits(W))
    pos = {v: i for i, v in enumerate(keep)}
    return Admg(
        len(keep),
        [(pos[a], pos[b]) for a, b in g.directed if a in pos and b in pos],
        [(pos[a], pos[b]) for a, b in g.bidirected if a in pos and b in pos],
        [g.labels[v] for v in keep],
    )


def lift_mask(sub_mask: int, W: int) -> int:
    """Map a vertex set of induced_subgraph(g, W) back to the ids of g."""
    keep = list(bits(W))
    return vset(keep[i] for i in bits(sub_mask))


def canonical_order(g: Admg) -> tuple[int, ...]:
    """Lexicographically smallest topological order of the directed part."""
    order, placed = [], 0
    for _ in range(g.n):
        for v in range(g.n):
            if not placed >> v & 1 and g.pa[v] & ~placed == 0:
                order.append(v)
                placed |= 1 << v
                break
    return tuple(order)


def iter_topological_orders(g: Admg) -> Iterator[tuple[int, ...]]:
    def rec(placed, prefix):
        if placed == g.full:
            yield tuple(prefix)
            return
        for v in range(g.n):
            if not placed >> v & 1 and g.pa[v] & ~placed == 0:
                prefix.append(v)
                yield from rec(placed | 1 << v, prefix)
                prefix.pop()

    yield from rec(0, [])


def topological_orders(g: Admg):
    """(canonical order, iterator over all topological orders)."""
    return canonical_order(g), iter_topological_orders(g)


def is_topological(g: Admg, order: Sequence[int]) -> bool:
    if sorted(order) != list(range(g.n)):
        return False
    placed = 0
    for v in order:
        if g.pa[v] & ~placed:
            return False
        placed |= 1 << v
    return True


def is_ancestral(g: Admg) -> bool:
    return all(g.sib[v] & g.an[v] == 0 for v in range(g.n))


def m_connected(g: Admg, A: int, B: int, C: int) -> bool:
    """True iff some m-connecting path joins A and B given C.

    Reachability over states (vertex, arrived with an arrowhead?).  A vertex
    passed as a collider must lie in an(C); as a non-collider it must lie
    outside C.
    """
    anC = g.ancestors(C)
    seen_head = 0
    seen_tail = 0
    stack = []
    for a in bits(A):
        for w in bits(g.ch[a] | g.sib[a]):
            stack.append((w, True))
        for w in bits(g.pa[a]):
            stack.append((w, False))
    while stack:
        v, head = stack.pop()
        bit = 1 << v
        if head:
            if seen_head & bit:
                continue
            seen_head |= bit
        else:
            if seen_tail & bit:
                continue
            seen_tail |= bit
        if B & bit:
            return True
        in_c = C & bit
        # leaving through a tail at v: v is a non-collider
        if not in_c:
            for w in bits(g.ch[v]):
                stack.append((w, True))
        # leaving through an arrowhead at v: collider iff we arrived on one
        if (head and anC & bit) or (not head and not in_c):
            for w in bits(g.sib[v]):
                stack.append((w, True))
            for w in bits(g.pa[v]):
                stack.append((w, False))
    return False


def m_separated(g: Admg, t: CITriple) -> bool:
    return not m_connected(g, t.A, t.B, t.C)


def _paths(g: Admg, a: int, b: int) -> Iterator[list[int]]:
    def rec(path, used):
        v = path[-1]
        if v == b:
            yield list(path)
            return
        for w in bits(g.neighbours(v) & ~used):
            path.append(w)
            yield from rec(path, used | 1 << w)
            path.pop()

    yield from rec([a], 1 << a)


def _arrow_at(g: Admg, x: int, y: int) -> bool:
    """Does the edge between x and y carry an arrowhead at y?"""
    return bool(g.pa[y] >> x & 1 or g.sib[y] >> x & 1)


def m_separated_bruteforce(g: Admg, t: CITriple) -> bool:
    """Reference implementation enumerating every simple path (small graphs only)."""
    anC = g.ancestors(t.C)
    for a in bits(t.A):
        for b in bits(t.B):
            for path in _paths(g, a, b):
                ok = True
                for k in range(1, len(path) - 1):
                    x, v, y = path[k - 1], path[k], path[k + 1]
                    collider = _arrow_at(g, x, v) and _arrow_at(g, y, v)
                    if collider and not anC >> v & 1:
                        ok = False
                    if not collider and t.C >> v & 1:
                        ok = False
                    if not ok:
                        break
                if ok:
                    return False
    return True


def is_maximal(g: Admg, brute: bool = False) -> bool:
    """Every nonadjacent pair is m-separated by some set.

    The fast mode only tries an({a,b}) - {a,b}, which suffices for ancestral
    graphs; ``brute=True`` tries all subsets of the remaining vertices.
    """
    for a in range(g.n):
        for b in range(a + 1, g.n):
            if g.adjacent(a, b):
                continue
            ab = (1 << a) | (1 << b)
            if not brute:
                sep = g.ancestors(ab) & ~ab
                if m_connected(g, 1 << a, 1 << b, sep):
                    return False
            elif all(m_connected(g, 1 << a, 1 << b, C) for C in submasks(g.full & ~ab)):
                return False
    return True


def is_mag(g: Admg) -> bool:
    return is_ancestral(g) and is_maximal(g)


def is_bidirected(g: Admg) -> bool:
    return not g.directed


def dual_graph(g: Admg) -> list[int]:
    """Adjacency masks of the complement of the skeleton of a bidirected graph."""
    if g.directed:
        raise GraphError("dual graph is defined for purely bidirected graphs")
    return [g.full & ~(1 << v) & ~g.sib[v] for v in range(g.n)]


def bidirected_graph(n: int, edges: Iterable[tuple[int, int]], one_based: bool = True) -> Admg:
    off = 1 if one_based else 0
    return Admg(n, (), [(a - off, b - off) for a, b in edges])


def cycle_graph(n: int) -> Admg:
    """Bidirected n-cycle 1 <-> 2 <-> ... <-> n <-> 1."""
    return Admg(n, (), [(i, (i + 1) % n) for i in range(n)])


def chain_graph(n: int) -> Admg:
    return Admg(n, (), [(i, i + 1) for i in range(n - 1)])


def all_triples(n: int, elementary: bool = False) -> Iterator[CITriple]:
    """Every disjoint triple on n vertices in canonical form (A < B)."""
    full = (1 << n) - 1
    if elementary:
        for a, b in itertools.combinations(range(n), 2):
            for C in submasks(full & ~(1 << a | 1 << b)):
                yield CITriple(1 << a, 1 << b, C)
        return
    for C in submasks(full):
        rest = full & ~C
        for A in submasks(rest):
            if not A:
                continue
            for B in submasks(rest & ~A):
                if B and A < B:
                    yield CITriple(A, B, C)
