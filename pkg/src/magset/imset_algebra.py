"""Imsets: arithmetic, characteristic and standard imsets of MAGs, and cone membership.

Most of the combinatorics happens in the *moment* coordinates

    m_u(S) = sum_{T >= S} u(T),

in which an elementary imset <a,b|C> is the indicator of the interval
[{a,b}, {a,b} | C] and a semi-elementary <A,B|C> is the indicator of its
constrained sets.  For a MAG, m_{u_G} = 1 - c_G.  Decomposing u into
elementary imsets is therefore the same as covering the multiset m_u by such
intervals, which is what the search below does.

Two facts used throughout:

* sum_S u(S) |S|^2 = 2 for every elementary imset, so every elementary
  decomposition of u has exactly sum_S u(S)|S|^2 / 2 terms.
* If lambda*u - u_t = sum q_i e_i has a nonnegative rational solution, then
  clearing denominators by D gives (D lambda) u - D u_t combinatorial, and
  adding the combinatorial (D - 1) u_t shows (D lambda) u - u_t is
  combinatorial.  So rational feasibility decides representation, and for
  the same reason decides structurality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import semigraphoid
from .graph_core import Admg, CITriple, all_triples, bits, popcount, submasks
from .heads import enumerate_heads, pset_bits
from .lp import solve_guided, solve_nonneg


class NotStructural(ValueError):
    """The imset is not structural, so the model it induces is undefined."""


# ---------------------------------------------------------------------------
# imsets


class Imset:
    """Integer-valued function on the subsets of {0..n-1}, stored sparsely."""

    __slots__ = ("n", "coef")

    def __init__(self, n: int, coef: dict | None = None):
        self.n = n
        self.coef = {S: v for S, v in (coef or {}).items() if v}

    @classmethod
    def from_dense(cls, n: int, vec: Sequence[int]) -> "Imset":
        return cls(n, {S: v for S, v in enumerate(vec) if v})

    def dense(self) -> list[int]:
        vec = [0] * (1 << self.n)
        for S, v in self.coef.items():
            vec[S] = v
        return vec

    def __getitem__(self, S: int) -> int:
        return self.coef.get(S, 0)

    def items(self):
        """Entries ordered by set size, then by members."""
        return sorted(self.coef.items(), key=lambda kv: (popcount(kv[0]), list(bits(kv[0]))))

    def _combine(self, other: "Imset", sign: int) -> "Imset":
        if self.n != other.n:
            raise ValueError("ground sets differ")
        out = dict(self.coef)
        for S, v in other.coef.items():
            out[S] = out.get(S, 0) + sign * v
        return Imset(self.n, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return Imset(self.n, {S: -v for S, v in self.coef.items()})

    def __mul__(self, k: int):
        return Imset(self.n, {S: k * v for S, v in self.coef.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Imset) and self.n == other.n and self.coef == other.coef

    def __hash__(self):
        return hash((self.n, frozenset(self.coef.items())))

    def __bool__(self):
        return bool(self.coef)

    def __repr__(self):
        return f"Imset(n={self.n}, {self.format()!r})"

    def format(self, labels: Sequence[str] | None = None) -> str:
        labels = labels or [str(i + 1) for i in range(self.n)]
        return "\n".join(
            "{" + ",".join(labels[v] for v in bits(S)) + "}: " + str(v) for S, v in self.items()
        )

    def moments(self) -> tuple[int, int, int]:
        """(sum u, sum u|S|, sum u|S|^2)."""
        s0 = s1 = s2 = 0
        for S, v in self.coef.items():
            k = popcount(S)
            s0 += v
            s1 += v * k
            s2 += v * k * k
        return s0, s1, s2


def delta(n: int, S: int) -> Imset:
    return Imset(n, {S: 1})


def semi_elementary(n: int, t: CITriple) -> Imset:
    """delta_ABC - delta_AC - delta_BC + delta_C."""
    A, B, C = t.A, t.B, t.C
    out: dict = {}
    for S, s in ((A | B | C, 1), (A | C, -1), (B | C, -1), (C, 1)):
        out[S] = out.get(S, 0) + s
    return Imset(n, out)


def sum_semi_elementary(n: int, triples: Iterable[CITriple], signs: Iterable[int] | None = None) -> Imset:
    out = [0] * (1 << n)
    signs = itertools.repeat(1) if signs is None else signs
    for t, s in zip(triples, signs):
        out[t.A | t.B | t.C] += s
        out[t.A | t.C] -= s
        out[t.B | t.C] -= s
        out[t.C] += s
    return Imset.from_dense(n, out)


# ---------------------------------------------------------------------------
# transforms on dense vectors indexed by subset masks


def superset_sum(f: Sequence[int], n: int) -> list:
    """g(S) = sum_{T >= S} f(T)."""
    g = list(f)
    for i in range(n):
        bit = 1 << i
        for S in range(1 << n):
            if not S & bit:
                g[S] += g[S | bit]
    return g


def superset_mobius(g: Sequence[int], n: int) -> list:
    """Inverse of superset_sum: f(S) = sum_{T >= S} (-1)^{|T-S|} g(T)."""
    f = list(g)
    for i in range(n):
        bit = 1 << i
        for S in range(1 << n):
            if not S & bit:
                f[S] -= f[S | bit]
    return f


def subset_sum(f: Sequence, n: int) -> list:
    """g(S) = sum_{T <= S} f(T)."""
    g = list(f)
    for i in range(n):
        bit = 1 << i
        for S in range(1 << n):
            if S & bit:
                g[S] += g[S ^ bit]
    return g


def subset_mobius(g: Sequence, n: int) -> list:
    """f(S) = sum_{T <= S} (-1)^{|S-T|} g(T)."""
    f = list(g)
    for i in range(n):
        bit = 1 << i
        for S in range(1 << n):
            if S & bit:
                f[S] -= f[S ^ bit]
    return f


def characteristic_from_standard(u: Imset) -> Imset:
    """c(S) = 1 - sum_{T >= S} u(T) (so c(empty) = 1 whenever sum u = 0)."""
    m = superset_sum(u.dense(), u.n)
    return Imset.from_dense(u.n, [1 - x for x in m])


def standard_from_characteristic(c: Imset) -> Imset:
    """u(B) = sum_{A >= B} (-1)^{|A-B|} (1 - c(A))."""
    ones = [1 - x for x in c.dense()]
    return Imset.from_dense(c.n, superset_mobius(ones, c.n))


def mobius_roundtrip(u: Imset) -> Imset:
    return standard_from_characteristic(characteristic_from_standard(u))


# ---------------------------------------------------------------------------
# imsets of graphs


def characteristic_imset(g: Admg) -> Imset:
    """Indicator of S(G), with c(empty) = 1 (the value forced by the Mobius pair)."""
    fam = pset_bits(g) | 1
    return Imset(g.n, {S: 1 for S in range(1 << g.n) if fam >> S & 1})


def dag_imset(g: Admg) -> Imset:
    """delta_V - delta_empty - sum_i (delta_{i pa(i)} - delta_{pa(i)})."""
    out = {g.full: 1}
    out[0] = out.get(0, 0) - 1
    for i in range(g.n):
        p = g.pa[i]
        out[p | 1 << i] = out.get(p | 1 << i, 0) - 1
        out[p] = out.get(p, 0) + 1
    return Imset(g.n, out)


def standard_imset_closed_form(g: Admg, heads=None) -> Imset:
    """delta_V - delta_empty - sum_H sum_{W <= H} (-1)^{|H-W|} delta_{W | tail(H)}."""
    heads = enumerate_heads(g) if heads is None else heads
    out = [0] * (1 << g.n)
    out[g.full] += 1
    out[0] -= 1
    for rec in heads:
        hsize = popcount(rec.head)
        for W in submasks(rec.head):
            sign = -1 if (hsize - popcount(W)) % 2 else 1
            out[W | rec.tail] -= sign
    return Imset.from_dense(g.n, out)


def standard_imset(g: Admg) -> Imset:
    """u_G computed twice (Mobius of 1 - c_G and the head/tail formula), checked equal."""
    c = characteristic_imset(g)
    u = standard_from_characteristic(c)
    closed = standard_imset_closed_form(g)
    if u != closed:
        raise AssertionError("Mobius and head/tail forms of the standard imset disagree")
    if not g.bidirected and u != dag_imset(g):
        raise AssertionError("standard imset of a DAG disagrees with the parent formula")
    return u


def fast_standard_dense(g: Admg) -> list[int]:
    """u_G as a dense vector without the cross-checks (used in bulk runs)."""
    fam = pset_bits(g) | 1
    ones = [0 if fam >> S & 1 else 1 for S in range(1 << g.n)]
    return superset_mobius(ones, g.n)


# ---------------------------------------------------------------------------
# elementary basis and certificates


@dataclass(frozen=True)
class ElementaryBasis:
    n: int
    terms: tuple  # (a, b, C) with a < b

    @classmethod
    def build(cls, n: int) -> "ElementaryBasis":
        full = (1 << n) - 1
        terms = []
        for a, b in itertools.combinations(range(n), 2):
            for C in submasks(full & ~(1 << a | 1 << b)):
                terms.append((a, b, C))
        terms.sort(key=lambda t: (t[0], t[1], popcount(t[2]), t[2]))
        return cls(n, tuple(terms))

    def __len__(self):
        return len(self.terms)

    def imset(self, j: int) -> Imset:
        a, b, C = self.terms[j]
        return semi_elementary(self.n, CITriple(1 << a, 1 << b, C))


def interval(a: int, b: int, C: int) -> list[int]:
    ab = 1 << a | 1 << b
    return [ab | D for D in submasks(C)]


@dataclass
class ConeCertificate:
    """k * u = sum of count * elementary imset, exactly."""

    n: int
    k: int
    terms: list = field(default_factory=list)  # [((a, b, C), count)] in search order

    def triples(self) -> list[CITriple]:
        return [CITriple(1 << a, 1 << b, C) for (a, b, C), _ in self.terms]

    def total(self) -> Imset:
        out = [0] * (1 << self.n)
        for (a, b, C), cnt in self.terms:
            ab = 1 << a | 1 << b
            out[ab | C] += cnt
            out[1 << a | C] -= cnt
            out[1 << b | C] -= cnt
            out[C] += cnt
        return Imset.from_dense(self.n, out)

    def size(self) -> int:
        return sum(c for _, c in self.terms)

    def format(self, labels: Sequence[str] | None = None) -> str:
        labels = labels or [str(i + 1) for i in range(self.n)]
        lines = []
        for (a, b, C), cnt in self.terms:
            cond = ",".join(labels[v] for v in bits(C))
            lines.append(f"{cnt} x <{labels[a]},{labels[b]}|{cond}>")
        return "\n".join(lines)


def moment_vector(u: Imset) -> list[int]:
    return superset_sum(u.dense(), u.n)


def _moment_filter(m: Sequence[int], n: int) -> bool:
    """Necessary conditions: m >= 0 everywhere and m = 0 on sets of size <= 1."""
    if m[0] != 0 or any(m[1 << i] for i in range(n)):
        return False
    return all(x >= 0 for x in m)


class _Budget(Exception):
    pass


def decompose_moments(m: Sequence[int], n: int, node_budget: int | None = None):
    """Cover the moment vector m by elementary intervals, or return None.

    The largest set S in the support (ties: smallest mask) has no proper
    superset in the support, so any cover uses an interval whose top is S.
    The search branches over the pair {a,b} in S (lexicographic order),
    subtracts [{a,b}, S] and recurses; failed residuals are memoized.
    Returns a list of (a, b, C) terms in the order they were placed.
    Raises _Budget when node_budget is exhausted.
    """
    if not _moment_filter(m, n):
        return None
    start = {S: x for S, x in enumerate(m) if x}
    failed: set = set()
    nodes = [0]
    pair_cache: dict = {}

    def pairs_of(S):
        p = pair_cache.get(S)
        if p is None:
            p = []
            for a, b in itertools.combinations(list(bits(S)), 2):
                C = S & ~(1 << a | 1 << b)
                p.append((a, b, C, interval(a, b, C)))
            pair_cache[S] = p
        return p

    def rec(res: dict, out: list) -> bool:
        if not res:
            return True
        nodes[0] += 1
        if node_budget is not None and nodes[0] > node_budget:
            raise _Budget
        state = frozenset(res.items())
        if state in failed:
            return False
        top = max(res, key=lambda S: (popcount(S), -S))
        for a, b, C, iv in pairs_of(top):
            if all(res.get(R, 0) > 0 for R in iv):
                nxt = dict(res)
                for R in iv:
                    v = nxt[R] - 1
                    if v:
                        nxt[R] = v
                    else:
                        del nxt[R]
                out.append((a, b, C))
                if rec(nxt, out):
                    return True
                out.pop()
        failed.add(state)
        return False

    out: list = []
    return out if rec(start, out) else None


def _bundle(n: int, k: int, terms: list) -> ConeCertificate:
    counts: dict = {}
    for t in terms:
        counts[t] = counts.get(t, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (kv[0][0], kv[0][1], popcount(kv[0][2]), kv[0][2]))
    return ConeCertificate(n, k, ordered)


def is_combinatorial(u: Imset, node_budget: int | None = None) -> ConeCertificate | None:
    """Elementary decomposition of u with k = 1, or None if there is none."""
    s0, s1, _ = u.moments()
    if s0 != 0 or s1 != 0:
        return None
    terms = decompose_moments(moment_vector(u), u.n, node_budget)
    if terms is None:
        return None
    cert = _bundle(u.n, 1, terms)
    assert cert.total() == u
    return cert


# ---------------------------------------------------------------------------
# exact LPs in moment coordinates


@dataclass
class ConeLP:
    feasible: bool
    k: int | None = None
    coefficients: dict | None = None  # (a, b, C) -> Fraction
    farkas: dict | None = None  # set -> Fraction, a separating functional on moments


def _intervals_within(support: set, n: int) -> list:
    """Elementary terms whose interval lies inside ``support``."""
    out = []
    for S in sorted(support, key=lambda S: (popcount(S), S)):
        # S as the top of an interval: pairs a<b in S, C = S - ab
        for a, b in itertools.combinations(list(bits(S)), 2):
            C = S & ~(1 << a | 1 << b)
            iv = interval(a, b, C)
            if all(R in support for R in iv):
                out.append(((a, b, C), iv))
    return out


def cone_lp(m: Sequence[int], n: int) -> ConeLP:
    """Is the moment vector m a nonnegative rational combination of elementary intervals?"""
    if m[0] != 0:
        return ConeLP(False, farkas={0: Fraction(-1 if m[0] > 0 else 1)})
    for i in range(n):
        if m[1 << i]:
            return ConeLP(False, farkas={1 << i: Fraction(-1 if m[1 << i] > 0 else 1)})
    for S, x in enumerate(m):
        if x < 0:
            return ConeLP(False, farkas={S: Fraction(1)})
    support = {S for S, x in enumerate(m) if x}
    cols = _intervals_within(support, n)
    rows = sorted(support)
    ridx = {S: i for i, S in enumerate(rows)}
    columns = [{ridx[R]: 1 for R in iv} for _, iv in cols]
    res = solve_nonneg(columns, [m[S] for S in rows])
    if res.feasible:
        coeffs = {cols[j][0]: v for j, v in res.x.items()}
        k = math.lcm(*[v.denominator for v in coeffs.values()]) if coeffs else 1
        return ConeLP(True, k=k, coefficients=coeffs)
    y = {S: res.farkas[i] for i, S in enumerate(rows)}
    # sets outside the support: a large positive weight keeps every other interval nonnegative
    big = sum(abs(v) for v in y.values()) + 1
    for S in range(1 << n):
        if popcount(S) >= 2 and S not in y:
            y[S] = big
    return ConeLP(False, farkas={S: v for S, v in y.items() if v})


def is_structural(u: Imset, max_k_search: int = 6, node_budget: int | None = 200000) -> ConeCertificate | None:
    """Smallest k (searched up to the LP's k) with k*u combinatorial, plus a decomposition.

    The LP decides feasibility exactly; the integer search then looks for the
    least multiplier, falling back to the LP vertex scaled by its common
    denominator.
    """
    try:
        cert = is_combinatorial(u, node_budget=node_budget)
    except _Budget:
        cert = None
    if cert is not None:
        return cert
    m = moment_vector(u)
    lp = cone_lp(m, u.n)
    if not lp.feasible:
        return None
    for k in range(2, min(lp.k, max_k_search + 1)):
        try:
            terms = decompose_moments([k * x for x in m], u.n, node_budget)
        except _Budget:
            terms = None
        if terms is not None:
            c = _bundle(u.n, k, terms)
            assert c.total() == k * u
            return c
    k = lp.k
    terms = [(t, int(v * k)) for t, v in lp.coefficients.items()]
    c = ConeCertificate(u.n, k, sorted(terms, key=lambda kv: (kv[0][0], kv[0][1], popcount(kv[0][2]), kv[0][2])))
    assert c.total() == k * u
    return c


def represents_lp(m_u: Sequence[int], m_t: Sequence[int], n: int) -> bool:
    """Exact test of: exists lambda >= 0, q >= 0 with lambda m_u - sum q_i m_{e_i} = m_t."""
    support = {S for S, x in enumerate(m_u) if x}
    if any(x and S not in support for S, x in enumerate(m_t)):
        return False
    cols = _intervals_within(support, n)
    rows = sorted(support)
    ridx = {S: i for i, S in enumerate(rows)}
    columns = [{ridx[S]: m_u[S] for S in rows}]
    columns += [{ridx[R]: -1 for R in iv} for _, iv in cols]
    return solve_guided(columns, [m_t[S] for S in rows]).feasible


def triple_moments(n: int, t: CITriple) -> list[int]:
    m = [0] * (1 << n)
    for S in submasks(t.A | t.B | t.C):
        if S & t.A and S & t.B:
            m[S] = 1
    return m


class ModelOracle:
    """Membership in the independence model induced by a structural imset.

    The elementary statements of a structural certificate belong to the
    model, and the model is a semigraphoid, so their semigraphoid closure is
    a cheap inner approximation.  Statements outside it are settled by the
    exact LP; positive answers are folded back into the closure.  A
    non-elementary statement belongs to the model iff all its elementary
    parts do.
    """

    def __init__(self, u: Imset, certificate: ConeCertificate | None = None, node_budget: int | None = 200000):
        self.u = u
        self.n = u.n
        self.certificate = certificate if certificate is not None else is_structural(u, node_budget=node_budget)
        if self.certificate is None:
            raise NotStructural("imset is not structural; its model is undefined")
        self.m = moment_vector(u)
        self.support = {S for S, x in enumerate(self.m) if x}
        self.known = semigraphoid.close([t for t, _ in self.certificate.terms], self.n)
        self.refuted: set = set()
        self.lp_calls = 0

    def _elementary(self, a: int, b: int, D: int) -> bool:
        key = semigraphoid.key(a, b, D)
        if key in self.known:
            return True
        if key in self.refuted:
            return False
        ab = 1 << a | 1 << b
        # necessary: every constrained set of the statement is in the support of m_u
        if any((ab | E) not in self.support for E in submasks(D)):
            self.refuted.add(key)
            return False
        mt = [0] * (1 << self.n)
        for E in submasks(D):
            mt[ab | E] = 1
        # k = 1 shortcut: u - u_t combinatorial
        try:
            quick = decompose_moments([x - y for x, y in zip(self.m, mt)], self.n, node_budget=2000)
        except _Budget:
            quick = None
        if quick is not None:
            ok = True
        else:
            self.lp_calls += 1
            ok = represents_lp(self.m, mt, self.n)
        if ok:
            self.known = semigraphoid.close(list(self.known) + [key], self.n)
        else:
            self.refuted.add(key)
        return ok

    def represents(self, t: CITriple) -> bool:
        for e in t.elementary_parts():
            if not self._elementary((e.A & -e.A).bit_length() - 1, (e.B & -e.B).bit_length() - 1, e.C):
                return False
        return True

    def represents_direct(self, t: CITriple) -> bool:
        """Decide by one LP on the semi-elementary imset itself (no semigraphoid reasoning)."""
        return represents_lp(self.m, triple_moments(self.n, t), self.n)

    def model(self, scope: str = "elementary") -> set[CITriple]:
        elementary = scope == "elementary"
        if scope not in ("elementary", "all-triples"):
            raise ValueError(f"unknown scope {scope!r}")
        return {t for t in all_triples(self.n, elementary) if self.represents(t)}


def represents(u: Imset, t: CITriple) -> bool:
    """Does the model induced by the structural imset u contain t?

    Raises NotStructural when u is not structural.
    """
    return ModelOracle(u).represents(t)


def induced_model(u: Imset, scope: str = "elementary") -> set[CITriple]:
    return ModelOracle(u).model(scope)


@dataclass
class Degree:
    value: int | None
    lower: int
    upper: int | None
    k: int
    exact: bool


def degree(u: Imset, budget: int = 200000) -> Degree:
    """Fewest elementary terms in a decomposition of k*u, at the least feasible k.

    Branch and bound over decompositions.  The bound is the quadratic moment:
    every decomposition of k*u has exactly k * sum u(S)|S|^2 / 2 terms, so the
    first decomposition found closes the search.
    """
    cert = is_structural(u)
    if cert is None:
        raise NotStructural("degree of a non-structural imset")
    k = cert.k
    bound = k * u.moments()[2] // 2
    try:
        terms = decompose_moments(moment_vector(k * u), u.n, node_budget=budget)
    except _Budget:
        terms = None
    if terms is None:
        # the certificate itself is a decomposition of k*u
        size = cert.size()
        return Degree(size, bound, size, k, size == bound)
    assert len(terms) == bound
    return Degree(len(terms), bound, len(terms), k, True)


def moment_filters_hold(u: Imset) -> bool:
    s0, s1, _ = u.moments()
    return s0 == 0 and s1 == 0
