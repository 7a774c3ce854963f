"""Plug-in entropies, interaction information and the characteristic-imset score.

Convention: ``entropy`` is the signed plug-in quantity sum p log p (natural
log), i.e. minus the Shannon entropy.  With it the inner product of a
semi-elementary imset with the entropy vector is a conditional mutual
information (>= 0), N * <c_G, I> is the fitted log-likelihood for DAGs, and
the score -2N <c_G, I> + d log N has BIC orientation (smaller is better).
``shannon_entropy`` returns the positive value.
"""

from __future__ import annotations

import csv
import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph_core import Admg, GraphError, bits, popcount
from .heads import pset_bits
from .imset_algebra import Imset, characteristic_imset, subset_mobius, subset_sum


# ---------------------------------------------------------------------------
# data tables


@dataclass
class EmpiricalTable:
    """Categorical data: ``rows[r][j]`` is the category code of column j."""

    labels: tuple
    rows: list
    categories: list = field(default_factory=list)  # per column: code -> original string
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.rows:
            raise ValueError("table has no rows")
        self.labels = tuple(self.labels)
        if any(len(r) != len(self.labels) for r in self.rows):
            raise ValueError("ragged rows")

    @property
    def N(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.labels)

    @classmethod
    def from_columns(cls, labels: Sequence[str], columns: Sequence[Sequence]) -> "EmpiricalTable":
        return cls.from_rows(labels, list(zip(*columns)))

    @classmethod
    def from_rows(cls, labels: Sequence[str], rows: Sequence[Sequence]) -> "EmpiricalTable":
        cats: list[dict] = [dict() for _ in labels]
        coded = []
        for r in rows:
            coded.append(tuple(cats[j].setdefault(str(x), len(cats[j])) for j, x in enumerate(r)))
        inv = [sorted(c, key=c.__getitem__) for c in cats]
        return cls(tuple(labels), coded, inv)

    @classmethod
    def from_csv(cls, path) -> "EmpiricalTable":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            rows = [r for r in reader if r]
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise ValueError(f"{path}: duplicate column labels")
        for k, r in enumerate(rows):
            if len(r) != len(header):
                raise ValueError(f"{path}: row {k + 2} has {len(r)} fields, header has {len(header)}")
        return cls.from_rows(header, [[x.strip() for x in r] for r in rows])

    def counts(self, S: int) -> Counter:
        """N(x_S) for every observed configuration of the columns in S."""
        if S not in self._cache:
            cols = list(bits(S))
            self._cache[S] = Counter(tuple(r[j] for j in cols) for r in self.rows)
        return self._cache[S]

    def reorder(self, labels: Sequence[str]) -> "EmpiricalTable":
        """Same data with columns permuted to ``labels``."""
        pos = {l: j for j, l in enumerate(self.labels)}
        missing = [l for l in labels if l not in pos]
        if missing or len(labels) != len(self.labels):
            raise GraphError(f"columns {sorted(self.labels)} do not match vertices {sorted(labels)}")
        idx = [pos[l] for l in labels]
        return EmpiricalTable(tuple(labels), [tuple(r[j] for j in idx) for r in self.rows], [self.categories[j] for j in idx])


def entropy(t: EmpiricalTable, S: int) -> float:
    """sum_x (N(x_S)/N) log(N(x_S)/N); 0 for the empty set."""
    if not S:
        return 0.0
    N = t.N
    return sum(c / N * math.log(c / N) for c in t.counts(S).values())


def shannon_entropy(t: EmpiricalTable, S: int) -> float:
    return -entropy(t, S)


def entropy_vector(t: EmpiricalTable) -> list[float]:
    return [entropy(t, S) for S in range(1 << t.n)]


def interaction_information(t: EmpiricalTable, S: int, H: Sequence[float] | None = None) -> float:
    """sum_{T <= S} (-1)^{|S - T|} H(T)."""
    k = popcount(S)
    total = 0.0
    for T in _submasks(S):
        h = H[T] if H is not None else entropy(t, T)
        total += -h if (k - popcount(T)) % 2 else h
    return total


def interaction_vector(H: Sequence[float], n: int) -> list[float]:
    """Mobius transform of a set function over subsets (all S at once)."""
    return subset_mobius(list(H), n)


def _submasks(S: int):
    T = S
    while True:
        yield T
        if T == 0:
            return
        T = (T - 1) & S


def inner_product(u, f) -> float:
    """sum_A u(A) f(A); u an Imset or dense vector, f a dense vector or callable."""
    if isinstance(u, Imset):
        items = u.items()
    else:
        items = ((S, x) for S, x in enumerate(u) if x)
    get: Callable = f if callable(f) else f.__getitem__
    return sum(x * get(S) for S, x in items)


@dataclass
class ScoreReport:
    score: float
    inner: float  # <c_G, I>
    d: int  # |S(G)|, the empty set excluded
    N: int

    @property
    def loglik(self) -> float:
        return self.N * self.inner

    def record(self) -> dict:
        return {"score": self.score, "inner": self.inner, "d": self.d, "N": self.N, "loglik": self.loglik}


def imset_score(g: Admg, t: EmpiricalTable) -> ScoreReport:
    """-2N <c_G, I> + |S(G)| log N with plug-in interaction information."""
    if tuple(t.labels) != tuple(g.labels):
        t = t.reorder(g.labels)
    H = entropy_vector(t)
    I = interaction_vector(H, g.n)
    c = characteristic_imset(g)
    inner = inner_product(c, I)
    d = bin(pset_bits(g)).count("1") - (pset_bits(g) & 1)
    N = t.N
    return ScoreReport(-2 * N * inner + d * math.log(N), inner, d, N)


# ---------------------------------------------------------------------------
# exact distributions


@dataclass
class Distribution:
    """Joint probability table, axis j = variable j."""

    p: np.ndarray

    @property
    def n(self) -> int:
        return self.p.ndim

    def marginal(self, S: int) -> np.ndarray:
        axes = tuple(j for j in range(self.n) if not S >> j & 1)
        return self.p.sum(axis=axes) if axes else self.p

    def entropy(self, S: int) -> float:
        if not S:
            return 0.0
        q = self.marginal(S).ravel()
        q = q[q > 0]
        return float(np.sum(q * np.log(q)))

    def entropy_vector(self) -> list[float]:
        return [self.entropy(S) for S in range(1 << self.n)]

    def kl_vector(self, other: "Distribution") -> list[float]:
        """KL(P_S || Q_S) for every S."""
        out = []
        for S in range(1 << self.n):
            if not S:
                out.append(0.0)
                continue
            a = self.marginal(S).ravel()
            b = other.marginal(S).ravel()
            m = a > 0
            out.append(float(np.sum(a[m] * np.log(a[m] / b[m]))))
        return out

    def sample(self, rng: random.Random, N: int) -> list[tuple]:
        flat = self.p.ravel()
        cum = np.cumsum(flat)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, [rng.random() for _ in range(N)], side="right")
        return [tuple(int(x) for x in np.unravel_index(i, self.p.shape)) for i in idx]


def _random_cpd(rng: random.Random, k: int) -> list[float]:
    w = [rng.random() + 0.05 for _ in range(k)]
    s = sum(w)
    return [x / s for x in w]


def dag_distribution(parents: Sequence[int], order: Sequence[int], card: Sequence[int], rng: random.Random) -> np.ndarray:
    """Joint table of a DAG (parent masks) with random strictly positive CPDs."""
    n = len(parents)
    p = np.ones(tuple(card))
    for v in order:
        pa = list(bits(parents[v]))
        cpd = np.zeros(tuple(card[j] for j in pa) + (card[v],))
        for cfg in itertools.product(*(range(card[j]) for j in pa)):
            cpd[cfg] = _random_cpd(rng, card[v])
        # broadcast cpd over the full table
        shape = [1] * n
        for j in pa:
            shape[j] = card[j]
        shape[v] = card[v]
        perm = sorted(range(len(pa) + 1), key=lambda k: (pa + [v])[k])
        p = p * np.transpose(cpd, perm).reshape(shape)
    return p


def _topological(parents: Sequence[int]) -> list[int]:
    n = len(parents)
    done, order = 0, []
    while len(order) < n:
        for v in range(n):
            if not done >> v & 1 and parents[v] & ~done == 0:
                order.append(v)
                done |= 1 << v
    return order


def random_dag_distribution(g: Admg, rng: random.Random, card: int = 2) -> Distribution:
    """Exact joint Markov to the DAG g (directed edges only)."""
    if g.bidirected:
        raise GraphError("graph has bidirected edges; use latent_distribution")
    return Distribution(dag_distribution(g.pa, _topological(g.pa), [card] * g.n, rng))


def latent_distribution(g: Admg, rng: random.Random, card: int = 2, latent_card: int = 2) -> Distribution:
    """Marginal of a DAG with one hidden parent per bidirected edge of g.

    The hidden DAG has the directed edges of g, plus h -> a, h -> b for each
    a <-> b; its latent projection is g, so the marginal over the observed
    variables is Markov to g.
    """
    n = g.n
    edges = sorted(g.bidirected)
    parents = list(g.pa) + [0] * len(edges)
    for k, (a, b) in enumerate(edges):
        h = n + k
        parents[a] |= 1 << h
        parents[b] |= 1 << h
    cards = [card] * n + [latent_card] * len(edges)
    joint = dag_distribution(parents, _topological(parents), cards, rng)
    if edges:
        joint = joint.sum(axis=tuple(range(n, n + len(edges))))
    return Distribution(joint)


def random_joint(rng: random.Random, n: int, card: int = 2) -> Distribution:
    w = np.array([rng.random() + 0.05 for _ in range(card**n)]).reshape((card,) * n)
    return Distribution(w / w.sum())


def entropy_identity_check(g: Admg, p: Distribution) -> float:
    """|H(X_V) - <c_G, I>|; zero up to rounding when p is Markov to g."""
    if p.n != g.n:
        raise ValueError("distribution and graph have different numbers of variables")
    H = p.entropy_vector()
    I = interaction_vector(H, g.n)
    return abs(H[-1] - inner_product(characteristic_imset(g), I))


def zeta_roundtrip_error(H: Sequence[float], n: int) -> float:
    """max_S |sum_{T <= S} I(T) - H(S)| for I the Mobius transform of H."""
    back = subset_sum(interaction_vector(H, n), n)
    return max(abs(a - b) for a, b in zip(back, H))
