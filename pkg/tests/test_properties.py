"""Property tests over hypothesis-generated MAGs, imsets and distributions."""

import itertools
import random

from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from magset.census import same_class
from magset.generators import close_to_mag
from magset.graph_core import Admg, CITriple, is_mag, m_separated, parse_graph, format_graph, popcount
from magset.heads import enumerate_heads, pset_bits
from magset.imset_algebra import (
    Imset,
    characteristic_from_standard,
    characteristic_imset,
    mobius_roundtrip,
    moment_filters_hold,
    semi_elementary,
    standard_from_characteristic,
    standard_imset,
    standard_imset_closed_form,
)
from magset.markov_props import graph_model, markov_equivalent, ordered_local_markov
from magset.power_dag import decompose_standard_imset, markov_list
from magset.scoring import entropy_identity_check, latent_distribution

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def mags(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    perm = draw(st.permutations(range(n)))
    directed, bidirected = [], []
    for i, j in itertools.combinations(range(n), 2):
        s = draw(st.integers(0, 2))
        a, b = perm[i], perm[j]
        if s == 1:
            directed.append((a, b))
        elif s == 2:
            bidirected.append((a, b))
    g = close_to_mag(Admg(n, directed, bidirected))
    assume(is_mag(g))
    return g


@st.composite
def triples(draw, n):
    labels = draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    A = sum(1 << v for v, l in enumerate(labels) if l == 0)
    B = sum(1 << v for v, l in enumerate(labels) if l == 1)
    C = sum(1 << v for v, l in enumerate(labels) if l == 2)
    C &= draw(st.integers(0, (1 << n) - 1))
    assume(A and B)
    return CITriple(A, B, C)


@SETTINGS
@given(mags())
def test_text_roundtrip(g):
    assert parse_graph(format_graph(g)) == g


@SETTINGS
@given(mags())
def test_standard_imset_formulas_agree(g):
    u = standard_imset(g)
    assert u == standard_imset_closed_form(g)
    assert u == standard_from_characteristic(characteristic_imset(g))
    assert characteristic_from_standard(u) == characteristic_imset(g)
    assert moment_filters_hold(u)


@SETTINGS
@given(mags())
def test_characteristic_is_pset_indicator(g):
    c = characteristic_imset(g)
    fam = pset_bits(g)
    for S in range(1, 1 << g.n):
        assert c[S] == (fam >> S & 1)


@SETTINGS
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(-5, 5), min_size=1 << n, max_size=1 << n))))
def test_mobius_roundtrip(arg):
    n, vals = arg
    u = Imset.from_dense(n, vals)
    assert mobius_roundtrip(u) == u


@SETTINGS
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), triples(n))))
def test_semi_elementary_moments(arg):
    n, t = arg
    u = semi_elementary(n, t)
    assert sum(x for _, x in u.items()) == 0
    assert sum(x * popcount(S) for S, x in u.items()) == 0
    assert moment_filters_hold(u)


@SETTINGS
@given(mags(5), st.data())
def test_separation_is_semigraphoid(g, data):
    t = data.draw(triples(g.n))
    if m_separated(g, t):
        assert m_separated(g, CITriple(t.B, t.A, t.C))
        # decomposition and weak union on a split of B
        for b in range(g.n):
            if t.B >> b & 1 and t.B != 1 << b:
                rest = t.B & ~(1 << b)
                assert m_separated(g, CITriple(t.A, rest, t.C))
                assert m_separated(g, CITriple(t.A, rest, t.C | 1 << b))


@SETTINGS
@given(mags())
def test_markov_lists_hold(g):
    for kind in ("refined", "complete"):
        for t in markov_list(g, kind):
            assert m_separated(g, t)
    for t in ordered_local_markov(g):
        assert m_separated(g, t)


@SETTINGS
@given(mags())
def test_signed_decomposition_exact(g):
    dec = decompose_standard_imset(g, check=False)
    assert dec.imset() == standard_imset(g)


@SETTINGS
@given(mags())
def test_heads_barren_and_disjoint(g):
    for rec in enumerate_heads(g):
        assert g.barren(rec.head) == rec.head and rec.head & rec.tail == 0


@SETTINGS
@given(mags(5), st.randoms(use_true_random=False))
def test_relabelling_preserves_class(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = Admg(g.n, [(perm[a], perm[b]) for a, b in g.directed], [(perm[a], perm[b]) for a, b in g.bidirected])
    assert same_class(g, h)


@SETTINGS
@given(mags(4), mags(4))
def test_equivalence_matches_separation_model(g, h):
    if g.n == h.n:
        same = graph_model(g, "all-triples") == graph_model(h, "all-triples")
        assert markov_equivalent(g, h) == same


@settings(max_examples=25, deadline=None)
@given(mags(4), st.integers(0, 2**32 - 1))
def test_entropy_identity(g, seed):
    p = latent_distribution(g, random.Random(seed))
    assert entropy_identity_check(g, p) < 1e-10
