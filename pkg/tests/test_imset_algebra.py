import itertools
import random
from collections import defaultdict

import pytest

from conftest import load
from magset.generators import all_topological_mags, random_mag
from magset.graph_core import Admg, CITriple, all_triples, cycle_graph
from magset.heads import constrained_sets, pset_bits
from magset.imset_algebra import (
    ElementaryBasis,
    Imset,
    NotStructural,
    characteristic_from_standard,
    characteristic_imset,
    cone_lp,
    dag_imset,
    degree,
    delta,
    induced_model,
    is_combinatorial,
    is_structural,
    mobius_roundtrip,
    moment_filters_hold,
    moment_vector,
    represents,
    semi_elementary,
    standard_from_characteristic,
    standard_imset,
    standard_imset_closed_form,
    sum_semi_elementary,
)
from magset.markov_props import graph_model


def u_t(g, A, B, C=()):
    return semi_elementary(g.n, g.triple(A, B, C))


def d(g, *labels):
    return delta(g.n, g.mask(*labels))


# -- basic algebra -----------------------------------------------------------------


def test_semi_elementary_definition():
    g = Admg(2)
    assert u_t(g, [1], [2]) == d(g, 1, 2) - d(g, 1) - d(g, 2) + d(g)


def test_semi_elementary_with_set_side():
    g = Admg(4)
    assert u_t(g, [4], [1, 2], [3]) == d(g, 1, 2, 3, 4) - d(g, 3, 4) - d(g, 1, 2, 3) + d(g, 3)


def test_semi_elementary_symmetric():
    g = Admg(4)
    assert u_t(g, [1], [2, 3], [4]) == u_t(g, [2, 3], [1], [4])


def test_imset_zero_entries_absent():
    u = Imset(3, {1: 0, 3: 2})
    assert u.coef == {3: 2}
    assert (u - u).coef == {}


def test_elementary_basis_size():
    for n in range(2, 6):
        basis = ElementaryBasis.build(n)
        assert len(basis) == n * (n - 1) // 2 * 2 ** (n - 2)
        assert len({basis.imset(j) for j in range(len(basis))}) == len(basis)


# -- imsets of graphs --------------------------------------------------------------


def test_characteristic_of_dag():
    g = load("dag4")
    c = characteristic_imset(g)
    for S in range(1, 16):
        expected = any(S >> i & 1 and (S & ~(1 << i)) & ~g.pa[i] == 0 for i in range(4))
        assert c[S] == int(expected)


def test_characteristic_boundary():
    c = characteristic_imset(Admg(1))
    assert c[1] == 1 and c[0] == 1  # c(empty) = 1 keeps the Mobius pair exact


def test_characteristic_mag4_nonadjacent():
    g = load("mag4")
    assert characteristic_imset(g)[g.mask(1, 3)] == 0


def test_standard_imset_dag4():
    g = load("dag4")
    assert standard_imset(g) == u_t(g, [4], [1, 2], [3]) + u_t(g, [1], [2])


def test_standard_imset_mag4():
    g = load("mag4")
    expected = d(g, 1, 2, 3, 4) - d(g, 1, 3, 4) - d(g, 1, 2, 3) + 2 * d(g, 1, 3) - d(g, 3) - d(g, 1) + d(g)
    assert standard_imset(g) == expected
    assert standard_imset(g)[g.mask(1, 3)] == 2


def test_complete_dag_zero_imset():
    g = Admg(4, [(i, j) for i, j in itertools.combinations(range(4), 2)])
    assert standard_imset(g) == Imset(4)


def test_both_standard_formulas_agree():
    rng = random.Random(0)
    for _ in range(300):
        g = random_mag(rng, rng.randint(1, 6))
        u = standard_from_characteristic(characteristic_imset(g))
        assert u == standard_imset_closed_form(g)
        if not g.bidirected:
            assert u == dag_imset(g)


# -- Mobius pair ----------------------------------------------------------------------


def test_mobius_roundtrip_mag4():
    u = standard_imset(load("mag4"))
    c = characteristic_from_standard(u)
    assert c == characteristic_imset(load("mag4"))
    assert mobius_roundtrip(u) == u


def test_zero_imset_gives_all_ones():
    c = characteristic_from_standard(Imset(3))
    assert c.dense() == [1] * 8


def test_random_characteristic_roundtrip():
    rng = random.Random(1)
    for _ in range(50):
        c = Imset.from_dense(4, [rng.randint(0, 1) for _ in range(16)])
        assert characteristic_from_standard(standard_from_characteristic(c)) == c


# -- cone membership ------------------------------------------------------------------


def test_elementary_is_combinatorial():
    g = Admg(3)
    u = u_t(g, [1], [2])
    cert = is_combinatorial(u)
    assert cert is not None and cert.k == 1 and cert.triples() == [g.triple([1], [2])]


def test_difference_not_combinatorial_nor_structural():
    g = Admg(3)
    u = u_t(g, [1], [2], [3]) - u_t(g, [1], [2])
    assert is_combinatorial(u) is None
    assert is_structural(u) is None


def test_bidirected6_k2_needs_multiplier_two():
    g = load("bidirected6_k2")
    u = standard_imset(g)
    assert is_combinatorial(u) is None
    cert = is_structural(u)
    assert cert is not None and cert.k == 2
    assert cert.total() == 2 * u


def test_cycle6_not_structural():
    u = standard_imset(cycle_graph(6))
    assert is_combinatorial(u) is None
    assert is_structural(u) is None
    lp = cone_lp(moment_vector(u), 6)
    assert not lp.feasible and lp.farkas


def test_combinatorial_has_k1():
    u = standard_imset(load("mag6_multilabel"))
    cert = is_structural(u)
    assert cert.k == 1


def test_certificates_avoid_parametrizing_sets():
    rng = random.Random(2)
    for _ in range(60):
        g = random_mag(rng, rng.randint(2, 6))
        cert = is_structural(standard_imset(g))
        if cert is None:
            continue
        fam = pset_bits(g)
        for t in cert.triples():
            assert all(not fam >> S & 1 for S in constrained_sets(t))


# -- represented statements -------------------------------------------------------------


def test_cycle5_represented_statements():
    g = cycle_graph(5)
    u = standard_imset(g)
    assert represents(u, g.triple([1], [3], [4]))
    assert not represents(u, g.triple([1], [3]))


def test_non_structural_model_undefined():
    u = standard_imset(cycle_graph(6))
    with pytest.raises(NotStructural):
        represents(u, CITriple(1, 4))


def test_certificate_summand_is_represented():
    g = load("mag6_multilabel")
    u = standard_imset(g)
    for t in is_structural(u).triples():
        assert represents(u, t)


def test_zero_imset_model_is_empty():
    assert induced_model(Imset(3)) == set()


def test_cycle5_elementary_model():
    g = cycle_graph(5)
    model = induced_model(standard_imset(g))
    expected = set()
    for a, b, c in [(1, 3, 4), (2, 4, 5), (3, 5, 1), (4, 1, 2), (5, 2, 3), (1, 3, 5), (2, 4, 1), (3, 5, 2), (4, 1, 3), (5, 2, 4)]:
        expected.add(g.triple([a], [b], [c]).canonical())
    assert model == expected


def test_mag4_all_triples_model_equals_separations():
    g = load("mag4")
    assert induced_model(standard_imset(g), "all-triples") == graph_model(g, "all-triples")


def test_dag_models_are_perfect():
    for n in range(1, 5):
        for g in all_topological_mags(n):
            if g.bidirected:
                continue
            assert induced_model(standard_imset(g), "all-triples") == graph_model(g, "all-triples")
    # n = 5 exhaustively on elementary statements (both models are semigraphoids)
    pairs = list(itertools.combinations(range(5), 2))
    for mask in range(1 << len(pairs)):
        g = Admg(5, [p for k, p in enumerate(pairs) if mask >> k & 1])
        assert induced_model(standard_imset(g)) == graph_model(g)


def test_rational_scaling_gives_integer_multiplier():
    # when represents() holds, some k*u - u_t is combinatorial: u_t is itself
    # combinatorial, so clearing the denominators of a rational solution works
    g = load("bidirected6_k2")
    u = standard_imset(g)
    found = 0
    for t in all_triples(6, elementary=True):
        if found == 6:
            break
        if not represents(u, t):
            continue
        ut = semi_elementary(6, t)
        assert is_combinatorial(ut) is not None
        assert any(is_combinatorial(k * u - ut) is not None for k in range(1, 5))
        found += 1
    assert found == 6


# -- degree ------------------------------------------------------------------------------


def test_degree_elementary():
    g = Admg(2)
    dg = degree(u_t(g, [1], [2]))
    assert dg.exact and dg.value == 1


def test_degree_cycle5():
    dg = degree(standard_imset(cycle_graph(5)))
    assert dg.exact and dg.value == 5 and dg.k == 1


def test_degree_non_structural():
    with pytest.raises(NotStructural):
        degree(standard_imset(cycle_graph(6)))


# -- moments and equivalence ------------------------------------------------------------------


def test_moment_filters_on_semi_elementary():
    rng = random.Random(4)
    for _ in range(500):
        n = rng.randint(2, 6)
        labels = list(range(n))
        rng.shuffle(labels)
        a = rng.randint(1, n - 1)
        b = rng.randint(1, n - a)
        c = rng.randint(0, n - a - b)
        A = sum(1 << v for v in labels[:a])
        B = sum(1 << v for v in labels[a : a + b])
        C = sum(1 << v for v in labels[a + b : a + b + c])
        assert moment_filters_hold(semi_elementary(n, CITriple(A, B, C)))


def test_equivalence_three_ways_n4():
    by_pset, by_imset, by_model = defaultdict(set), defaultdict(set), defaultdict(set)
    graphs = list(all_topological_mags(4))
    for k, g in enumerate(graphs):
        by_pset[pset_bits(g)].add(k)
        by_imset[tuple(standard_imset(g).dense())].add(k)
        by_model[frozenset(graph_model(g, "all-triples"))].add(k)
    parts = [sorted(map(frozenset, p.values()), key=min) for p in (by_pset, by_imset, by_model)]
    assert parts[0] == parts[1] == parts[2]


def test_sum_semi_elementary_signs():
    g = Admg(3)
    t1, t2 = g.triple([1], [2]), g.triple([1], [3], [2])
    assert sum_semi_elementary(3, [t1, t2], [1, -1]) == semi_elementary(3, t1) - semi_elementary(3, t2)
