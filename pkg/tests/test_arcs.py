from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    cover_intervals,
    naive_arcs,
    naive_interior,
    naive_pred_succ,
    naive_rank,
    simulated_vector,
)
from smoothflip.arcs import (
    NEG_INF,
    POS_INF,
    Arc,
    MoveSequence,
    arc_matrix,
    arc_radius,
    build_cover,
    chunk_of_length,
    classify,
    default_configuration,
    dense_interval_ok,
    find_arcs,
    find_dense_interval,
    group_width,
    improvement_vector,
    inner_product,
    interior,
    is_arc,
    is_eps_improving,
    is_nontrivial,
    pred_succ,
    radius,
    random_nontrivial_sequence,
    rank_of_arcs,
)
from smoothflip.errors import DomainError, TrivialArcError, ValidationError
from smoothflip.flip import replay, run_flip
from smoothflip.instance import (
    Configuration,
    WeightedInstance,
    complete_edges,
    graph,
    sample_weights,
    uniform_dists,
)

A, B, C = 1, 2, 3


def seq(*moves):
    return MoveSequence(tuple(moves))


def test_find_arcs_example():
    s = seq(A, B, A, C, B, A)
    assert find_arcs(s) == [Arc(1, 3, A), Arc(2, 5, B), Arc(3, 6, A)]
    assert len(find_arcs(s)) == 6 - len(s.active)
    assert find_arcs(seq(1, 2, 3)) == []


def test_active_sets_partition():
    s = seq(A, B, A, C)
    assert s.active == {A, B, C} and s.once == {B, C} and s.repeated == {A}


def test_pred_succ_examples():
    s = seq(A, B, A)
    assert pred_succ(s, 3) == (1, POS_INF)
    assert pred_succ(s, 2) == (NEG_INF, POS_INF)
    with pytest.raises(ValidationError):
        pred_succ(s, 4)


def test_radius_examples():
    # pred at distance 5 (inclusive count) and succ at distance 4
    s = seq(9, 1, 2, 3, 9, 4, 5, 9)
    assert radius(s, 5) == 5
    assert radius(seq(A, B, A), 2) is POS_INF


def test_infinity_sentinels():
    assert NEG_INF < -10 ** 9 < 10 ** 9 < POS_INF
    assert max(3, POS_INF) is POS_INF
    with pytest.raises(TypeError):
        POS_INF + 1
    with pytest.raises(TypeError):
        2 * NEG_INF


def test_interior_examples():
    g1 = graph(2, [(A, B)])
    assert interior(seq(A, B, A), Arc(1, 3, A), g1) == (2,)
    assert interior(seq(A, B, B, A), Arc(1, 4, A), g1) == ()
    with pytest.raises(TrivialArcError):
        arc_radius(seq(A, B, B, A), Arc(1, 4, A), g1)
    g2 = graph(3, [(A, B), (A, C)])
    s = seq(A, B, C, B, B, A)
    assert interior(s, Arc(1, 6, A), g2) == tuple(naive_interior(list(s.moves), g2.edges, 1, 6)) == (2, 3, 4, 5)
    s = seq(A, B, C, B, A)
    assert interior(s, Arc(1, 5, A), g2) == (3,)


def test_vector_example():
    g = graph(3, [(A, B), (A, C)])
    s = seq(A, B, A)
    v = improvement_vector(s, Arc(1, 3, A), default_configuration(s), g)
    assert v == {0: 2}
    assert improvement_vector(seq(A, B, B, A), Arc(1, 4, A), default_configuration(seq(A, B, B, A)), g) == {}
    with pytest.raises(DomainError):
        improvement_vector(s, Arc(1, 3, A), Configuration({A: 1}), g)


def test_star_rank_example():
    g = graph(2, [(1, 2)])
    s = seq(1, 2, 1, 2, 1)
    arcs = find_arcs(s)
    vecs = [improvement_vector(s, a, default_configuration(s), g) for a in arcs]
    assert sorted(v[0] for v in vecs) == [-2, 2, 2]
    assert rank_of_arcs(s, arcs, g) == 1
    assert rank_of_arcs(s, [], g) == 0


def test_eps_improving_examples():
    inst = WeightedInstance(2, ((1, 2),), (0.04,))
    s = seq(1, 2, 1)
    gamma = Configuration({1: -1, 2: -1})
    assert is_eps_improving(s, [Arc(1, 3, 1)], gamma, inst, 0.1)
    assert not is_eps_improving(s, [Arc(1, 3, 1)], gamma, inst, 0.05)
    trivial = seq(1, 2, 2, 1)
    assert not is_eps_improving(trivial, [Arc(1, 4, 1)], gamma, inst, 0.1)
    with pytest.raises(ValidationError):
        is_eps_improving(s, [], gamma, inst, 0)


def test_classify_examples():
    assert chunk_of_length(5) == 3 and chunk_of_length(4) == 2 and chunk_of_length(2) == 1
    assert group_width(2) == 1 and group_width(16) == 2 and group_width(17) == 3
    assert group_width(512) == 3 and group_width(513) == 4
    # arc of length 3 with neighbouring occurrences of its node at distance >= 3
    s = seq(1, 2, 3, 1, 2, 1, 3, 2, 1)
    g = graph(3, complete_edges(3))
    cls = classify(s, g)
    a = Arc(4, 6, 1)
    assert a in cls.arcs and a in cls.good


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 7).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, n), max_size=40))))
def test_arcs_pred_succ_interior_against_oracles(data):
    n, moves = data
    s = MoveSequence(tuple(moves))
    g = graph(n, complete_edges(n)[::2])
    got = [(a.left, a.right, a.node) for a in find_arcs(s)]
    assert got == naive_arcs(moves)
    assert len(got) >= len(moves) - n
    for k in range(1, len(moves) + 1):
        p, q = naive_pred_succ(moves, k)
        gp, gq = pred_succ(s, k)
        assert (gp if gp is not NEG_INF else None) == p
        assert (gq if gq is not POS_INF else None) == q
        expect = max(k - p + 1 if p else POS_INF, q - k + 1 if q else POS_INF)
        assert radius(s, k) == expect
    for a in find_arcs(s):
        assert is_arc(s, a)
        assert list(interior(s, a, g)) == naive_interior(moves, g.edges, a.left, a.right)


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 7), st.integers(0, 10 ** 6), st.integers(0, 60))
def test_gain_identity_and_vector_oracle(n, seed, length):
    inst = sample_weights(WeightedInstance(n, tuple(complete_edges(n)), dists=uniform_dists(n * (n - 1) // 2)),
                          seed, exact=True)
    rng = np.random.default_rng(seed)
    moves = [int(x) for x in rng.integers(1, n + 1, size=length)]
    init = [int(x) for x in rng.choice([-1, 1], size=n)]
    gamma = Configuration.from_list(init)
    gains, _ = replay(inst, gamma, moves)
    s = MoveSequence(tuple(moves))
    for a in find_arcs(s):
        v = improvement_vector(s, a, gamma, inst)
        assert v == simulated_vector(moves, inst.edges, init, a.left, a.right)
        assert set(x for x in v.values()) <= {-2, 2}
        assert inner_product(v, inst.weights) == gains[a.left - 1] + gains[a.right - 1]


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7), st.integers(0, 10 ** 6))
def test_rank_is_configuration_invariant(n, seed):
    rng = np.random.default_rng(seed)
    g = graph(n, complete_edges(n))
    s = MoveSequence(tuple(int(x) for x in rng.integers(1, n + 1, size=4 * n)))
    arcs = [a for a in find_arcs(s) if rng.random() < 0.7]
    base = rank_of_arcs(s, arcs, g)
    for _ in range(5):
        gamma = Configuration.from_list([int(x) for x in rng.choice([-1, 1], size=n)])
        m = arc_matrix(s, arcs, gamma, g)
        assert m.rank() == base
        assert naive_rank(m.dense()) == base


def test_distinct_node_arcs_have_half_rank():
    rng = np.random.default_rng(4)
    for _ in range(30):
        g = graph(8, complete_edges(8))
        s = random_nontrivial_sequence(g, 30, rng)
        by_node = {}
        for a in find_arcs(s):
            by_node.setdefault(a.node, a)
        chosen = list(by_node.values())
        assert 2 * rank_of_arcs(s, chosen, g) >= len(chosen)


def test_cover_example():
    c = build_cover(10, 2)
    assert c.even == ((1, 4), (5, 8))
    assert c.odd == ((3, 6), (7, 10))
    assert c.boundary == (7, 10)
    with pytest.raises(ValidationError):
        build_cover(10, 6)


def test_cover_exhaustive_small():
    for m in range(2, 65):
        for ell in range(1, m // 2 + 1):
            c = build_cover(m, ell)
            assert sorted(c.intervals) == sorted(cover_intervals(m, ell))
            mult = [0] * (m + 1)
            for a, b in c.distinct:
                assert b - a + 1 == 2 * ell and 1 <= a and b <= m
                for k in range(a, b + 1):
                    mult[k] += 1
            assert max(mult) <= 3
            for left in range(1, m - ell + 2):
                assert any(a <= left and left + ell - 1 <= b for a, b in c.distinct)


def test_dense_interval_singleton_and_inequality():
    arc = Arc(5, 7, 1)
    a, b = find_dense_interval(20, [arc], [5, 7], 3)
    assert arc.inside(a, b)
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = int(rng.integers(10, 80))
        ell = int(rng.integers(1, m // 2 + 1))
        arcs = []
        for _ in range(int(rng.integers(1, 15))):
            length = int(rng.integers(2, ell + 1)) if ell >= 2 else 1
            left = int(rng.integers(1, m - length + 2))
            arcs.append(Arc(left, left + length - 1, 1))
        points = sorted({int(x) for x in rng.integers(1, m + 1, size=10)})
        a, b = find_dense_interval(m, arcs, points, ell)
        inside = sum(1 for x in arcs if x.inside(a, b))
        in_p = sum(1 for p in points if a <= p <= b)
        assert Fraction(inside, len(arcs)) >= max(Fraction(2 * ell, 16 * m), Fraction(in_p, 4 * len(points)))
        assert dense_interval_ok(inside, len(arcs), in_p, len(points), m, ell)


def test_random_nontrivial_generator():
    rng = np.random.default_rng(1)
    g = graph(10, complete_edges(10))
    s = random_nontrivial_sequence(g, 50, rng)
    assert s.m == 50 and is_nontrivial(s, g)


def test_flip_traces_are_nontrivial():
    inst = sample_weights(WeightedInstance(8, tuple(complete_edges(8)), dists=uniform_dists(28)), 2)
    t = run_flip(inst, Configuration.from_list([1] * 8), "first")
    assert is_nontrivial(MoveSequence(t.moves), inst)
