import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_census
from smoothflip.errors import DependentVectorsError, ValidationError
from smoothflip.flip import FlipTrace, run_flip
from smoothflip.instance import Configuration, DistributionSpec, cut_weight
from smoothflip.lab import (
    CSV_COLUMNS,
    ExperimentPlan,
    eps_improving_census,
    mc_lemma_probability,
    rows_to_csv,
    run_experiment,
    smoothed_instance,
    trial_rng,
)

U = DistributionSpec(-1, 1)


def within(report, exact, slack=4):
    return abs(report.probability - exact) <= slack * report.half_width + 1e-12


def test_mc_single_vector():
    r = mc_lemma_probability([[1]], [U], 0.2, 200_000, seed=1)
    assert r.k == 1 and r.phi == 0.5 and r.bound == pytest.approx(0.1)
    assert within(r, 0.1)


def test_mc_two_independent_coordinates():
    r = mc_lemma_probability([[1, 0], [0, 1]], [U, U], 0.2, 200_000, seed=2)
    assert r.bound == pytest.approx(0.01) and within(r, 0.01)


def test_mc_dependent_direction_is_bounded():
    r = mc_lemma_probability([[1, 0], [1, 1]], [U, U], 0.2, 200_000, seed=3)
    assert r.probability <= r.bound + 3 * r.half_width


def test_mc_three_vectors_inequality():
    r = mc_lemma_probability([[1, 0, 0], [1, 1, 0], [0, 1, 1]], [U, U, U], 0.3, 200_000, seed=4)
    assert r.probability <= r.bound + 4 * r.half_width


def test_mc_refusals():
    with pytest.raises(DependentVectorsError) as info:
        mc_lemma_probability([[1, 1], [2, 2]], [U, U], 0.1, 10)
    combo = info.value.combination
    assert 1 * combo[0] + 2 * combo[1] == 0 and any(combo)
    with pytest.raises(ValidationError):
        mc_lemma_probability([[1]], [U], 0, 10)
    with pytest.raises(ValidationError):
        mc_lemma_probability([[1, 0]], [U], 0.1, 10)
    with pytest.raises(ValidationError):
        mc_lemma_probability([[1]], [U], 0.1, 0)


def test_mc_is_seeded():
    a = mc_lemma_probability([[1]], [U], 0.2, 5000, seed=9)
    b = mc_lemma_probability([[1]], [U], 0.2, 5000, seed=9)
    assert a == b


def test_plan_validation():
    with pytest.raises(ValidationError):
        ExperimentPlan("torus", (8,), (1.0,))
    with pytest.raises(ValidationError):
        ExperimentPlan("complete", (8,), (1.0,), trials=0)
    with pytest.raises(ValidationError):
        ExperimentPlan("complete", (1,), (1.0,))
    with pytest.raises(ValidationError):
        ExperimentPlan("complete", (8,), (0.1,))
    with pytest.raises(ValidationError):
        ExperimentPlan("complete", (8,), (1.0,), rule="worst")


def test_smoothed_instance_respects_density():
    rng = np.random.default_rng(0)
    for phi in (0.5, 1.0, 4.0, 50.0):
        inst = smoothed_instance("complete", 10, phi, rng)
        for w, d in zip(inst.weights, inst.dists):
            assert d.lo <= w <= d.hi and -1 <= d.lo and d.hi <= 1
            assert d.density == pytest.approx(phi)
    er = smoothed_instance("erdos-renyi", 12, 1.0, rng, p=0.3)
    bd = smoothed_instance("bounded-degree", 12, 1.0, rng, degree=3)
    assert len(er.edges) < 66
    degree = [0] * 13
    for u, v in bd.edges:
        degree[u] += 1
        degree[v] += 1
    assert max(degree) <= 3


def test_trial_streams_are_counter_based():
    a = trial_rng(5, 1, 2).random(3)
    assert (a == trial_rng(5, 1, 2).random(3)).all()
    assert not (a == trial_rng(5, 2, 1).random(3)).all()


def test_pinned_sixteen_node_cell():
    rows = run_experiment(ExperimentPlan("complete", (16,), (0.5,), "best", 100, 0))
    (row,) = rows
    assert row["timeouts"] == 0 and row["trials"] == 100
    assert row["max_steps"] == 12 and row["mean_steps"] == pytest.approx(5.52)


def test_max_steps_grow_with_n():
    rows = run_experiment(ExperimentPlan("complete", (8, 16, 32), (0.5,), "best", 20, 0))
    steps = [r["max_steps"] for r in rows]
    assert steps == [4, 10, 17] and steps == sorted(steps)


def test_experiment_independent_of_workers():
    plan = ExperimentPlan("erdos-renyi", (8, 12), (1.0, 5.0), "random", 6, 11, p=0.4)
    serial = rows_to_csv(run_experiment(plan, 1))
    assert serial == rows_to_csv(run_experiment(plan, 4))
    assert serial.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert len(serial.splitlines()) == 1 + 4


def test_step_cap_hits_are_counted():
    rows = run_experiment(ExperimentPlan("complete", (16,), (0.5,), "first", 10, 0, step_cap=1))
    assert rows[0]["timeouts"] > 0 and rows[0]["max_steps"] <= 1


def _trace(seed, n=8):
    rng = np.random.default_rng(seed)
    inst = smoothed_instance("complete", n, 1.0, rng)
    init = Configuration.from_list([int(x) for x in rng.choice([-1, 1], size=n)])
    return inst, init, run_flip(inst, init, "random", seed=seed)


def test_census_extremes():
    inst, init, t = max((_trace(seed, 16) for seed in range(10)), key=lambda x: x[2].steps)
    assert t.steps > 4
    tiny = min(t.gains) / 2
    windows_with_arcs = brute_census(list(t.moves), list(t.gains), float("inf"), 4)
    assert eps_improving_census(t, tiny, 4) == 0
    big = 2 * max(abs(cut_weight(inst, init)), sum(abs(w) for w in inst.weights))
    assert eps_improving_census(t, big, 4) == windows_with_arcs
    assert eps_improving_census(t, big, len(t.moves) + 1) == 0
    with pytest.raises(ValidationError):
        eps_improving_census(t, 0.1, 0)


def test_census_half_open_boundary():
    c = Configuration.from_list([1, 1])
    t = FlipTrace(c, (1, 2, 1), (0.25, 0.5, 0.25), c, True)
    assert eps_improving_census(t, 0.5, 3) == 1
    assert eps_improving_census(t, 0.49, 3) == 0
    t0 = FlipTrace(c, (1, 2, 1), (0.25, 0.5, -0.25), c, True)
    assert eps_improving_census(t0, 0.5, 3) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.01, 3.0), st.integers(1, 12))
def test_census_matches_window_scan(seed, eps, window):
    _, _, t = _trace(seed, 7)
    assert eps_improving_census(t, eps, window) == brute_census(list(t.moves), list(t.gains), eps, window)


def test_z_quantile_constant():
    from statistics import NormalDist
    from smoothflip.lab import Z99
    assert math.isclose(Z99, NormalDist().inv_cdf(0.995), rel_tol=1e-12)
