import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcoarse import (
    DeviationTrace,
    DistinguishPlan,
    GroverPlan,
    RngStream,
    bbbv_deviation,
    bipartition_from_shapes,
    distinguish_sim,
    grover_search_2d,
    grover_search_full,
    haar_sector_ensemble,
    pairwise_reduced_distances,
    plan_distinguish,
    pure_pair_at_distance,
    trace_distance,
)


# ----------------------------------------------------------------- the plan


def test_plan_sixteen_one():
    plan = GroverPlan.for_search(16, 1)
    assert plan.predicted_R == 3
    assert plan.theta == pytest.approx(2 * math.asin(0.25), abs=1e-15)
    assert plan.success_probability(3) == pytest.approx(0.9613189697265625,
                                                        abs=1e-12)


def test_plan_four_one_is_exact():
    plan = GroverPlan.for_search(4, 1)
    assert plan.predicted_R == 1
    assert plan.success_probability(1) == pytest.approx(1.0, abs=1e-12)


def test_plan_all_marked():
    plan = GroverPlan.for_search(8, 8)
    assert plan.predicted_R == 0
    assert plan.success_probability(0) == pytest.approx(1.0, abs=1e-12)


def test_plan_rejects_bad_marked_count():
    with pytest.raises(ValueError):
        GroverPlan.for_search(8, 0)
    with pytest.raises(ValueError):
        GroverPlan.for_search(8, 9)
    with pytest.raises(ValueError):
        GroverPlan.for_search(7.5, 1)


def test_plan_rejects_inconsistent_fields():
    with pytest.raises(ValueError):
        GroverPlan(N=16, M=1, theta=2 * math.asin(0.25), predicted_R=50)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4096), st.data())
def test_plan_query_count_and_success_floor(n, data):
    m = data.draw(st.integers(1, n))
    plan = GroverPlan.for_search(n, m)
    assert plan.predicted_R <= math.ceil(math.pi / 4 * math.sqrt(n / m))
    # at the planned count the success probability beats the no-search baseline
    assert plan.success_probability(plan.predicted_R) >= 1 - m / n - 1e-12


# ----------------------------------------------------- 2d vs full simulation


def test_full_simulation_matches_rotation_picture():
    plan = GroverPlan.for_search(8, 1)
    for k in range(6):
        full = grover_search_full(3, [5], k)
        assert abs(full - grover_search_2d(plan, k)) < 1e-10


def test_full_simulation_multiple_marked():
    plan = GroverPlan.for_search(16, 4)
    for k in range(4):
        full = grover_search_full(4, [1, 6, 7, 12], k)
        assert abs(full - grover_search_2d(plan, k)) < 1e-10


def test_zero_iterations_is_uniform_probability():
    assert grover_search_full(4, [3], 0) == pytest.approx(1 / 16, abs=1e-12)
    assert grover_search_full(2, [0, 1, 2, 3], 0) == pytest.approx(1.0, abs=1e-12)


def test_full_simulation_draws_marked_with_rng():
    a = grover_search_full(4, 2, 3, rng=RngStream(5))
    b = grover_search_full(4, 2, 3, rng=RngStream(5))
    assert a == b
    plan = GroverPlan.for_search(16, 2)
    assert abs(a - grover_search_2d(plan, 3)) < 1e-10


def test_full_simulation_input_validation(g):
    with pytest.raises(ValueError):
        grover_search_full(13, [0], 1)          # too many qubits
    with pytest.raises(ValueError):
        grover_search_full(3, [8], 1)           # index out of range
    with pytest.raises(ValueError):
        grover_search_full(3, [], 1)            # empty marked set
    with pytest.raises(ValueError):
        grover_search_full(3, 2, 1)             # count without rng
    with pytest.raises(ValueError):
        grover_search_full(3, [0], -1)          # negative iterations


# ------------------------------------------------------------ distinguishing


def test_plan_distinguish_angles():
    d0 = math.sin(math.pi / 8)
    plan = plan_distinguish(d0)
    assert plan.theta_rs == pytest.approx(math.pi / 4, abs=1e-12)
    assert plan.theta_rs_smallangle == pytest.approx(2 * d0, abs=1e-15)
    assert plan_distinguish(0.01).predicted_iters == pytest.approx(
        19.634954084936208, abs=1e-12)
    assert plan_distinguish(0.001).predicted_iters == pytest.approx(
        196.34954084936206, abs=1e-9)


def test_plan_distinguish_range():
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            plan_distinguish(bad)


def test_pure_pair_hits_requested_distance():
    for d0 in (0.3, 0.05, 0.001):
        r, s = pure_pair_at_distance(d0)
        assert trace_distance(r.density(), s.density()) == pytest.approx(
            d0, abs=1e-12)
    r, s = pure_pair_at_distance(0.2, dim=5)
    assert r.dim == s.dim == 5
    with pytest.raises(ValueError):
        pure_pair_at_distance(0.2, dim=1)


def test_distinguish_one_iteration_at_pi_over_eight():
    r, s = pure_pair_at_distance(math.sin(math.pi / 16))
    out = distinguish_sim(r, s)
    assert out["iters_to_success"] == 1
    assert np.allclose(out["angle_trace"], [math.pi / 8, 3 * math.pi / 8],
                       atol=1e-12)


@pytest.mark.parametrize("d0,expected", [
    (0.1, 2), (0.05, 4), (0.02, 10), (0.01, 20), (0.005, 39), (0.001, 196),
])
def test_distinguish_iteration_table(d0, expected):
    r, s = pure_pair_at_distance(d0)
    out = distinguish_sim(r, s)
    assert out["iters_to_success"] == expected
    # within one iteration of the small-angle estimate
    assert abs(out["iters_to_success"] - math.ceil(math.pi / (16 * d0))) <= 1


def test_distinguish_trace_is_monotone_and_resolves():
    r, s = pure_pair_at_distance(0.013)
    out = distinguish_sim(r, s)
    trace = np.asarray(out["angle_trace"])
    assert np.all(np.diff(trace) > 0)
    assert trace[-1] >= math.pi / 4
    assert np.all(trace[:-1] < math.pi / 4)
    assert isinstance(out["plan"], DistinguishPlan)
    assert out["initial_distance"] == pytest.approx(0.013, abs=1e-12)


def test_distinguish_rejects_degenerate_pairs():
    r, _ = pure_pair_at_distance(0.5)
    with pytest.raises(ValueError):
        distinguish_sim(r, r)
    a, b = pure_pair_at_distance(0.3, dim=2)
    ortho = type(a)(np.array([0.0, 1.0], dtype=complex))
    with pytest.raises(ValueError):
        distinguish_sim(a, ortho)


def test_distinguish_matches_measured_ensemble_distance():
    # end to end: measure a typical reduced-state separation, then check the
    # amplification cost tracks ceil(pi / (16 D)) for that measured D
    bp = bipartition_from_shapes([(2, 128)])
    ens = haar_sector_ensemble(bp, 0, 12, RngStream(321))
    d_mean = float(np.mean(pairwise_reduced_distances(ens)))
    r, s = pure_pair_at_distance(d_mean)
    out = distinguish_sim(r, s)
    assert abs(out["iters_to_success"] - math.ceil(math.pi / (16 * d_mean))) <= 1


# -------------------------------------------------------------- progress bound


def test_bbbv_identity_driver_single_query():
    trace = bbbv_deviation(2, driver="identity", k_max=1)
    assert trace.D_k[0] == 0.0
    assert trace.D_k[1] == pytest.approx(4.0, abs=1e-12)


def test_bbbv_first_query_saturates_for_any_driver():
    # before the first query all runs coincide, so D_1 = 4 exactly
    for driver in ("grover", "random", "identity"):
        trace = bbbv_deviation(3, driver=driver, k_max=1, rng=RngStream(8))
        assert trace.D_k[1] == pytest.approx(4.0, abs=1e-9)


def test_bbbv_grover_driver_respects_bound():
    trace = bbbv_deviation(4, driver="grover", k_max=10)
    ratios = trace.D_k[1:] / (4.0 * trace.k_values[1:] ** 2)
    assert np.all(ratios <= 1.0 + 1e-12)
    assert ratios[0] == pytest.approx(1.0, abs=1e-9)
    assert np.all(ratios[1:] < 1.0)


def test_bbbv_random_driver_respects_bound():
    for n_qubits in (4, 6):
        trace = bbbv_deviation(n_qubits, driver="random", k_max=20,
                               rng=RngStream(99, n_qubits))
        assert np.all(trace.D_k <= 4.0 * trace.k_values ** 2 + 1e-9)


def test_bbbv_marked_subset():
    trace = bbbv_deviation(3, marked_range=[0, 5], driver="grover", k_max=5)
    assert trace.D_k[1] == pytest.approx(2 * 4.0 / 8, abs=1e-12)


def test_bbbv_input_validation():
    with pytest.raises(ValueError):
        bbbv_deviation(9, driver="grover")
    with pytest.raises(ValueError):
        bbbv_deviation(3, driver="walsh")
    with pytest.raises(ValueError):
        bbbv_deviation(3, k_max=0)
    with pytest.raises(ValueError):
        bbbv_deviation(3, marked_range=[])
    with pytest.raises(ValueError):
        bbbv_deviation(3, marked_range=[9])


def test_deviation_trace_rejects_bound_violation():
    with pytest.raises(ValueError, match="progress bound"):
        DeviationTrace(k_values=np.array([0, 1]), D_k=np.array([0.0, 4.1]))
    with pytest.raises(ValueError):
        DeviationTrace(k_values=np.array([0, 1]), D_k=np.array([0.0]))
