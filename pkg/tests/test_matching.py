import numpy as np
import pytest

from aoiplan.inner import assignment_weights
from aoiplan.matching import AssignmentProblem, limit_assignments, min_cost_b_matching
from aoiplan.oracle import oracle_matching


def _assert_feasible(assignment, cap):
    sel = assignment.select
    assert set(np.unique(sel)) <= {0, 1}
    assert sel.sum(axis=0).max(initial=0) <= 1          # one BS per RB
    assert sel.sum(axis=1).max(initial=0) <= cap        # load cap per BS


def test_all_positive_weights_empty():
    prob = AssignmentProblem(np.array([[1.0, 2.0], [3.0, 0.5]]), 1)
    out = min_cost_b_matching(prob)
    assert out.select.sum() == 0
    assert out.total_weight == 0.0


def test_single_negative_entry():
    w = np.zeros((2, 2))
    w[0, 0] = -2.0
    out = min_cost_b_matching(AssignmentProblem(w, 1))
    assert out.select[0, 0] == 1
    assert out.select.sum() == 1
    assert out.total_weight == -2.0


def test_zero_weight_edges_never_selected():
    out = min_cost_b_matching(AssignmentProblem(np.zeros((3, 3)), 2))
    assert out.select.sum() == 0


def test_capacity_forces_column_split():
    # both columns prefer row 0, but the cap pushes one to row 1
    w = np.array([[-5.0, -4.0], [-1.0, -3.0]])
    out = min_cost_b_matching(AssignmentProblem(w, 1))
    _assert_feasible(out, 1)
    assert out.total_weight == pytest.approx(-8.0)  # (0,0) + (1,1)
    assert out.select[0, 0] == 1 and out.select[1, 1] == 1


def test_matches_enumeration_on_random_instances():
    rng = np.random.default_rng(20)
    for trial in range(200):
        w = rng.normal(0.0, 1.0, size=(3, 4))
        cap = int(rng.integers(1, 3))
        prob = AssignmentProblem(w, cap)
        ours = min_cost_b_matching(prob)
        ref = oracle_matching(prob)
        _assert_feasible(ours, cap)
        assert ours.total_weight == pytest.approx(ref.total_weight, abs=1e-9), trial
        # reported total equals the dot product of the selection
        recomputed = float(np.sum(w[ours.select.astype(bool)]))
        assert abs(ours.total_weight - recomputed) <= 1e-12 * max(1.0, abs(recomputed))


def test_matches_enumeration_under_heavy_conflicts():
    rng = np.random.default_rng(21)
    for trial in range(200):
        w = rng.normal(-2.0, 0.08, size=(3, 4))
        prob = AssignmentProblem(w, 1)
        ours = min_cost_b_matching(prob)
        ref = oracle_matching(prob)
        assert ours.total_weight == pytest.approx(ref.total_weight, abs=1e-9), trial


def test_integral_optimum_equals_lp_relaxation():
    # the constraint matrix is totally unimodular, so the binary optimum
    # must attain the relaxed LP value; scipy's LP solver is the
    # independent reference here
    from scipy.optimize import linprog

    rng = np.random.default_rng(29)
    for trial in range(60):
        N, K = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        cap = int(rng.integers(1, 4))
        w = rng.normal(-0.5, 1.0, size=(N, K))
        ours = min_cost_b_matching(AssignmentProblem(w, cap))
        a_ub, b_ub = [], []
        for n in range(N):  # row load caps
            row = np.zeros(N * K)
            row[n * K:(n + 1) * K] = 1.0
            a_ub.append(row)
            b_ub.append(cap)
        for k in range(K):  # one BS per RB
            row = np.zeros(N * K)
            row[k::K] = 1.0
            a_ub.append(row)
            b_ub.append(1.0)
        res = linprog(w.reshape(-1), A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                      bounds=(0.0, 1.0), method="highs")
        assert res.success
        assert ours.total_weight == pytest.approx(res.fun, abs=1e-8), trial


def test_objective_monotone_in_capacity():
    rng = np.random.default_rng(22)
    for _ in range(50):
        w = rng.normal(-0.5, 1.0, size=(3, 4))
        vals = [
            min_cost_b_matching(AssignmentProblem(w, cap)).total_weight
            for cap in (1, 2, 3, 4)
        ]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_deterministic_output():
    rng = np.random.default_rng(23)
    w = rng.normal(-1.0, 1.0, size=(3, 4))
    a = min_cost_b_matching(AssignmentProblem(w, 1))
    b = min_cost_b_matching(AssignmentProblem(w, 1))
    assert np.array_equal(a.select, b.select)
    assert a.total_weight == b.total_weight


def test_rejects_bad_problems():
    with pytest.raises(ValueError):
        AssignmentProblem(np.zeros((2, 2)), 0)
    with pytest.raises(ValueError):
        AssignmentProblem(np.array([[np.inf, 0.0]]), 1)
    with pytest.raises(ValueError):
        AssignmentProblem(np.zeros(3), 1)


# ---------------------------------------------------------------- limit assignments

def test_limits_below_activation_are_empty():
    iota = np.array([[2.0, 3.0], [4.0, 5.0]])
    lo, hi = limit_assignments(1.0, lambda lv: assignment_weights(lv, iota), 1)
    assert lo.select.sum() == 0 and hi.select.sum() == 0


def test_limits_coincide_away_from_critical():
    iota = np.array([[1.0, 3.0], [2.5, 9.0]])
    lo, hi = limit_assignments(2.0, lambda lv: assignment_weights(lv, iota), 1)
    assert np.array_equal(lo.select, hi.select)
    assert lo.select[0, 0] == 1


def test_limits_split_at_constructed_tie():
    # single cheap RB vs. a pair of slightly worse RBs; the optimal pick
    # switches as the level grows, and at the switch both attain the same
    # objective
    iota = np.array([[1.0, 1.25], [1.21, 50.0]])
    cap = 1

    def weights(level):
        return assignment_weights(level, iota)

    def gap(level):
        single = weights(level)[0, 0]
        pair = weights(level)[0, 1] + weights(level)[1, 0]
        return pair - single

    lo, hi = 1.3, 3.0
    assert gap(lo) > 0 and gap(hi) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    critical = 0.5 * (lo + hi)

    a_minus, a_plus = limit_assignments(critical, weights, cap)
    assert not np.array_equal(a_minus.select, a_plus.select)
    assert a_minus.select.sum() == 1 and a_plus.select.sum() == 2
    w_at = weights(critical)
    obj_minus = float(np.sum(w_at[a_minus.select.astype(bool)]))
    obj_plus = float(np.sum(w_at[a_plus.select.astype(bool)]))
    assert obj_minus == pytest.approx(obj_plus, abs=1e-9)
