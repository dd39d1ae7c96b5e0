from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp

from tptensor.analytic2d import g1_coefficients, stationary_x
from tptensor.errors import EvaluationError, InputError
from tptensor.solvers import (
    chain_period,
    fixed_point_iterate,
    lifted_chain_matrix,
    matrix_stationary,
    root_scan,
    stationarity_gap,
)
from tptensor.tensor_core import TransitionTensor, make_symmetric2, materialize

# next state is the opposite of the newest one; (1,2) and (2,1) swap forever
ALTERNATING = TransitionTensor.from_flat(3, 2, [0, 0, 1, 1, 1, 1, 0, 0])


def close(found, expected, tol=1e-8):
    return len(found) == len(expected) and all(abs(p - q) <= tol for p, q in zip(found, expected))


def test_root_scan_examples():
    assert close(root_scan(stationarity_gap(make_symmetric2(4, 1.0))).roots, [0.0, 0.5, 1.0])
    assert close(root_scan(stationarity_gap(make_symmetric2(3, 0.0))).roots, [0.0, 0.5])
    for m in (3, 6, 13):
        assert close(root_scan(stationarity_gap(make_symmetric2(m, 0.5))).roots, [0.5])


def test_root_scan_brackets():
    found = root_scan(lambda x: x - 0.3141, grid_points=1001)
    assert close(found.roots, [0.3141], tol=1e-13)
    lo, hi = found.bracketing_intervals[0]
    assert lo <= found.roots[0] <= hi
    assert hi - lo <= 1.01e-3


def test_root_scan_boundary_roots_need_direct_hits():
    found = root_scan(lambda x: x * (1.0 - x), grid_points=1001)
    assert found.roots == (0.0, 1.0)
    assert found.bracketing_intervals[0] == (0.0, 0.0)
    assert root_scan(lambda x: x + 1e-6, grid_points=1001).roots == ()


def test_root_scan_refines_tangential_roots():
    found = root_scan(lambda x: (x - 0.25) ** 2, grid_points=1001)
    assert close(found.roots, [0.25], tol=1e-6)


def test_root_scan_rejects_coarse_grid():
    with pytest.raises(InputError):
        root_scan(lambda x: x - 0.5, grid_points=1000)


def test_root_scan_reports_non_finite_values():
    with pytest.raises(EvaluationError) as info:
        root_scan(lambda x: float("nan"), grid_points=1001)
    assert info.value.x == 0.0


@pytest.mark.parametrize("m", range(3, 9))
@pytest.mark.parametrize("a", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_root_scan_on_expanded_polynomial(m, a):
    family = make_symmetric2(m, a)
    poly = g1_coefficients(family)
    found = root_scan(lambda x: poly.evaluate(float(x)) - float(x), grid_points=1001)
    assert close(found.roots, stationary_x(family))


def test_fixed_point_contracts_to_centre():
    result = fixed_point_iterate(make_symmetric2(4, 0.6), x0=(0.9, 0.1))
    assert result.converged
    assert result.iterate.x == pytest.approx(0.5, abs=1e-9)
    assert result.iterate.residual <= 1e-10
    assert result.rate_estimate <= 0.2 * 3 + 0.05
    assert len(result.residual_history) == result.iterations


def test_fixed_point_stays_on_exact_boundary_point():
    result = fixed_point_iterate(make_symmetric2(3, 1.0), x0=(1.0, 0.0))
    assert result.converged and result.iterations == 1
    assert result.iterate.coords == (1.0, 0.0)


@pytest.mark.parametrize("m", [3, 4, 9])
def test_fixed_point_constant_map(m):
    result = fixed_point_iterate(make_symmetric2(m, 0.5), x0=(0.1, 0.9))
    assert result.converged and result.iterations == 1
    assert result.iterate.coords == pytest.approx((0.5, 0.5), abs=1e-15)


def test_fixed_point_non_convergence_is_data():
    result = fixed_point_iterate(make_symmetric2(4, 0.6), x0=(0.9, 0.1), max_iter=1)
    assert not result.converged
    assert result.iterations == 1
    assert result.residual_history[0] > 1e-10


def test_fixed_point_with_damping_and_dense_input():
    family = make_symmetric2(5, 0.7)
    plain = fixed_point_iterate(materialize(family), x0=(0.2, 0.8))
    damped = fixed_point_iterate(family, x0=(0.2, 0.8), damping=0.5)
    assert plain.converged and damped.converged
    assert plain.iterate.x == pytest.approx(0.5, abs=1e-9)
    assert damped.iterate.x == pytest.approx(0.5, abs=1e-9)


def test_fixed_point_general_dimension():
    t = TransitionTensor.from_flat(3, 3, [1 / 3] * 27)
    result = fixed_point_iterate(t)
    assert result.converged
    np.testing.assert_allclose(result.iterate.coords, [1 / 3] * 3, atol=1e-15)


@pytest.mark.parametrize("kwargs", [{"damping": 1.0}, {"damping": -0.1}, {"max_iter": 0}, {"tol": 0.0}])
def test_fixed_point_argument_checks(kwargs):
    with pytest.raises(InputError):
        fixed_point_iterate(make_symmetric2(3, 0.5), **kwargs)


@pytest.mark.slow
def test_fixed_point_converges_from_every_start_when_contractive():
    starts = [(k / 10, 1 - k / 10) for k in range(11)]
    for m in range(3, 26):
        for k in range(21):
            family = make_symmetric2(m, k / 20)
            bound = family.contraction_bound
            if bound > 0.9:
                continue
            for x0 in starts:
                result = fixed_point_iterate(family, x0=x0, max_iter=2000)
                assert result.converged, (m, family.a, x0)
                assert result.iterate.residual <= 1e-10
                assert result.iterate.x == pytest.approx(0.5, abs=1e-8)
                assert result.rate_estimate <= bound + 0.05


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_lifted_rows_are_stochastic(m):
    matrix = lifted_chain_matrix(make_symmetric2(m, 0.3))
    assert matrix.shape == (2 ** (m - 1),) * 2
    np.testing.assert_allclose(np.asarray(matrix.sum(axis=1)).ravel(), 1.0, atol=1e-12)


@pytest.mark.parametrize("m", [3, 4])
def test_lifted_chain_of_equal_entries(m):
    matrix = lifted_chain_matrix(make_symmetric2(m, 0.5))
    assert set(matrix.data.tolist()) == {0.5}
    result = matrix_stationary(matrix, dim=2)
    np.testing.assert_allclose(result.marginal, [0.5, 0.5], atol=1e-12)
    assert result.ergodic is True


def test_lifted_chain_of_p1_has_a_cycle_and_an_absorbing_window():
    matrix = lifted_chain_matrix(make_symmetric2(3, 1.0))
    dense = matrix.toarray()
    # windows in C order: (1,1) (1,2) (2,1) (2,2), newest state first
    assert dense[0, 0] == 1.0
    assert dense[3, 1] == 1.0 and dense[1, 2] == 1.0 and dense[2, 3] == 1.0
    assert chain_period(matrix) is None

    uniform = matrix_stationary(matrix, dim=2)
    assert uniform.ergodic is None
    np.testing.assert_allclose(uniform.marginal, [0.5, 0.5], atol=1e-12)

    cycle = matrix_stationary(matrix, dim=2, start=np.array([0.0, 1 / 3, 1 / 3, 1 / 3]))
    np.testing.assert_allclose(cycle.marginal, [1 / 3, 2 / 3], atol=1e-12)


def test_oscillating_start_is_averaged():
    matrix = lifted_chain_matrix(ALTERNATING)
    result = matrix_stationary(matrix, dim=2, start=np.array([0.0, 1.0, 0.0, 0.0]))
    assert result.averaged
    np.testing.assert_allclose(result.distribution, [0.0, 0.5, 0.5, 0.0], atol=1e-12)
    np.testing.assert_allclose(result.marginal, [0.5, 0.5], atol=1e-12)


def test_period_of_a_strongly_connected_cycle():
    # keep only the 2-cycle between (1,2) and (2,1)
    matrix = lifted_chain_matrix(ALTERNATING)[[1, 2]][:, [1, 2]]
    assert chain_period(matrix) == 2
    assert chain_period(lifted_chain_matrix(make_symmetric2(4, 0.3))) == 1


def test_lifted_chain_size_cap():
    with pytest.raises(InputError):
        lifted_chain_matrix(make_symmetric2(22, 0.5))


def test_root_scan_past_binomial_table():
    found = root_scan(stationarity_gap(make_symmetric2(100, 0.3)), grid_points=1001)
    assert close(found.roots, [0.5])


def test_long_cycle_averages_a_whole_period():
    ring = sp.csr_matrix((np.ones(10), (np.arange(10), (np.arange(10) + 1) % 10)), shape=(10, 10))
    assert chain_period(ring) == 10
    start = np.zeros(10)
    start[0] = 1.0
    found = matrix_stationary(ring, dim=2, start=start)
    assert found.averaged
    assert found.ergodic is None
    np.testing.assert_allclose(found.distribution, np.full(10, 0.1))
    np.testing.assert_allclose(found.marginal, [0.5, 0.5])
