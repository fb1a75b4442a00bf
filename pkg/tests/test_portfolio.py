import numpy as np
import pytest

from asymrisk.portfolio import (
    build_theta_xi_psi,
    compare_strategies,
    portfolio_bounds_report,
    solve_portfolio,
)

from _oracles import (
    ZERO_LOADING_GROWTH,
    ZERO_LOADING_WEIGHT,
    builtin,
    portfolio_residuals,
)


@pytest.fixture(scope="module")
def zero_loading():
    m = builtin("factor_zero_loading")
    return m, solve_portfolio(m)


@pytest.fixture(scope="module")
def symmetric():
    m = builtin("factor_symmetric")
    return m, solve_portfolio(m)


def test_coupling_matrices_built_from_model(symmetric):
    m, _ = symmetric
    cp = build_theta_xi_psi(m)
    gam = m.Gamma.entries
    assert np.allclose(cp.theta, m.Sigma @ (2.0 * gam + np.eye(2)) @ m.Sigma.T,
                       atol=1e-15)
    assert np.allclose(cp.xi, 2.0 * m.Sigma @ gam @ m.Lambda.T, atol=1e-15)
    assert np.allclose(cp.psi, 2.0 * m.Lambda @ gam @ m.Lambda.T, atol=1e-15)
    schur = cp.psi - cp.xi.T @ np.linalg.solve(cp.theta, cp.xi)
    assert np.allclose(cp.schur, schur, atol=1e-15)
    assert cp.schur_min_eig > 0.0


def test_zero_loading_closed_form(zero_loading):
    m, sol = zero_loading
    cp = sol.couplings
    excess = m.a - 0.02
    oracle = 0.02 + 0.5 * float(excess @ np.linalg.solve(cp.theta, excess))
    assert oracle == pytest.approx(ZERO_LOADING_GROWTH, abs=1e-15)
    assert abs(sol.optimal_growth - oracle) < 1e-8
    u0 = sol.strategy(0.0, m.x0)
    assert abs(u0[0] - ZERO_LOADING_WEIGHT) < 1e-8
    uT = sol.strategy(m.grid.horizon, m.x0)
    assert abs(uT[0] - ZERO_LOADING_WEIGHT) < 1e-8


def test_zero_loading_coefficients_collapse(zero_loading):
    # With no factor loading the quadratic and linear terms vanish and the
    # constant term decays linearly to zero.
    m, sol = zero_loading
    assert np.max(np.abs(sol.quadratic.path.values)) == 0.0
    assert np.max(np.abs(sol.linear.values)) == 0.0
    kappa = sol.constant.values
    line = ZERO_LOADING_GROWTH * (1.0 - m.grid.times())
    assert np.max(np.abs(kappa - line)) < 1e-12


def test_growth_certificate_assembles(symmetric):
    m, sol = symmetric
    expected = (0.5 * m.x0 @ sol.quadratic.initial @ m.x0
                + sol.linear.initial @ m.x0 + sol.constant.initial)
    assert sol.optimal_growth == pytest.approx(expected, abs=1e-15)
    assert sol.optimal_growth > 0.02  # beats holding cash


def test_back_substitution_residuals(symmetric):
    m, sol = symmetric
    res = portfolio_residuals(m, sol)
    assert res["quadratic"] < 1e-8
    assert res["linear"] < 1e-8
    assert res["constant"] < 1e-8


def test_bounds_report(symmetric):
    m, sol = symmetric
    rep = portfolio_bounds_report(m, sol)
    assert rep.applicable
    assert rep.all_ok
    assert rep.min_eigenvalue >= -1e-12
    assert rep.max_norm <= rep.norm_bound


def test_strategy_is_affine_in_the_factor(symmetric):
    m, sol = symmetric
    t = 0.5
    x = np.array([0.2])
    base = sol.strategy(t, x)
    delta = 1e-6
    bumped = sol.strategy(t, x + delta)
    fd_slope = (bumped - base) / delta
    slope = sol.strategy.slope.evaluate(t)
    assert fd_slope[0] == pytest.approx(slope[0, 0], abs=1e-8)


def test_strategy_batch_evaluation(symmetric):
    _, sol = symmetric
    xs = np.array([[0.0], [0.1], [0.2]])
    batch = sol.strategy(0.3, xs)
    assert batch.shape == (3, 1)
    for i, x in enumerate(xs):
        assert np.array_equal(batch[i], sol.strategy(0.3, x))


def test_monte_carlo_ranks_strategies(symmetric):
    m, sol = symmetric

    def zero(t, x):
        return np.zeros(1)

    def scaled(t, x):
        return 1.5 * sol.strategy(t, x)

    res = compare_strategies(m, {"optimal": sol.strategy, "zero": zero,
                                 "scaled": scaled}, 0.4,
                             n_paths=20000, seed=11)
    opt = res["optimal"]
    assert not opt.heavy_tail
    assert abs(opt.estimate - sol.optimal_growth) <= 3.0 * opt.stderr
    assert res["zero"].estimate == pytest.approx(0.02, abs=1e-14)
    for name in ("zero", "scaled"):
        other = res[name]
        margin = 3.0 * float(np.hypot(opt.stderr, other.stderr))
        assert opt.estimate >= other.estimate - margin
