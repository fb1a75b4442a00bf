"""Optimal growth portfolios on a factor-driven market.

The asymmetric weights enter only through three constant coupling matrices
built from the asset and factor loadings. Given those, the certainty
equivalent growth certificate is quadratic in the factor with coefficients
solved backward in time (see asymrisk.riccati), and the optimal asset
weights are affine in the factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from .grids import MatrixPath, ScalarPath, VectorPath
from .lq import RiccatiBlowupError
from .models import FactorMarketModel, validate_factor_model
from .riccati import (
    RiccatiSolution,
    _portfolio_sup_bound,
    solve_portfolio_constant,
    solve_portfolio_linear,
    solve_portfolio_riccati,
)
from .sde import EstimateResult, estimate_growth_rate, simulate_factor_and_wealth

__all__ = [
    "CouplingMatrices",
    "AffineStrategy",
    "PortfolioSolution",
    "PortfolioBoundsReport",
    "build_theta_xi_psi",
    "solve_portfolio",
    "portfolio_bounds_report",
    "compare_strategies",
]


@dataclass(frozen=True, eq=False)
class CouplingMatrices:
    """Constant quadratic couplings of the growth certificate.

    theta: asset-asset weight Sigma (2 Gamma + I) Sigma', positive definite
    whenever Sigma Sigma' is. xi: asset-factor cross weight 2 Sigma Gamma
    Lambda'. psi: factor-factor weight 2 Lambda Gamma Lambda'. schur is
    psi - xi' theta^-1 xi; its smallest eigenvalue decides whether the
    backward quadratic solve is in the certified regime.
    """

    theta: np.ndarray
    xi: np.ndarray
    psi: np.ndarray
    schur: np.ndarray
    schur_min_eig: float


def build_theta_xi_psi(model: FactorMarketModel) -> CouplingMatrices:
    gamma = model.Gamma.entries
    d = gamma.shape[0]
    two_gamma_plus = 2.0 * gamma + np.eye(d)
    theta = model.Sigma @ two_gamma_plus @ model.Sigma.T
    xi = 2.0 * (model.Sigma @ gamma @ model.Lambda.T)
    psi = 2.0 * (model.Lambda @ gamma @ model.Lambda.T)
    schur = psi - xi.T @ np.linalg.solve(theta, xi)
    schur = 0.5 * (schur + schur.T)
    return CouplingMatrices(
        theta=theta,
        xi=xi,
        psi=psi,
        schur=schur,
        schur_min_eig=float(np.linalg.eigvalsh(schur)[0]),
    )


@dataclass(frozen=True, eq=False)
class AffineStrategy:
    """Asset weights affine in the factor: u(t, x) = intercept(t) + slope(t) x."""

    intercept: VectorPath
    slope: MatrixPath

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        base = self.intercept.evaluate(t)
        coef = self.slope.evaluate(t)
        if x.ndim == 1:
            return base + coef @ x
        return base + x @ coef.T


@dataclass(frozen=True, eq=False)
class PortfolioSolution:
    """Growth certificate 1/2 x'Pi x + phi'x + kappa and its strategy."""

    model: FactorMarketModel
    couplings: CouplingMatrices
    quadratic: RiccatiSolution
    linear: VectorPath
    constant: ScalarPath
    strategy: AffineStrategy

    @property
    def optimal_growth(self) -> float:
        x0 = self.model.x0
        return (
            0.5 * float(x0 @ self.quadratic.initial @ x0)
            + float(self.linear.initial @ x0)
            + float(self.constant.initial)
        )


def _strategy_paths(
    model: FactorMarketModel,
    couplings: CouplingMatrices,
    quadratic: RiccatiSolution,
    linear: VectorPath,
) -> AffineStrategy:
    grid = model.grid
    m, n, _ = model.dims
    ones = np.ones(m)
    slope = np.empty((grid.n_nodes, m, n))
    intercept = np.empty((grid.n_nodes, m))
    for i in range(grid.n_nodes):
        pi = quadratic.path.values[i]
        phi = linear.values[i]
        excess0 = model.a - model.r.values[i] * ones
        slope[i] = np.linalg.solve(couplings.theta, model.A - couplings.xi @ pi)
        intercept[i] = np.linalg.solve(couplings.theta, excess0 - couplings.xi @ phi)
    return AffineStrategy(
        intercept=VectorPath(grid, intercept),
        slope=MatrixPath(grid, slope),
    )


def solve_portfolio(model: FactorMarketModel) -> PortfolioSolution:
    """Solve the growth problem: couplings, backward coefficients, strategy."""
    validate_factor_model(model).raise_if_invalid("factor market model")
    couplings = build_theta_xi_psi(model)
    quadratic = solve_portfolio_riccati(model, couplings)
    if quadratic.blowup_flag:
        raise RiccatiBlowupError(
            "portfolio quadratic coefficient exceeded its norm guard; "
            "the factor coupling is outside the solvable regime"
        )
    linear = solve_portfolio_linear(model, quadratic, couplings)
    constant = solve_portfolio_constant(model, quadratic, linear, couplings)
    strategy = _strategy_paths(model, couplings, quadratic, linear)
    return PortfolioSolution(
        model=model,
        couplings=couplings,
        quadratic=quadratic,
        linear=linear,
        constant=constant,
        strategy=strategy,
    )


@dataclass(frozen=True)
class PortfolioBoundsReport:
    """Deterministic envelope checks on the quadratic coefficient.

    Only applicable when the Schur coupling is PSD; then Pi must stay PSD
    and its spectral norm must sit under the Gronwall envelope
    exp(2(|B| + |Xi||Theta^-1||A|) T) |A|^2 |Theta^-1| T.
    """

    applicable: bool
    psd_ok: bool
    norm_ok: bool
    min_eigenvalue: float
    max_norm: float
    norm_bound: float

    @property
    def all_ok(self) -> bool:
        return (not self.applicable) or (self.psd_ok and self.norm_ok)


def portfolio_bounds_report(
    model: FactorMarketModel,
    solution: Optional[PortfolioSolution] = None,
    tol: float = 1e-10,
) -> PortfolioBoundsReport:
    if solution is None:
        solution = solve_portfolio(model)
    applicable = solution.couplings.schur_min_eig >= 0.0
    vals = solution.quadratic.path.values
    min_eig = np.inf
    for layer in vals:
        min_eig = min(min_eig, float(np.linalg.eigvalsh(layer)[0]))
    bound = _portfolio_sup_bound(model, solution.couplings)
    max_norm = solution.quadratic.max_norm
    return PortfolioBoundsReport(
        applicable=bool(applicable),
        psd_ok=bool(min_eig >= -tol),
        norm_ok=bool(max_norm <= bound * (1.0 + 1e-9) + tol),
        min_eigenvalue=float(min_eig),
        max_norm=float(max_norm),
        norm_bound=float(bound),
    )


def compare_strategies(
    model: FactorMarketModel,
    strategies: Mapping[str, Callable[[float, np.ndarray], np.ndarray]],
    theta: float,
    *,
    n_paths: int = 100_000,
    seed=0,
) -> Dict[str, EstimateResult]:
    """Certainty-equivalent growth of each strategy under a common seed.

    Requires the scalar-coupling case Gamma = (theta/4) I, where the growth
    criterion has the exponential Monte Carlo form. All strategies see the
    same driver increments, so the comparison is paired.
    """
    results: Dict[str, EstimateResult] = {}
    for name, strategy in strategies.items():
        bundle = simulate_factor_and_wealth(
            model, strategy, n_paths=n_paths, seed=seed, keep_paths=False
        )
        results[name] = estimate_growth_rate(bundle.log_wealth, theta, model)
    return results
