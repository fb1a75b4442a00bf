"""Backward matrix ODEs: Riccati equations, comparison bounds, adjoints.

All equations are integrated with a fixed-step classical RK4 marching from
the terminal condition to 0 on the model grid, with the iterate symmetrized
after every step and a norm guard that flags blow-up instead of overflowing.
Stage values of sampled coefficients come from linear interpolation, which
is exact for constant coefficients (the common case here), so those retain
the full fourth-order accuracy of the scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from .grids import MatrixPath, ScalarPath, TimeGrid, VectorPath
from .models import (
    FactorMarketModel,
    LqModel,
    riccati_wellposedness_indicator,
    validate_factor_model,
    validate_lq_model,
)

__all__ = [
    "RiccatiSolution",
    "BoundsReport",
    "solve_riccati_lq",
    "solve_comparison_ode",
    "riccati_sup_bound",
    "check_riccati_bounds",
    "solve_second_order_adjoint_lq",
    "feedback_gain",
    "solve_portfolio_riccati",
    "solve_portfolio_linear",
    "solve_portfolio_constant",
    "portfolio_constant_integrand",
    "ode_residual",
]


def _max_spectral_norm(values: np.ndarray) -> float:
    """Max spectral norm over nodes, skipping NaN layers of a partial path."""
    best = 0.0
    for v in values:
        if np.all(np.isfinite(v)):
            best = max(best, float(np.linalg.norm(v, 2)))
    return best

#: guard multipliers for the blow-up check
GUARD_VERIFIED = 1e6
GUARD_UNVERIFIED = 1e9

LABEL_VERIFIED = "verified"
LABEL_UNVERIFIED = "unverified well-posedness"


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Backward ODE solution on the grid.

    path.values[i] is the matrix at t_i; the terminal entry is the terminal
    condition bit-for-bit. blowup_flag means the norm guard tripped; entries
    before the trip are valid, later ones are NaN.
    """

    path: MatrixPath
    blowup_flag: bool
    max_norm: float
    label: str = LABEL_VERIFIED

    @property
    def initial(self) -> np.ndarray:
        return self.path.values[0]

    @property
    def terminal(self) -> np.ndarray:
        return self.path.values[-1]


def _integrate_backward(
    drift: Callable[[float, np.ndarray], np.ndarray],
    terminal: np.ndarray,
    grid: TimeGrid,
    *,
    symmetrize: bool,
    guard: Optional[float] = None,
) -> tuple[np.ndarray, bool]:
    """March dY/dt = drift(t, Y) from Y(T) = terminal down to t = 0.

    Returns (values, blowup) with values of shape (N+1,) + terminal.shape.
    """
    terminal = np.asarray(terminal, dtype=np.float64)
    n_nodes = grid.n_nodes
    h = grid.dt
    times = grid.times()
    values = np.empty((n_nodes,) + terminal.shape)
    values[-1] = terminal
    y = terminal.copy()
    blowup = False
    for i in range(grid.steps, 0, -1):
        t = times[i]
        k1 = drift(t, y)
        k2 = drift(t - 0.5 * h, y - (0.5 * h) * k1)
        k3 = drift(t - 0.5 * h, y - (0.5 * h) * k2)
        k4 = drift(t - h, y - h * k3)
        y = y - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if symmetrize:
            y = 0.5 * (y + y.T)
        if guard is not None and not np.linalg.norm(y) <= guard:
            values[: i] = np.nan
            values[i - 1] = y if np.all(np.isfinite(y)) else np.nan
            blowup = True
            break
        values[i - 1] = y
    return values, blowup


def riccati_sup_bound(model: LqModel) -> float:
    """A priori sup-norm bound exp(2 |A| T) (|H| + |M| T) for the damped case.

    |.| is the spectral norm, sup over the grid for paths.
    """
    T = model.grid.horizon
    a_norm = model.A.sup_norm()
    m_norm = model.M.sup_norm()
    h_norm = float(np.linalg.norm(model.H, 2))
    return float(np.exp(2.0 * a_norm * T) * (h_norm + m_norm * T))


def solve_riccati_lq(model: LqModel) -> RiccatiSolution:
    """Solve the risk-adjusted feedback Riccati equation

        -dP/dt = A'P + PA + M + P (2 Sigma Gamma Sigma' - B N^-1 B') P,
        P(T) = H.

    When the damping indicator 2 Sigma Gamma Sigma' - B N^-1 B' is negative
    on the whole grid the solution is certified bounded and the blow-up
    guard sits at GUARD_VERIFIED times the a priori bound; otherwise the
    result is labeled and the guard is loose.
    """
    validate_lq_model(model).raise_if_invalid("LQ model")
    indicator = riccati_wellposedness_indicator(model)
    damped = indicator.max() < 0.0
    bound = riccati_sup_bound(model)
    guard = GUARD_VERIFIED * max(bound, 1.0) if damped else GUARD_UNVERIFIED
    gam = model.Gamma.entries

    def drift(t: float, p: np.ndarray) -> np.ndarray:
        a = model.A.evaluate(t)
        b = model.B.evaluate(t)
        s = model.Sigma.evaluate(t)
        m = model.M.evaluate(t)
        n = model.N.evaluate(t)
        core = 2.0 * s @ gam @ s.T - b @ np.linalg.solve(n, b.T)
        return -(a.T @ p + p @ a + m + p @ core @ p)

    values, blowup = _integrate_backward(drift, model.H, model.grid,
                                         symmetrize=True, guard=guard)
    return RiccatiSolution(
        path=MatrixPath(model.grid, values) if not blowup else _nan_tolerant_path(model.grid, values),
        blowup_flag=blowup,
        max_norm=_max_spectral_norm(values),
        label=LABEL_VERIFIED if damped else LABEL_UNVERIFIED,
    )


def _nan_tolerant_path(grid: TimeGrid, values: np.ndarray) -> MatrixPath:
    """MatrixPath refuses NaN; a blown-up solve stores its partial path raw."""
    path = object.__new__(MatrixPath)
    v = np.ascontiguousarray(values, dtype=np.float64)
    v.setflags(write=False)
    object.__setattr__(path, "grid", grid)
    object.__setattr__(path, "values", v)
    return path


def solve_comparison_ode(model: LqModel) -> RiccatiSolution:
    """Solve the linear comparison equation -dP/dt = A'P + PA + M, P(T) = H.

    Its solution dominates the damped Riccati solution in the PSD order and
    never blows up, so no guard is applied.
    """
    validate_lq_model(model).raise_if_invalid("LQ model")

    def drift(t: float, p: np.ndarray) -> np.ndarray:
        a = model.A.evaluate(t)
        m = model.M.evaluate(t)
        return -(a.T @ p + p @ a + m)

    values, _ = _integrate_backward(drift, model.H, model.grid, symmetrize=True)
    return RiccatiSolution(MatrixPath(model.grid, values), False, _max_spectral_norm(values))


@dataclass(frozen=True)
class BoundsReport:
    """Outcome of the PSD-order sandwich check 0 <= P <= comparison.

    applicable is False when the damping hypothesis fails on the grid, in
    which case no check is claimed.
    """

    applicable: bool
    psd_ok: bool
    dominated_ok: bool
    norm_ok: bool
    min_eigenvalue: float
    min_gap_eigenvalue: float
    max_norm: float
    norm_bound: float
    message: str

    @property
    def all_ok(self) -> bool:
        return self.applicable and self.psd_ok and self.dominated_ok and self.norm_ok


def check_riccati_bounds(
    model: LqModel,
    solution: Optional[RiccatiSolution] = None,
    comparison: Optional[RiccatiSolution] = None,
    tol: float = 1e-10,
) -> BoundsReport:
    """Verify 0 <= P(t) <= comparison(t) (PSD order) and the sup-norm bound.

    Missing solutions are computed on the fly. The eigenvalue slack `tol`
    absorbs integrator roundoff.
    """
    indicator = riccati_wellposedness_indicator(model)
    if indicator.max() >= 0.0:
        return BoundsReport(False, False, False, False, np.nan, np.nan, np.nan,
                            riccati_sup_bound(model),
                            "not applicable: damping condition fails on the grid")
    solution = solution or solve_riccati_lq(model)
    comparison = comparison or solve_comparison_ode(model)
    if solution.blowup_flag:
        return BoundsReport(True, False, False, False, np.nan, np.nan,
                            solution.max_norm, riccati_sup_bound(model),
                            "solution blew up despite damping; check the model")
    min_eig = np.inf
    min_gap = np.inf
    for p, q in zip(solution.path.values, comparison.path.values):
        min_eig = min(min_eig, float(np.linalg.eigvalsh(p)[0]))
        min_gap = min(min_gap, float(np.linalg.eigvalsh(q - p)[0]))
    bound = riccati_sup_bound(model)
    psd_ok = min_eig >= -tol
    dominated_ok = min_gap >= -tol
    norm_ok = solution.max_norm <= bound + tol
    msg = "all bounds hold" if (psd_ok and dominated_ok and norm_ok) else "violation detected"
    return BoundsReport(True, psd_ok, dominated_ok, norm_ok, min_eig, min_gap,
                        solution.max_norm, bound, msg)


def solve_second_order_adjoint_lq(model: LqModel, riccati: RiccatiSolution) -> RiccatiSolution:
    """Solve the deterministic second-order adjoint equation at the optimum,

        -dP2/dt = A'P2 + P2 A + M + 2 (P Sigma) Gamma (P Sigma)',
        P2(T) = H.

    The feedback coefficient P is re-integrated alongside P2 in one coupled
    RK4 march, so the source term is evaluated at the true stage times and
    the solution keeps fourth-order accuracy (interpolating a sampled P at
    stage times would drop it to second order). Linear in P2 with a PSD
    source, so P2 stays PSD whenever M, H, Gamma are.
    """
    if riccati.blowup_flag:
        raise ValueError("cannot build the second-order adjoint from a blown-up Riccati solution")
    gam = model.Gamma.entries

    def drift_first(t: float, p: np.ndarray) -> np.ndarray:
        a = model.A.evaluate(t)
        b = model.B.evaluate(t)
        s = model.Sigma.evaluate(t)
        m = model.M.evaluate(t)
        n = model.N.evaluate(t)
        core = 2.0 * s @ gam @ s.T - b @ np.linalg.solve(n, b.T)
        return -(a.T @ p + p @ a + m + p @ core @ p)

    def drift_second(t: float, p: np.ndarray, p2: np.ndarray) -> np.ndarray:
        a = model.A.evaluate(t)
        m = model.M.evaluate(t)
        s = model.Sigma.evaluate(t)
        ps = p @ s
        return -(a.T @ p2 + p2 @ a + m + 2.0 * ps @ gam @ ps.T)

    grid = model.grid
    h = grid.dt
    times = grid.times()
    values = np.empty((grid.n_nodes,) + model.H.shape)
    values[-1] = model.H
    p = model.H.copy()
    p2 = model.H.copy()
    for i in range(grid.steps, 0, -1):
        t = times[i]
        k1a = drift_first(t, p)
        k1b = drift_second(t, p, p2)
        k2a = drift_first(t - 0.5 * h, p - (0.5 * h) * k1a)
        k2b = drift_second(t - 0.5 * h, p - (0.5 * h) * k1a, p2 - (0.5 * h) * k1b)
        k3a = drift_first(t - 0.5 * h, p - (0.5 * h) * k2a)
        k3b = drift_second(t - 0.5 * h, p - (0.5 * h) * k2a, p2 - (0.5 * h) * k2b)
        k4a = drift_first(t - h, p - h * k3a)
        k4b = drift_second(t - h, p - h * k3a, p2 - h * k3b)
        p = p - (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        p2 = p2 - (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        p = 0.5 * (p + p.T)
        p2 = 0.5 * (p2 + p2.T)
        values[i - 1] = p2
    return RiccatiSolution(MatrixPath(model.grid, values), False,
                           _max_spectral_norm(values), riccati.label)


def feedback_gain(model: LqModel, riccati: RiccatiSolution) -> MatrixPath:
    """Optimal feedback gain path K with u(t) = K(t) x, K = -N^-1 B' P."""
    if riccati.blowup_flag:
        raise ValueError("cannot build a gain from a blown-up Riccati solution")
    n_nodes = model.grid.n_nodes
    k_dim, n_dim = model.B.shape[1], model.B.shape[0]
    gains = np.empty((n_nodes, k_dim, n_dim))
    for i in range(n_nodes):
        gains[i] = -np.linalg.solve(model.N.values[i], model.B.values[i].T @ riccati.path.values[i])
    return MatrixPath(model.grid, gains)


# ----------------------------------------------------------------------
# portfolio value-function coefficients
# ----------------------------------------------------------------------

def _couplings(model: FactorMarketModel, couplings):
    if couplings is None:
        from .portfolio import build_theta_xi_psi

        couplings = build_theta_xi_psi(model)
    return couplings


def solve_portfolio_riccati(model: FactorMarketModel, couplings=None) -> RiccatiSolution:
    """Quadratic coefficient of the optimal-growth certificate.

        -dPi/dt = (B' - A'Th^-1 Xi) Pi + Pi (B - Xi'Th^-1 A)
                  - Pi (Psi - Xi'Th^-1 Xi) Pi + A'Th^-1 A,
        Pi(T) = 0.

    Standard LQ-type Riccati: PSD source A'Th^-1 A and PSD quadratic
    coefficient whenever the Schur complement Psi - Xi'Th^-1 Xi is PSD,
    hence Pi(t) >= 0 on [0, T].
    """
    validate_factor_model(model).raise_if_invalid("factor market model")
    cp = _couplings(model, couplings)
    n = model.b.shape[0]
    theta_inv_a = np.linalg.solve(cp.theta, model.A)
    lin = model.B - cp.xi.T @ theta_inv_a          # B - Xi'Th^-1 A
    schur = cp.schur                               # Psi - Xi'Th^-1 Xi
    source = model.A.T @ theta_inv_a               # A'Th^-1 A
    guard = GUARD_UNVERIFIED if cp.schur_min_eig < 0.0 else GUARD_VERIFIED * max(
        1.0, _portfolio_sup_bound(model, cp))

    def drift(t: float, pi: np.ndarray) -> np.ndarray:
        return -(lin.T @ pi + pi @ lin - pi @ schur @ pi + source)

    values, blowup = _integrate_backward(drift, np.zeros((n, n)), model.grid,
                                         symmetrize=True, guard=guard)
    label = LABEL_VERIFIED if cp.schur_min_eig >= 0.0 else LABEL_UNVERIFIED
    path = MatrixPath(model.grid, values) if not blowup else _nan_tolerant_path(model.grid, values)
    return RiccatiSolution(path, blowup, _max_spectral_norm(values), label)


def _portfolio_sup_bound(model: FactorMarketModel, cp) -> float:
    """Gronwall bound exp(2(|B| + |Xi||Th^-1||A|)T) |A|^2 |Th^-1| T."""
    T = model.grid.horizon
    a = float(np.linalg.norm(model.A, 2))
    b = float(np.linalg.norm(model.B, 2))
    xi = float(np.linalg.norm(cp.xi, 2))
    th_inv = float(np.linalg.norm(np.linalg.inv(cp.theta), 2))
    return float(np.exp(2.0 * (b + xi * th_inv * a) * T) * a * a * th_inv * T)


def solve_portfolio_linear(
    model: FactorMarketModel,
    quadratic: RiccatiSolution,
    couplings=None,
) -> VectorPath:
    """Linear coefficient phi of the optimal-growth certificate.

        -dphi/dt = (B' - Pi S - A'Th^-1 Xi) phi
                   + Pi (b - Xi'Th^-1 (a - r 1)) + A'Th^-1 (a - r 1),
        phi(T) = 0,

    with S = Psi - Xi'Th^-1 Xi and Pi from `quadratic`.
    """
    if quadratic.blowup_flag:
        raise ValueError("quadratic coefficient blew up; no linear solve")
    cp = _couplings(model, couplings)
    theta_inv = np.linalg.inv(cp.theta)
    at_theta_inv = model.A.T @ theta_inv
    theta_inv_a = np.linalg.solve(cp.theta, model.A)
    lin = model.B - cp.xi.T @ theta_inv_a
    source = model.A.T @ theta_inv_a
    bt = model.B.T
    schur = cp.schur
    ones = np.ones(model.a.shape[0])

    # Pi is re-integrated alongside phi so the coefficient is available at
    # the RK4 stage times with full accuracy; interpolating the sampled
    # path there would cut the order of phi to two.
    def drift_pi(t: float, pi: np.ndarray) -> np.ndarray:
        return -(lin.T @ pi + pi @ lin - pi @ schur @ pi + source)

    def drift_phi(t: float, pi: np.ndarray, phi: np.ndarray) -> np.ndarray:
        excess = model.a - model.r.evaluate(t) * ones
        coef = bt - pi @ schur - at_theta_inv @ cp.xi
        return -(coef @ phi + pi @ (model.b - cp.xi.T @ (theta_inv @ excess))
                 + at_theta_inv @ excess)

    grid = model.grid
    h = grid.dt
    times = grid.times()
    n = model.b.shape[0]
    values = np.zeros((grid.n_nodes, n))
    pi = np.zeros((n, n))
    phi = np.zeros(n)
    for i in range(grid.steps, 0, -1):
        t = times[i]
        k1a = drift_pi(t, pi)
        k1b = drift_phi(t, pi, phi)
        k2a = drift_pi(t - 0.5 * h, pi - (0.5 * h) * k1a)
        k2b = drift_phi(t - 0.5 * h, pi - (0.5 * h) * k1a, phi - (0.5 * h) * k1b)
        k3a = drift_pi(t - 0.5 * h, pi - (0.5 * h) * k2a)
        k3b = drift_phi(t - 0.5 * h, pi - (0.5 * h) * k2a, phi - (0.5 * h) * k2b)
        k4a = drift_pi(t - h, pi - h * k3a)
        k4b = drift_phi(t - h, pi - h * k3a, phi - h * k3b)
        pi = pi - (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        pi = 0.5 * (pi + pi.T)
        phi = phi - (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        values[i - 1] = phi
    return VectorPath(model.grid, values)


def portfolio_constant_integrand(
    model: FactorMarketModel,
    quadratic: RiccatiSolution,
    linear: VectorPath,
    couplings=None,
) -> ScalarPath:
    """Integrand l(t) of the constant term:

        l = 1/2 [ tr(Lam Lam' Pi) + 2 r + 2 b'phi - phi' S phi
                  - 2 phi' Xi'Th^-1 (a - r 1) + (a - r 1)'Th^-1 (a - r 1) ].
    """
    cp = _couplings(model, couplings)
    theta_inv = np.linalg.inv(cp.theta)
    lam_lam = model.Lambda @ model.Lambda.T
    ones = np.ones(model.a.shape[0])
    out = np.empty(model.grid.n_nodes)
    for i, t in enumerate(model.grid.times()):
        pi = quadratic.path.values[i]
        phi = linear.values[i]
        excess = model.a - model.r.values[i] * ones
        out[i] = 0.5 * (
            np.trace(lam_lam @ pi)
            + 2.0 * model.r.values[i]
            + 2.0 * model.b @ phi
            - phi @ cp.schur @ phi
            - 2.0 * phi @ (cp.xi.T @ (theta_inv @ excess))
            + excess @ theta_inv @ excess
        )
    return ScalarPath(model.grid, out)


def solve_portfolio_constant(
    model: FactorMarketModel,
    quadratic: RiccatiSolution,
    linear: VectorPath,
    couplings=None,
) -> ScalarPath:
    """Constant term kappa(t) = integral_t^T l(s) ds by cumulative Simpson.

    kappa(T) = 0 is set exactly, not integrated.
    """
    integrand = portfolio_constant_integrand(model, quadratic, linear, couplings)
    cum = cumulative_simpson(integrand.values, dx=model.grid.dt, initial=0.0)
    kappa = cum[-1] - cum
    kappa[-1] = 0.0
    return ScalarPath(model.grid, kappa)


def ode_residual(
    values: np.ndarray,
    grid: TimeGrid,
    drift: Callable[[float, np.ndarray], np.ndarray],
) -> np.ndarray:
    """Max-abs residual of dY/dt = drift(t, Y) at interior grid nodes.

    Differentiates the sampled solution with the 5-point central stencil
    (O(dt^4) truncation), so for a well-integrated path the residual sits at
    the 1e-10 level and any substantive corruption of the path shows up
    orders of magnitude above it. Returns an array of length N-3 for nodes
    2..N-2.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0] - 1
    if n < 4:
        raise ValueError("need at least 4 steps for the interior residual")
    dt = grid.dt
    times = grid.times()
    out = np.empty(n - 3)
    for j, i in enumerate(range(2, n - 1)):
        fd = (-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2]) / (12.0 * dt)
        out[j] = np.max(np.abs(fd - drift(times[i], values[i])))
    return out
