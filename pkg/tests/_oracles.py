"""Shared fixtures-in-code for the test suite.

Closed-form reference values are derived here from scratch (Gaussian
integrals, scalar ODE solutions) so the tests never depend on the solver
they are checking. Keep every oracle self-contained and commented with its
derivation.
"""

from __future__ import annotations

import hashlib
import math
import os
from importlib import resources

import numpy as np

from asymrisk.grids import TimeGrid
from asymrisk.lattice import TerminalSpec
from asymrisk.models import LqModel, load_model
from asymrisk.riccati import ode_residual, portfolio_constant_integrand

# Scalar benchmark model: A=0, B=1, Sigma=1, M=0, N=1, H=1, coupling 0.25.
# The backward quadratic coefficient solves dP/dt = 0.5 P^2 with P(T)=1,
# so P(t) = 1 / (1 + 0.5 (T - t)) and P(0) = 2/3. The control value adds the
# noise term 0.5 * integral of P, which is log(1.5), on top of
# 0.5 * x0^2 * P(0) = 1/3.
SCALAR_P0 = 2.0 / 3.0
SCALAR_VALUE = 1.0 / 3.0 + math.log(1.5)
SCALAR_SECOND_ORDER_P0 = 4.0 / 3.0  # solves dP2/dt = -0.5 P^2 = -dP/dt shifted; P2 = 2 - P

# Var[sin(W_1)] at T=1: E[sin] = 0 by symmetry and
# E[sin^2] = (1 - E[cos(2W)])/2 = (1 - e^-2)/2.
SIN_VARIANCE = 0.5 * (1.0 - math.exp(-2.0))

# Zero-loading market (factor_zero_loading builtin): growth
# r T + 0.5 (a - r)' Theta^-1 (a - r) T with Theta = Sigma (2 Gamma + I) Sigma'
# = 0.04 * 1.2 = 0.048, excess 0.04, so growth = 0.02 + 0.5 * 0.0016 / 0.048
# = 11/300 and the flat optimal weight is 0.04 / 0.048 = 5/6.
ZERO_LOADING_GROWTH = 11.0 / 300.0
ZERO_LOADING_WEIGHT = 5.0 / 6.0


def scalar_lq_model(steps: int) -> LqModel:
    return LqModel.constant(
        grid=TimeGrid(1.0, steps),
        A=0.0, B=1.0, Sigma=1.0, M=0.0, N=1.0, H=1.0, Gamma=0.25, x0=[1.0],
    )


def blowup_lq_model() -> LqModel:
    # No control authority, maximal coupling: dP/dt = -2 P^2 backward from 1
    # reaches infinity at distance 0.5 from the horizon.
    return LqModel.constant(
        grid=TimeGrid(1.0, 200),
        A=0.0, B=0.0, Sigma=1.0, M=0.0, N=1.0, H=1.0, Gamma=1.0, x0=[1.0],
    )


def builtin(name: str):
    path = resources.files("asymrisk").joinpath("data", name + ".json")
    return load_model(str(path)).model


def random_damped_lq(gen: np.random.Generator, dim: int, steps: int = 200) -> LqModel:
    """Random model with the damping margin built in by choosing N last.

    With B = I and N = I / (lam_max + 0.5), B N^-1 B' - 2 Sigma Gamma Sigma'
    has smallest eigenvalue at least 0.5.
    """

    def sym_psd(hi: float) -> np.ndarray:
        q = np.linalg.qr(gen.standard_normal((dim, dim)))[0]
        s = q @ np.diag(gen.uniform(0.0, hi, dim)) @ q.T
        return 0.5 * (s + s.T)

    A = gen.uniform(-1.0, 1.0, (dim, dim))
    Sigma = gen.uniform(-1.0, 1.0, (dim, dim)) + 1.5 * np.eye(dim)
    Gamma = sym_psd(0.95)
    M = sym_psd(1.0)
    H = sym_psd(1.0) + 0.1 * np.eye(dim)
    lam = float(np.linalg.eigvalsh(2.0 * Sigma @ Gamma @ Sigma.T).max())
    N = np.eye(dim) / (lam + 0.5)
    x0 = gen.uniform(-1.0, 1.0, dim)
    return LqModel.constant(grid=TimeGrid(1.0, steps), A=A, B=np.eye(dim),
                            Sigma=Sigma, M=M, N=N, H=H, Gamma=Gamma, x0=x0)


# Payoff specs reused across lattice and criterion tests.

def constant_spec(c: float) -> TerminalSpec:
    return TerminalSpec(lambda w1, w2: np.full(np.broadcast(w1, w2).shape, c),
                        name=f"constant_{c}")


def linear_spec(a: float, b: float) -> TerminalSpec:
    return TerminalSpec(lambda w1, w2: a * w1 + b * w2, growth="linear",
                        name=f"linear_{a}_{b}")


W1_SPEC = TerminalSpec(lambda w1, w2: w1, growth="linear", depends_on="w1_only",
                       name="w1")
W1_SQUARED_SPEC = TerminalSpec(lambda w1, w2: w1 * w1,
                               growth="quadratic-subcritical",
                               depends_on="w1_only", name="w1_squared")
PRODUCT_SPEC = TerminalSpec(lambda w1, w2: w1 * w2,
                            growth="quadratic-subcritical", name="product")
SUM_SPEC = TerminalSpec(lambda w1, w2: w1 + w2, growth="linear", name="sum")
SIN_SPEC = TerminalSpec(lambda w1, w2: np.sin(w1), depends_on="w1_only",
                        name="sin_w1")


def portfolio_residuals(model, solution) -> dict:
    """Back-substitute the three growth-certificate coefficients.

    Each stored path is differentiated with the five-point stencil and
    compared against its own right-hand side rebuilt from the coupling
    matrices, so this checks the stored solution rather than the solver's
    internal state.
    """
    cp = solution.couplings
    theta_inv = np.linalg.inv(cp.theta)
    theta_inv_a = np.linalg.solve(cp.theta, model.A)
    lin = model.B - cp.xi.T @ theta_inv_a
    source = model.A.T @ theta_inv_a
    at_theta_inv = model.A.T @ theta_inv
    ones = np.ones(model.a.shape[0])
    pi_path = solution.quadratic.path

    def drift_pi(t, pi):
        return -(lin.T @ pi + pi @ lin - pi @ cp.schur @ pi + source)

    def drift_phi(t, phi):
        pi = pi_path.evaluate(t)
        excess = model.a - model.r.evaluate(t) * ones
        coef = model.B.T - pi @ cp.schur - at_theta_inv @ cp.xi
        return -(coef @ phi + pi @ (model.b - cp.xi.T @ (theta_inv @ excess))
                 + at_theta_inv @ excess)

    integrand = portfolio_constant_integrand(model, solution.quadratic,
                                             solution.linear, cp)

    def drift_kappa(t, kappa):
        return np.array([-integrand.values[model.grid.index_of(t)]])

    r_pi = ode_residual(pi_path.values, model.grid, drift_pi)
    r_phi = ode_residual(solution.linear.values, model.grid, drift_phi)
    r_kappa = ode_residual(solution.constant.values.reshape(-1, 1),
                           model.grid, drift_kappa)
    return {
        "quadratic": float(np.max(np.abs(r_pi))),
        "linear": float(np.max(np.abs(r_phi))),
        "constant": float(np.max(np.abs(r_kappa))),
    }


def tree_digests(root: str) -> dict:
    """Relative path -> sha256 of file bytes, for whole-tree comparisons."""
    out = {}
    for dirpath, _, filenames in os.walk(root):
        for name in filenames:
            full = os.path.join(dirpath, name)
            rel = os.path.relpath(full, root)
            with open(full, "rb") as f:
                out[rel] = hashlib.sha256(f.read()).hexdigest()
    return out
