"""Optimality verification through adjoint processes and Hamiltonians.

For the linear-quadratic family the first-order adjoint is linear in the
state, p(t) = P(t) x, with P the quadratic value coefficient, and the
second-order adjoint solves its own backward matrix equation. The verifier
samples closed-loop states and evaluates the Hamiltonian at random control
deviations. It requires a non-negative minimum gap over deviations and a
vanishing control gradient at the candidate feedback; on top of that the
variance-adjusted Hamiltonian must coincide with the plain one (the
diffusion here does not depend on the control, so its correction terms are
exactly zero, and the report treats any nonzero mismatch as a failure).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grids import MatrixPath
from .models import LqModel
from .riccati import (
    RiccatiSolution,
    ode_residual,
    solve_riccati_lq,
    solve_second_order_adjoint_lq,
)
from .rng import as_source
from .sde import simulate_lq_closed_loop

__all__ = [
    "AdjointBundle",
    "SmpReport",
    "SecondOrderReport",
    "build_adjoints",
    "adjoint_residual",
    "hamiltonian",
    "extended_hamiltonian",
    "check_smp_inequality",
    "second_order_adjoint_report",
]

GAP_FLOOR = -1e-10
GRADIENT_CEILING = 1e-8


@dataclass(frozen=True, eq=False)
class AdjointBundle:
    """State-feedback form of the adjoint pair.

    first_order holds the matrix C(t) with p(t) = C(t) x; volatility holds
    C(t) Sigma(t), whose columns are the per-driver loadings of p; and
    second_order is the solution of the second-order backward equation.
    """

    first_order: MatrixPath
    volatility: MatrixPath
    second_order: RiccatiSolution


def build_adjoints(model: LqModel, riccati: Optional[RiccatiSolution] = None) -> AdjointBundle:
    if riccati is None:
        riccati = solve_riccati_lq(model)
    vol = np.einsum("tij,tjb->tib", riccati.path.values, model.Sigma.values)
    second = solve_second_order_adjoint_lq(model, riccati)
    return AdjointBundle(
        first_order=riccati.path,
        volatility=MatrixPath(model.grid, vol),
        second_order=second,
    )


def _first_order_drift(model: LqModel):
    def drift(t: float, p: np.ndarray) -> np.ndarray:
        a = model.A.evaluate(t)
        b = model.B.evaluate(t)
        s = model.Sigma.evaluate(t)
        m = model.M.evaluate(t)
        n = model.N.evaluate(t)
        core = 2.0 * (s @ model.Gamma.entries @ s.T) - b @ np.linalg.solve(n, b.T)
        return -(a.T @ p + p @ a + m + p @ core @ p)

    return drift


def _second_order_drift(model: LqModel, first_order: MatrixPath):
    def drift(t: float, p2: np.ndarray) -> np.ndarray:
        a = model.A.evaluate(t)
        s = model.Sigma.evaluate(t)
        m = model.M.evaluate(t)
        q = first_order.evaluate(t) @ s
        return -(a.T @ p2 + p2 @ a + m + 2.0 * (q @ model.Gamma.entries @ q.T))

    return drift


def adjoint_residual(model: LqModel, adjoints: AdjointBundle) -> dict:
    """Max finite-difference residual of each adjoint equation on the grid."""
    first = ode_residual(adjoints.first_order.values, model.grid, _first_order_drift(model))
    second = ode_residual(
        adjoints.second_order.path.values,
        model.grid,
        _second_order_drift(model, adjoints.first_order),
    )
    return {
        "first_order": float(np.max(first)),
        "second_order": float(np.max(second)),
    }


def hamiltonian(
    model: LqModel,
    t: float,
    x: np.ndarray,
    u: np.ndarray,
    p: np.ndarray,
    q: np.ndarray,
    z: np.ndarray,
) -> float:
    """Control Hamiltonian, to be minimized in u.

    p' (A x + B u) + tr(q' Sigma) + 2 p' Sigma Gamma z
    + 1/2 (x' M x + u' N u).
    """
    a = model.A.evaluate(t)
    b = model.B.evaluate(t)
    s = model.Sigma.evaluate(t)
    m = model.M.evaluate(t)
    n = model.N.evaluate(t)
    drift_term = float(p @ (a @ x + b @ u))
    vol_term = float(np.sum(q * s))
    coupling = 2.0 * float(p @ (s @ (model.Gamma.entries @ z)))
    cost = 0.5 * (float(x @ m @ x) + float(u @ n @ u))
    return drift_term + vol_term + coupling + cost


def _diffusion(model: LqModel, t: float, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Diffusion map of this model family; it does not depend on x or u."""
    return model.Sigma.evaluate(t)


def extended_hamiltonian(
    model: LqModel,
    t: float,
    x: np.ndarray,
    u: np.ndarray,
    u_ref: np.ndarray,
    p: np.ndarray,
    q: np.ndarray,
    z: np.ndarray,
    second_order: np.ndarray,
) -> float:
    """Hamiltonian with second-order diffusion corrections.

    Adds 1/2 tr(D' P2 D) + p' D Gamma D' p with D the diffusion change
    between u and the reference control. Both terms are computed literally;
    with a control-independent diffusion they evaluate to zero and the
    result is bit-for-bit the plain Hamiltonian.
    """
    base = hamiltonian(model, t, x, u, p, q, z)
    delta = _diffusion(model, t, x, u) - _diffusion(model, t, x, u_ref)
    correction = 0.5 * float(np.sum(delta * (second_order @ delta)))
    lifted = delta.T @ p
    correction += float(lifted @ (model.Gamma.entries @ lifted))
    if correction == 0.0:
        return base
    return base + correction


@dataclass(frozen=True)
class SmpReport:
    """Outcome of the sampled minimum-principle check."""

    min_gap: float
    max_gradient_norm: float
    max_extended_mismatch: float
    max_identity_error: float
    n_states: int
    n_controls: int

    @property
    def passed(self) -> bool:
        return (
            self.min_gap >= GAP_FLOOR
            and self.max_gradient_norm <= GRADIENT_CEILING
            and self.max_extended_mismatch == 0.0
        )


def check_smp_inequality(
    model: LqModel,
    riccati: Optional[RiccatiSolution] = None,
    *,
    gain: Optional[MatrixPath] = None,
    n_paths: int = 20,
    node_stride: Optional[int] = None,
    n_controls: int = 50,
    radius: float = 5.0,
    seed=1,
) -> SmpReport:
    """Sample states and deviations, verify the Hamiltonian minimum condition.

    Simulates the closed loop (under `gain` if given, otherwise the optimal
    feedback), then at strided grid nodes compares the Hamiltonian at the
    applied control against uniform deviations of the given radius. With a
    non-optimal gain the gradient check and usually the gap check fail,
    which is the intended way to detect a corrupted candidate.
    """
    if riccati is None:
        riccati = solve_riccati_lq(model)
    source = as_source(seed)
    bundle = simulate_lq_closed_loop(
        model, riccati, n_paths=n_paths, seed=source, keep_paths=True, gain=gain
    )
    adjoints = build_adjoints(model, riccati)
    steps = model.grid.steps
    if node_stride is None:
        node_stride = max(1, steps // 20)
    nodes = range(0, steps + 1, node_stride)
    times = model.grid.times()
    k = model.dims[1]
    control_gen = source.child(stream_id=source.stream_id + 1).generator(0)

    p_vals = adjoints.first_order.values
    q_vals = adjoints.volatility.values
    p2_vals = adjoints.second_order.path.values
    b_vals = model.B.values
    n_vals = model.N.values

    min_gap = np.inf
    max_grad = 0.0
    max_mismatch = 0.0
    max_identity = 0.0
    n_states = 0

    for path_idx in range(bundle.n_paths):
        for i in nodes:
            x = bundle.states[path_idx, i]
            u_ref = bundle.controls[path_idx, i]
            t = times[i]
            p = p_vals[i] @ x
            q = q_vals[i]
            z = q.T @ x
            n_states += 1
            grad = float(np.linalg.norm(b_vals[i].T @ p + n_vals[i] @ u_ref))
            max_grad = max(max_grad, grad)
            h_ref = hamiltonian(model, t, x, u_ref, p, q, z)
            ext_ref = extended_hamiltonian(
                model, t, x, u_ref, u_ref, p, q, z, p2_vals[i]
            )
            max_mismatch = max(max_mismatch, abs(ext_ref - h_ref))
            offsets = control_gen.uniform(-radius, radius, size=(n_controls, k))
            for du in offsets:
                u = u_ref + du
                h = hamiltonian(model, t, x, u, p, q, z)
                ext = extended_hamiltonian(
                    model, t, x, u, u_ref, p, q, z, p2_vals[i]
                )
                max_mismatch = max(max_mismatch, abs(ext - h))
                gap = h - h_ref
                min_gap = min(min_gap, gap)
                quadratic = 0.5 * float(du @ n_vals[i] @ du)
                max_identity = max(max_identity, abs(gap - quadratic))

    return SmpReport(
        min_gap=float(min_gap),
        max_gradient_norm=float(max_grad),
        max_extended_mismatch=float(max_mismatch),
        max_identity_error=float(max_identity),
        n_states=n_states,
        n_controls=n_controls,
    )


@dataclass(frozen=True)
class SecondOrderReport:
    terminal_exact: bool
    min_eigenvalue: float
    max_residual: float

    @property
    def all_ok(self) -> bool:
        return self.terminal_exact and self.min_eigenvalue >= GAP_FLOOR


def second_order_adjoint_report(
    model: LqModel, riccati: Optional[RiccatiSolution] = None
) -> SecondOrderReport:
    """Sanity report on the second-order adjoint: terminal data, sign, residual."""
    if riccati is None:
        riccati = solve_riccati_lq(model)
    second = solve_second_order_adjoint_lq(model, riccati)
    vals = second.path.values
    terminal_exact = bool(np.array_equal(vals[-1], model.H))
    min_eig = np.inf
    for layer in vals:
        min_eig = min(min_eig, float(np.linalg.eigvalsh(layer)[0]))
    residual = ode_residual(
        second.path.values, model.grid, _second_order_drift(model, riccati.path)
    )
    return SecondOrderReport(
        terminal_exact=terminal_exact,
        min_eigenvalue=float(min_eig),
        max_residual=float(np.max(residual)),
    )
