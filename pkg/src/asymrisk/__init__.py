"""Numerical toolkit for stochastic control with asymmetric quadratic risk.

The risk criterion weights the two noise channels differently through a
pair of coefficients in [0, 1]. The package provides:

* a recombining two-driver lattice for the nonlinear expectation and its
  mean-variance expansion (asymrisk.lattice, asymrisk.criterion);
* backward matrix equations with comparison bounds, blow-up guards, and
  the induced linear feedback for the LQ control problem (asymrisk.riccati,
  asymrisk.lq);
* adjoint-based optimality verification (asymrisk.smp);
* optimal-growth portfolios on a factor market (asymrisk.portfolio);
* chunk-deterministic Monte Carlo with exponential estimators
  (asymrisk.sde) and a reproducible command line (asymrisk.cli).

Hot lattice kernels run through a compiled extension when available and a
numpy fallback otherwise; both produce bit-identical layers. The active
choice is asymrisk.backend.BACKEND and can be forced to the fallback by
setting ASYMRISK_PURE_PYTHON=1 before import.
"""

from .backend import BACKEND
from .criterion import (
    DecompositionReport,
    MeanVarianceReport,
    TaylorTerms,
    evaluate_criterion,
    mean_variance_check,
    taylor_terms,
    variance_decomposition,
)
from .grids import MatrixPath, ScalarPath, TimeGrid, VectorPath
from .lattice import (
    DecompositionTerms,
    LatticeSolution,
    TerminalSpec,
    convergence_probe,
    lattice_solve,
    lattice_solve_symmetric_reference,
    martingale_decomposition,
)
from .lq import (
    LqSolution,
    LqValueProcess,
    RiccatiBlowupError,
    SymmetricCheck,
    closed_form_bsde,
    solve_lq,
    validate_symmetric_case,
)
from .models import (
    FactorMarketModel,
    GammaMatrix,
    LoadedModel,
    LqModel,
    ModelFormatError,
    load_model,
    model_digest,
    riccati_wellposedness_indicator,
    validate_factor_model,
    validate_lq_model,
)
from .portfolio import (
    AffineStrategy,
    CouplingMatrices,
    PortfolioSolution,
    build_theta_xi_psi,
    compare_strategies,
    portfolio_bounds_report,
    solve_portfolio,
)
from .riccati import (
    BoundsReport,
    RiccatiSolution,
    check_riccati_bounds,
    feedback_gain,
    ode_residual,
    riccati_sup_bound,
    solve_comparison_ode,
    solve_portfolio_constant,
    solve_portfolio_linear,
    solve_portfolio_riccati,
    solve_riccati_lq,
    solve_second_order_adjoint_lq,
)
from .rng import RandomSource
from .sde import (
    EstimateResult,
    PathBundle,
    estimate_growth_rate,
    estimate_symmetric_value,
    simulate_factor_and_wealth,
    simulate_lq_closed_loop,
)
from .smp import (
    AdjointBundle,
    SmpReport,
    adjoint_residual,
    build_adjoints,
    check_smp_inequality,
    extended_hamiltonian,
    hamiltonian,
    second_order_adjoint_report,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # grids and randomness
    "TimeGrid", "ScalarPath", "VectorPath", "MatrixPath", "RandomSource",
    # models
    "LqModel", "FactorMarketModel", "GammaMatrix", "LoadedModel",
    "ModelFormatError", "load_model", "model_digest",
    "validate_lq_model", "validate_factor_model",
    "riccati_wellposedness_indicator",
    # lattice and criterion
    "TerminalSpec", "LatticeSolution", "DecompositionTerms",
    "lattice_solve", "lattice_solve_symmetric_reference",
    "martingale_decomposition", "convergence_probe",
    "TaylorTerms", "MeanVarianceReport", "DecompositionReport",
    "taylor_terms", "evaluate_criterion", "mean_variance_check",
    "variance_decomposition",
    # backward equations
    "RiccatiSolution", "BoundsReport", "solve_riccati_lq",
    "solve_comparison_ode", "check_riccati_bounds", "riccati_sup_bound",
    "solve_second_order_adjoint_lq", "feedback_gain", "ode_residual",
    "solve_portfolio_riccati", "solve_portfolio_linear",
    "solve_portfolio_constant",
    # LQ control
    "LqSolution", "LqValueProcess", "SymmetricCheck", "RiccatiBlowupError",
    "solve_lq", "closed_form_bsde", "validate_symmetric_case",
    # optimality verification
    "AdjointBundle", "SmpReport", "build_adjoints", "adjoint_residual",
    "hamiltonian", "extended_hamiltonian", "check_smp_inequality",
    "second_order_adjoint_report",
    # portfolios
    "CouplingMatrices", "AffineStrategy", "PortfolioSolution",
    "build_theta_xi_psi", "solve_portfolio", "portfolio_bounds_report",
    "compare_strategies",
    # simulation
    "PathBundle", "EstimateResult", "simulate_lq_closed_loop",
    "simulate_factor_and_wealth", "estimate_symmetric_value",
    "estimate_growth_rate",
]
