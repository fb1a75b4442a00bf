"""Command line front end.

Every command writes machine-readable artifacts (JSON plus CSV with
commented headers) into --out and prints a one-line summary. Outputs embed
the model digest along with the grid and seed, and contain no timestamps or
absolute paths, so rerunning a command with identical inputs reproduces the
files byte for byte.

Exit codes: 0 success, 1 invalid input or failed check, 2 blow-up of a
backward solve, 3 inconclusive Monte Carlo (heavy-tailed weights or
standard error above a tenth of the estimate scale).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .criterion import mean_variance_check, taylor_terms, variance_decomposition
from .grids import TimeGrid
from .lattice import TerminalSpec, lattice_solve, lattice_solve_symmetric_reference
from .lq import RiccatiBlowupError, solve_lq, validate_symmetric_case
from .models import (
    LoadedModel,
    ModelFormatError,
    load_model,
    riccati_wellposedness_indicator,
)
from .portfolio import compare_strategies, portfolio_bounds_report, solve_portfolio
from .riccati import check_riccati_bounds, solve_riccati_lq
from .sde import EstimateResult
from .smp import adjoint_residual, build_adjoints, check_smp_inequality, second_order_adjoint_report

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_BLOWUP = 2
EXIT_INCONCLUSIVE = 3

CSV_FORMAT = "asymrisk-csv-1"
BUILTIN_MODELS = ("lq_scalar", "lq_two_state", "factor_zero_loading", "factor_symmetric")


# ----------------------------------------------------------------------
# payoff registry for the lattice commands
# ----------------------------------------------------------------------

def payoff_registry() -> dict:
    """Named terminal functionals of the two drivers at the horizon."""
    return {
        "constant": TerminalSpec(
            lambda w1, w2: np.full(np.broadcast(w1, w2).shape, 0.7),
            growth="bounded", depends_on="both", name="constant",
        ),
        "linear": TerminalSpec(
            lambda w1, w2: w1 + 0.5 * w2,
            growth="linear", depends_on="both", name="linear",
        ),
        "quadratic": TerminalSpec(
            lambda w1, w2: w1 * w1,
            growth="quadratic-subcritical", depends_on="w1_only", name="quadratic",
        ),
        "product": TerminalSpec(
            lambda w1, w2: w1 * w2,
            growth="quadratic-subcritical", depends_on="both", name="product",
        ),
        "call": TerminalSpec(
            lambda w1, w2: np.maximum(w1 - 1.0, 0.0),
            growth="linear", depends_on="w1_only", name="call",
        ),
    }


def _payoff(name: str) -> TerminalSpec:
    registry = payoff_registry()
    if name not in registry:
        raise ModelFormatError(
            f"unknown payoff {name!r}; available: {', '.join(sorted(registry))}"
        )
    return registry[name]


# ----------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------

def _native(obj):
    if isinstance(obj, dict):
        return {k: _native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _native(obj.tolist())
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_native(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, comments: list, header: list, rows) -> None:
    lines = [f"# {c}" for c in [CSV_FORMAT, *comments]]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_model(args, expected_kind: str) -> LoadedModel:
    builtin = getattr(args, "builtin", None)
    model_path = getattr(args, "model", None)
    if builtin is not None:
        if builtin not in BUILTIN_MODELS:
            raise ModelFormatError(
                f"unknown builtin {builtin!r}; available: {', '.join(BUILTIN_MODELS)}"
            )
        ref = resources.files("asymrisk").joinpath("data", builtin + ".json")
        with resources.as_file(ref) as p:
            loaded = load_model(p)
        loaded = LoadedModel(loaded.model, loaded.kind, loaded.sha256, f"builtin:{builtin}")
    elif model_path is not None:
        loaded = load_model(model_path)
    else:
        raise ModelFormatError("provide --model PATH or --builtin NAME")
    if loaded.kind != expected_kind:
        raise ModelFormatError(
            f"this command needs a {expected_kind!r} model, got {loaded.kind!r} "
            f"from {loaded.source}"
        )
    return loaded


def _model_comments(loaded: LoadedModel) -> list:
    grid = loaded.model.grid
    return [
        f"model sha256 {loaded.sha256}",
        f"grid horizon={grid.horizon!r} steps={grid.steps}",
    ]


def _grid_payload(model) -> dict:
    return {"horizon": model.grid.horizon, "steps": model.grid.steps}


def _estimate_payload(result: EstimateResult) -> dict:
    return {
        "estimate": result.estimate,
        "stderr": result.stderr,
        "n_used": result.n_used,
        "heavy_tail": result.heavy_tail,
        "tail_share": result.tail_share,
    }


def _inconclusive(result: EstimateResult) -> bool:
    return result.heavy_tail or result.stderr > 0.1 * max(abs(result.estimate), 0.1)


# ----------------------------------------------------------------------
# command handlers
# ----------------------------------------------------------------------

def _cmd_riccati(args) -> int:
    loaded = _resolve_model(args, "lq")
    model = loaded.model
    solution = solve_riccati_lq(model)
    bounds = check_riccati_bounds(model, solution)
    damping = riccati_wellposedness_indicator(model)
    out = _out_dir(args)

    n = model.dims[0]
    header = ["t"] + [f"p_{i}_{j}" for i in range(n) for j in range(n)]
    times = model.grid.times()
    rows = (
        [times[k], *solution.path.values[k].ravel()]
        for k in range(model.grid.n_nodes)
    )
    _write_csv(out / "riccati.csv", _model_comments(loaded), header, rows)
    _write_json(out / "riccati.json", {
        "model_sha256": loaded.sha256,
        "grid": _grid_payload(model),
        "blowup": solution.blowup_flag,
        "label": solution.label,
        "max_norm": solution.max_norm,
        "damping_max_eigenvalue": damping.max(),
        "bounds": {
            "applicable": bounds.applicable,
            "psd_ok": bounds.psd_ok,
            "dominated_ok": bounds.dominated_ok,
            "norm_ok": bounds.norm_ok,
            "min_eigenvalue": bounds.min_eigenvalue,
            "min_gap_eigenvalue": bounds.min_gap_eigenvalue,
            "max_norm": bounds.max_norm,
            "norm_bound": bounds.norm_bound,
            "message": bounds.message,
        },
    })
    if solution.blowup_flag:
        print(f"riccati: blow-up (max norm {solution.max_norm:.3e}); wrote {out}")
        return EXIT_BLOWUP
    print(f"riccati: ok ({solution.label}, max norm {solution.max_norm:.6g}); wrote {out}")
    return EXIT_OK


def _cmd_lq(args) -> int:
    loaded = _resolve_model(args, "lq")
    solution = solve_lq(loaded.model)
    out = _out_dir(args)
    k, n = solution.gain.values.shape[1:]
    header = ["t"] + [f"k_{i}_{j}" for i in range(k) for j in range(n)]
    times = loaded.model.grid.times()
    rows = (
        [times[idx], *solution.gain.values[idx].ravel()]
        for idx in range(loaded.model.grid.n_nodes)
    )
    _write_csv(out / "gain.csv", _model_comments(loaded), header, rows)
    _write_json(out / "lq.json", {
        "model_sha256": loaded.sha256,
        "grid": _grid_payload(loaded.model),
        "value": solution.value,
        "value_quadratic": solution.value_quadratic,
        "value_noise": solution.value_noise,
        "initial_coefficient": solution.riccati.initial,
        "initial_gain": solution.gain.initial,
        "label": solution.riccati.label,
    })
    print(f"lq: value {solution.value:.10g}; wrote {out}")
    return EXIT_OK


def _cmd_lq_sim(args) -> int:
    loaded = _resolve_model(args, "lq")
    check = validate_symmetric_case(
        loaded.model, args.theta, n_paths=args.paths, seed=args.seed
    )
    out = _out_dir(args)
    _write_json(out / "lq_sim.json", {
        "model_sha256": loaded.sha256,
        "grid": _grid_payload(loaded.model),
        "seed": args.seed,
        "n_paths": args.paths,
        "theta": args.theta,
        "pde_value": check.pde_value,
        "monte_carlo": _estimate_payload(check.monte_carlo),
        "z_abs": check.z_abs,
        "passed": check.passed,
        "inconclusive": check.inconclusive,
    })
    if check.inconclusive or _inconclusive(check.monte_carlo):
        print(f"lq-sim: inconclusive (tail share {check.monte_carlo.tail_share:.3f})")
        return EXIT_INCONCLUSIVE
    if not check.passed:
        print(f"lq-sim: FAILED, |z| = {check.z_abs:.2f}")
        return EXIT_INVALID
    print(f"lq-sim: ok, |z| = {check.z_abs:.2f}; wrote {out}")
    return EXIT_OK


def _cmd_bsde(args) -> int:
    if not (0.0 <= args.gamma1 <= 1.0 and 0.0 <= args.gamma2 <= 1.0):
        print("bsde: gamma weights must lie in [0, 1]", file=sys.stderr)
        return EXIT_INVALID
    spec = _payoff(args.payoff)
    grid = TimeGrid(args.horizon, args.steps)
    try:
        solution = lattice_solve(spec, args.gamma1, args.gamma2, grid, keep_surfaces=False)
    except ValueError as exc:
        print(f"bsde: lattice blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    reference = None
    if args.gamma1 == args.gamma2 and args.gamma1 > 0.0:
        reference = lattice_solve_symmetric_reference(spec, 2.0 * args.gamma1, grid)
    out = _out_dir(args)
    _write_json(out / "bsde.json", {
        "payoff": args.payoff,
        "gamma1": args.gamma1,
        "gamma2": args.gamma2,
        "steps": args.steps,
        "horizon": args.horizon,
        "value": solution.y0,
        "axis": solution.axis,
        "stability_ratio": solution.stability_ratio,
        "warnings": list(solution.warnings),
        "symmetric_reference": reference,
    })
    print(f"bsde: value {solution.y0:.10g}; wrote {out}")
    return EXIT_OK


def _cmd_criterion(args) -> int:
    spec = _payoff(args.payoff)
    grid = TimeGrid(args.horizon, args.steps)
    report = mean_variance_check(
        spec, grid, direction=(args.direction[0], args.direction[1]),
        scales=tuple(args.scales),
    )
    out = _out_dir(args)
    rows = [
        [h, g1, g2, eps, r]
        for (g1, g2, eps), (h, r) in zip(report.criterion_values, report.remainders)
    ]
    _write_csv(
        out / "criterion.csv",
        [f"payoff {args.payoff}", f"grid horizon={args.horizon!r} steps={args.steps}"],
        ["scale", "gamma1", "gamma2", "value", "remainder"],
        rows,
    )
    _write_json(out / "criterion.json", {
        "payoff": args.payoff,
        "steps": args.steps,
        "horizon": args.horizon,
        "direction": list(report.direction),
        "mean": report.mean,
        "d1": report.d1,
        "d2": report.d2,
        "remainder_ratios": list(report.ratios),
    })
    ratios = ", ".join(f"{r:.3f}" for r in report.ratios)
    print(f"criterion: mean {report.mean:.8g}, d = ({report.d1:.8g}, {report.d2:.8g}), "
          f"remainder ratios [{ratios}]; wrote {out}")
    return EXIT_OK


def _cmd_taylor(args) -> int:
    spec = _payoff(args.payoff)
    grid = TimeGrid(args.horizon, args.steps)
    terms = taylor_terms(spec, grid)
    out = _out_dir(args)
    _write_json(out / "taylor.json", {
        "payoff": args.payoff,
        "steps": args.steps,
        "horizon": args.horizon,
        "mean": terms.mean,
        "d1": terms.d1,
        "d2": terms.d2,
    })
    print(f"taylor: mean {terms.mean:.8g}, d = ({terms.d1:.8g}, {terms.d2:.8g}); wrote {out}")
    return EXIT_OK


def _cmd_vardecomp(args) -> int:
    spec = _payoff(args.payoff)
    grid = TimeGrid(args.horizon, args.steps)
    report = variance_decomposition(spec, grid)
    out = _out_dir(args)
    _write_json(out / "vardecomp.json", {
        "payoff": args.payoff,
        "steps": args.steps,
        "horizon": args.horizon,
        "mean": report.terms.mean,
        "d1": report.terms.d1,
        "d2": report.terms.d2,
        "variance": report.terms.variance,
        "cross": report.terms.cross,
        "axioms": [
            {"name": a.name, "passed": a.passed, "detail": a.detail}
            for a in report.axioms
        ],
        "all_pass": report.all_pass,
    })
    status = "ok" if report.all_pass else "FAILED"
    print(f"vardecomp: {status}, d = ({report.terms.d1:.8g}, {report.terms.d2:.8g}); wrote {out}")
    return EXIT_OK if report.all_pass else EXIT_INVALID


def _cmd_portfolio(args) -> int:
    loaded = _resolve_model(args, "factor_market")
    solution = solve_portfolio(loaded.model)
    bounds = portfolio_bounds_report(loaded.model, solution)
    out = _out_dir(args)

    grid = loaded.model.grid
    n = loaded.model.dims[1]
    header = (["t"]
              + [f"pi_{i}_{j}" for i in range(n) for j in range(n)]
              + [f"phi_{i}" for i in range(n)]
              + ["kappa"])
    times = grid.times()
    rows = (
        [times[idx], *solution.quadratic.path.values[idx].ravel(),
         *solution.linear.values[idx], solution.constant.values[idx]]
        for idx in range(grid.n_nodes)
    )
    _write_csv(out / "coefficients.csv", _model_comments(loaded), header, rows)
    _write_json(out / "portfolio.json", {
        "model_sha256": loaded.sha256,
        "grid": _grid_payload(loaded.model),
        "optimal_growth": solution.optimal_growth,
        "label": solution.quadratic.label,
        "schur_min_eigenvalue": solution.couplings.schur_min_eig,
        "couplings": {
            "theta": solution.couplings.theta,
            "xi": solution.couplings.xi,
            "psi": solution.couplings.psi,
        },
        "strategy_at_start": {
            "intercept": solution.strategy.intercept.initial,
            "slope": solution.strategy.slope.initial,
        },
        "bounds": {
            "applicable": bounds.applicable,
            "psd_ok": bounds.psd_ok,
            "norm_ok": bounds.norm_ok,
            "min_eigenvalue": bounds.min_eigenvalue,
            "max_norm": bounds.max_norm,
            "norm_bound": bounds.norm_bound,
        },
    })
    print(f"portfolio: growth {solution.optimal_growth:.10g}; wrote {out}")
    return EXIT_OK


def _cmd_portfolio_sim(args) -> int:
    loaded = _resolve_model(args, "factor_market")
    model = loaded.model
    solution = solve_portfolio(model)
    u0 = solution.strategy.intercept.initial.copy()
    m = model.dims[0]
    strategies = {
        "optimal": solution.strategy,
        "frozen_initial": lambda t, x: u0,
        "cash": lambda t, x: np.zeros(m),
    }
    results = compare_strategies(
        model, strategies, args.theta, n_paths=args.paths, seed=args.seed
    )
    optimal = results["optimal"]
    z_abs = abs(optimal.z_score(solution.optimal_growth))
    out = _out_dir(args)
    _write_json(out / "growth_sim.json", {
        "model_sha256": loaded.sha256,
        "grid": _grid_payload(model),
        "seed": args.seed,
        "n_paths": args.paths,
        "theta": args.theta,
        "certificate_growth": solution.optimal_growth,
        "z_abs_optimal": z_abs,
        "strategies": {name: _estimate_payload(r) for name, r in results.items()},
    })
    if _inconclusive(optimal):
        print(f"portfolio-sim: inconclusive (tail share {optimal.tail_share:.3f})")
        return EXIT_INCONCLUSIVE
    print(f"portfolio-sim: optimal growth {optimal.estimate:.6g} "
          f"(certificate {solution.optimal_growth:.6g}, |z| = {z_abs:.2f}); wrote {out}")
    return EXIT_OK


def _cmd_verify_smp(args) -> int:
    loaded = _resolve_model(args, "lq")
    model = loaded.model
    riccati = solve_riccati_lq(model)
    if riccati.blowup_flag:
        print("verify-smp: backward solve blew up", file=sys.stderr)
        return EXIT_BLOWUP
    report = check_smp_inequality(
        model, riccati,
        n_paths=args.paths, n_controls=args.controls,
        radius=args.radius, seed=args.seed,
    )
    second = second_order_adjoint_report(model, riccati)
    residuals = adjoint_residual(model, build_adjoints(model, riccati))
    out = _out_dir(args)
    _write_json(out / "smp.json", {
        "model_sha256": loaded.sha256,
        "grid": _grid_payload(model),
        "seed": args.seed,
        "min_gap": report.min_gap,
        "max_gradient_norm": report.max_gradient_norm,
        "max_extended_mismatch": report.max_extended_mismatch,
        "max_identity_error": report.max_identity_error,
        "n_states": report.n_states,
        "n_controls": report.n_controls,
        "passed": report.passed,
        "second_order": {
            "terminal_exact": second.terminal_exact,
            "min_eigenvalue": second.min_eigenvalue,
            "max_residual": second.max_residual,
            "all_ok": second.all_ok,
        },
        "adjoint_residuals": residuals,
    })
    ok = report.passed and second.all_ok
    status = "ok" if ok else "FAILED"
    print(f"verify-smp: {status} (min gap {report.min_gap:.3e}, "
          f"max gradient {report.max_gradient_norm:.3e}); wrote {out}")
    return EXIT_OK if ok else EXIT_INVALID


def _cmd_acceptance(args) -> int:
    """Deterministic end-to-end battery over the builtin models."""
    out = _out_dir(args)
    statuses = {}

    ns = argparse.Namespace
    statuses["riccati"] = _cmd_riccati(ns(builtin="lq_scalar", model=None, out=str(out)))
    statuses["lq"] = _cmd_lq(ns(builtin="lq_scalar", model=None, out=str(out)))
    statuses["lq_sim"] = _cmd_lq_sim(ns(
        builtin="lq_scalar", model=None, out=str(out),
        theta=0.5, paths=args.paths, seed=args.seed,
    ))
    statuses["bsde"] = _cmd_bsde(ns(
        payoff="quadratic", gamma1=0.2, gamma2=0.2, steps=400, horizon=1.0,
        out=str(out),
    ))
    statuses["criterion"] = _cmd_criterion(ns(
        payoff="quadratic", direction=[1.0, 1.0],
        scales=[0.04, 0.02, 0.01, 0.005], steps=2000, horizon=1.0, out=str(out),
    ))
    statuses["vardecomp"] = _cmd_vardecomp(ns(
        payoff="product", steps=128, horizon=1.0, out=str(out),
    ))
    statuses["portfolio"] = _cmd_portfolio(ns(
        builtin="factor_zero_loading", model=None, out=str(out),
    ))
    statuses["portfolio_sim"] = _cmd_portfolio_sim(ns(
        builtin="factor_symmetric", model=None, out=str(out),
        theta=0.4, paths=args.paths, seed=args.seed,
    ))
    statuses["verify_smp"] = _cmd_verify_smp(ns(
        builtin="lq_scalar", model=None, out=str(out),
        paths=5, controls=20, radius=5.0, seed=args.seed,
    ))

    digests = {}
    for name in sorted(p.name for p in out.iterdir() if p.suffix in (".json", ".csv")):
        if name == "summary.json":
            continue
        digests[name] = hashlib.sha256((out / name).read_bytes()).hexdigest()
    _write_json(out / "summary.json", {
        "seed": args.seed,
        "paths": args.paths,
        "statuses": statuses,
        "file_sha256": digests,
    })
    print(f"acceptance: statuses {statuses}; wrote {out}")
    codes = set(statuses.values())
    for severe in (EXIT_BLOWUP, EXIT_INVALID, EXIT_INCONCLUSIVE):
        if severe in codes:
            return severe
    return EXIT_OK


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def _add_model_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="path to a JSON model file")
    group.add_argument("--builtin", help=f"builtin model name ({', '.join(BUILTIN_MODELS)})")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="asymrisk-out", help="output directory")


def _add_lattice_args(p: argparse.ArgumentParser, default_steps: int) -> None:
    p.add_argument("--payoff", required=True,
                   help=f"payoff name ({', '.join(sorted(payoff_registry()))})")
    p.add_argument("--steps", type=int, default=default_steps)
    p.add_argument("--horizon", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asymrisk",
        description="Numerical toolkit for asymmetric quadratic risk criteria",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("riccati", help="solve the backward quadratic coefficient")
    _add_model_args(p)
    _add_out(p)
    p.set_defaults(handler=_cmd_riccati)

    p = sub.add_parser("lq", help="solve the control problem: gain and value")
    _add_model_args(p)
    _add_out(p)
    p.set_defaults(handler=_cmd_lq)

    p = sub.add_parser("lq-sim", help="Monte Carlo check of the scalar-coupling value")
    _add_model_args(p)
    _add_out(p)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_lq_sim)

    p = sub.add_parser("bsde", help="lattice value of a payoff under the criterion")
    _add_lattice_args(p, default_steps=400)
    _add_out(p)
    p.add_argument("--gamma1", type=float, required=True)
    p.add_argument("--gamma2", type=float, required=True)
    p.set_defaults(handler=_cmd_bsde)

    p = sub.add_parser("criterion", help="mean-variance expansion remainder study")
    _add_lattice_args(p, default_steps=2000)
    _add_out(p)
    p.add_argument("--direction", type=float, nargs=2, default=[1.0, 1.0],
                   metavar=("G1", "G2"))
    p.add_argument("--scales", type=float, nargs="+",
                   default=[0.04, 0.02, 0.01, 0.005])
    p.set_defaults(handler=_cmd_criterion)

    p = sub.add_parser("taylor", help="lattice mean and per-driver expansion coefficients")
    _add_lattice_args(p, default_steps=2000)
    _add_out(p)
    p.set_defaults(handler=_cmd_taylor)

    p = sub.add_parser("vardecomp", help="variance split across drivers with axiom checks")
    _add_lattice_args(p, default_steps=128)
    _add_out(p)
    p.set_defaults(handler=_cmd_vardecomp)

    p = sub.add_parser("portfolio", help="optimal growth certificate and strategy")
    _add_model_args(p)
    _add_out(p)
    p.set_defaults(handler=_cmd_portfolio)

    p = sub.add_parser("portfolio-sim", help="Monte Carlo growth comparison of strategies")
    _add_model_args(p)
    _add_out(p)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_portfolio_sim)

    p = sub.add_parser("verify-smp", help="sampled optimality check of the feedback law")
    _add_model_args(p)
    _add_out(p)
    p.add_argument("--paths", type=int, default=20)
    p.add_argument("--controls", type=int, default=50)
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(handler=_cmd_verify_smp)

    p = sub.add_parser("acceptance", help="deterministic battery over builtin models")
    _add_out(p)
    p.add_argument("--paths", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_acceptance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ModelFormatError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RiccatiBlowupError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
