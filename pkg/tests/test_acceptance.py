"""End-to-end acceptance battery.

Each test covers one numbered acceptance criterion and prints a single
[PASS]/[FAIL] line with the measured quantities under a wall-clock
budget. Criteria are self-contained on purpose: every test re-solves what it
needs so the timing includes the full pipeline for that check.

Run with `pytest -s tests/test_acceptance.py` to see all ten lines.
"""

import json
import os
import subprocess
import sys
from time import perf_counter

import numpy as np
from scipy.integrate import quad

from asymrisk.cli import main as cli_main
from asymrisk.criterion import mean_variance_check, variance_decomposition
from asymrisk.grids import MatrixPath, TimeGrid
from asymrisk.lattice import lattice_solve, lattice_solve_symmetric_reference
from asymrisk.lq import solve_lq, validate_symmetric_case
from asymrisk.portfolio import compare_strategies, solve_portfolio
from asymrisk.riccati import check_riccati_bounds, solve_riccati_lq
from asymrisk.sde import estimate_symmetric_value, simulate_lq_closed_loop
from asymrisk.smp import check_smp_inequality

from _oracles import (
    PRODUCT_SPEC,
    SCALAR_P0,
    SIN_SPEC,
    SIN_VARIANCE,
    SUM_SPEC,
    W1_SPEC,
    W1_SQUARED_SPEC,
    ZERO_LOADING_GROWTH,
    ZERO_LOADING_WEIGHT,
    builtin,
    constant_spec,
    linear_spec,
    portfolio_residuals,
    random_damped_lq,
    scalar_lq_model,
    tree_digests,
)


def _finish(num: int, label: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {num:02d} {label}: {detail}", flush=True)
    assert ok, f"criterion {num:02d} {label}: {detail}"


def test_01_scalar_backward_solve_accuracy_and_order():
    t0 = perf_counter()
    fine = solve_riccati_lq(scalar_lq_model(steps=1000))
    err = abs(float(fine.initial[0, 0]) - SCALAR_P0)
    # order probe at coarse grids, where truncation still dominates rounding
    e_coarse = abs(float(solve_riccati_lq(scalar_lq_model(steps=25)).initial[0, 0]) - SCALAR_P0)
    e_half = abs(float(solve_riccati_lq(scalar_lq_model(steps=50)).initial[0, 0]) - SCALAR_P0)
    ratio = e_coarse / e_half
    elapsed = perf_counter() - t0
    ok = err <= 1e-8 and 12.0 <= ratio <= 20.0 and elapsed < 1.0
    _finish(1, "scalar backward solve", ok,
            f"initial error {err:.3e} (tol 1e-8), halving ratio {ratio:.2f} "
            f"(window [12, 20]), {elapsed:.2f}s (budget 1s)")


def test_02_randomized_bounds_suite():
    t0 = perf_counter()
    g = np.random.default_rng(20260825)
    violations = 0
    n_models = 100
    for _ in range(n_models):
        dim = int(g.integers(1, 5))
        model = random_damped_lq(g, dim)
        report = check_riccati_bounds(model, solve_riccati_lq(model))
        if not (report.applicable and report.psd_ok
                and report.dominated_ok and report.norm_ok):
            violations += 1
    elapsed = perf_counter() - t0
    ok = violations == 0 and elapsed < 30.0
    _finish(2, "randomized envelope bounds", ok,
            f"{violations}/{n_models} violations in dims 1..4, "
            f"{elapsed:.1f}s (budget 30s)")


def test_03_lattice_exactness_and_symmetric_reference():
    t0 = perf_counter()
    grid = TimeGrid(1.0, 16)
    g = np.random.default_rng(31)
    pairs = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]
    pairs += [tuple(g.uniform(0.0, 1.0, 2)) for _ in range(40)]
    worst_const = 0.0
    worst_lin = 0.0
    a, b = 1.0, 0.5
    for g1, g2 in pairs:
        c = lattice_solve(constant_spec(0.7), g1, g2, grid, keep_surfaces=False)
        worst_const = max(worst_const, abs(c.y0 - 0.7))
        lin = lattice_solve(linear_spec(a, b), g1, g2, grid, keep_surfaces=False)
        # constant z = (a, b) makes the value mean + (g1 a^2 + g2 b^2) T
        worst_lin = max(worst_lin, abs(lin.y0 - (g1 * a * a + g2 * b * b)))
    grid200 = TimeGrid(1.0, 200)
    sym = lattice_solve(W1_SPEC, 0.25, 0.25, grid200, keep_surfaces=False)
    ref = lattice_solve_symmetric_reference(W1_SPEC, 0.5, grid200)
    sym_err = abs(sym.y0 - 0.25)
    ref_err = abs(ref - 0.25)
    elapsed = perf_counter() - t0
    ok = (worst_const == 0.0 and worst_lin <= 1e-13
          and sym_err <= 1e-3 and ref_err <= 1e-3 and elapsed < 10.0)
    _finish(3, "lattice exactness", ok,
            f"constants exact to {worst_const:.1e}, linear to {worst_lin:.1e} "
            f"over {len(pairs)} couplings; symmetric case off by {sym_err:.1e} "
            f"(independent route {ref_err:.1e}, tol 1e-3), "
            f"{elapsed:.1f}s (budget 10s)")


def test_04_remainder_decay_ratios():
    t0 = perf_counter()
    scales = (0.04, 0.02, 0.01, 0.005)
    quad_rep = mean_variance_check(
        W1_SQUARED_SPEC, TimeGrid(1.0, 2000), direction=(1.0, 1.0), scales=scales
    )
    lin_rep = mean_variance_check(
        linear_spec(1.0, 0.5), TimeGrid(1.0, 200), direction=(1.0, 1.0), scales=scales
    )
    max_lin = max(abs(r) for _, r in lin_rep.remainders)
    elapsed = perf_counter() - t0
    ok = (all(3.0 <= r <= 5.0 for r in quad_rep.ratios)
          and max_lin <= 1e-14 and elapsed < 30.0)
    ratios = ", ".join(f"{r:.3f}" for r in quad_rep.ratios)
    _finish(4, "remainder decay", ok,
            f"quadratic payoff ratios [{ratios}] (window [3, 5]), "
            f"linear payoff remainder {max_lin:.1e} (tol 1e-14), "
            f"{elapsed:.1f}s (budget 30s)")


def test_05_variance_split_oracles_and_axioms():
    t0 = perf_counter()
    grid128 = TimeGrid(1.0, 128)
    rep_prod = variance_decomposition(PRODUCT_SPEC, grid128)
    rep_sum = variance_decomposition(SUM_SPEC, grid128)
    rep_sin = variance_decomposition(SIN_SPEC, TimeGrid(1.0, 4000))
    tp, ts, tf = rep_prod.terms, rep_sum.terms, rep_sin.terms
    # direct second-moment oracles: for w1 w2 each share is int_0^1 t dt,
    # for w1 + w2 each share is int_0^1 1 dt, for sin(w1) the first share is
    # the full variance and the second driver carries nothing
    errs = [
        abs(tp.d1 - 0.5), abs(tp.d2 - 0.5),
        abs(ts.d1 - 1.0), abs(ts.d2 - 1.0),
        abs(tf.d1 - SIN_VARIANCE), abs(tf.d2 - 0.0),
    ]
    exact_split = (tp.d1 + tp.d2 == tp.variance
                   and ts.d1 + ts.d2 == ts.variance)
    sin_split = abs(tf.d1 + tf.d2 - tf.variance)
    axioms = rep_prod.all_pass and rep_sum.all_pass and rep_sin.all_pass
    elapsed = perf_counter() - t0
    ok = (max(errs) <= 1e-3 and exact_split and sin_split <= 1e-14
          and axioms and elapsed < 30.0)
    _finish(5, "variance split", ok,
            f"share errors max {max(errs):.1e} (tol 1e-3), bilinear splits "
            f"bit-exact {exact_split}, smooth split residual {sin_split:.1e}, "
            f"axioms {'pass' if axioms else 'FAIL'}, {elapsed:.1f}s (budget 30s)")


def test_06_symmetric_monte_carlo_and_perturbed_gains():
    t0 = perf_counter()
    model = scalar_lq_model(steps=1000)
    check = validate_symmetric_case(model, 0.5, n_paths=100_000, seed=7)
    solution = solve_lq(model)
    k0 = solution.gain.initial
    worst_slack = np.inf
    for mat in (np.zeros_like(k0), k0, 1.5 * k0):
        bundle = simulate_lq_closed_loop(
            model, gain=MatrixPath.constant(model.grid, mat),
            n_paths=100_000, seed=7, keep_paths=False,
        )
        est = estimate_symmetric_value(model, bundle, 0.5)
        worst_slack = min(worst_slack,
                          (est.estimate - solution.value) / est.stderr)
    elapsed = perf_counter() - t0
    ok = (check.passed and not check.inconclusive
          and worst_slack >= -3.0 and elapsed < 120.0)
    _finish(6, "symmetric Monte Carlo", ok,
            f"optimal |z| {check.z_abs:.2f} (limit 3), worst perturbed-gain "
            f"slack {worst_slack:+.2f} stderr (floor -3), "
            f"{elapsed:.1f}s (budget 120s)")


def test_07_sampled_optimality_inequality():
    t0 = perf_counter()
    model = scalar_lq_model(steps=200)
    riccati = solve_riccati_lq(model)
    report = check_smp_inequality(
        model, riccati, n_paths=20, n_controls=100, seed=1
    )
    elapsed = perf_counter() - t0
    ok = (report.min_gap >= -1e-10
          and report.max_gradient_norm <= 1e-8
          and report.max_extended_mismatch == 0.0
          and elapsed < 60.0)
    _finish(7, "sampled optimality", ok,
            f"min gap {report.min_gap:.2e} (floor -1e-10), max gradient "
            f"{report.max_gradient_norm:.2e} (tol 1e-8), lifted-form mismatch "
            f"{report.max_extended_mismatch:.1e} (must be 0), "
            f"{elapsed:.1f}s (budget 60s)")


def test_08_portfolio_growth_oracle_and_dominance():
    t0 = perf_counter()
    flat = builtin("factor_zero_loading")
    sol_flat = solve_portfolio(flat)
    theta_mat = sol_flat.couplings.theta
    ones = np.ones(flat.a.shape[0])

    def integrand(t):
        excess = flat.a - flat.r.evaluate(t) * ones
        rate = float(flat.r.evaluate(t))
        return rate + 0.5 * float(excess @ np.linalg.solve(theta_mat, excess))

    oracle_growth, quad_err = quad(integrand, 0.0, flat.grid.horizon)
    assert quad_err < 1e-12
    assert abs(oracle_growth - ZERO_LOADING_GROWTH) < 1e-12
    growth_err = abs(sol_flat.optimal_growth - oracle_growth)
    excess0 = flat.a - flat.r.initial * ones
    oracle_weight = np.linalg.solve(theta_mat, excess0)
    assert abs(float(oracle_weight[0]) - ZERO_LOADING_WEIGHT) < 1e-12
    weight_err = float(np.max(np.abs(
        sol_flat.strategy(0.0, flat.x0) - oracle_weight
    )))

    market = builtin("factor_symmetric")
    sol = solve_portfolio(market)
    m = market.dims[0]
    strategies = {
        "optimal": sol.strategy,
        "cash": lambda t, x: np.zeros(m),
        "timid": lambda t, x: 0.5 * sol.strategy(t, x),
        "overshoot": lambda t, x: 1.5 * sol.strategy(t, x),
    }
    results = compare_strategies(market, strategies, 0.4,
                                 n_paths=100_000, seed=11)
    opt = results["optimal"]
    z_cert = abs(opt.z_score(sol.optimal_growth))
    worst_margin = np.inf
    for name in ("cash", "timid", "overshoot"):
        other = results[name]
        combined = float(np.hypot(opt.stderr, other.stderr))
        worst_margin = min(worst_margin,
                           (opt.estimate - other.estimate) / combined)
    elapsed = perf_counter() - t0
    ok = (growth_err <= 1e-8 and weight_err <= 1e-8
          and z_cert <= 3.0 and not opt.heavy_tail
          and worst_margin >= -3.0 and elapsed < 120.0)
    _finish(8, "portfolio growth", ok,
            f"flat-market growth error {growth_err:.1e}, weight error "
            f"{weight_err:.1e} (tol 1e-8); certificate |z| {z_cert:.2f} "
            f"(limit 3), worst dominance margin {worst_margin:+.1f} stderr "
            f"(floor -3), {elapsed:.1f}s (budget 120s)")


def test_09_coefficient_back_substitution():
    t0 = perf_counter()
    worst = 0.0
    for name in ("factor_zero_loading", "factor_symmetric"):
        model = builtin(name)
        residuals = portfolio_residuals(model, solve_portfolio(model))
        worst = max(worst, *residuals.values())
    elapsed = perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 5.0
    _finish(9, "coefficient back-substitution", ok,
            f"max ODE residual {worst:.2e} (tol 1e-8) over both builtin "
            f"markets, {elapsed:.1f}s (budget 5s)")


def test_10_deterministic_battery_reruns(tmp_path):
    t0 = perf_counter()
    args = ["acceptance", "--paths", "20000", "--seed", "0"]
    first, second = tmp_path / "a", tmp_path / "b"
    rc1 = cli_main(args + ["--out", str(first)])
    rc2 = cli_main(args + ["--out", str(second)])
    digests = [tree_digests(str(first)), tree_digests(str(second))]
    # a different BLAS/OpenMP thread count must not change a single byte
    for threads in ("1", "4"):
        env = os.environ.copy()
        env.update({"OPENBLAS_NUM_THREADS": threads, "OMP_NUM_THREADS": threads})
        out = tmp_path / f"threads{threads}"
        proc = subprocess.run(
            [sys.executable, "-m", "asymrisk.cli"] + args + ["--out", str(out)],
            capture_output=True, text=True, env=env,
        )
        assert proc.returncode == 0, proc.stderr
        digests.append(tree_digests(str(out)))
    statuses = json.loads((first / "summary.json").read_text())["statuses"]
    identical = all(d == digests[0] for d in digests[1:])
    elapsed = perf_counter() - t0
    ok = (rc1 == 0 and rc2 == 0 and identical
          and all(v == 0 for v in statuses.values()))
    _finish(10, "deterministic reruns", ok,
            f"{len(digests)} runs ({len(digests[0])} files each) "
            f"byte-identical {identical}, statuses {statuses}, {elapsed:.1f}s")
