import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymrisk.grids import TimeGrid
from asymrisk.lattice import (
    TerminalSpec,
    convergence_probe,
    lattice_solve,
    lattice_solve_symmetric_reference,
    martingale_decomposition,
)

from _oracles import PRODUCT_SPEC, W1_SPEC, W1_SQUARED_SPEC, constant_spec, linear_spec

UNIT = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@settings(max_examples=25, deadline=None)
@given(g1=UNIT, g2=UNIT, c=st.floats(min_value=-5.0, max_value=5.0, allow_nan=False))
def test_constants_preserved_bitwise(g1, g2, c):
    sol = lattice_solve(constant_spec(c), g1, g2, TimeGrid(1.0, 16),
                        keep_surfaces=False)
    assert sol.y0 == c


@settings(max_examples=25, deadline=None)
@given(g1=UNIT, g2=UNIT,
       a=st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
       b=st.floats(min_value=-2.0, max_value=2.0, allow_nan=False))
def test_linear_payoffs_exact(g1, g2, a, b):
    # Constant per-driver slopes make the driver term deterministic, so the
    # value is (g1 a^2 + g2 b^2) T with no discretization error.
    sol = lattice_solve(linear_spec(a, b), g1, g2, TimeGrid(1.0, 16),
                        keep_surfaces=False)
    assert sol.y0 == pytest.approx((g1 * a * a + g2 * b * b) * 1.0, abs=1e-13)


def test_symmetric_reference_single_driver():
    ref = lattice_solve_symmetric_reference(W1_SPEC, 0.5, TimeGrid(1.0, 200))
    assert abs(ref - 0.25) < 1e-3
    # The asymmetric solver at the matching couplings hits the value exactly.
    full = lattice_solve(W1_SPEC, 0.25, 0.25, TimeGrid(1.0, 200),
                         keep_surfaces=False)
    assert abs(full.y0 - 0.25) < 1e-12


def test_monotone_in_payoff():
    lo = TerminalSpec(lambda w1, w2: np.minimum(w1, 1.0), name="lo")
    hi = TerminalSpec(lambda w1, w2: np.minimum(w1, 1.0) + 0.3, name="hi")
    grid = TimeGrid(1.0, 32)
    y_lo = lattice_solve(lo, 0.4, 0.6, grid, keep_surfaces=False).y0
    y_hi = lattice_solve(hi, 0.4, 0.6, grid, keep_surfaces=False).y0
    assert y_lo <= y_hi
    # Constant shifts pass through unchanged.
    assert y_hi - y_lo == pytest.approx(0.3, abs=1e-13)


def test_monotone_in_coupling():
    grid = TimeGrid(1.0, 32)
    values = [lattice_solve(W1_SQUARED_SPEC, g, 0.0, grid, keep_surfaces=False).y0
              for g in (0.0, 0.05, 0.1, 0.15)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_single_axis_matches_full_lattice():
    grid = TimeGrid(1.0, 64)
    fast = lattice_solve(W1_SQUARED_SPEC, 0.2, 0.4, grid, keep_surfaces=False).y0
    slow_spec = TerminalSpec(lambda w1, w2: w1 * w1,
                             growth="quadratic-subcritical", name="w1sq_2d")
    slow = lattice_solve(slow_spec, 0.2, 0.4, grid, keep_surfaces=False).y0
    assert fast == pytest.approx(slow, rel=1e-12)
    assert lattice_solve(W1_SQUARED_SPEC, 0.2, 0.4, grid,
                         keep_surfaces=False).axis == "w1_only"


def test_surfaces_do_not_change_the_value():
    grid = TimeGrid(1.0, 24)
    with_s = lattice_solve(PRODUCT_SPEC, 0.3, 0.7, grid, keep_surfaces=True)
    without = lattice_solve(PRODUCT_SPEC, 0.3, 0.7, grid, keep_surfaces=False)
    assert with_s.y0 == without.y0
    assert without.y_surface is None
    assert len(with_s.y_surface) == grid.n_nodes
    assert len(with_s.z1_surface) == grid.steps
    assert with_s.y_surface[-1].shape == (grid.n_nodes, grid.n_nodes)


def test_value_guard_trips_past_critical_coupling():
    # exp(2 g W^2) has no Gaussian moment once g >= 0.25; far past that the
    # backward values overflow the guard instead of returning garbage.
    with pytest.raises(ValueError, match="exceeded"):
        lattice_solve(W1_SQUARED_SPEC, 0.6, 0.6, TimeGrid(1.0, 200),
                      keep_surfaces=False)


def test_stability_ratio_reported():
    # bounded volatility (linear payoff): comfortably inside the regime
    lin = lattice_solve(W1_SPEC, 0.2, 0.2, TimeGrid(1.0, 64),
                        keep_surfaces=False)
    assert 0.0 <= lin.stability_ratio < 1.0
    assert lin.warnings == ()
    # the quadratic payoff's volatility grows across the lattice edge, so the
    # same coupling and grid must surface a warning instead of staying silent
    quad = lattice_solve(W1_SQUARED_SPEC, 0.2, 0.2, TimeGrid(1.0, 64),
                         keep_surfaces=False)
    assert quad.stability_ratio >= 1.0
    assert any("stability ratio" in w for w in quad.warnings)


def test_subcritical_quadratic_converges_to_closed_form():
    # Symmetric coupling g on W^2: value = log E[exp(2 g W^2)] / (2 g)
    # = -log(1 - 4 g) / (4 g) at T = 1.
    g = 0.2
    exact = -np.log(1.0 - 4.0 * g) / (4.0 * g)
    table = convergence_probe(W1_SQUARED_SPEC, g, g, (100, 200, 400, 800),
                              reference=exact)
    errs = [r[2] for r in table.rows]
    assert errs[-1] < errs[0]
    assert 0.7 < table.empirical_order < 1.3


def test_decomposition_variance_identity_product():
    d = martingale_decomposition(PRODUCT_SPEC, TimeGrid(1.0, 128))
    assert d.mean == pytest.approx(0.0, abs=1e-14)
    assert d.d1 == 0.5
    assert d.d2 == 0.5
    assert d.d1 + d.d2 == d.variance
    assert d.cross > 0.0
