import numpy as np
import pytest

from asymrisk.grids import MatrixPath, ScalarPath, TimeGrid, VectorPath


def test_basic_quantities():
    g = TimeGrid(1.0, 200)
    assert g.dt == 0.005
    assert g.n_nodes == 201
    t = g.times()
    assert t[0] == 0.0
    assert t[-1] == 1.0
    assert len(t) == 201


def test_index_of_round_trip():
    g = TimeGrid(2.0, 137)
    for i, t in enumerate(g.times()):
        assert g.index_of(t) == i


def test_with_steps_keeps_horizon():
    g = TimeGrid(0.7, 10).with_steps(40)
    assert g.horizon == 0.7
    assert g.steps == 40


@pytest.mark.parametrize("horizon,steps", [(0.0, 10), (-1.0, 10), (1.0, 0), (1.0, -3)])
def test_degenerate_grids_rejected(horizon, steps):
    with pytest.raises(ValueError):
        TimeGrid(horizon, steps)


def test_path_node_evaluation_is_exact():
    g = TimeGrid(1.0, 8)
    vals = np.arange(9, dtype=float).reshape(9, 1, 1) ** 2
    p = MatrixPath(g, vals)
    for i, t in enumerate(g.times()):
        assert p.evaluate(t)[0, 0] == vals[i, 0, 0]


def test_path_midpoint_interpolation_is_linear():
    g = TimeGrid(1.0, 4)
    vals = np.array([0.0, 1.0, 4.0, 9.0, 16.0]).reshape(5, 1, 1)
    p = MatrixPath(g, vals)
    mid = p.evaluate(0.125)
    assert mid[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_initial_terminal_properties():
    g = TimeGrid(1.0, 3)
    v = VectorPath(g, np.arange(8, dtype=float).reshape(4, 2))
    assert np.array_equal(v.initial, [0.0, 1.0])
    assert np.array_equal(v.terminal, [6.0, 7.0])
    s = ScalarPath(g, np.array([5.0, 6.0, 7.0, 8.0]))
    assert s.initial == 5.0
    assert s.terminal == 8.0


def test_path_length_must_match_grid():
    g = TimeGrid(1.0, 3)
    with pytest.raises(ValueError):
        ScalarPath(g, np.zeros(3))
