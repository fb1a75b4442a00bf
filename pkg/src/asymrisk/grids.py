"""Uniform time grids and sampled coefficient paths.

Everything downstream (ODE solvers, simulators, lattices) runs on a uniform
grid 0 = t_0 < ... < t_N = T. Time-varying coefficients are stored as N+1
samples with linear interpolation in between; evaluation at a grid node
returns the stored sample unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TimeGrid", "MatrixPath", "VectorPath", "ScalarPath"]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, horizon] into `steps` intervals.

    Parameters
    ----------
    horizon : float
        Terminal time T > 0.
    steps : int
        Number of intervals N >= 1; the grid has N+1 nodes.
    """

    horizon: float
    steps: int

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0.0):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")
        if not (isinstance(self.steps, (int, np.integer)) and self.steps >= 1):
            raise ValueError(f"steps must be an integer >= 1, got {self.steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def n_nodes(self) -> int:
        return self.steps + 1

    def times(self) -> np.ndarray:
        """All N+1 node times as a read-only array."""
        return _readonly(np.linspace(0.0, self.horizon, self.steps + 1))

    def with_steps(self, steps: int) -> "TimeGrid":
        return TimeGrid(self.horizon, steps)

    def index_of(self, t: float) -> int:
        """Index i with times[i] == t, or ValueError if t is off-grid."""
        i = int(round(t / self.dt))
        if not (0 <= i <= self.steps) or abs(i * self.dt - t) > 1e-9 * max(1.0, self.horizon):
            raise ValueError(f"t={t} is not a node of {self}")
        return i


@dataclass(frozen=True, eq=False)
class _SampledPath:
    """Shared machinery: values[i] is the sample at node i.

    eq=False: identity comparison only, ndarray fields have no useful ==.
    """

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    _ndim = None  # set by subclasses

    def __post_init__(self):
        v = _readonly(np.asarray(self.values, dtype=np.float64))
        if v.ndim != self._ndim:
            raise ValueError(f"{type(self).__name__} values must have ndim {self._ndim}, got {v.ndim}")
        if v.shape[0] != self.grid.n_nodes:
            raise ValueError(
                f"need {self.grid.n_nodes} samples for {self.grid.steps} steps, got {v.shape[0]}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("path samples must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid: TimeGrid, value) -> "_SampledPath":
        """Broadcast a single value to all N+1 nodes."""
        v = np.asarray(value, dtype=np.float64)
        return cls(grid, np.broadcast_to(v, (grid.n_nodes,) + v.shape).copy())

    def evaluate(self, t: float):
        """Linear interpolation; exact stored sample at grid nodes.

        Node hits are detected with a 1e-9 relative snap so that float noise
        in t (e.g. from accumulating dt) still returns the stored sample
        unchanged.
        """
        T, dt, N = self.grid.horizon, self.grid.dt, self.grid.steps
        if not (-1e-12 * max(1.0, T) <= t <= T * (1 + 1e-12)):
            raise ValueError(f"t={t} outside [0, {T}]")
        x = min(max(t / dt, 0.0), float(N))
        nearest = int(round(x))
        if abs(x - nearest) <= 1e-9:
            return self.values[nearest]
        i = int(x)
        w = x - i
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]

    def __call__(self, t: float):
        return self.evaluate(t)

    @property
    def initial(self):
        return self.values[0]

    @property
    def terminal(self):
        return self.values[-1]


class MatrixPath(_SampledPath):
    """Matrix-valued path sampled on the grid, shape (N+1, n, m)."""

    _ndim = 3

    @property
    def shape(self):
        return self.values.shape[1:]

    def sup_norm(self) -> float:
        """max over nodes of the spectral norm."""
        return float(max(np.linalg.norm(v, 2) for v in self.values))


class VectorPath(_SampledPath):
    """Vector-valued path, shape (N+1, n)."""

    _ndim = 2

    @property
    def dim(self) -> int:
        return self.values.shape[1]


class ScalarPath(_SampledPath):
    """Scalar path, shape (N+1,)."""

    _ndim = 1

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())
