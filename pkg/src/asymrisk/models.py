"""Model containers with validation and a JSON file format.

Two problem families share this module:

* LqModel: controlled linear dynamics dX = (A X + B u) dt + Sigma dW with
  quadratic running cost (1/2)(x'Mx + u'Nu), quadratic terminal cost
  (1/2) x'Hx, and a risk-coupling matrix Gamma acting on the martingale part
  of the cost-to-go.
* FactorMarketModel: a market of m assets whose excess returns load on an
  n-dimensional Gaussian factor, dX = (b + B X) dt + Lambda dW, asset
  volatility Sigma, scalar short rate path r, and the same kind of Gamma.

Validation is report-based: constructors only enforce shapes and finiteness,
while validate_* functions list every violated definiteness condition with
the offending time index. Solvers refuse invalid models.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .grids import MatrixPath, ScalarPath, TimeGrid

__all__ = [
    "GammaMatrix",
    "LqModel",
    "FactorMarketModel",
    "ValidationReport",
    "ModelFormatError",
    "validate_lq_model",
    "validate_factor_model",
    "riccati_wellposedness_indicator",
    "load_model",
    "model_digest",
]

#: eigenvalue tolerance for "positive (semi)definite" throughout the package
PSD_TOL = 1e-10


def _frozen_matrix(value, name: str, shape=None) -> np.ndarray:
    a = np.asarray(value, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got ndim {a.ndim}")
    if shape is not None and a.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _frozen_vector(value, name: str, dim=None) -> np.ndarray:
    a = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if a.ndim != 1:
        raise ValueError(f"{name} must be a vector, got ndim {a.ndim}")
    if dim is not None and a.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _as_matrix_path(grid: TimeGrid, value, name: str, rows: int, cols: int) -> MatrixPath:
    """Coerce a constant matrix / scalar / (N+1,r,c) sample array to a MatrixPath."""
    if isinstance(value, MatrixPath):
        if value.grid != grid:
            raise ValueError(f"{name} is sampled on a different grid")
        if value.shape != (rows, cols):
            raise ValueError(f"{name} must have shape ({rows}, {cols}), got {value.shape}")
        return value
    a = np.asarray(value, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim == 2:
        if a.shape != (rows, cols):
            raise ValueError(f"{name} must have shape ({rows}, {cols}), got {a.shape}")
        return MatrixPath.constant(grid, a)
    if a.ndim == 3:
        if a.shape[1:] != (rows, cols):
            raise ValueError(f"{name} samples must have shape ({rows}, {cols}), got {a.shape[1:]}")
        return MatrixPath(grid, a)
    raise ValueError(f"{name}: cannot interpret array of ndim {a.ndim} as a matrix path")


def _is_constant(path: MatrixPath) -> bool:
    return bool((path.values == path.values[0]).all())


def _min_eig(mat: np.ndarray) -> float:
    sym = 0.5 * (mat + mat.T)
    return float(np.linalg.eigvalsh(sym)[0])


@dataclass(frozen=True, eq=False)
class GammaMatrix:
    """Symmetric risk-coupling matrix with cached spectral range.

    Symmetry is enforced at construction. Positive definiteness is *checked*
    and exposed (`is_positive_definite`), not enforced, so that validators
    can report an indefinite Gamma instead of crashing.
    """

    entries: np.ndarray
    gamma_min: float = field(init=False)
    gamma_max: float = field(init=False)

    def __post_init__(self):
        a = _frozen_matrix(self.entries, "Gamma")
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"Gamma must be square, got {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("Gamma must be exactly symmetric")
        eigs = np.linalg.eigvalsh(a)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "gamma_min", float(eigs[0]))
        object.__setattr__(self, "gamma_max", float(eigs[-1]))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_positive_definite(self) -> bool:
        return self.gamma_min > PSD_TOL

    @classmethod
    def scaled_identity(cls, theta: float, dim: int, factor: float) -> "GammaMatrix":
        """Gamma = factor * theta * I, the scalar-coupling special case."""
        return cls(factor * theta * np.eye(dim))

    def is_scalar_multiple(self, coefficient: float, tol: float = 1e-12) -> bool:
        """True if Gamma == coefficient * I within tol (entrywise)."""
        return bool(np.max(np.abs(self.entries - coefficient * np.eye(self.dim))) <= tol)


def _coerce_gamma(value) -> GammaMatrix:
    return value if isinstance(value, GammaMatrix) else GammaMatrix(np.asarray(value))


def _control_dim(value) -> int:
    if isinstance(value, MatrixPath):
        return value.shape[1]
    a = np.asarray(value, dtype=np.float64)
    if a.ndim == 0:
        return 1
    if a.ndim == 2:
        return a.shape[1]
    if a.ndim == 3:
        return a.shape[2]
    raise ValueError("B must be a matrix, a matrix path, or an (N+1, n, k) sample array")


@dataclass(frozen=True, eq=False)
class LqModel:
    """Risk-sensitive linear-quadratic control model on a uniform grid.

    All coefficient matrices may be constant or sampled paths; they are
    normalized to MatrixPath. Dimensions: state n, control k, drivers d.
    """

    grid: TimeGrid
    A: MatrixPath
    B: MatrixPath
    Sigma: MatrixPath
    M: MatrixPath
    N: MatrixPath
    H: np.ndarray
    Gamma: GammaMatrix
    x0: np.ndarray

    def __post_init__(self):
        gamma = _coerce_gamma(self.Gamma)
        d = gamma.dim
        x0 = _frozen_vector(self.x0, "x0")
        n = x0.shape[0]
        k = _control_dim(self.B)
        normalized = {
            "A": _as_matrix_path(self.grid, self.A, "A", n, n),
            "B": _as_matrix_path(self.grid, self.B, "B", n, k),
            "Sigma": _as_matrix_path(self.grid, self.Sigma, "Sigma", n, d),
            "M": _as_matrix_path(self.grid, self.M, "M", n, n),
            "N": _as_matrix_path(self.grid, self.N, "N", k, k),
            "H": _frozen_matrix(self.H, "H", (n, n)),
            "Gamma": gamma,
            "x0": x0,
        }
        for name, val in normalized.items():
            object.__setattr__(self, name, val)

    @classmethod
    def constant(cls, *, grid, A, B, Sigma, M, N, H, Gamma, x0) -> "LqModel":
        """Build a model with time-constant coefficients from plain arrays."""
        return cls(grid=grid, A=A, B=B, Sigma=Sigma, M=M, N=N,
                   H=np.atleast_2d(np.asarray(H, dtype=np.float64)),
                   Gamma=_coerce_gamma(Gamma), x0=x0)

    @property
    def dims(self) -> tuple[int, int, int]:
        """(state n, control k, drivers d)."""
        return (self.x0.shape[0], self.B.shape[1], self.Gamma.dim)

    def digest(self) -> str:
        return model_digest(self)


@dataclass(frozen=True, eq=False)
class FactorMarketModel:
    """Factor market: m assets, n factors, d Brownian drivers.

    Excess return of the assets is a + A x - r 1 when the factor sits at x;
    asset volatility Sigma (m x d) and factor volatility Lambda (n x d) share
    the d drivers, which is what correlates wealth and factor noise.
    """

    grid: TimeGrid
    a: np.ndarray
    b: np.ndarray
    A: np.ndarray
    B: np.ndarray
    Lambda: np.ndarray
    Sigma: np.ndarray
    r: ScalarPath
    Gamma: GammaMatrix
    x0: np.ndarray

    def __post_init__(self):
        gamma = _coerce_gamma(self.Gamma)
        d = gamma.dim
        a = _frozen_vector(self.a, "a")
        m = a.shape[0]
        b = _frozen_vector(self.b, "b")
        n = b.shape[0]
        A = _frozen_matrix(self.A, "A", (m, n))
        B = _frozen_matrix(self.B, "B", (n, n))
        Lambda = _frozen_matrix(self.Lambda, "Lambda", (n, d))
        Sigma = _frozen_matrix(self.Sigma, "Sigma", (m, d))
        x0 = _frozen_vector(self.x0, "x0", n)
        r = self.r
        if not isinstance(r, ScalarPath):
            r = ScalarPath.constant(self.grid, float(r))
        elif r.grid != self.grid:
            raise ValueError("r is sampled on a different grid")
        for name, val in (("a", a), ("b", b), ("A", A), ("B", B), ("Lambda", Lambda),
                          ("Sigma", Sigma), ("r", r), ("Gamma", gamma), ("x0", x0)):
            object.__setattr__(self, name, val)

    @property
    def dims(self) -> tuple[int, int, int]:
        """(assets m, factors n, drivers d)."""
        return (self.a.shape[0], self.b.shape[0], self.Gamma.dim)

    def excess_return(self, x: np.ndarray) -> np.ndarray:
        """a + A x - r(t) 1 without the rate term; callers subtract r."""
        return self.a + x @ self.A.T

    def digest(self) -> str:
        return model_digest(self)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of model validation: empty `violations` means valid."""

    violations: tuple[str, ...]
    min_control_eig: Union[float, None] = None

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def raise_if_invalid(self, context: str = "model"):
        if self.violations:
            detail = "; ".join(self.violations)
            raise ValueError(f"invalid {context}: {detail}")


def _scan_psd(path: MatrixPath, name: str, violations: list, *, strict: bool,
              tol: float = PSD_TOL) -> float:
    """Check min eigenvalue of a (possibly time-varying) symmetric path.

    Returns the minimum eigenvalue over the grid. Appends a violation naming
    the first offending time index.
    """
    values = path.values[:1] if _is_constant(path) else path.values
    worst = np.inf
    worst_idx = 0
    for idx, mat in enumerate(values):
        e = _min_eig(mat)
        if e < worst:
            worst, worst_idx = e, idx
    bound = tol if strict else -tol
    if not worst > bound:
        kind = "positive definite" if strict else "positive semidefinite"
        raise_idx = worst_idx if len(values) > 1 else "all t"
        violations.append(
            f"{name} not {kind}: min eigenvalue {worst:.3e} at time index {raise_idx}"
        )
    return worst


def validate_lq_model(model: LqModel, tol: float = PSD_TOL) -> ValidationReport:
    """Check the standing definiteness assumptions of the LQ problem.

    H >= 0, M(t) >= 0, N(t) >= delta I with delta > 0, Sigma Sigma' > 0,
    Gamma symmetric positive definite. Returns a report; never raises.
    """
    violations: list[str] = []
    if _min_eig(model.H) < -tol:
        violations.append(f"H not positive semidefinite: min eigenvalue {_min_eig(model.H):.3e}")
    _scan_psd(model.M, "M(t)", violations, strict=False, tol=tol)
    min_n = _scan_psd(model.N, "N(t)", violations, strict=True, tol=tol)
    grid = model.grid
    sig = model.Sigma
    sig_values = sig.values[:1] if _is_constant(sig) else sig.values
    for idx, s in enumerate(sig_values):
        e = _min_eig(s @ s.T)
        if not e > tol:
            where = idx if len(sig_values) > 1 else "all t"
            violations.append(
                f"Sigma Sigma' not positive definite: min eigenvalue {e:.3e} at time index {where}"
            )
            break
    if not model.Gamma.is_positive_definite:
        violations.append(
            f"Gamma not positive definite: min eigenvalue {model.Gamma.gamma_min:.3e}"
        )
    if grid.dt <= 0:
        violations.append("grid has nonpositive step")
    return ValidationReport(tuple(violations), min_control_eig=min_n)


def validate_factor_model(model: FactorMarketModel, tol: float = PSD_TOL) -> ValidationReport:
    """Analogous report for the market model: Sigma Sigma' > 0, r >= 0, Gamma > 0."""
    violations: list[str] = []
    e = _min_eig(model.Sigma @ model.Sigma.T)
    if not e > tol:
        violations.append(f"Sigma Sigma' not positive definite: min eigenvalue {e:.3e}")
    if model.r.min() < 0.0:
        idx = int(np.argmin(model.r.values))
        violations.append(f"short rate negative: r = {model.r.values[idx]:.3e} at time index {idx}")
    if not model.Gamma.is_positive_definite:
        violations.append(
            f"Gamma not positive definite: min eigenvalue {model.Gamma.gamma_min:.3e}"
        )
    return ValidationReport(tuple(violations))


def riccati_wellposedness_indicator(model: LqModel) -> ScalarPath:
    """Largest eigenvalue of 2 Sigma Gamma Sigma' - B N^-1 B' along the grid.

    Uniformly negative values certify the damping condition under which the
    Riccati comparison bounds hold; the sign is the diagnostic, so this is
    returned as a path rather than a single flag.
    """
    validate_lq_model(model).raise_if_invalid("LQ model")
    gam = model.Gamma.entries
    out = np.empty(model.grid.n_nodes)
    for i in range(model.grid.n_nodes):
        s = model.Sigma.values[i]
        b = model.B.values[i]
        n = model.N.values[i]
        mat = 2.0 * s @ gam @ s.T - b @ np.linalg.solve(n, b.T)
        out[i] = np.linalg.eigvalsh(0.5 * (mat + mat.T))[-1]
    return ScalarPath(model.grid, out)


# ----------------------------------------------------------------------
# model files
# ----------------------------------------------------------------------

class ModelFormatError(ValueError):
    """Raised for malformed model files; message names the offending field."""


_LQ_KEYS = {"type", "grid", "A", "B", "Sigma", "M", "N", "H", "Gamma", "x0"}
_FACTOR_KEYS = {"type", "grid", "a", "b", "A", "B", "Lambda", "Sigma", "r", "Gamma", "x0"}
_GRID_KEYS = {"horizon", "steps"}


def _json_matrix(raw, name: str, grid: TimeGrid) -> object:
    """Scalar -> 1x1, nested list -> constant matrix, {"path": [...]} -> samples."""
    if isinstance(raw, dict):
        extra = set(raw) - {"path"}
        if extra:
            raise ModelFormatError(f"field '{name}': unknown keys {sorted(extra)}")
        samples = np.asarray(raw.get("path"), dtype=np.float64)
        if samples.ndim == 1:  # path of scalars
            samples = samples.reshape(-1, 1, 1)
        if samples.shape[0] != grid.n_nodes:
            raise ModelFormatError(
                f"field '{name}': path has {samples.shape[0]} samples, grid needs {grid.n_nodes}"
            )
        return samples
    a = np.asarray(raw, dtype=np.float64)
    if a.ndim > 2:
        raise ModelFormatError(f"field '{name}': expected scalar or matrix, got ndim {a.ndim}")
    return a


def _json_grid(raw) -> TimeGrid:
    if not isinstance(raw, dict):
        raise ModelFormatError("field 'grid': expected an object with horizon and steps")
    extra = set(raw) - _GRID_KEYS
    if extra:
        raise ModelFormatError(f"field 'grid': unknown keys {sorted(extra)}")
    missing = _GRID_KEYS - set(raw)
    if missing:
        raise ModelFormatError(f"field 'grid': missing keys {sorted(missing)}")
    try:
        return TimeGrid(float(raw["horizon"]), int(raw["steps"]))
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field 'grid': {exc}") from exc


@dataclass(frozen=True)
class LoadedModel:
    model: Union[LqModel, FactorMarketModel]
    kind: str
    sha256: str
    source: str


def load_model(path) -> LoadedModel:
    """Parse a JSON model file with strict key checking.

    The digest covers the normalized numeric content, so a model built in
    code and the same model loaded from a file hash identically.
    """
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ModelFormatError("top level must be an object")
    kind = raw.get("type")
    if kind == "lq":
        allowed = _LQ_KEYS
    elif kind == "factor_market":
        allowed = _FACTOR_KEYS
    else:
        raise ModelFormatError(f"field 'type': expected 'lq' or 'factor_market', got {kind!r}")
    extra = set(raw) - allowed
    if extra:
        raise ModelFormatError(f"unknown top-level keys {sorted(extra)}")
    missing = allowed - set(raw)
    if missing:
        raise ModelFormatError(f"missing keys {sorted(missing)}")
    grid = _json_grid(raw["grid"])
    try:
        if kind == "lq":
            model = LqModel(
                grid=grid,
                A=_json_matrix(raw["A"], "A", grid),
                B=_json_matrix(raw["B"], "B", grid),
                Sigma=_json_matrix(raw["Sigma"], "Sigma", grid),
                M=_json_matrix(raw["M"], "M", grid),
                N=_json_matrix(raw["N"], "N", grid),
                H=np.atleast_2d(np.asarray(raw["H"], dtype=np.float64)),
                Gamma=GammaMatrix(np.atleast_2d(np.asarray(raw["Gamma"], dtype=np.float64))),
                x0=raw["x0"],
            )
        else:
            r_raw = raw["r"]
            if isinstance(r_raw, dict):
                extra = set(r_raw) - {"path"}
                if extra:
                    raise ModelFormatError(f"field 'r': unknown keys {sorted(extra)}")
                r = ScalarPath(grid, np.asarray(r_raw["path"], dtype=np.float64))
            else:
                r = ScalarPath.constant(grid, float(r_raw))
            model = FactorMarketModel(
                grid=grid,
                a=raw["a"], b=raw["b"],
                A=np.atleast_2d(np.asarray(raw["A"], dtype=np.float64)),
                B=np.atleast_2d(np.asarray(raw["B"], dtype=np.float64)),
                Lambda=np.atleast_2d(np.asarray(raw["Lambda"], dtype=np.float64)),
                Sigma=np.atleast_2d(np.asarray(raw["Sigma"], dtype=np.float64)),
                r=r,
                Gamma=GammaMatrix(np.atleast_2d(np.asarray(raw["Gamma"], dtype=np.float64))),
                x0=raw["x0"],
            )
    except ModelFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(str(exc)) from exc
    return LoadedModel(model=model, kind=kind, sha256=model_digest(model), source=str(path))


def model_digest(model: Union[LqModel, FactorMarketModel]) -> str:
    """sha256 over the normalized numeric content of a model."""
    h = hashlib.sha256()
    if isinstance(model, LqModel):
        h.update(b"lq")
        parts = [model.A.values, model.B.values, model.Sigma.values, model.M.values,
                 model.N.values, model.H, model.Gamma.entries, model.x0]
    else:
        h.update(b"factor_market")
        parts = [model.a, model.b, model.A, model.B, model.Lambda, model.Sigma,
                 model.r.values, model.Gamma.entries, model.x0]
    h.update(np.float64(model.grid.horizon).tobytes())
    h.update(np.int64(model.grid.steps).tobytes())
    for p in parts:
        arr = np.ascontiguousarray(p, dtype=np.float64)
        h.update(np.asarray(arr.shape, dtype=np.int64).tobytes())
        h.update(arr.tobytes())
    return h.hexdigest()
