"""Uniform 1D truncated domain and real-valued fields on it.

All solvers operate on node samples of a symmetric interval [-L, L] with
spacing h = 2L/n. Fields are immutable; every operation returns a new one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridMismatchError

#: Tolerated round-off undershoot for nonnegative solution fields.
TOL_NEG = 1e-10


@dataclass(frozen=True)
class Grid1D:
    half_length: float
    n: int
    x: np.ndarray = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if not (self.half_length > 0 and np.isfinite(self.half_length)):
            raise DomainError("grid requires half_length > 0")
        if self.n < 2:
            raise DomainError("grid requires n >= 2 intervals")
        nodes = -self.half_length + self.h * np.arange(self.n + 1)
        nodes[-1] = self.half_length  # pin the right endpoint exactly
        nodes.flags.writeable = False
        object.__setattr__(self, "x", nodes)

    @property
    def h(self) -> float:
        return 2.0 * self.half_length / self.n


def make_grid(half_length: float, n: int) -> Grid1D:
    return Grid1D(float(half_length), int(n))


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n + 1,):
            raise GridMismatchError(
                f"field needs {self.grid.n + 1} values, got shape {vals.shape}"
            )
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)


def sample(grid: Grid1D, f) -> Field:
    """Sample a callable at the grid nodes; rejects non-finite values."""
    vals = np.asarray(f(grid.x), dtype=float)
    if vals.ndim == 0:
        vals = np.full(grid.n + 1, float(vals))
    if not np.all(np.isfinite(vals)):
        raise DomainError("sampled function produced non-finite values")
    return Field(grid, vals)


def constant_field(grid: Grid1D, value: float) -> Field:
    return Field(grid, np.full(grid.n + 1, float(value)))


def _check_same_grid(f: Field, g: Field):
    if f.grid.n != g.grid.n or f.grid.half_length != g.grid.half_length:
        raise GridMismatchError("fields live on different grids")


def sup_norm(f: Field) -> float:
    return float(np.max(np.abs(f.values)))


def sup_diff(f: Field, g: Field) -> float:
    _check_same_grid(f, g)
    return float(np.max(np.abs(f.values - g.values)))


def interp(f: Field, x) -> float | np.ndarray:
    """Piecewise-linear interpolation; x must lie in [-L, L]."""
    xs = np.asarray(x, dtype=float)
    L = f.grid.half_length
    if np.any(xs < -L) or np.any(xs > L):
        raise DomainError(f"interpolation point outside [-{L}, {L}]")
    out = np.interp(xs, f.grid.x, f.values)
    return float(out) if np.isscalar(x) else out


def write_csv(f: Field, path, header=("x", "value")):
    """Two-column CSV at full double precision (17 significant digits)."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for xi, vi in zip(f.grid.x, f.values):
            fh.write(f"{xi:.17g},{vi:.17g}\n")


def read_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data[:, 0], data[:, 1]
