"""Half-plane grids, scalar fields and the integral functionals on them.

A :class:`HalfPlaneGrid` is a cell-centred discretisation of the window
``[x1_min, x1_max] x (0, x2_max)``.  Field values are stored as 2-D arrays of
shape ``(n2, n1)`` so that the x2 index is outer (row-major).
"""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

__all__ = [
    "HalfPlaneGrid",
    "ScalarField",
    "AdmissibleSpec",
    "FieldKindError",
    "TruncationError",
    "mass",
    "impulse",
    "norm_l1",
    "norm_l2",
    "weighted_l1",
    "scale_field",
    "scaled_grid",
    "translate_x1",
    "write_lvf1",
    "read_lvf1",
    "write_csv",
]

VORTICITY = "vorticity"
STREAM = "stream"
# differences of vorticities and other sign-indefinite quantities
SIGNED = "signed"


class FieldKindError(TypeError):
    """A functional was handed a field of the wrong kind."""


class TruncationError(ValueError):
    """A field's support does not fit inside the grid window."""


@dataclass(frozen=True)
class HalfPlaneGrid:
    x1_min: float
    x1_max: float
    x2_max: float
    n1: int
    n2: int

    def __post_init__(self):
        if not self.x1_min < self.x1_max:
            raise ValueError("need x1_min < x1_max")
        if not self.x2_max > 0:
            raise ValueError("need x2_max > 0")
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("need at least 2 cells per direction")

    @classmethod
    def square(cls, half_width: float, height: float, n: int) -> "HalfPlaneGrid":
        return cls(-half_width, half_width, height, n, n)

    @property
    def h1(self) -> float:
        return (self.x1_max - self.x1_min) / self.n1

    @property
    def h2(self) -> float:
        return self.x2_max / self.n2

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    @property
    def area(self) -> float:
        return (self.x1_max - self.x1_min) * self.x2_max

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n2, self.n1)

    @property
    def x1(self) -> np.ndarray:
        return self.x1_min + (np.arange(self.n1) + 0.5) * self.h1

    @property
    def x2(self) -> np.ndarray:
        return (np.arange(self.n2) + 0.5) * self.h2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinates ``(X1, X2)``, each of shape ``(n2, n1)``."""
        return np.meshgrid(self.x1, self.x2)

    @property
    def is_symmetric(self) -> bool:
        return math.isclose(self.x1_min, -self.x1_max, rel_tol=0, abs_tol=1e-12 * self.x1_max)

    def contains_disk(self, radius: float, margin: float = 0.0) -> bool:
        """Whether the half disk ``B(0, radius)`` plus ``margin`` fits inside."""
        r = radius + margin
        return self.x1_min <= -r and self.x1_max >= r and self.x2_max >= r


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: HalfPlaneGrid
    values: np.ndarray
    kind: str = VORTICITY

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        if self.kind not in (VORTICITY, STREAM, SIGNED):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == VORTICITY and np.any(values < 0):
            raise ValueError("vorticity must be non-negative")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: HalfPlaneGrid, kind: str = VORTICITY) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), kind)

    def with_values(self, values: np.ndarray, kind: str | None = None) -> "ScalarField":
        return ScalarField(self.grid, values, self.kind if kind is None else kind)

    def __mul__(self, scale: float) -> "ScalarField":
        return self.with_values(self.values * scale)

    __rmul__ = __mul__


@dataclass(frozen=True)
class AdmissibleSpec:
    """Constraint data: target impulse ``mu``, mass cap ``nu`` and strength ``lam``."""

    mu: float
    nu: float
    lam: float

    def __post_init__(self):
        for name in ("mu", "nu", "lam"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @property
    def reduced_impulse(self) -> float:
        """Impulse after rescaling to unit mass cap and strength."""
        return self.mu / self.nu * math.sqrt(self.lam)


def _require_vorticity(f: ScalarField):
    if f.kind != VORTICITY:
        raise FieldKindError(f"expected a vorticity field, got {f.kind}")


def _sum(a: np.ndarray) -> float:
    # numpy's pairwise summation over a contiguous buffer: fixed order
    return float(np.sum(np.ascontiguousarray(a).ravel()))


def _exact_sum(a: np.ndarray) -> float:
    # correctly rounded, so independent of element order (e.g. whole-cell shifts)
    return math.fsum(np.asarray(a).ravel().tolist())


def mass(omega: ScalarField) -> float:
    _require_vorticity(omega)
    return _exact_sum(omega.values) * omega.grid.cell_area


def impulse(omega: ScalarField) -> float:
    _require_vorticity(omega)
    g = omega.grid
    return _exact_sum(omega.values * g.x2[:, None]) * g.cell_area


def norm_l1(f: ScalarField) -> float:
    return _exact_sum(np.abs(f.values)) * f.grid.cell_area


def norm_l2(f: ScalarField) -> float:
    return math.sqrt(_exact_sum(f.values * f.values) * f.grid.cell_area)


def weighted_l1(f: ScalarField) -> float:
    g = f.grid
    return _exact_sum(np.abs(f.values) * g.x2[:, None]) * g.cell_area


def _sample_bilinear(f: ScalarField, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Bilinear interpolation at arbitrary points; zero outside the window."""
    g = f.grid
    # odd reflection below the axis for vorticity, so the interpolant vanishes on x2 = 0
    ext = np.vstack([-f.values[::-1], f.values])
    i = (x1 - g.x1_min) / g.h1 - 0.5
    j = x2 / g.h2 - 0.5 + g.n2
    return ndimage.map_coordinates(ext, [j, i], order=1, mode="grid-constant", cval=0.0)


def scaled_grid(grid: HalfPlaneGrid, lam: float) -> HalfPlaneGrid:
    """The window stretched by ``sqrt(lam)``: cell centres map onto cell centres."""
    s = math.sqrt(lam)
    return HalfPlaneGrid(grid.x1_min * s, grid.x1_max * s, grid.x2_max * s, grid.n1, grid.n2)


def scale_field(
    omega: ScalarField, lam: float, nu: float, target: HalfPlaneGrid | None = None
) -> ScalarField:
    """Rescale to unit strength and mass cap: ``omega(x / sqrt(lam)) / (lam * nu)``.

    Impulse maps ``mu -> mu * sqrt(lam) / nu`` and mass ``m -> m / nu``.  With
    no ``target`` the window is stretched by ``sqrt(lam)`` so the resampling
    is exact.
    """
    if not (lam > 0 and nu > 0):
        raise ValueError("lam and nu must be positive")
    if target is None:
        target = scaled_grid(omega.grid, lam)
    s = math.sqrt(lam)
    src = omega.grid
    # support of the rescaled field, in target coordinates
    nz = np.nonzero(omega.values)
    if nz[0].size:
        lo1 = (src.x1[nz[1]].min() - 0.5 * src.h1) * s
        hi1 = (src.x1[nz[1]].max() + 0.5 * src.h1) * s
        hi2 = (src.x2[nz[0]].max() + 0.5 * src.h2) * s
        tol = 1e-9 * max(abs(target.x1_min), abs(target.x1_max), target.x2_max)
        if lo1 < target.x1_min - tol or hi1 > target.x1_max + tol or hi2 > target.x2_max + tol:
            raise TruncationError(
                f"rescaled support [{lo1:g}, {hi1:g}] x (0, {hi2:g}] escapes the target window"
            )
    X1, X2 = target.mesh()
    vals = _sample_bilinear(omega, X1 / s, X2 / s) / (lam * nu)
    if omega.kind == VORTICITY:
        vals = np.maximum(vals, 0.0)
    return ScalarField(target, vals, omega.kind)


def translate_x1(f: ScalarField, shift: float) -> ScalarField:
    """Field moved by ``shift`` along x1, i.e. ``f(x1 - shift, x2)``.

    Whole-cell shifts are exact index moves; fractional shifts interpolate
    linearly.  Cells entering from outside the window are zero.
    """
    g = f.grid
    cells = shift / g.h1
    k = round(cells)
    if abs(cells - k) <= 1e-12 * max(1.0, abs(cells)):
        out = np.zeros_like(f.values)
        if abs(k) >= g.n1:
            pass
        elif k >= 0:
            out[:, k:] = f.values[:, : g.n1 - k]
        else:
            out[:, : g.n1 + k] = f.values[:, -k:]
        return f.with_values(out)
    X1, X2 = g.mesh()
    vals = _sample_bilinear(f, X1 - shift, X2)
    if f.kind == VORTICITY:
        vals = np.maximum(vals, 0.0)
    return f.with_values(vals)


# --- file formats -----------------------------------------------------------

_MAGIC = b"LVF1"
_HEADER = struct.Struct("<4sdddQQddd")


def write_lvf1(path, f: ScalarField) -> None:
    """Write a field in the LVF1 binary layout."""
    g = f.grid
    header = _HEADER.pack(_MAGIC, g.x1_min, g.x1_max, g.x2_max, g.n1, g.n2, 0.0, 0.0, 0.0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_lvf1(path, kind: str = VORTICITY) -> ScalarField:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size or data[:4] != _MAGIC:
        raise ValueError(f"{path}: not an LVF1 file")
    _, x1_min, x1_max, x2_max, n1, n2, *_ = _HEADER.unpack_from(data)
    body = data[_HEADER.size:]
    if len(body) != 8 * n1 * n2:
        raise ValueError(f"{path}: expected {n1 * n2} values, found {len(body) // 8}")
    grid = HalfPlaneGrid(x1_min, x1_max, x2_max, int(n1), int(n2))
    vals = np.frombuffer(body, dtype="<f8").reshape(grid.shape).astype(float)
    return ScalarField(grid, vals, kind)


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return f"{x:.17g}"


def write_csv(path, f: ScalarField) -> None:
    """One row per cell: ``x1,x2,value`` (x2 outer, matching LVF1 order)."""
    g = f.grid
    x1, x2 = g.x1, g.x2
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x1", "x2", "value"])
        for j in range(g.n2):
            row = f.values[j]
            for i in range(g.n1):
                w.writerow([fmt(x1[i]), fmt(x2[j]), fmt(row[i])])
