"""Half-plane Green's function, stream functions and energies.

The Dirichlet Green's function of the upper half plane splits as

    G(x, y) = A(x - y) - A(x - y*),   A(z) = -log|z| / (2 pi),   y* = (y1, -y2),

so on a uniform cell-centred grid the quadrature ``sum_y G(x, y) w(y) h1 h2``
is one discrete convolution of the odd extension of ``w`` with ``A``.  The
``"fft"`` path evaluates exactly that sum with FFTs; ``"direct"`` loops over
source cells with the closed form of ``G``.  Both use the same diagonal
(self-cell) weight: the cell average of ``A`` plus the image term at the
centre.  ``"poisson"`` is an independent route through a five-point Poisson
solve on the reflected window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .fields import SIGNED, STREAM, HalfPlaneGrid, ScalarField, _sum

__all__ = [
    "EnergyReport",
    "greens",
    "self_cell_weight",
    "stream_of",
    "kinetic_energy",
    "penalized_energy",
    "dirichlet_energy",
    "interaction_energy",
    "hardy_check",
    "stream_gradient",
    "set_fft_workers",
    "signed",
]

_INV_2PI = 1.0 / (2.0 * math.pi)
_INV_4PI = 1.0 / (4.0 * math.pi)

_workers = 1


def set_fft_workers(n: int) -> None:
    """Thread count for FFTs; pocketfft splits work per 1-D transform, so
    results do not depend on it."""
    global _workers
    _workers = max(1, int(n))


def greens(x1, x2, y1, y2):
    """G(x, y) = log(1 + 4 x2 y2 / |x - y|^2) / (4 pi); arrays broadcast."""
    x1, x2, y1, y2 = (np.asarray(v, dtype=float) for v in (x1, x2, y1, y2))
    d2 = (x1 - y1) ** 2 + (x2 - y2) ** 2
    if np.any(d2 == 0):
        raise ValueError("Green's function is singular at x = y")
    out = _INV_4PI * np.log1p(4.0 * x2 * y2 / d2)
    return float(out) if out.ndim == 0 else out


def _cell_log_average(h1: float, h2: float) -> float:
    """Mean of log|z| over the rectangle [-h1/2, h1/2] x [-h2/2, h2/2]."""
    a, b = 0.5 * h1, 0.5 * h2
    quarter = a * b * (math.log(a * a + b * b) - 3.0) + a * a * math.atan(b / a) + b * b * math.atan(a / b)
    return quarter / (2.0 * a * b)


def self_cell_weight(grid: HalfPlaneGrid) -> np.ndarray:
    """Diagonal kernel value per row: cell-averaged singular part plus image term."""
    return _INV_2PI * (np.log(2.0 * grid.x2) - _cell_log_average(grid.h1, grid.h2))


@lru_cache(maxsize=8)
def _kernel_fft(grid: HalfPlaneGrid):
    n1, n2 = grid.n1, grid.n2
    p1 = sfft.next_fast_len(2 * n1 - 1, real=True)
    p2 = sfft.next_fast_len(4 * n2 - 1, real=True)
    d1 = np.arange(p1)
    d1 = np.where(d1 < n1, d1, d1 - p1) * grid.h1
    d2 = np.arange(p2)
    d2 = np.where(d2 < 2 * n2, d2, d2 - p2) * grid.h2
    r2 = d2[:, None] ** 2 + d1[None, :] ** 2
    r2[0, 0] = 1.0
    k = -0.5 * _INV_2PI * np.log(r2)
    k[0, 0] = -_INV_2PI * _cell_log_average(grid.h1, grid.h2)
    return (p2, p1), sfft.rfft2(k, workers=_workers)


def _odd_extension(values: np.ndarray) -> np.ndarray:
    return np.vstack([-values[::-1], values])


def _stream_fft(grid: HalfPlaneGrid, values: np.ndarray) -> np.ndarray:
    (p2, p1), kf = _kernel_fft(grid)
    src = _odd_extension(values)
    conv = sfft.irfft2(sfft.rfft2(src, s=(p2, p1), workers=_workers) * kf, s=(p2, p1), workers=_workers)
    n2 = grid.n2
    return conv[n2 : 2 * n2, : grid.n1] * grid.cell_area


def _stream_direct(grid: HalfPlaneGrid, values: np.ndarray, targets=None) -> np.ndarray:
    """Plain O(N^2) sum with the closed-form G.

    ``targets`` optionally gives ``(t1, t2)`` arrays of off-grid target points,
    none of which may coincide with a cell centre.
    """
    X1, X2 = grid.mesh()
    w = values.ravel()
    nz = np.nonzero(w)[0]
    y1, y2, wy = X1.ravel()[nz], X2.ravel()[nz], w[nz]
    if targets is None:
        t1, t2 = X1.ravel(), X2.ravel()
        on_grid = True
    else:
        t1, t2 = (np.asarray(t, dtype=float).ravel() for t in targets)
        on_grid = False
    out = np.zeros(t1.size)
    if nz.size == 0:
        return out.reshape(grid.shape) if on_grid else out
    diag = self_cell_weight(grid)
    chunk = max(1, 2_000_000 // nz.size)
    for start in range(0, t1.size, chunk):
        stop = min(start + chunk, t1.size)
        a1 = t1[start:stop, None]
        a2 = t2[start:stop, None]
        d2 = (a1 - y1[None, :]) ** 2 + (a2 - y2[None, :]) ** 2
        same = d2 == 0
        d2 = np.where(same, 1.0, d2)
        g = _INV_4PI * np.log1p(4.0 * a2 * y2[None, :] / d2)
        if on_grid and same.any():
            rows = np.arange(start, stop) // grid.n1
            g = np.where(same, diag[rows][:, None], g)
        out[start:stop] = g @ wy
    out *= grid.cell_area
    return out.reshape(grid.shape) if on_grid else out


def _stream_poisson(grid: HalfPlaneGrid, values: np.ndarray) -> np.ndarray:
    """Five-point Poisson solve of -Lap psi = w_odd on the doubled window.

    Dirichlet data on the ghost ring around the window comes from the Green's
    representation, evaluated at the ghost-cell centres.
    """
    n1, n2 = grid.n1, grid.n2
    h1, h2 = grid.h1, grid.h2
    x1, x2 = grid.x1, grid.x2
    left = np.full(n2, grid.x1_min - 0.5 * h1)
    right = np.full(n2, grid.x1_max + 0.5 * h1)
    top1 = x1
    top2 = np.full(n1, grid.x2_max + 0.5 * h2)
    t1 = np.concatenate([left, right, top1])
    t2 = np.concatenate([x2, x2, top2])
    ghost = _stream_direct(grid, values, targets=(t1, t2))
    g_left, g_right, g_top = ghost[:n2], ghost[n2 : 2 * n2], ghost[2 * n2 :]

    rhs = _odd_extension(values).copy()
    rhs[:, 0] += _odd_extension(g_left[:, None])[:, 0] / h1**2
    rhs[:, -1] += _odd_extension(g_right[:, None])[:, 0] / h1**2
    rhs[-1, :] += g_top / h2**2
    rhs[0, :] -= g_top / h2**2

    m2 = 2 * n2
    k1 = np.arange(1, n1 + 1)
    k2 = np.arange(1, m2 + 1)
    eig = (2.0 - 2.0 * np.cos(np.pi * k2 / (m2 + 1)))[:, None] / h2**2 + (
        2.0 - 2.0 * np.cos(np.pi * k1 / (n1 + 1))
    )[None, :] / h1**2
    coef = sfft.dstn(rhs, type=1, workers=_workers) / eig
    psi = sfft.idstn(coef, type=1, workers=_workers)
    return psi[n2:, :]


def stream_of(omega: ScalarField, method: str = "fft") -> ScalarField:
    """Stream function psi = int G(., y) omega(y) dy at every cell centre.

    ``method`` is ``"fft"`` (default), ``"direct"`` (same sum, O(N^2) loop) or
    ``"poisson"`` (finite-difference solve, second-order accurate).
    """
    grid = omega.grid
    if method == "fft":
        psi = _stream_fft(grid, omega.values)
    elif method == "direct":
        psi = _stream_direct(grid, omega.values)
    elif method == "poisson":
        psi = _stream_poisson(grid, omega.values)
    else:
        raise ValueError(f"unknown stream method {method!r}")
    return ScalarField(grid, psi, kind=STREAM)


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    penalty: float
    penalized: float
    dirichlet: float


def kinetic_energy(omega: ScalarField, psi: ScalarField | None = None) -> float:
    """E = (1/2) sum psi * omega * h1 h2."""
    if psi is None:
        psi = stream_of(omega)
    return 0.5 * _sum(psi.values * omega.values) * omega.grid.cell_area


def penalized_energy(omega: ScalarField, lam: float, psi: ScalarField | None = None) -> EnergyReport:
    """E - ||omega||_2^2 / (2 lam), plus the Dirichlet cross-check."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    if psi is None:
        psi = stream_of(omega)
    kin = kinetic_energy(omega, psi)
    pen = 0.5 / lam * _sum(omega.values * omega.values) * omega.grid.cell_area
    return EnergyReport(kin, pen, kin - pen, dirichlet_energy(psi))


def stream_gradient(psi: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """(d psi/dx1, d psi/dx2): central differences inside, one-sided at the
    window edges, odd ghost row below the axis (psi = 0 on x2 = 0)."""
    g = psi.grid
    vals = psi.values
    d1 = np.gradient(vals, g.h1, axis=1, edge_order=1)
    padded = np.vstack([-vals[:1], vals])
    d2 = np.gradient(padded, g.h2, axis=0, edge_order=1)[1:]
    return d1, d2


def dirichlet_energy(psi: ScalarField) -> float:
    """(1/2) ||grad psi||^2 over the window."""
    d1, d2 = stream_gradient(psi)
    return 0.5 * _sum(d1 * d1 + d2 * d2) * psi.grid.cell_area


def interaction_energy(w1: ScalarField, w2: ScalarField) -> float:
    """Double integral of G(x, y) w1(x) w2(y); accepts signed fields.

    Symmetrised so swapping the arguments gives a bit-identical result.
    """
    if w1.grid != w2.grid:
        raise ValueError("fields live on different grids")
    grid = w1.grid
    a = _sum(w1.values * _stream_fft(grid, w2.values))
    b = _sum(w2.values * _stream_fft(grid, w1.values))
    return 0.5 * (a + b) * grid.cell_area


def hardy_check(psi: ScalarField) -> tuple[float, float]:
    """Both sides of ||psi / x2||_2 <= 2 ||grad psi||_2 on the window."""
    g = psi.grid
    lhs = math.sqrt(_sum((psi.values / g.x2[:, None]) ** 2) * g.cell_area)
    d1, d2 = stream_gradient(psi)
    rhs = 2.0 * math.sqrt(_sum(d1 * d1 + d2 * d2) * g.cell_area)
    return lhs, rhs


def signed(grid: HalfPlaneGrid, values: np.ndarray) -> ScalarField:
    """Wrap a signed array (e.g. a difference of vorticities) as a field."""
    return ScalarField(grid, values, kind=SIGNED)
