"""The Lamb (Chaplygin-Lamb) dipole in closed form."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import HalfPlaneGrid, ScalarField, TruncationError
from .special import C0, bessel_j

__all__ = [
    "LambParams",
    "lamb_stream",
    "lamb_vorticity",
    "lamb_velocity",
    "sample_lamb",
    "sample_lamb_stream",
]

J0_C0 = bessel_j(0, C0)


@dataclass(frozen=True)
class LambParams:
    """Strength ``lam`` and speed ``W``; core radius, amplitude and impulse follow."""

    lam: float = 1.0
    W: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and self.W > 0):
            raise ValueError("lam and W must be positive")

    @property
    def a(self) -> float:
        return C0 / math.sqrt(self.lam)

    @property
    def C_L(self) -> float:
        return -2.0 * self.W / (math.sqrt(self.lam) * J0_C0)

    @property
    def mu_L(self) -> float:
        return C0**2 * math.pi * self.W / self.lam

    @classmethod
    def from_impulse(cls, mu: float, lam: float) -> "LambParams":
        """The dipole with impulse ``mu`` at strength ``lam``: W = mu lam / (c0^2 pi)."""
        return cls(lam=lam, W=mu * lam / (C0**2 * math.pi))

    def transit_time(self) -> float:
        """Time to travel one core diameter."""
        return 2.0 * self.a / self.W


def _polar(x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    r = np.hypot(x1, x2)
    return x1, x2, r


def lamb_stream(p: LambParams, x1, x2):
    """Relative stream function Psi_L (vanishes on the axis and on r = a)."""
    x1, x2, r = _polar(x1, x2)
    inside = r < p.a
    safe_r = np.where(r > 0, r, 1.0)
    sin_t = np.where(r > 0, x2 / safe_r, 0.0)
    rs = math.sqrt(p.lam)
    interior = p.C_L * bessel_j(1, np.where(inside, r, 0.0) * rs) * sin_t
    exterior = -p.W * (safe_r - p.a**2 / safe_r) * sin_t
    out = np.where(inside, interior, exterior)
    return float(out) if out.ndim == 0 else out


def lamb_vorticity(p: LambParams, x1, x2):
    """lam * max(Psi_L, 0); supported on the closed upper half disk of radius a."""
    out = p.lam * np.maximum(lamb_stream(p, x1, x2), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def lamb_velocity(p: LambParams, x1, x2):
    """``(d Psi/dx2, -d Psi/dx1)`` from the analytic gradient of Psi_L.

    At the origin the interior branch is evaluated in its smooth limit.
    """
    x1, x2, r = _polar(x1, x2)
    rs = math.sqrt(p.lam)
    inside = r < p.a
    safe_r = np.where(r > 0, r, 1.0)
    c = np.where(r > 0, x1 / safe_r, 1.0)
    s = np.where(r > 0, x2 / safe_r, 0.0)

    # Psi = eta(r) sin(theta); grad = eta' sin e_r + (eta / r) cos e_theta
    z = np.where(inside, r, 0.0) * rs
    j0 = bessel_j(0, z)
    j1 = bessel_j(1, z)
    # J1(z)/z -> 1/2 at z = 0
    safe_z = np.where(z > 0, z, 1.0)
    j1_over_z = np.where(z > 0, j1 / safe_z, 0.5)
    eta_p_in = p.C_L * rs * (j0 - j1_over_z)
    eta_r_in = p.C_L * rs * j1_over_z
    eta_p_out = -p.W * (1.0 + p.a**2 / safe_r**2)
    eta_r_out = -p.W * (1.0 - p.a**2 / safe_r**2)
    eta_p = np.where(inside, eta_p_in, eta_p_out)
    eta_r = np.where(inside, eta_r_in, eta_r_out)

    # e_r = (c, s), e_theta = (-s, c)
    d1 = eta_p * s * c - eta_r * c * s
    d2 = eta_p * s * s + eta_r * c * c
    u1, u2 = d2, -d1
    if np.ndim(u1) == 0:
        return float(u1), float(u2)
    return u1, u2


def _check_window(p: LambParams, grid: HalfPlaneGrid):
    if not grid.contains_disk(p.a):
        raise TruncationError(
            f"dipole support of radius {p.a:.6g} does not fit in the window "
            f"[{grid.x1_min}, {grid.x1_max}] x (0, {grid.x2_max})"
        )


def sample_lamb(p: LambParams, grid: HalfPlaneGrid) -> ScalarField:
    """Cell-centre samples of the dipole vorticity."""
    _check_window(p, grid)
    X1, X2 = grid.mesh()
    return ScalarField(grid, lamb_vorticity(p, X1, X2))


def sample_lamb_stream(p: LambParams, grid: HalfPlaneGrid, absolute: bool = True) -> ScalarField:
    """Cell-centre samples of Psi_L, or of psi_L = Psi_L + W x2 when ``absolute``."""
    X1, X2 = grid.mesh()
    vals = lamb_stream(p, X1, X2)
    if absolute:
        vals = vals + p.W * X2
    return ScalarField(grid, vals, kind="stream")
