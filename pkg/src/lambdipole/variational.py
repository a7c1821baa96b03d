"""Maximise the penalised energy over the admissible class.

Damped Picard iteration on the Euler-Lagrange relation

    omega = lam * (psi - W x2 - gamma)_+,

where for each stream function the multipliers are chosen so the candidate
has impulse ``mu`` and mass at most ``nu`` (``gamma > 0`` only when the mass
cap binds).  Because E is convex and the candidate maximises the linearised
functional over the constraint set, every relaxed step is an ascent step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .energy import EnergyReport, penalized_energy, stream_of
from .fields import (
    AdmissibleSpec,
    HalfPlaneGrid,
    ScalarField,
    _sum,
    impulse,
    mass,
    norm_l2,
)
from .lamb import LambParams, sample_lamb
from .rearrange import steiner_symmetrize
from .special import C0

__all__ = [
    "SolveOptions",
    "MinimizerResult",
    "MultiplierError",
    "solve",
    "multipliers",
    "speed_identity",
    "energy_curve",
    "half_disk_patch",
]

log = logging.getLogger(__name__)


class MultiplierError(RuntimeError):
    """No admissible (W, gamma) exists for the current stream function."""


@dataclass(frozen=True)
class SolveOptions:
    max_outer_iters: int = 400
    fixed_point_tol: float = 1e-9
    multiplier_tol: float = 1e-10
    relaxation: float = 0.5
    symmetrize_each_iter: bool = True

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be positive")
        if not (self.fixed_point_tol > 0 and self.multiplier_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.relaxation <= 1:
            raise ValueError("relaxation must lie in (0, 1]")


@dataclass
class MinimizerResult:
    omega: ScalarField
    W: float
    gamma: float
    energy: EnergyReport
    impulse_residual: float
    mass: float
    iterations: int
    converged: bool
    spec: AdmissibleSpec | None = None
    energy_trace: list[float] = field(default_factory=list)
    change_trace: list[float] = field(default_factory=list)
    free_boundary_residual: float = math.nan

    @property
    def I(self) -> float:
        """Minimum value of -E_{2,lam}."""
        return -self.energy.penalized


# --- multiplier solves ------------------------------------------------------


def _solve_speed(psi: np.ndarray, x2: np.ndarray, gamma: float, target: float) -> float:
    """Smallest-W root of sum (psi - gamma - W x2)_+ x2 = target, with W >= 0.

    The left side is piecewise linear and non-increasing in W, so the root is
    found exactly from sorted breakpoints.
    """
    t = psi - gamma
    keep = t > 0
    t, x = t[keep], x2[keep]
    if t.size == 0:
        raise MultiplierError("candidate vanishes identically; no W reaches the impulse")
    brk = t / x
    order = np.argsort(-brk, kind="stable")
    brk, t, x = brk[order], t[order], x[order]
    s1 = np.cumsum(t * x)
    s2 = np.cumsum(x * x)
    nxt = np.append(brk[1:], 0.0)
    # value at the lower end of each linear piece (W = next breakpoint)
    at_lower = s1 - nxt * s2
    if at_lower[-1] < target:
        raise MultiplierError(
            f"impulse at W = 0 is {at_lower[-1]:.6g} (scaled) < target {target:.6g}"
        )
    k = int(np.searchsorted(at_lower, target, side="left"))
    return max(0.0, (s1[k] - target) / s2[k])


def multipliers(psi: ScalarField, spec: AdmissibleSpec) -> tuple[float, float]:
    """(W, gamma) making lam (psi - W x2 - gamma)_+ have impulse mu and mass <= nu."""
    g = psi.grid
    vals = psi.values.ravel()
    x2 = np.broadcast_to(g.x2[:, None], g.shape).ravel()
    scale = spec.lam * g.cell_area
    target = spec.mu / scale

    def candidate_mass(gamma):
        W = _solve_speed(vals, x2, gamma, target)
        return scale * float(np.sum(np.maximum(vals - gamma - W * x2, 0.0))), W

    m0, W0 = candidate_mass(0.0)
    if m0 <= spec.nu:
        return W0, 0.0

    # largest gamma for which some W >= 0 still reaches the impulse
    def impulse_at_zero_speed(gamma):
        return float(np.sum(np.maximum(vals - gamma, 0.0) * x2)) - target

    g_hi = optimize.brentq(impulse_at_zero_speed, 0.0, float(vals.max()), xtol=1e-15, rtol=1e-15)
    g_hi *= 1.0 - 1e-14
    if candidate_mass(g_hi)[0] > spec.nu:
        raise MultiplierError("mass cap cannot be met at the required impulse")
    gamma = optimize.brentq(
        lambda gm: candidate_mass(gm)[0] - spec.nu, 0.0, g_hi, xtol=1e-15, rtol=1e-15
    )
    return candidate_mass(gamma)[1], gamma


def _candidate(psi: ScalarField, spec: AdmissibleSpec, W: float, gamma: float) -> np.ndarray:
    X2 = psi.grid.x2[:, None]
    return spec.lam * np.maximum(psi.values - W * X2 - gamma, 0.0)


# --- initialisers ------------------------------------------------------------


def _rescale_impulse(omega: ScalarField, mu: float) -> ScalarField:
    p = impulse(omega)
    if p <= 0:
        raise ValueError("initial vorticity has no impulse")
    return omega * (mu / p)


def half_disk_patch(grid: HalfPlaneGrid, mu: float, radius: float, center: float = 0.0) -> ScalarField:
    """Constant vorticity on the half disk of ``radius`` about ``(center, 0)``,
    scaled to impulse ``mu``."""
    X1, X2 = grid.mesh()
    ind = ((X1 - center) ** 2 + X2**2 < radius**2).astype(float)
    return _rescale_impulse(ScalarField(grid, ind), mu)


def _initial(spec: AdmissibleSpec, grid: HalfPlaneGrid, init) -> ScalarField:
    if isinstance(init, ScalarField):
        omega = _rescale_impulse(init, spec.mu)
    elif init in (None, "lamb"):
        omega = _rescale_impulse(sample_lamb(LambParams.from_impulse(spec.mu, spec.lam), grid), spec.mu)
    elif init == "patch":
        # mass of the patch is 3 pi mu / (4 R); keep it under the cap
        radius = max(C0 / math.sqrt(spec.lam), 1.05 * 3 * math.pi * spec.mu / (4 * spec.nu))
        omega = half_disk_patch(grid, spec.mu, radius)
    else:
        raise ValueError(f"unknown initialiser {init!r}")
    if mass(omega) > spec.nu * (1 + 1e-10):
        raise ValueError("initial vorticity exceeds the mass cap")
    return omega


# --- the solver ---------------------------------------------------------------


def solve(
    spec: AdmissibleSpec,
    grid: HalfPlaneGrid,
    opts: SolveOptions | None = None,
    init=None,
) -> MinimizerResult:
    """Maximise E_{2,lam} over K_{mu,nu} on ``grid``.

    ``init`` is ``"lamb"`` (default), ``"patch"`` or a starting field.
    Non-convergence is reported through ``converged=False``; a failed
    multiplier solve raises :class:`MultiplierError`.
    """
    opts = opts or SolveOptions()
    if opts.symmetrize_each_iter and not grid.is_symmetric:
        raise ValueError("solver window must be symmetric about x1 = 0")
    omega = _initial(spec, grid, init)
    theta = opts.relaxation
    energies: list[float] = []
    changes: list[float] = []
    converged = False
    it = 0
    psi = stream_of(omega)
    for it in range(1, opts.max_outer_iters + 1):
        energies.append(penalized_energy(omega, spec.lam, psi).penalized)
        W, gamma = multipliers(psi, spec)
        cand = _candidate(psi, spec, W, gamma)
        new = (1.0 - theta) * omega.values + theta * cand
        new_field = omega.with_values(new)
        if opts.symmetrize_each_iter:
            new_field = steiner_symmetrize(new_field)
        diff = new_field.values - omega.values
        change = math.sqrt(_sum(diff * diff) * grid.cell_area) / max(norm_l2(new_field), 1e-300)
        changes.append(change)
        omega = new_field
        psi = stream_of(omega)
        log.debug("iter %d: E2=%.15g change=%.3e W=%.10g gamma=%.3g", it, energies[-1], change, W, gamma)
        if change <= opts.fixed_point_tol:
            converged = True
            break

    report = penalized_energy(omega, spec.lam, psi)
    energies.append(report.penalized)
    W, gamma = multipliers(psi, spec)
    cand = _candidate(psi, spec, W, gamma)
    active = omega.values > 0
    peak = float(omega.values.max())
    fb = float(np.abs(omega.values - cand)[active].max()) / peak if active.any() else 0.0
    imp = impulse(omega)
    return MinimizerResult(
        omega=omega,
        W=W,
        gamma=gamma,
        energy=report,
        impulse_residual=abs(imp - spec.mu) / spec.mu,
        mass=mass(omega),
        iterations=it,
        converged=converged,
        spec=spec,
        energy_trace=energies,
        change_trace=changes,
        free_boundary_residual=fb,
    )


# --- diagnostics --------------------------------------------------------------


def speed_identity(omega: ScalarField | MinimizerResult, method: str = "fft") -> float:
    """W recovered from the double integral of (x2 + y2) / |x - y*|^2 w(x) w(y)
    over 2 pi times the mass."""
    if isinstance(omega, MinimizerResult):
        omega = omega.omega
    m = mass(omega)
    if m <= 0:
        raise ValueError("speed identity needs non-zero mass")
    g = omega.grid
    vals = omega.values
    if method == "fft":
        from scipy import fft as sfft

        n1, n2 = g.n1, g.n2
        p1 = sfft.next_fast_len(2 * n1 - 1, real=True)
        p2 = sfft.next_fast_len(2 * n2 - 1, real=True)
        # kernel in (x1 - y1, x2 + y2); x2 + y2 = (j + l + 1) h2
        d1 = np.arange(p1)
        d1 = np.where(d1 < n1, d1, d1 - p1) * g.h1
        d2 = (np.arange(p2) + 1) * g.h2
        ker = d2[:, None] / (d2[:, None] ** 2 + d1[None, :] ** 2)
        # correlate in x2 via a flipped source: index j + l maps to j - l' + (n2 - 1)
        src = vals[::-1]
        conv = sfft.irfft2(sfft.rfft2(src, s=(p2, p1)) * sfft.rfft2(ker), s=(p2, p1))
        phi = np.empty_like(vals)
        # conv[r, :] = sum_l' src[l'] ker[r - l'] with r - l' = j + l, r = j + n2 - 1
        phi[:] = conv[n2 - 1 : 2 * n2 - 1, :n1]
        total = _sum(phi * vals)
    elif method == "direct":
        X1, X2 = g.mesh()
        x1, x2, w = X1.ravel(), X2.ravel(), vals.ravel()
        nz = np.nonzero(w)[0]
        x1, x2, w = x1[nz], x2[nz], w[nz]
        total = 0.0
        for k in range(x1.size):
            s = x2[k] + x2
            total += w[k] * float(np.sum(s / ((x1[k] - x1) ** 2 + s * s) * w))
    else:
        raise ValueError(f"unknown method {method!r}")
    double = total * g.cell_area**2
    return double / (2.0 * math.pi * m)


def energy_curve(
    mu_values,
    nu: float,
    lam: float,
    grid: HalfPlaneGrid,
    opts: SolveOptions | None = None,
    init=None,
) -> list[tuple[float, float]]:
    """``(mu, I_mu)`` pairs, I = -max E_{2,lam}, for increasing ``mu_values``."""
    mus = [float(m) for m in mu_values]
    if any(m <= 0 for m in mus):
        raise ValueError("impulses must be positive")
    if any(b <= a for a, b in zip(mus, mus[1:])):
        raise ValueError("impulses must be strictly increasing")
    out = []
    for mu in mus:
        res = solve(AdmissibleSpec(mu, nu, lam), grid, opts, init=init)
        if not res.converged:
            log.warning("solve at mu=%g did not converge in %d iterations", mu, res.iterations)
        out.append((mu, res.I))
    return out
