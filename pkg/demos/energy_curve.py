"""
The energy curve
================

The minimum value I(mu) of minus the penalised energy over the admissible
class is negative and strictly decreasing in the impulse.  For the dipole
family it scales like mu^2, since doubling the impulse doubles the speed.
"""
import math

from lambdipole.fields import HalfPlaneGrid
from lambdipole.special import C0
from lambdipole.variational import energy_curve

lam = 1.0
mu0 = C0**2 * math.pi / lam
mus = [f * mu0 for f in (0.25, 0.5, 1.0, 2.0)]
grid = HalfPlaneGrid(-8.0, 8.0, 8.0, 128, 128)

curve = energy_curve(mus, nu=20 * max(mus), lam=lam, grid=grid)
for mu, I in curve:
    print(f"mu = {mu:8.4f}   I = {I:10.5f}   I / mu^2 = {I / mu**2:.6f}")

vals = [I for _, I in curve]
print("negative:", all(v < 0 for v in vals))
print("strictly decreasing:", all(b < a for a, b in zip(vals, vals[1:])))
