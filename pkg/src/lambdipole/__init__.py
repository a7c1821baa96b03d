"""Lamb dipole construction, variational vortex pairs and their evolution on a half-plane grid."""
from .energy import (
    EnergyReport,
    dirichlet_energy,
    greens,
    hardy_check,
    interaction_energy,
    kinetic_energy,
    penalized_energy,
    stream_of,
)
from .evolve import EvolutionConfig, EvolutionTrace, orbit_distance, perturb, run, step, velocity_from_vorticity
from .fields import (
    AdmissibleSpec,
    HalfPlaneGrid,
    ScalarField,
    impulse,
    mass,
    norm_l1,
    norm_l2,
    read_lvf1,
    scale_field,
    translate_x1,
    weighted_l1,
    write_csv,
    write_lvf1,
)
from .lamb import LambParams, lamb_stream, lamb_velocity, lamb_vorticity, sample_lamb
from .rearrange import steiner_symmetrize, symmetrization_report
from .special import C0, bessel_j, first_zero_j1
from .variational import MinimizerResult, SolveOptions, energy_curve, solve, speed_identity

__version__ = "0.1.0"
