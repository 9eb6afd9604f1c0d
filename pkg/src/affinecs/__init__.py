"""Affine coherent states over positive-definite matrix degrees of freedom.

Numerical kinematics of the affine group acting on the SPD cone: overlap
kernels in closed form, invariant measures and resolutions of unity checked
by seeded Monte Carlo, polarization and uncertainty identities, the polar
change-of-variables Jacobians, and time-sliced propagators verified against
exact operator oracles.
"""

from .affine1d import (
    Fiducial1D,
    Label1D,
    GridState1D,
    McConfig,
    overlap_1d,
    resolution_check_1d,
)
from .affinend import (
    FiducialND,
    LabelG,
    LabelS,
    compose,
    invert,
    kn,
    omega_n,
    overlap_nd,
    overlap_s,
    resolution_check_nd,
    s_to_g,
    so_volume,
)
from .conemeasures import build_rotation, polar_decompose, pushforward_check
from .conetest import ConeTestFunction, apply_kappa_nd, apply_sigma_nd
from .propagator import (
    HamiltonianSpec1D,
    SlicingConfig,
    analytic_propagator,
    grid_propagator,
    time_sliced_propagator,
)

__version__ = "0.1.0"
