"""Radial ground states of the Choquard equation on balls and in whole space."""

from ._backend import BACKEND
from .convergence import SweepRecord, cutoff_profile, run_sweep, upper_bound_energy
from .energy import (
    EnergyReport,
    dd_direct,
    dd_newton,
    energy,
    h1_norm_sq,
    nehari_scale,
    smallest_eigenvalue,
)
from .errors import (
    BracketError,
    ChoquardError,
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    IntegrationError,
    NoPositiveLambda,
    SingularityError,
)
from .grid3d import GridFunction3D, ground_state_iterate, poisson_solve, radial_deviation
from .kernel import (
    BallSpec,
    Dimension,
    RadialGrid,
    RadialProfile,
    green_pointwise,
    green_radial_avg,
    lambda_of,
    newton_kernel,
    u_potential,
    v_potential,
)
from .rearrange import rearrange_grid3d, rearrange_radial, rearrangement_energy_check, talenti_check
from .shooting import (
    CanonicalSolution,
    GroundState,
    Tolerances,
    integrate_trajectory,
    lambda_from_crossing,
    pde_residual,
    rescale_to_ball,
    solve_ball,
    solve_whole_space,
)

__version__ = "0.1.0"
