"""semiclab: semiclassical mechanics workbench.

Complex tunneling trajectories in the cubic well, WKB quantization with
turning-point phases, spherical-coordinate operator checks, the
stationary-to-time-dependent reduction of a two-channel collision, and
the periodic-orbit response function with its complex poles.
"""

__version__ = "0.1.0"

from . import channels, errors, gutzwiller, numerics, operators, trajectory, wkb
from .channels import (
    CLOSED,
    ChannelSystem,
    TransitionResult,
    common_trajectory,
    constant_gap_system,
    emergence_of_time_sweep,
    landau_zener_system,
    radial_momentum,
    solve_stationary_semiclassical,
    solve_time_dependent,
)
from .gutzwiller import (
    GutzwillerOrbit,
    PoleIndex,
    affine_orbit,
    find_pole,
    linear_orbit,
    pole_condition_residual,
    response_function,
)
from .numerics import (
    OdeSpec,
    ToleranceConfig,
    integrate_complex_ivp,
    newton_complex,
    singular_quadrature,
    solve_cubic_complex,
)
from .operators import (
    GridFunction,
    RadialGrid,
    SphericalGrid,
    apply_radial_momentum,
    hermiticity_residual,
    hydrogen_radial_levels,
    kinetic_discrepancy,
)
from .trajectory import (
    CubicSystem,
    EscapeReport,
    TrajectoryRecord,
    changeover_time,
    crossing_time_tc,
    cubic_system,
    lifetime_tau,
    resonance_energy,
    run_trajectory,
    table1_sweep,
    turning_points,
)
from .wkb import (
    PotentialModel,
    QuantizationSpec,
    action_between_turning_points,
    barrier_exponent,
    bohr_sommerfeld_levels,
    cubic_potential,
    harmonic_potential,
)
