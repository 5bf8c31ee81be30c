"""Ground states of the 1-D discrete nonlinear Schrodinger lattice with nonlinear hopping."""
from ._backend import BACKEND
from .convergence import ConvergenceReport, align, defocusing_reduce, embed_window, k_sweep, solve, stagger
from .dynamics import EvolutionTrace, evolve, flow_rhs, hamiltonian, power
from .errors import (
    ConfigError,
    DegenerateNonlinearity,
    InvalidK,
    InvalidRegime,
    NlhopError,
    NoConvergence,
    NonFinite,
    OddPeriod,
    SingularJacobian,
    WindowTooLarge,
    ZeroField,
)
from .green import GreenOperator, fixed_point_residual, green_infinite, green_periodic
from .lattice import (
    ModelParams,
    Regime,
    RingField,
    WaveField,
    el_residual,
    functional_I,
    functional_J,
    gradient_J,
    hopping_neighbors,
    laplacian_apply,
    lp_norm,
)
from .nehari import (
    GroundState,
    NehariScaling,
    SolverOptions,
    ground_state,
    j_along_ray,
    nehari_project,
    newton_polish,
    power_lower_bound,
)

__version__ = "0.1.0"
