"""Symplectic Euler integration of Hamiltonian SDEs driven by compound-Poisson noise in Marcus form."""

from .diagnostics import (
    ConvergenceReport,
    PhaseDomain,
    circle_domain,
    convergence_study,
    evolve_domain,
    exact_domain,
    hamiltonian_trace,
    shoelace_area,
)
from .errors import (
    CapabilityError,
    ConfigError,
    DivergenceError,
    DomainError,
    LevySympError,
    SolverError,
    StepSizeWarning,
)
from .hamiltonian import (
    HamiltonianSystem,
    NoiseChannel,
    State,
    hamiltonian_value,
    make_linear_oscillator,
    step_size_bound,
)
from .integrators import (
    Scheme,
    SchemeConfig,
    TrajectoryRecord,
    eem_drift_step,
    integrate,
    one_step_jacobian,
    ses_drift_step,
)
from .levy_path import LevyConfig, LevyPath, jumps_in, path_value, sample_path
from .marcus import JumpEvent, apply_jump, marcus_increment
from .oracle import OscillatorParams, exact_hamiltonian, exact_state

__version__ = "0.1.0"
