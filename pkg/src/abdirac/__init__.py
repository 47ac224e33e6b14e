"""Magnetic Dirac-Coulomb ground states."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AbDiracError,
    BadGrid,
    BadSpec,
    DegenerateError,
    DomainError,
    GridTooCoarse,
    MaxIterations,
    NoCrossing,
    NoModeEigenvalue,
    NonIntegrable,
    StiffIntegration,
    SupercriticalError,
)
from .model import (  # noqa: E402
    CouplingParams,
    GroundStateProfile,
    ModeEnergy,
    Regime,
    critical_field,
    energy_slope_exact,
    energy_slope_fd,
    eta_star_profile,
    frobenius_exponent,
    ground_state_energy,
    ground_state_spinor,
    half_gap,
    lemma_square_mu,
    mode_energy,
    mode_half_gap,
    quadratic_roots_mu,
)
from .grid import (  # noqa: E402
    GridSpec,
    RadialGrid,
    RadialProfile,
    build_grid,
    default_grid,
    differentiate,
    integrate_weighted,
    make_eta_star,
    make_near_optimizer,
    make_phi_star,
    make_power_exp,
    make_supercritical_witness,
    make_truncation,
)
from .forms import (  # noqa: E402
    FormBreakdown,
    eval_J,
    eval_J_mode,
    eval_J_positron_mode,
    eval_pauli_form,
    eval_Q_mode,
    eval_reduced_form,
)
from .variational import (  # noqa: E402
    LambdaStarResult,
    MinimizationResult,
    TrialFamilySpec,
    completed_square_check,
    lambda_star,
    lambda_star_positron,
    minimize_lambda_star,
    power_exp_family,
    supercritical_scan,
)
from .eigen import (  # noqa: E402
    EigenResult,
    ModePencil,
    assemble_mode_pencil,
    eigensolve_shooting,
    lowest_gap_eigenvalue_form,
    ode_residual_check,
    shoot_radial_system,
)
from .hardy import (  # noqa: E402
    HardyConstant,
    near_optimizer_sequence,
    pauli_constant,
    rayleigh_wirtinger_mode,
    special_case_checks,
    wirtinger_constant,
)
from .nonrel import (  # noqa: E402
    ScaledEnergy,
    convergence_sweep,
    pauli_residual,
    rayleigh_energy,
    scaled_energy,
)
from .io import SweepTable, emit, parse  # noqa: E402
