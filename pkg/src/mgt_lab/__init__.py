"""mgt-lab: spectral solver and verification lab for a dissipative
third-order acoustic wave model and its companions."""

from .params import DEFAULT_PARAMS, ModelParams, validate_params
from .rates import (
    Admissibility,
    RateSpec,
    blowup_admissible,
    global_existence_admissible,
    rate_D,
    rate_F,
    rate_g,
    rate_g_tilde,
    rate_h,
)
from .kernels import (
    CharacteristicTriple,
    KernelValues,
    ViscoValues,
    ZoneConfig,
    asymptotic_roots,
    char_roots,
    default_zones,
    degenerate_radii,
    discriminant,
    envelope_bound,
    kernel_values,
    leading_profile_J,
    visco_kernel,
)
from .oracle import ModeTrajectory, integrate_mode, integrate_propagator, integrate_visco_mode
from .fields import (
    EvolveControls,
    EvolveOutcome,
    Grid,
    SpectralField,
    box_length,
    bump_profile,
    evolve_until,
    fps_outside_mass,
    gaussian_profile,
    linear_evolve,
    make_field,
    odd_gaussian_profile,
    save_field_bin,
    load_field_bin,
    semilinear_step,
    visco_evolve,
)
from .norms import (
    RadialData,
    mass_P,
    norm_Hs_dot,
    norm_L1_weighted,
    norm_L2,
    norm_L2_no_mean,
    norm_Linf,
    radial_gaussian_data,
    radial_linear_norms,
)
from .fitting import DecayFit, fit_decay
from .experiments import (
    SingularLimitParams,
    approx_relation_experiment,
    default_singular_params,
    energy_singular,
    linear_decay_experiment,
    make_prepared_third_slot,
    profile_experiment,
    semilinear_decay_experiment,
    singular_limit_sweep,
    solution_limit_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
