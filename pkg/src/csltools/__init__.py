import sys

from .bounds import (
    BoundKind,
    ExperimentBound,
    PointerSpec,
    bounds_table,
    cosmology_consistency,
    diffraction_lambda_bound,
    enhanced_lambda,
    excluded_by,
    lambda_lower_bound_pointer,
    mass_to_confront,
)
from .density import DensityMatrix, evolve_density
from .dynamics import (
    CslParams,
    Trajectory,
    collapse_time_estimate,
    evolve_trajectory,
    expected_collapse_time,
    offdiag_decay_rate,
    sde_step,
)
from .ensemble import (
    EnsembleConfig,
    EnsembleResult,
    MartingaleRecord,
    OutcomeTally,
    classify_outcome,
    martingale_test,
    run_ensemble,
)
from .errors import CslError
from .noise import Cutoff, NoiseProcess, White, sample_noise_increment
from .ruin import RuinGame, ruin_probability_exact, ruin_simulate
from .state import (
    DiagonalObservable,
    StateVector,
    expectation,
    normalize,
    probabilities,
    two_level_state,
    variance,
)
from .units import Dimension, PhysicalQuantity
from .version import __version__


def prt_error(*args, **kwargs):
    return print(*args, file=sys.stderr, **kwargs)


def csl_run():
    """Main function for csl_run command."""
    from .cli import main

    sys.exit(main())
