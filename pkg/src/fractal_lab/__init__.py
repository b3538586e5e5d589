"""fractal-lab: scale-counting dimension, Frostman cascades, lattice walks.

The toolkit works with finite base-b grids over [0,1]: occupied-cell sets
(:class:`GridSet`), cascade measures on them, +-1 lattice random walks,
and seeded Monte-Carlo experiments that tie the three together.
"""

from .dimension import (
    DimensionEstimate,
    ThresholdProfile,
    default_fit_range,
    estimate_dimension,
    threshold_profile,
)
from .errors import (
    CapacityError,
    DegenerateFitError,
    DomainError,
    EmptyLevelError,
    EmptySupportError,
    FractalLabError,
    UndefinedRatioError,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    embedded_cantor_times,
    run_cantor_exact,
    run_doubling,
    run_experiment,
    run_levy_identity,
    run_perkins,
    run_zero_set_dim,
)
from .frostman import (
    CascadeMeasure,
    cell_mass,
    frostman_cascade,
    interval_mass,
    verify_frostman,
)
from .grid import (
    CantorSpec,
    GridSet,
    GridSpec,
    cantor_set,
    coarsen,
    hausdorff_sum,
    scale_counts,
)
from .rng import PRNG_VERSION, derive_replica_seed
from .walk import (
    LatticePoint,
    PERKINS_NORMALIZER,
    WalkPath,
    image_set,
    interval_union_measure,
    level_set,
    local_time,
    occupation_lambda,
    perkins_ratio,
    record_times,
    running_max,
    sample_walk,
    stream_walk_stats,
)

__version__ = "0.1.0"

__all__ = [
    "CantorSpec",
    "CapacityError",
    "CascadeMeasure",
    "DegenerateFitError",
    "DimensionEstimate",
    "DomainError",
    "EmptyLevelError",
    "EmptySupportError",
    "ExperimentConfig",
    "ExperimentReport",
    "FractalLabError",
    "GridSet",
    "GridSpec",
    "LatticePoint",
    "PERKINS_NORMALIZER",
    "PRNG_VERSION",
    "ThresholdProfile",
    "UndefinedRatioError",
    "WalkPath",
    "cantor_set",
    "cell_mass",
    "coarsen",
    "default_fit_range",
    "derive_replica_seed",
    "embedded_cantor_times",
    "estimate_dimension",
    "frostman_cascade",
    "hausdorff_sum",
    "image_set",
    "interval_mass",
    "interval_union_measure",
    "level_set",
    "local_time",
    "occupation_lambda",
    "perkins_ratio",
    "record_times",
    "run_cantor_exact",
    "run_doubling",
    "run_experiment",
    "run_levy_identity",
    "run_perkins",
    "run_zero_set_dim",
    "running_max",
    "sample_walk",
    "scale_counts",
    "stream_walk_stats",
    "threshold_profile",
    "verify_frostman",
]
