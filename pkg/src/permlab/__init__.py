"""permlab: a finite-field random-matrix laboratory.

Exact arithmetic in F_q, dense matrices with determinant/rank and redundant
permanent kernels, reproducible splittable random streams, witness-event
detectors and permanent-minor graphs, the nested-set growth process, exact
convolution analysis of weighted sums, and exact/Monte Carlo estimators with
a bound checker for permanent-distribution claims.
"""

from .config import ExperimentConfig
from .errors import (
    BadConfig,
    BadN,
    BadWeights,
    CharacteristicTwo,
    ConditioningTooRare,
    DegenerateDistribution,
    DivisionByZero,
    DuplicateIndex,
    FieldMismatch,
    NonPrimeField,
    NotAPrimePower,
    NotHollowSymmetric,
    NotSquare,
    OutOfRange,
    PermLabError,
    ReplayMismatch,
    SizeCap,
    TableCapExceeded,
)
from .events import (
    EventReport,
    Hollow3Certificate,
    PermGraph,
    detect_witnesses,
    find_triangle,
    hollow3_certificate,
    mat_vec,
    minor_dependence_matrix,
    pack_disjoint_triangles,
    pair_minor_matrix,
)
from .estimators import (
    AllOf,
    AlwaysTrue,
    BoundVerdict,
    Estimate,
    ExactDistribution,
    MatrixEvent,
    PairMinorRankAtLeast,
    StatEquals,
    WitnessEvent,
    brute_force_image_distribution,
    brute_force_linear_map,
    build_event,
    check_bounds,
    conditional_probability,
    delta_separation,
    det_singular_probability,
    enumerate_exact,
    limiting_singular_probability,
    mc_probability,
    mc_value_counts,
    wilson_interval,
)
from .fields import FieldElem, FieldSpec, make_field
from .matrices import (
    MatrixFq,
    complement_columns,
    delete_last_rows,
    det_batch_prime,
    determinant,
    minor_permanent,
    permanent,
    permanent_expansion,
    permanent_ryser,
    rank,
    ryser_batch_prime,
    submatrix,
)
from .processes import (
    GrowthOutcome,
    GrowthStep,
    GrowthTrace,
    SumDistribution,
    epsilon_curve,
    exact_sum_distribution,
    packing_size,
    pick_growth_params,
    replay_growth_trace,
    run_growth_process,
    uniformity_criterion,
    uniformity_threshold,
)
from .randomness import (
    EntryDistribution,
    RandomStream,
    make_distribution,
    sample_matrix,
    uniform_distribution,
)

__version__ = "0.1.0"
