"""U-statistics of ergodic Markov chains: exact evaluation, Hoeffding
decompositions, explicit variance bounds, and their verification."""

from .bounds import (
    BoundInputs,
    BoundReport,
    b_q,
    c_nm,
    corollary2_bound,
    corollary3_bound,
    d_constant,
    geometric_sum_bound,
    lemma6_constant,
    m_sup,
    theorem1_bound,
)
from .errors import (
    BudgetExceeded,
    ConfigError,
    DegreeTooLarge,
    DomainError,
    NeedDeclaredEnvelope,
    NonIntegrable,
    NotCanonical,
    NotErgodic,
    PNotPositive,
    Unbounded,
    UstatmcError,
)
from .markov import (
    Distribution,
    ErgodicityProfile,
    ExplicitRho,
    FiniteKernel,
    GeometricRho,
    Trajectory,
    certify_rho,
    evolve,
    sample_paths,
    simulate,
    stationary,
    tv_distance,
)
from .montecarlo import (
    ExperimentConfig,
    L2Estimate,
    SllnConfig,
    estimate_l2,
    exact_l2,
    mix64,
    replicate_u_values,
    run_slln_experiment,
    run_variance_experiment,
)
from .proofs import (
    JointLaw,
    OrderedTuple,
    count_tuples,
    counting_bound,
    f_sigma_expectation,
    j_indices,
    joint_law,
    jstar_histogram,
    proposition_grid_check,
    random_canonical_kernel,
    random_ergodic_kernel,
    tilde_law,
    tv_between,
    verify_lemma6,
    verify_prop5,
    verify_prop7,
)
from .ustats import (
    ProjectedKernel,
    SymmetricKernelFn,
    additive_kernel,
    canonicalize,
    degeneracy_order,
    gaussian_rbf_kernel,
    hoeffding_project,
    indicator_diag_kernel,
    product_kernel,
    table_kernel,
    u_statistic,
    verify_hoeffding,
)

__version__ = "0.1.0"
