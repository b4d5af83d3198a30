"""Exact linear algebra over the integers, structured random matrix
ensembles, and the distribution of their cokernels.

The package provides three layers:

* exact machinery: integer matrices, Smith normal form, cokernel
  extraction, finite abelian groups with their characters, automorphism
  counts and reference masses;
* the structured ensemble: a determinantal sampler over coordinate-sum
  triples, closed-form kernel-vector probabilities, exact surjection
  moments with window decompositions, and the divergence / rate-function
  toolkit behind them;
* a census harness with a CLI that writes JSONL record streams, CSV
  reports, and companion figures.
"""

from .abelian import (
    AbelianGroup,
    Character,
    PGroupPartition,
    Subgroup,
    aut_order,
    characters,
    cl_mass,
    elements,
    hom_count,
    make_group,
    partitions_up_to,
    subgroup_generated_by,
    subgroups,
    sur_count,
    sylow,
    trivial_group,
)
from .divergence import (
    Distribution,
    detect_subgroup,
    fourier,
    kl,
    pair_convolution,
    pinsker_gap,
    refinement_bound,
    uniformity_certificate,
)
from .errors import (
    BudgetExceeded,
    CokernelLabError,
    GroupTooLarge,
    InvalidFactor,
    NonDivisibleChain,
    NotSquare,
    NumericalDegeneracy,
    OutOfRange,
    SingularMatrix,
    SuiteFailure,
    WrongCardinality,
)
from .harness import (
    CensusReport,
    ExperimentConfig,
    ExperimentRecord,
    run_hypertree_census,
    run_moment_scan,
    run_sylow_census,
)
from .hypertree import (
    boundary_matrix,
    homology,
    hypertree_gram_det,
    kalai_check,
    sample_hypertree,
)
from .laplace import (
    SimplexPoint,
    analytic_gradient,
    analytic_hessian,
    f_value,
    gaussian_riemann_sum,
    q_matrix,
    taylor_residual,
)
from .linalg_exact import (
    IntMatrix,
    cokernel,
    cokernel_structure,
    det_exact,
    invariant_factors,
    read_matrix,
    smith_normal_form,
    write_matrix,
)
from .moments import (
    TypeVector,
    WindowParams,
    cauchy_binet_prob,
    exact_sur_moment,
    moment_matrix,
    prob_kernel_vector,
    scan_types,
    type_of,
    window_decomposition_report,
    window_membership,
)
from .seeds import derive_seed, make_rng
from .structured_ensemble import (
    SampleSubset,
    assemble_matrix,
    build_full_matrix,
    exact_law,
    exact_subset_prob,
    sample_subset,
    structured_gram_det,
)

__version__ = "0.1.0"
