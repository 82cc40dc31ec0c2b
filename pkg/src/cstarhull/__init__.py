"""Numerical toolkit for coefficient-combination hulls of matrix families:
evaluating combinations, deciding hull membership through completely
positive map programs, producing verifiable separation certificates, and
verifying family-level separation, cross-checked against exact commutative
and spectral oracles."""

from .matrix_core import (
    CMatrix,
    HermMatrix,
    EigDecomposition,
    PsdCheck,
    NumericalError,
    NotPsdError,
    adjoint,
    real_part,
    eig_herm,
    op_norm,
    psd_check,
    sqrt_psd,
    frob_inner,
)
from .kraus import (
    Mode,
    MatrixFamily,
    KrausCombination,
    CombinationReport,
    CombinationError,
    apply_combination,
    validate_combination,
    augment_to_exact,
    compose_combinations,
)
from .hull_solver import (
    SolverConfig,
    ChoiProgram,
    SeparationCertificate,
    CertificateCheck,
    Member,
    NotMember,
    Undecided,
    DistanceBounds,
    decide_membership,
    hull_distance,
    analyze_membership,
    verify_certificate,
    extract_kraus,
    choi_apply,
    partial_trace_first,
    choi_of_coefficient,
)
from .commutative_oracle import (
    DiagonalFamily,
    UbabsSystem,
    PointwiseMembership,
    CoverDecomposition,
    CoverError,
    pointwise_hull_membership,
    scalar_hull_membership,
    lambda_sequence,
    plane_hull_distance,
    ubabs_gap,
    projection_cover_decompose,
)
from .verifier import (
    FamilyMode,
    OverallVerdict,
    ElementReport,
    FamilyReport,
    SpectralElement,
    SpectralFamily,
    verify_polyhedron,
    normalize_family,
    perturbation_margin,
    frame_intertwiner,
    collapse_bound,
    collapse_witness,
)

__version__ = "0.1.0"
