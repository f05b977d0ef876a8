"""Correspondence-free rigid registration of 3D point clouds (and general
multivector clouds) by eigendecomposition of multilinear covariance maps in
conformal geometric algebra, with a PCA-style Euclidean baseline and a
benchmark harness."""

from .algebra import (
    Algebra,
    Multivector,
    algebra,
    grade_project,
    inverse_simple,
    norm_sq,
    product,
    project_onto_blade,
    reciprocal_blade,
    reverse,
)
from .bench import (
    BenchConfig,
    BenchRecord,
    derive_seed,
    emit_results,
    perturb,
    random_motor,
    run_benchmark,
    splitmix64,
    summarize,
    synth_cloud,
)
from .conformal import (
    CGA,
    FRAME,
    G3,
    CoeffQuad,
    ConformalFrame,
    Motor,
    apply_versor,
    coeff_distance_sq,
    coefficients,
    coeffs_under_motor,
    conformal_residual,
    dual_sphere_params,
    embed,
    euclidean_vector,
    reconstruct,
    rotor_exp,
    translator,
    unembed,
)
from .errors import (
    AlgebraUsageError,
    AmbiguousRotationError,
    CgaregError,
    DegeneracyError,
    DegeneratePointError,
    DegenerateSphereError,
    ExactTranslationUnavailableError,
    NormalizationError,
    NumericalDomainError,
    PlyError,
    SignatureMismatchError,
    UndeterminedTranslationError,
)
from .estimators import CGAEVDRegistration, VGAEVDRegistration
from .ply_io import PointCloud, load_ply, save_ply_ascii
from .registration import (
    PrimitiveRecord,
    RegistrationConfig,
    RegistrationResult,
    estimate_rotor,
    estimate_translation_exact,
    estimate_translation_lsq,
    export_primitives,
    pose_errors,
    primitives_for_points,
    register_cga_evd,
    register_vga_evd,
)
from .spectra import (
    EigenBasis,
    MultilinearMap,
    build_cloud_map,
    eigen_grade,
    grade_matrix,
    normalize_eigenbasis,
    reciprocal_frame,
    reference_from_points,
    reference_multivector,
)

__version__ = "0.1.0"
