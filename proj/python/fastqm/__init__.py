"""Quadratic-manifold dimensionality reduction (POD, POD-QM, greedy and Riemannian fits)."""

from ._core import (
    Centering,
    Method,
    CandidateBasis,
    QuadraticManifoldModel,
    SolverConfig,
    FitReport,
    FastQmError,
    InputError,
    IoError,
    NumericalError,
    center,
    candidate_basis,
    pod_projection_error,
    fit_pod,
    fit_pod_qm,
    fit_greedy,
    fit_fastqm,
    feature_objective,
    solve_xi,
    training_error,
    encode,
    decode,
    reconstruct,
    relative_error,
    compressed_square,
    khatri_rao_square,
    gen_parabola,
    gen_poly_manifold,
    rotation_sweep,
    load_matrix,
    save_matrix,
)

__version__ = "0.1.0"
