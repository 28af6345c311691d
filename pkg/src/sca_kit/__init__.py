"""sca_kit: sparse Bayesian decomposition of stimulus-response matrices and
axis-sensitive representational alignment (SCA) alongside RSA, linear
encoding and component matching."""

from .alignment import (
    AlignmentScore,
    EncodingConfig,
    build_icm,
    build_rdm,
    cms,
    encoding_score,
    recovery_score,
    rsa_score,
    sca_score,
)
from .consensus import ConsensusResult, component_consistency, run_consensus
from .data import ConnectivityMatrix, Factorization, GibbsConfig, PriorSpec, ResponseMatrix
from .decomposition import (
    bnmf_decompose,
    decompose,
    explained_variance,
    nmf_decompose,
    pca_decompose,
    snmf_decompose,
)
from .io import load_connectivity, load_matrix, save_matrix
from .rng import derive_seed, seeded_rng
from .simulation import (
    LatentSpec,
    RotationSpec,
    SweepRecord,
    apply_rotation,
    gen_latent_data,
    make_rotation,
    rotated_component_similarity,
    sensitivity_sweep,
)
from .sparsity import factor_sparsity_report, hoyer_sparsity, kurtosis, moments, skewness

__version__ = "0.1.0"

__all__ = [
    "AlignmentScore",
    "ConnectivityMatrix",
    "ConsensusResult",
    "EncodingConfig",
    "Factorization",
    "GibbsConfig",
    "LatentSpec",
    "PriorSpec",
    "ResponseMatrix",
    "RotationSpec",
    "SweepRecord",
    "apply_rotation",
    "bnmf_decompose",
    "build_icm",
    "build_rdm",
    "cms",
    "component_consistency",
    "decompose",
    "derive_seed",
    "encoding_score",
    "explained_variance",
    "factor_sparsity_report",
    "gen_latent_data",
    "hoyer_sparsity",
    "kurtosis",
    "load_connectivity",
    "load_matrix",
    "make_rotation",
    "moments",
    "nmf_decompose",
    "pca_decompose",
    "recovery_score",
    "rotated_component_similarity",
    "rsa_score",
    "run_consensus",
    "save_matrix",
    "sca_score",
    "seeded_rng",
    "sensitivity_sweep",
    "skewness",
    "snmf_decompose",
]
