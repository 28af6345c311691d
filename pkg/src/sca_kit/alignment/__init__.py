"""Brain-model alignment metrics: SCA, RSA, linear encoding and CMS."""

from .connectivity import build_icm, dominant_components, icm_from_responses, sca_score
from .encoding import EncodingConfig, encoding_score
from .matching import AlignmentScore, best_assignment, cms, recovery_score, similarity_matrix
from .rsa import build_rdm, rsa_score

__all__ = [
    "AlignmentScore",
    "EncodingConfig",
    "best_assignment",
    "build_icm",
    "build_rdm",
    "cms",
    "dominant_components",
    "encoding_score",
    "icm_from_responses",
    "recovery_score",
    "rsa_score",
    "sca_score",
    "similarity_matrix",
]
