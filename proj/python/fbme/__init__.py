"""Modified Euler scheme for SDEs driven by fractional Brownian motion.

Paths are numpy arrays of shape (n + 1, dims) on the uniform grid k T / n.
"""

from ._fbme import (
    CapabilityError,
    FactorizationError,
    Kmu,
    Scheme,
    SchemeOverflow,
    bank_names,
    branch_stats,
    cameron_martin_direction,
    chen_residual,
    companion_seed,
    fbm_covariance,
    p_variation_norm,
    sample_fbm,
    tree_level,
)

__all__ = [
    "CapabilityError",
    "FactorizationError",
    "Kmu",
    "Scheme",
    "SchemeOverflow",
    "bank_names",
    "branch_stats",
    "cameron_martin_direction",
    "chen_residual",
    "companion_seed",
    "fbm_covariance",
    "p_variation_norm",
    "sample_fbm",
    "tree_level",
]
