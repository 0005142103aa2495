"""Exact and sampled convexity checks for the regularized rotating Kepler problem
and a numerical scan of the regularized restricted three-body problem."""

from .kernels import BACKEND
from .kepler_maps import ANGULAR_SIGN, CRITICAL_VALUE

__version__ = "0.1.0"

DEFAULT_SEED = 0x4B45504C
DEFAULT_SAMPLES = 20000

__all__ = ["ANGULAR_SIGN", "BACKEND", "CRITICAL_VALUE", "DEFAULT_SAMPLES", "DEFAULT_SEED", "__version__"]
