"""
Dimension theory of diagonal self-affine measures: closed-form Lyapunov and affinity dimensions,
separation diagnostics, disintegration by linear parts and entropy-based dimension estimation.
"""

__version__ = "0.1.0"
__license__ = "MIT"

from safd.ifs_core import build_model, load_model
from safd.types import DiagonalAffineIFS, WeightedModel
