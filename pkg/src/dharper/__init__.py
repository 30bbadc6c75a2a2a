"""Driven Harper model laboratory.

Classical phase-space transport, quantum wave-packet evolution, Floquet
spectral analysis and the static Aubry-Andre baseline, all sharing one
validated parameter set.
"""

__version__ = "0.1.0"

from .model import (
    BetaClass,
    DerivedParams,
    ModelParams,
    derive_params,
    frequency_split,
    golden_beta,
)

__all__ = [
    "BetaClass",
    "DerivedParams",
    "ModelParams",
    "derive_params",
    "frequency_split",
    "golden_beta",
    "__version__",
]
