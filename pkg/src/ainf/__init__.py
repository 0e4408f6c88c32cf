"""Exact finite-stage computations with Witt vectors over perfect F_p-algebras."""

__version__ = "0.1.0"

from .fpring import NormExponent, PerfPoly, PrecisionBudget, RingPresentation  # noqa: E402
from .witt import WittRing, WittVec  # noqa: E402

__all__ = ["NormExponent", "PerfPoly", "PrecisionBudget", "RingPresentation", "WittRing", "WittVec",
           "__version__"]
