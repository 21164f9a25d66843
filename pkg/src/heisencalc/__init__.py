"""Numerical pseudo-differential calculus on the Heisenberg group.

Desk-scale machinery: Schroedinger representations, Weyl quantization on
midpoint tensor grids, the group Fourier transform, difference operators on
lambda-symbols, Shubin-type symbol-class checks, and operator quantization
with calibrated Plancherel constants.
"""

__version__ = "0.1.0"

from .grids import Grid1D, GridFunction
from .heisenberg import HPoint, MultiIndex
from .phase_space import WeylSymbol, RepOperator
from .representations import LambdaGrid, SignedSqrt
from .difference_ops import SymbolFamily
from .symbol_calculus import LambdaSymbol

__all__ = [
    "Grid1D",
    "GridFunction",
    "HPoint",
    "MultiIndex",
    "WeylSymbol",
    "RepOperator",
    "LambdaGrid",
    "SignedSqrt",
    "SymbolFamily",
    "LambdaSymbol",
    "__version__",
]
