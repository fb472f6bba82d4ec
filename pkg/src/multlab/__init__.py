"""Spectral multipliers of generalized Laplacians on uniform meshes.

Discrete operators ``-L = D*D + H``, their eigensystems, heat/Poisson/wave
families, the sharp/flat multiplier split with wave and Bessel routes, and
BMO / L^p diagnostics.
"""
from .discretize import OperatorSpec, assemble_operator, build_mesh, laplacian
from .eigen import EigenSystem, KernelMatrix, eigendecompose, kernel_from_multiplier, operator_norm
from .errors import ConfigurationError, NumericFailure
from .symbols import CutoffSpec, builtin_symbols, get_symbol, symbol_tables

__version__ = "0.1.0"

__all__ = [
    "OperatorSpec", "assemble_operator", "build_mesh", "laplacian",
    "EigenSystem", "KernelMatrix", "eigendecompose", "kernel_from_multiplier", "operator_norm",
    "ConfigurationError", "NumericFailure",
    "CutoffSpec", "builtin_symbols", "get_symbol", "symbol_tables",
]
