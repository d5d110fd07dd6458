"""Configurable-precision numerics: floats, RNG, unitaries, polynomials."""

from .precision import (
    Complex,
    DOUBLE_DOUBLE,
    NATIVE,
    PrecisionConfig,
    QUAD_DOUBLE,
    Real,
    atan2,
    format_real,
    parse_real,
    pi_real,
    sin_cos,
    sqrt,
)
from .rng import SeededRng
from .unitary import (
    SpectralDecomposition,
    UnitaryMatrix,
    haar_unitary,
    unitary_eigendecomposition,
)
from .poly import (
    PolyFit,
    RealPolynomial,
    chebyshev_design,
    chebyshev_nodes,
    chebyshev_t_value,
    lagrange_extrapolate,
    lstsq_refined,
    monomial_design,
    poly_fit,
)

__all__ = [
    "Complex",
    "DOUBLE_DOUBLE",
    "NATIVE",
    "PolyFit",
    "PrecisionConfig",
    "QUAD_DOUBLE",
    "Real",
    "RealPolynomial",
    "SeededRng",
    "SpectralDecomposition",
    "UnitaryMatrix",
    "atan2",
    "chebyshev_design",
    "chebyshev_nodes",
    "chebyshev_t_value",
    "format_real",
    "haar_unitary",
    "lagrange_extrapolate",
    "lstsq_refined",
    "monomial_design",
    "parse_real",
    "pi_real",
    "poly_fit",
    "sin_cos",
    "sqrt",
    "unitary_eigendecomposition",
]
