"""Multiprecision numerical kernel: scalars, polynomials, quadrature, linear algebra."""
from .linalg import SVD, QRCP, fft, nullspace_solve, qrcp, solve, svd
from .poly import Poly, horner, poly_roots
from .precision import DEFAULT_CONTEXT, PrecisionContext, as_context
from .quadrature import jacobi_quadrature, jacobi_rule, legendre_rule

__all__ = [
    "DEFAULT_CONTEXT",
    "PrecisionContext",
    "as_context",
    "Poly",
    "horner",
    "poly_roots",
    "jacobi_rule",
    "jacobi_quadrature",
    "legendre_rule",
    "QRCP",
    "qrcp",
    "solve",
    "SVD",
    "svd",
    "nullspace_solve",
    "fft",
]
