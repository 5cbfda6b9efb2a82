"""Gauss-Jacobi rules at arbitrary precision.

Nodes are seeded by a double-precision Golub-Welsch eigenvalue solve and
polished by Newton's method on the three-term recurrence; weights use the
closed Gamma-function formula.  Rules are cached per (exponents, size, bits).
"""
from __future__ import annotations

from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpfr

from ..errors import AccuracyError, InvalidInputError
from .precision import PrecisionContext, as_context, to_mpfr, vabs

__all__ = ["jacobi_rule", "jacobi_quadrature", "legendre_rule"]


def _golub_welsch_seeds(a: float, b: float, n: int) -> np.ndarray:
    k = np.arange(n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    if n and abs(a + b) < 1e-300:
        diag[0] = (b - a) / (a + b + 2)
    diag = np.where(np.isfinite(diag), diag, (b - a) / (a + b + 2))
    k1 = np.arange(1, n, dtype=float)
    s1 = 2 * k1 + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (s1 * s1 * (s1 + 1) * (s1 - 1))
    if n > 1:
        # k = 1 is 0/0 when a + b = -1; use the cancelled form
        off2[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    off = np.sqrt(off2)
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return np.sort(np.linalg.eigvalsh(jac))


def _jacobi_eval(a, b, n: int, x):
    """P_n and P_{n-1} (standard normalisation) at the object array ``x``."""
    p_prev = np.full(x.shape, mpfr(1), dtype=object)
    p = (a + 1) + (a + b + 2) * (x - 1) / 2
    if n == 1:
        return p, p_prev
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c1 = 2 * k * (k + a + b) * (s - 2)
        c2 = (s - 1) * (a * a - b * b)
        c3 = (s - 1) * s * (s - 2)
        c4 = 2 * (k + a - 1) * (k + b - 1) * s
        p, p_prev = ((c2 + c3 * x) * p - c4 * p_prev) / c1, p
    return p, p_prev


@lru_cache(maxsize=256)
def _rule_cached(a_key: str, b_key: str, n: int, bits: int):
    ctx = PrecisionContext(bits)
    with ctx.scope():
        a, b = mpfr(a_key), mpfr(b_key)
        seeds = _golub_welsch_seeds(float(a), float(b), n)
        x = np.array([mpfr(float(s)) for s in seeds], dtype=object)
        tol = ctx.eps * 16
        for it in range(100):
            p, q = _jacobi_eval(a, b, n, x)
            s = 2 * n + a + b
            # (1 - x^2) P_n' = n[(a - b) - s x] P_n / s + 2 (n+a)(n+b) P_{n-1} / s
            dp = (n * ((a - b) - s * x) * p + 2 * (n + a) * (n + b) * q) / (s * (1 - x * x))
            dx = p / dp
            x = x - dx
            if max(vabs(dx)) <= tol:
                break
        else:
            raise AccuracyError(f"Gauss-Jacobi Newton polish did not converge (n={n})")
        p, q = _jacobi_eval(a, b, n, x)
        s = 2 * n + a + b
        dp = (n * ((a - b) - s * x) * p + 2 * (n + a) * (n + b) * q) / (s * (1 - x * x))
        logc = (
            gmpy2.lgamma(n + a + 1)[0]
            + gmpy2.lgamma(n + b + 1)[0]
            - gmpy2.lgamma(n + a + b + 1)[0]
            - gmpy2.lgamma(mpfr(n + 1))[0]
            + (a + b + 1) * gmpy2.log(mpfr(2))
        )
        w = gmpy2.exp(logc) / ((1 - x * x) * dp * dp)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def jacobi_rule(a, b, n: int, ctx: PrecisionContext | None = None):
    """n-point Gauss rule on [-1, 1] for the weight (1-x)**a (1+x)**b.

    Returns (nodes ascending, weights) as read-only object arrays of mpfr.
    """
    ctx = as_context(ctx)
    if n < 1:
        raise InvalidInputError("quadrature size must be positive")
    with ctx.scope():
        a, b = to_mpfr(a), to_mpfr(b)
    if not (a > -1 and b > -1):
        raise InvalidInputError("Jacobi exponents must exceed -1")
    return _rule_cached(str(a), str(b), n, ctx.mantissa_bits)


def legendre_rule(n: int, ctx: PrecisionContext | None = None):
    return jacobi_rule(0, 0, n, ctx)


def jacobi_quadrature(interval, alpha, beta, n: int, ctx: PrecisionContext | None = None):
    """Nodes and weights for (t - a)**alpha (b - t)**beta dt on [a, b]."""
    ctx = as_context(ctx)
    with ctx.scope():
        lo, hi = to_mpfr(interval[0]), to_mpfr(interval[1])
        if not lo < hi:
            raise InvalidInputError("quadrature interval must satisfy a < b")
        alpha, beta = to_mpfr(alpha), to_mpfr(beta)
        # (b - t) corresponds to (1 - x), (t - a) to (1 + x)
        x, w = jacobi_rule(beta, alpha, n, ctx)
        half = (hi - lo) / 2
        t = (lo + hi) / 2 + half * x
        scale = half ** (alpha + beta + 1)
        return t, w * scale
