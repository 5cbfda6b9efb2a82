"""AAK (sup-norm best) meromorphic approximation on the unit circle.

The symbol is f = C restricted to the circle, whose Fourier coefficients of
negative index are the Laurent coefficients c_k (f = sum c_k z**(-k-1)).
The Hankel matrix H[j, k] = c_{j+k}, 0 <= j, k <= N, models the Hankel
operator of the truncated symbol; its (n+1)-st right singular vector v_n
gives the approximant g_n = P_+(f v_n) / v_n with error modulus sigma_n.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import DomainError, InvalidInputError, ResolutionError
from .kernel.linalg import SVD, fft, svd
from .kernel.poly import Poly, horner, poly_roots
from .kernel.precision import PrecisionContext, as_context, czeros, to_mpc, vabs
from .model import CauchyFunction, moments

__all__ = [
    "HankelTruncation",
    "AakApproximant",
    "hankel_matrix",
    "default_truncation",
    "aak_approximant",
    "aak_error_on_circle",
    "CircleError",
    "outer_factor",
    "GapWarning",
]

POLE_BAND = mpfr("1e-8")
GAP_TOL = 1e-8
CANCEL_TOL = 1e-6


class GapWarning(UserWarning):
    """The singular value used is (numerically) not simple."""


def default_truncation(n: int) -> int:
    return max(4 * n + 64, 128)


@dataclass
class HankelTruncation:
    """H[j, k] = c_{j+k}, 0 <= j, k <= N, with a geometric tail estimate.

    ``tail_rate``/``tail_scale`` fit |c_k| <= M r**k on the last N/2
    coefficients; ``tail_bound`` is the resulting bound on sum_{k>N} |c_k|.
    Every anti-diagonal dropped by the finite section has norm |c_k| with
    k > N, so this bounds the operator-norm distance to the full Hankel
    operator and hence the movement of every singular value.
    """

    N: int
    c: np.ndarray = field(repr=False)
    bits: int
    tail_rate: float
    tail_scale: float
    tail_bound: float
    _svd: SVD | None = field(default=None, repr=False)

    @property
    def matrix(self) -> np.ndarray:
        n = self.N + 1
        return np.array([[self.c[j + k] for k in range(n)] for j in range(n)], dtype=object)

    def svd(self) -> SVD:
        """Rank-revealing SVD (triplets above roundoff), computed once."""
        if self._svd is None:
            ctx = PrecisionContext(self.bits)
            with ctx.scope():
                tol = ctx.eps * gmpy2.exp2(ctx.mantissa_bits // 16)
                self._svd = svd(self.matrix, ctx, rank_tol=tol)
        return self._svd


def _tail_fit(c: np.ndarray, N: int) -> tuple[float, float, float]:
    mags = np.array([float(abs(v)) for v in c])
    # suffix maxima: vanishing subsequences (odd moments of symmetric data) sit at roundoff
    mags = np.maximum.accumulate(mags[::-1])[::-1]
    k = np.arange(len(c))
    lo = max(0, len(c) - max(2, N // 2))
    sel = (k >= lo) & (mags > 0)
    if sel.sum() < 2:
        return 0.0, 0.0, 0.0
    slope, icpt = np.polyfit(k[sel], np.log(mags[sel]), 1)
    rate = float(np.exp(slope))
    # lift the line so that it bounds every fitted coefficient
    lift = float(np.max(np.log(mags[sel]) - (icpt + slope * k[sel])))
    scale = float(np.exp(icpt + lift))
    if rate >= 1:
        return rate, scale, math.inf
    bound = scale * rate ** (N + 1) / (1 - rate)
    return rate, scale, bound


def hankel_matrix(F: CauchyFunction, N: int, ctx: PrecisionContext | None = None) -> HankelTruncation:
    """Hankel truncation of order N from c_0..c_{2N}."""
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidInputError("truncation order N must be a positive integer")
    ctx = as_context(ctx)
    F.check_in_unit_disk(ctx)
    c = moments(F, 2 * N + 1, ctx)
    rate, scale, bound = _tail_fit(c, N)
    return HankelTruncation(N=N, c=c, bits=ctx.mantissa_bits, tail_rate=rate, tail_scale=scale, tail_bound=bound)


@dataclass
class AakApproximant:
    """g_n = num / v on the circle, with v the singular vector polynomial.

    ``poles`` are the roots of v with |z| < 1 - 1e-8; roots within the band
    1 +- 1e-8 are listed in ``indeterminate``.  ``numerator`` holds the
    coefficients of P_+(f v) (nonnegative powers).
    """

    n: int
    N: int
    sigma: object
    sigma_next: object
    v: Poly
    numerator: Poly
    poles: list
    indeterminate: list
    gap: float
    simple: bool
    irreducible: bool
    min_cancel_distance: float
    c: np.ndarray = field(repr=False)
    bits: int = 256

    def g(self, z):
        """g_n(z), evaluated pointwise as P_+(f v)(z) / v(z)."""
        with PrecisionContext(self.bits).scope():
            z = to_mpc(z) if not isinstance(z, np.ndarray) else z
            return horner(self.numerator.coeffs, z) / horner(self.v.coeffs, z)

    @property
    def pole_count(self) -> int:
        return len(self.poles)


def _numerator(c: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Coefficient s of P_+(f v): sum_k c_k v_{k+s+1}."""
    n = len(v)
    out = czeros(max(n - 1, 0))
    for s in range(n - 1):
        m = n - s - 1
        out[s] = np.dot(c[:m], v[s + 1 : s + 1 + m])
    return out


def _trim_top(v: Poly, ctx: PrecisionContext) -> Poly:
    """Drop top coefficients below roundoff of ||v||.

    On the closed disk the dropped tail changes v by at most their sum, so
    roots in the disk move by roundoff while the spurious roots near
    infinity (carried by noise in the tail) disappear.
    """
    coeffs = v.coeffs
    floor = ctx.eps * 256 * gmpy2.sqrt(sum(gmpy2.norm(a) for a in coeffs))
    k = len(coeffs)
    while k > 1 and abs(coeffs[k - 1]) <= floor:
        k -= 1
    return Poly(coeffs[:k])


def aak_approximant(F: CauchyFunction | HankelTruncation, n: int, N: int | None = None,
                    ctx: PrecisionContext | None = None) -> AakApproximant:
    """AAK approximant of degree n from the (n+1)-st singular triple.

    ``F`` may be a prepared :class:`HankelTruncation` so sweeps over n share
    one factorization.  Emits :class:`GapWarning` if sigma_n is not simple
    to relative accuracy 1e-8.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise InvalidInputError("n must be a nonnegative integer")
    if isinstance(F, HankelTruncation):
        hank = F
        ctx = PrecisionContext(hank.bits) if ctx is None else as_context(ctx)
    else:
        ctx = as_context(ctx)
        hank = hankel_matrix(F, default_truncation(n) if N is None else N, ctx)
    if n >= hank.N:
        raise InvalidInputError("need n < N")
    dec = hank.svd()
    with ctx.scope():
        k = len(dec.s)
        if n >= k:
            # beyond the numerical rank the singular value is at roundoff level
            raise ResolutionError(
                f"sigma_{n} is zero to working precision (numerical rank {k}); "
                "the function is numerically rational of degree <= n or the precision is too low"
            )
        sigma = dec.s[n]
        sigma_next = dec.s[n + 1] if n + 1 < k else mpfr(0)
        sigma_prev = dec.s[n - 1] if n >= 1 else None
        gaps = [(sigma - sigma_next) / sigma]
        if sigma_prev is not None:
            gaps.append((sigma_prev - sigma) / sigma_prev)
        gap = float(min(gaps))
        simple = gap >= GAP_TOL
        if not simple:
            warnings.warn(f"singular value sigma_{n} is not simple (relative gap {gap:.2e})", GapWarning, stacklevel=2)
        vvec = dec.v[:, n]
        v = Poly(vvec)
        num = Poly(_numerator(hank.c, np.asarray(vvec, dtype=object)))
        trimmed = _trim_top(v, ctx)
        roots = poly_roots(trimmed, ctx) if trimmed.degree > 0 else np.empty(0, dtype=object)
        inside, band = [], []
        for r in roots:
            a = abs(r)
            if a < 1 - POLE_BAND:
                inside.append(r)
            elif a <= 1 + POLE_BAND:
                band.append(r)
        # Newton-step distance from each pole to the nearest zero of P_+(f v)
        min_cancel = math.inf
        dnum = num.deriv()
        for r in inside:
            pv = num(r)
            dv = dnum(r) if not dnum.is_zero else mpc(0)
            dist = math.inf if dv == 0 else float(abs(pv / dv))
            if pv == 0:
                dist = 0.0
            min_cancel = min(min_cancel, dist)
        irreducible = len(inside) == n and min_cancel > CANCEL_TOL
        return AakApproximant(
            n=n, N=hank.N, sigma=sigma, sigma_next=sigma_next, v=v, numerator=num, poles=inside,
            indeterminate=band, gap=gap, simple=simple, irreducible=irreducible,
            min_cancel_distance=min_cancel, c=hank.c, bits=ctx.mantissa_bits,
        )


@dataclass
class CircleError:
    """|f_N - g_n| on circle samples with summary statistics."""

    moduli: np.ndarray
    max: float
    min: float
    deviation: float  # max | |f_N - g_n| - sigma_n | / sigma_n


def aak_error_on_circle(approx: AakApproximant, samples: int | np.ndarray = 1024) -> CircleError:
    """Evaluate the truncated symbol minus g_n on the unit circle."""
    ctx = PrecisionContext(approx.bits)
    with ctx.scope():
        if isinstance(samples, (int, np.integer)):
            two_pi = 2 * gmpy2.const_pi()
            tau = np.array([mpc(gmpy2.cos(two_pi * j / samples), gmpy2.sin(two_pi * j / samples)) for j in range(samples)], dtype=object)
        else:
            tau = np.array([to_mpc(t) for t in samples], dtype=object)
        inv = 1 / tau
        # f_N(tau) = sum c_k tau**(-k-1)
        fN = horner(approx.c, inv) * inv
        err = fN - approx.g(tau)
        mods = np.array([float(abs(e)) for e in err])
        s = float(approx.sigma)
        return CircleError(mods, float(mods.max()), float(mods.min()), float(np.max(np.abs(mods - s)) / s))


def outer_factor(v: Poly, z, ctx: PrecisionContext | None = None, grid: int = 4096, method: str = "fft"):
    """Outer factor w of v on the closed disk: |w| = |v| on the circle, w(0) > 0.

    ``method="fft"`` sums the Schwarz integral of log|v| from a radix-2 FFT on
    ``grid`` circle points; ``method="roots"`` uses the exact product over the
    roots (roots inside the disk are reflected).  ``z`` may be an array.
    """
    ctx = as_context(ctx)
    if v.is_zero:
        raise InvalidInputError("zero polynomial has no outer factor")
    if method not in ("fft", "roots"):
        raise InvalidInputError("method must be 'fft' or 'roots'")
    scalar = not isinstance(z, np.ndarray)
    with ctx.scope():
        zz = np.array([to_mpc(z)], dtype=object) if scalar else np.array([to_mpc(x) for x in z.ravel()], dtype=object)
        if any(abs(x) > 1 + POLE_BAND for x in zz):
            raise DomainError("outer factor is evaluated on the closed unit disk")
        if method == "roots":
            out = _outer_from_roots(v, zz, ctx)
        else:
            if grid & (grid - 1) or grid < 16:
                raise InvalidInputError("grid must be a power of two >= 16")
            two_pi = 2 * gmpy2.const_pi()
            xi = np.array([mpc(gmpy2.cos(two_pi * j / grid), gmpy2.sin(two_pi * j / grid)) for j in range(grid)], dtype=object)
            vals = horner(v.coeffs, xi)
            mags = vabs(vals)
            top = max(mags)
            if min(mags) <= top * gmpy2.exp2(-ctx.mantissa_bits // 2):
                raise ResolutionError("polynomial vanishes on the circle at grid resolution")
            logs = np.array([mpc(gmpy2.log(m)) for m in mags], dtype=object)
            coef = fft(logs, False, ctx) / grid
            # Schwarz: a_0 + 2 sum_{k>=1} a_k z**k, Nyquist mode shared
            series = czeros(grid // 2 + 1)
            series[0] = coef[0]
            series[1 : grid // 2] = 2 * coef[1 : grid // 2]
            series[grid // 2] = coef[grid // 2]
            # a_0 is real, so w(0) = exp(a_0) > 0
            out = np.array([gmpy2.exp(horner(series, x)) for x in zz], dtype=object)
        return out[0] if scalar else out.reshape(z.shape)


def _outer_from_roots(v: Poly, z: np.ndarray, ctx: PrecisionContext) -> np.ndarray:
    roots = poly_roots(v, ctx) if v.degree > 0 else []
    const = abs(v.lead)
    factors = []
    for r in roots:
        if abs(r) < 1:
            factors.append(("in", r))
        else:
            const *= abs(r)
            factors.append(("out", r))
    out = np.full(len(z), mpc(const), dtype=object)
    for kind, r in factors:
        out = out * ((1 - r.conjugate() * z) if kind == "in" else (1 - z / r))
    return out
