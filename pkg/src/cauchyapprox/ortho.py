"""Non-Hermitian orthogonal polynomials for varying complex weights on [c, d].

A varying weight is dnu = (g / v) dmu where mu is a measure from
:mod:`cauchyapprox.model`, g an optional smooth factor and v a polynomial
with roots off [c, d].  The monic orthogonal polynomial of degree n comes
from the Hankel moment system, solved by pivoted QR at working precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpc, mpfr

from .conformal import CondenserGeometry, SzegoData, Weight, _psi, _w
from .errors import AccuracyError, DomainError, InvalidInputError
from .expression import Expression
from .kernel.linalg import nullspace_solve, solve
from .kernel.poly import Poly, horner, poly_roots
from .kernel.precision import PrecisionContext, as_context, czeros, to_mpc, vabs
from .model import MeasureSpec, adaptive_integral, graded_breaks

__all__ = ["VaryingWeight", "OrthoResult", "orthogonal_poly", "second_kind", "predict_ortho", "weight_moments", "w_value"]


@dataclass(frozen=True)
class VaryingWeight:
    """dnu = extra_smooth(t) / divisor(t) dmu_base(t).

    ``m_shift`` records the index offset of the divisor (it has degree at
    most 2(n + m_shift) when used at degree n); it does not enter the values.
    """

    base: MeasureSpec
    extra_smooth: Expression | None = None
    divisor: Poly | None = None
    m_shift: int = 0

    def __post_init__(self):
        if not isinstance(self.base, MeasureSpec):
            raise InvalidInputError("base must be a MeasureSpec")
        if isinstance(self.extra_smooth, str):
            object.__setattr__(self, "extra_smooth", Expression(self.extra_smooth))
        if self.divisor is not None and self.divisor.is_zero:
            raise InvalidInputError("divisor must be a nonzero polynomial")
        if self.m_shift < 0:
            raise InvalidInputError("m_shift must be nonnegative")

    def check(self, ctx: PrecisionContext) -> None:
        if self.divisor is None or self.divisor.degree < 1:
            return
        c, d = self.base.bounds(ctx)
        with ctx.scope():
            for r in poly_roots(self.divisor, ctx):
                if abs(r.imag) <= (d - c) * mpfr("1e-12") and c <= r.real <= d:
                    raise DomainError("divisor has a root on [c, d]")

    def factor(self, t: np.ndarray) -> np.ndarray:
        """extra_smooth / divisor at the nodes (ones if both are absent)."""
        out = np.full(len(t), mpc(1), dtype=object)
        if self.extra_smooth is not None:
            out = out * self.extra_smooth(np.array([mpc(v) for v in t], dtype=object))
        if self.divisor is not None:
            out = out / horner(self.divisor.coeffs, t)
        return out

    def szego_weight(self, ctx: PrecisionContext) -> Weight:
        """The density of nu relative to the arcsine distribution, factored."""
        w = Weight.from_measure(self.base, ctx)
        if self.extra_smooth is not None:
            w = w * Weight.from_expression(self.extra_smooth)
        if self.divisor is not None:
            w = w * Weight.from_poly(self.divisor, power=-1, ctx=ctx)
        return w


def weight_moments(nu: VaryingWeight, count: int, ctx: PrecisionContext | None = None) -> np.ndarray:
    """mu_k = int t**k dnu for k < count."""
    ctx = as_context(ctx)
    nu.check(ctx)
    meas = nu.base

    def evaluate(n):
        with ctx.scope():
            rule = meas.rule(n, ctx)
            vec = rule.w * meas.h_values(rule.t, ctx) * nu.factor(rule.t)
            avec = vabs(vec)
            at = vabs(rule.t)
            vals = czeros(count)
            scale = np.empty(count, dtype=object)
            for k in range(count):
                vals[k] = vec.sum()
                scale[k] = avec.sum()
                vec = vec * rule.t
                avec = avec * at
            return vals, scale

    return adaptive_integral(evaluate, count // 2 + 24, ctx, "varying-weight moments")[0]


@dataclass
class OrthoResult:
    """u: orthogonal polynomial (monic unless ``monic`` is False).

    ``gamma`` is int t**n u dnu, the leading Laurent coefficient of the
    function of the second kind; ``residual`` is max_j |int t**j u dnu|
    over j < n relative to max |mu_k|.
    """

    u: Poly
    gamma: object
    residual: float
    monic: bool = True
    degree_deficient: bool = False
    moments: np.ndarray = field(default=None, repr=False)


def orthogonal_poly(nu: VaryingWeight, n: int, ctx: PrecisionContext | None = None) -> OrthoResult:
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise InvalidInputError("degree must be a nonnegative integer")
    ctx = as_context(ctx)
    mu = weight_moments(nu, 2 * n + 1, ctx)
    with ctx.scope():
        if n == 0:
            return OrthoResult(Poly.one(), mu[0], 0.0, moments=mu)
        hank = np.array([[mu[i + j] for i in range(n)] for j in range(n)], dtype=object)
        rhs = np.array([-mu[n + j] for j in range(n)], dtype=object)
        monic = True
        try:
            coef = np.concatenate([solve(hank, rhs, ctx), [mpc(1)]])
        except AccuracyError:
            full = np.array([[mu[i + j] for i in range(n + 1)] for j in range(n)], dtype=object)
            coef, _ = nullspace_solve(full, ctx)
            lead = coef[-1]
            monic = False
            if abs(lead) > ctx.convergence_tol * max(vabs(coef)):
                coef = coef / lead
                monic = True
        u = Poly(coef)
        scale = max(vabs(mu))
        res = max(abs(sum(u.coeffs[i] * mu[i + j] for i in range(len(u.coeffs)))) for j in range(n)) / scale
        gamma = sum(u.coeffs[i] * mu[i + n] for i in range(len(u.coeffs)))
        return OrthoResult(
            u=u, gamma=gamma, residual=float(res), monic=monic, degree_deficient=u.degree < n, moments=mu
        )


def second_kind(nu: VaryingWeight, u: Poly, z, ctx: PrecisionContext | None = None, squared: bool = False):
    """R(z) = int u(t) dnu(t) / (z - t); ``squared`` uses (1/u(z)) int u**2 dnu / (z - t)."""
    ctx = as_context(ctx)
    nu.check(ctx)
    meas = nu.base
    with ctx.scope():
        z = to_mpc(z)
        c, d = meas.bounds(ctx)
        if z.imag == 0 and c <= z.real <= d:
            raise DomainError("function of the second kind is evaluated off [c, d]")
        extra = graded_breaks(z, c, d)

        def evaluate(n):
            rule = meas.rule(n, ctx, extra)
            ut = horner(u.coeffs, rule.t)
            num = ut * ut if squared else ut
            vec = rule.w * meas.h_values(rule.t, ctx) * nu.factor(rule.t) * num / (z - rule.t)
            return np.array([vec.sum()], dtype=object), np.array([vabs(vec).sum()], dtype=object)

        val = adaptive_integral(evaluate, 2 * (u.degree + 1) + 32, ctx, "second-kind function")[0][0]
        if squared:
            val = val / u(z)
        return val


def predict_ortho(nu: VaryingWeight, n: int, z, geom=None, ctx: PrecisionContext | None = None, szego: SzegoData | None = None):
    """Predicted (S_n(z), gamma_n): u_n ~ 1/S_n and R_n w ~ gamma_n S_n off [c, d].

    S_n = S_nu'(z) (l psi(z))**n and gamma_n = 2 l**(-2n) G_nu'.  A prepared
    :class:`SzegoData` may be passed to reuse its branch and mean.
    """
    ctx = as_context(ctx)
    if szego is None:
        interval = geom if isinstance(geom, CondenserGeometry) else nu.base
        szego = SzegoData(nu.szego_weight(ctx), interval, ctx)
    with ctx.scope():
        c, d = szego.c, szego.d
        ell = szego.ell
        zz = to_mpc(z)
        sn = szego.value(zz) * (ell * _psi(zz, c, d)) ** n
        gamma = 2 * ell ** (-2 * n) * szego.g
        return sn, gamma


def w_value(interval, z, ctx: PrecisionContext | None = None):
    """w(z) = sqrt(z - c) sqrt(z - d) off the cut (helper for comparisons)."""
    ctx = as_context(ctx)
    with ctx.scope():
        c, d = interval.bounds(ctx) if isinstance(interval, MeasureSpec) else (interval.c, interval.d)
        return _w(to_mpc(z), c, d)
