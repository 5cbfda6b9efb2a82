"""Potential theory of an interval [c, d] and of the condenser ([c, d], T).

Conventions:

* ``w(z) = sqrt(z - c) sqrt(z - d)`` (principal roots), so w(z)/z -> 1 at
  infinity and w^+ = i|w| on the upper side of the cut.
* ``psi`` maps the complement of [c, d] onto the unit disk, psi(inf) = 0,
  psi(d) = 1, psi(c) = -1, evaluated in the cancellation-free form
  (d - c) / (2z - c - d + 2w).
* ``S~(z) = sqrt(1 - cz) sqrt(1 - dz)``, holomorphic off the reflected cut
  [c, d]* = {1/x : x in [c, d]} and equal to 1 at the origin.
* ``Phi`` maps the doubly slit domain onto the annulus rho < |z| < 1/rho.

Szegő functions are handled through :class:`Weight`, a product of a smooth
numerically evaluated factor, polynomial factors (t - e)**m, and algebraic
endpoint / interior-zero factors.  Only the smooth factor needs quadrature;
the others have closed forms (S_{t-e} = 1 - psi(e) psi, G_{t-e} = -1/(l psi(e)),
S_{|t-c|} = 1 + psi, S_{|t-d|} = 1 - psi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr
from scipy.optimize import minimize_scalar

from .errors import AccuracyError, DomainError, InvalidInputError, ResolutionError
from .kernel.poly import Poly, poly_roots
from .kernel.precision import PrecisionContext, as_context, to_mpc, to_mpfr, vabs
from .kernel.quadrature import jacobi_quadrature, legendre_rule
from .model import MeasureSpec, adaptive_integral, graded_breaks, weighted_rule

__all__ = [
    "map_values",
    "CondenserGeometry",
    "build_geometry",
    "condenser_map",
    "Weight",
    "geometric_mean",
    "green_geometric_mean",
    "green_integral",
    "szego_function",
    "scf",
    "SzegoData",
    "blaschke_rk",
    "annulus_szego",
    "cut_angle",
    "cut_point",
]

PLUS, MINUS = "+", "-"


def _side(side):
    if side in (None, "off", "off-cut"):
        return None
    if side in ("+", 1, "plus", "upper"):
        return PLUS
    if side in ("-", -1, "minus", "lower"):
        return MINUS
    raise InvalidInputError(f"side must be '+', '-' or None, got {side!r}")


def _interval(interval, ctx: PrecisionContext):
    with ctx.scope():
        if isinstance(interval, CondenserGeometry):
            return interval.c, interval.d
        if isinstance(interval, MeasureSpec):
            return interval.bounds(ctx)
        c, d = (to_mpfr(interval[0]), to_mpfr(interval[1]))
        if not c < d:
            raise InvalidInputError("interval must satisfy c < d")
        return c, d


def _is_inf(z) -> bool:
    if isinstance(z, str):
        return z.strip().lower() in ("inf", "infinity")
    try:
        return math.isinf(abs(complex(z)))
    except (TypeError, ValueError):
        return False


def _on_cut(z, c, d) -> bool:
    return z.imag == 0 and c <= z.real <= d


def _on_star_cut(z, c, d) -> bool:
    if z.imag != 0 or z.real == 0:
        return False
    x = 1 / z.real
    return c <= x <= d


# ---------------------------------------------------------------- scalar maps

def _w(z, c, d, side=None):
    if z.imag == 0 and c <= z.real <= d:
        if side is None:
            raise DomainError("w is two-valued on [c, d]; give a side")
        r = gmpy2.sqrt((z.real - c) * (d - z.real))
        return mpc(0, r) if side == PLUS else mpc(0, -r)
    return gmpy2.sqrt(z - c) * gmpy2.sqrt(z - d)


def _psi(z, c, d, side=None):
    if z.imag == 0 and (z.real == c or z.real == d):
        return mpc(-1) if z.real == c else mpc(1)
    return (d - c) / (2 * z - (c + d) + 2 * _w(z, c, d, side))


def _stilde(z, c, d, side=None):
    if _on_star_cut(z, c, d):
        if side is None:
            raise DomainError("S~ is two-valued on the reflected cut; give a side")
        x = z.real
        return x * _w(mpc(1 / x), c, d, side).conjugate()
    return gmpy2.sqrt(1 - c * z) * gmpy2.sqrt(1 - d * z)


def map_values(interval, z, side=None, ctx: PrecisionContext | None = None):
    """(w(z), psi(z), S~(z)) at a point; ``side`` selects boundary values on a cut.

    ``z = inf`` returns (inf, 0, inf).  S~ is None if z lies on [c, d]* and no
    side is given (w and psi are still returned).
    """
    ctx = as_context(ctx)
    side = _side(side)
    c, d = _interval(interval, ctx)
    with ctx.scope():
        if _is_inf(z):
            inf = mpc(mpfr("inf"), 0)
            return inf, mpc(0), inf
        z = to_mpc(z)
        if _on_cut(z, c, d) and side is None and c < z.real < d:
            raise DomainError("point on (c, d): boundary values need side '+' or '-'")
        w = _w(z, c, d, side) if not (z.imag == 0 and z.real in (c, d)) else mpc(0)
        psi = _psi(z, c, d, side)
        st = None if (_on_star_cut(z, c, d) and side is None) else _stilde(z, c, d, side)
        return w, psi, st


def psi_array(z: np.ndarray, c, d, side=None) -> np.ndarray:
    return np.array([_psi(v, c, d, side) for v in z], dtype=object)


def w_array(z: np.ndarray, c, d, side=None) -> np.ndarray:
    return np.array([_w(v, c, d, side) for v in z], dtype=object)


# ---------------------------------------------------------------- condenser

@dataclass(frozen=True)
class CondenserGeometry:
    """Geometry of the interval and of the condenser with the unit circle.

    ``tau2`` is the squared normalizing constant T**2, ``rho`` the annulus
    radius (condenser capacity parameter), ``green_t``/``green_w`` a Gauss
    rule for the Green equilibrium distribution, ``s0``/``s1`` the maxima of
    |psi| and |psi'| on the unit circle (None if [c, d] leaves the disk).
    """

    c: object
    d: object
    ell: object
    tau2: object
    rho: object
    green_t: np.ndarray = field(repr=False)
    green_w: np.ndarray = field(repr=False)
    s0: float | None
    s1: float | None
    bits: int
    rho_check: float

    @property
    def tau(self):
        return None if self.tau2 is None else gmpy2.sqrt(self.tau2)

    @property
    def green_quad(self) -> tuple[np.ndarray, np.ndarray]:
        return self.green_t, self.green_w

    def require_condenser(self) -> None:
        if self.rho is None:
            raise DomainError("[c, d] is not inside the unit disk: condenser quantities are unavailable")

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.bits)

    @property
    def in_unit_disk(self) -> bool:
        return -1 < self.c and self.d < 1

    def psi(self, z, side=None):
        with self.ctx.scope():
            return _psi(to_mpc(z), self.c, self.d, _side(side))

    def w(self, z, side=None):
        with self.ctx.scope():
            return _w(to_mpc(z), self.c, self.d, _side(side))

    def stilde(self, z, side=None):
        with self.ctx.scope():
            return _stilde(to_mpc(z), self.c, self.d, _side(side))

    def phi(self, z, side=None):
        return condenser_map(self, z, side)


def _tau_inv2(c, d, ctx: PrecisionContext):
    """T**-2 = (2/pi) int_0^1 dx / sqrt((1-x^2)((1-cd)^2 - (d-c)^2 x^2))."""
    with ctx.scope():
        a = 1 - c * d
        b = d - c
        pi = gmpy2.const_pi()

        def evaluate(n):
            x, wts = jacobi_quadrature((0, 1), 0, mpfr(-1) / 2, n, ctx)
            g = np.array([1 / gmpy2.sqrt((1 + t) * (a * a - b * b * t * t)) for t in x], dtype=object)
            val = np.dot(wts, g) * 2 / pi
            return np.array([val], dtype=object), np.array([val], dtype=object)

        val, _ = adaptive_integral(evaluate, 48, ctx, "normalizing constant")
        return val[0]


def _log_rho(c, d, tau2, ctx: PrecisionContext):
    """log rho = -T**2 int_d^1 dt / (w(t) S~(t))."""
    with ctx.scope():

        def evaluate(n):
            t, wts = jacobi_quadrature((d, 1), mpfr(-1) / 2, 0, n, ctx)
            g = np.array([1 / gmpy2.sqrt((s - c) * (1 - c * s) * (1 - d * s)) for s in t], dtype=object)
            val = np.dot(wts, g)
            return np.array([val], dtype=object), np.array([val], dtype=object)

        val, _ = adaptive_integral(evaluate, 48, ctx, "condenser capacity")
        return -tau2 * val[0]


def _max_on_circle(f: Callable[[np.ndarray], np.ndarray], samples: int = 8192) -> float:
    theta = 2 * np.pi * np.arange(samples) / samples
    vals = f(theta)
    k = int(np.argmax(vals))
    h = 2 * np.pi / samples
    res = minimize_scalar(
        lambda th: -float(f(np.array([th]))[0]),
        bounds=(theta[k] - h, theta[k] + h),
        method="bounded",
        options={"xatol": 1e-14},
    )
    return max(float(vals[k]), -float(res.fun))


def _psi_circle(c: float, d: float):
    def psi(theta):
        z = np.exp(1j * theta)
        w = np.sqrt(z - c) * np.sqrt(z - d)
        return (d - c) / (2 * z - (c + d) + 2 * w), w

    return psi


def build_geometry(interval, grid_n: int = 128, ctx: PrecisionContext | None = None) -> CondenserGeometry:
    """Compute T, rho, the Green equilibrium rule and the circle maxima.

    rho is obtained from the real-axis integral from d to 1 and then checked
    against |Phi^+(t)| at interior points of the cut computed along
    complex paths; a relative mismatch above 1e-8 raises AccuracyError.
    """
    ctx = as_context(ctx)
    if grid_n < 16:
        raise InvalidInputError("grid_n must be at least 16")
    c, d = _interval(interval, ctx)
    with ctx.scope():
        if not (-1 < c and d < 1):
            # no condenser with the unit circle: only the interval data is meaningful
            empty = np.empty(0, dtype=object)
            return CondenserGeometry(
                c=c, d=d, ell=4 / (d - c), tau2=None, rho=None, green_t=empty, green_w=empty,
                s0=None, s1=None, bits=ctx.mantissa_bits, rho_check=float("nan"),
            )
        tau2 = 1 / _tau_inv2(c, d, ctx)
        rho = gmpy2.exp(_log_rho(c, d, tau2, ctx))
        t, wt = jacobi_quadrature((c, d), mpfr(-1) / 2, mpfr(-1) / 2, grid_n, ctx)
        pi = gmpy2.const_pi()
        gw = np.array([wi * tau2 / (pi * abs(_stilde(mpc(ti), c, d))) for ti, wi in zip(t, wt)], dtype=object)
        geom = CondenserGeometry(
            c=c, d=d, ell=4 / (d - c), tau2=tau2, rho=rho, green_t=t, green_w=gw,
            s0=None, s1=None, bits=ctx.mantissa_bits, rho_check=0.0,
        )
        worst = mpfr(0)
        for frac in ("0.17", "0.5", "0.83"):
            x = c + (d - c) * mpfr(frac)
            val = abs(condenser_map(geom, mpc(x), PLUS))
            worst = max(worst, abs(val - rho) / rho)
        if worst > mpfr("1e-8"):
            raise AccuracyError(f"condenser radius check failed (relative mismatch {float(worst):.3e})", worst)
        psi = _psi_circle(float(c), float(d))
        s0 = _max_on_circle(lambda th: np.abs(psi(th)[0]))
        s1 = _max_on_circle(lambda th: np.abs(psi(th)[0] / psi(th)[1]))
        return replace(geom, s0=s0, s1=s1, rho_check=float(worst))


# ---------------------------------------------------------------- Phi

def _phi_integrand(z: np.ndarray, c, d) -> np.ndarray:
    out = np.empty(len(z), dtype=object)
    for k, v in enumerate(z):
        out[k] = 1 / (gmpy2.sqrt(v - c) * gmpy2.sqrt(v - d) * gmpy2.sqrt(1 - c * v) * gmpy2.sqrt(1 - d * v))
    return out


def _line_integral(f, a, b, ctx: PrecisionContext, n: int = 24, max_depth: int = 60):
    """Adaptive Gauss-Legendre integral of f along the segment [a, b]."""
    x, wts = legendre_rule(n, ctx)
    tol = ctx.eps * gmpy2.exp2(ctx.mantissa_bits // 8)

    def panel(lo, hi):
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        return np.dot(wts, f(mid + half * x)) * half

    total = mpc(0)
    stack = [(a, b, panel(a, b), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = (lo + hi) / 2
        left, right = panel(lo, mid), panel(mid, hi)
        if abs(left + right - whole) <= tol * max(abs(whole), mpfr(1)) or depth >= max_depth:
            if depth >= max_depth:
                raise AccuracyError("path integral failed to converge near a singularity")
            total += left + right
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total


def _segment_hits_cuts(z, c, d) -> bool:
    """Does the real segment [1, z] meet [c, d] or [c, d]*?"""
    lo, hi = sorted((mpfr(1), z.real))
    if hi >= c and lo <= d:
        return True
    # [c, d]* consists of the reciprocals; test reciprocal images of the endpoints
    star = []
    for e in (c, d):
        if e != 0:
            star.append(1 / e)
    if c < 0 < d:
        return z.real <= 1 / c or z.real >= 1 / d
    if star:
        s_lo, s_hi = min(star), max(star)
        return hi >= s_lo and lo <= s_hi
    return False


def condenser_map(geom: CondenserGeometry, z, side=None):
    """Phi(z) = exp(T**2 int_1^z dt / (w S~)), Phi(1) = 1.

    On (c, d) or on the reflected cut a side must be given; boundary values
    on [c, d]* come from the symmetry Phi(1/conj z) = 1/conj(Phi(z)).
    """
    geom.require_condenser()
    ctx = geom.ctx
    side = _side(side)
    c, d = geom.c, geom.d
    with ctx.scope():
        z = to_mpc(z)
        if z == 1:
            return mpc(1)
        if z.imag == 0 and z.real == d:
            return mpc(geom.rho)
        if z.imag == 0 and z.real == c:
            return mpc(-geom.rho)
        if _on_star_cut(z, c, d):
            if side is None:
                raise DomainError("point on the reflected cut: give a side")
            inner = condenser_map(geom, mpc(1 / z.real), side)
            return 1 / inner.conjugate()
        f = lambda v: _phi_integrand(v, c, d)
        on_cut = _on_cut(z, c, d)
        if on_cut and side is None:
            raise DomainError("point on (c, d): boundary values need side '+' or '-'")
        if on_cut or (z.imag == 0 and _segment_hits_cuts(z, c, d)):
            sgn = -1 if side == MINUS else 1
            way = mpc(0, sgn * (1 + abs(z)))
            integral = _line_integral(f, mpc(1), way, ctx) + _line_integral(f, way, z, ctx)
        else:
            integral = _line_integral(f, mpc(1), z, ctx)
        return gmpy2.exp(geom.tau2 * integral)


# ---------------------------------------------------------------- the cut <-> T_rho

def _cosine_coeffs(geom: CondenserGeometry, m: int = 1024) -> np.ndarray:
    """Cosine coefficients of 1/S~(s(phi)), s(phi) = (c+d)/2 + (d-c)/2 cos(phi)."""
    c, d = float(geom.c), float(geom.d)
    phi = np.pi * np.arange(2 * m) / m
    s = (c + d) / 2 + (d - c) / 2 * np.cos(phi)
    vals = 1 / np.sqrt((1 - c * s) * (1 - d * s))
    coef = np.fft.rfft(vals).real / (2 * m)
    coef[1:] *= 2
    return coef


def cut_angle(geom: CondenserGeometry, t) -> np.ndarray:
    """theta(t) with Phi^+(t) = rho exp(i theta(t)); theta(d) = 0, theta(c) = pi.

    theta(t)/pi is the Green equilibrium mass of [t, d].  Double precision.
    """
    geom.require_condenser()
    coef = _cosine_coeffs(geom)
    c, d = float(geom.c), float(geom.d)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phi = np.arccos(np.clip((2 * t - (c + d)) / (d - c), -1, 1))
    k = np.arange(1, len(coef))
    return float(geom.tau2) * (coef[0] * phi + np.sin(np.outer(phi, k)) @ (coef[1:] / k))


def cut_point(geom: CondenserGeometry, theta) -> np.ndarray:
    """Inverse of :func:`cut_angle` for theta in [0, pi] (Newton, double precision)."""
    geom.require_condenser()
    coef = _cosine_coeffs(geom)
    c, d = float(geom.c), float(geom.d)
    tau2 = float(geom.tau2)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = theta.copy()
    k = np.arange(1, len(coef))
    for _ in range(50):
        val = tau2 * (coef[0] * phi + np.sin(np.outer(phi, k)) @ (coef[1:] / k)) - theta
        der = tau2 * (coef[0] + np.cos(np.outer(phi, k)) @ coef[1:])
        step = val / der
        phi = np.clip(phi - step, 0, np.pi)
        if np.max(np.abs(step)) < 1e-15:
            break
    return (c + d) / 2 + (d - c) / 2 * np.cos(phi)


# ---------------------------------------------------------------- weights

@dataclass(frozen=True)
class Weight:
    """A function on [c, d] factored for Szegő-type computations.

    value(t) = const * fn(t) * prod (t - e)**m_e * |t - c|**a_c |t - d|**a_d
               * prod |t - x|**(2 a_x)

    ``fn`` is evaluated numerically (may jump at ``breaks``); the remaining
    factors are treated in closed form.  Polynomial roots ``e`` must lie
    off [c, d]; multiplicities may be negative (divisors).
    """

    fn: Callable | None = None
    breaks: tuple = ()
    const: object = 1
    roots: tuple = ()
    endpoint_exponents: tuple = (0, 0)
    interior_zeros: tuple = ()

    @classmethod
    def from_measure(cls, measure: MeasureSpec, ctx: PrecisionContext | None = None) -> "Weight":
        """The density h * hbar * hbar_x of a measure relative to omega."""
        ctx = as_context(ctx)
        return cls(
            fn=lambda t: measure.h_values(t, ctx),
            breaks=tuple(measure.breakpoints(ctx)),
            endpoint_exponents=measure.exponents(ctx),
            interior_zeros=tuple(measure.zeros(ctx)),
        )

    @classmethod
    def from_expression(cls, expr, breaks=()) -> "Weight":
        return cls(fn=lambda t: expr(np.array([mpc(v) for v in t], dtype=object)), breaks=tuple(breaks))

    @classmethod
    def from_poly(cls, v: Poly, power: int = 1, ctx: PrecisionContext | None = None) -> "Weight":
        ctx = as_context(ctx)
        if v.is_zero:
            raise InvalidInputError("zero polynomial")
        with ctx.scope():
            roots = poly_roots(v, ctx) if v.degree > 0 else []
            return cls(const=v.lead ** power, roots=tuple((r, power) for r in roots))

    @classmethod
    def from_roots(cls, roots: Sequence, const=1) -> "Weight":
        return cls(const=const, roots=tuple((r, 1) for r in roots))

    def __mul__(self, other: "Weight") -> "Weight":
        if self.fn is None:
            fn = other.fn
        elif other.fn is None:
            fn = self.fn
        else:
            f1, f2 = self.fn, other.fn
            fn = lambda t: f1(t) * f2(t)
        zeros = dict()
        for x, a in list(self.interior_zeros) + list(other.interior_zeros):
            zeros[x] = zeros.get(x, 0) + a
        return Weight(
            fn=fn,
            breaks=tuple(sorted(set(self.breaks) | set(other.breaks))),
            const=self.const * other.const,
            roots=self.roots + other.roots,
            endpoint_exponents=(
                self.endpoint_exponents[0] + other.endpoint_exponents[0],
                self.endpoint_exponents[1] + other.endpoint_exponents[1],
            ),
            interior_zeros=tuple(zeros.items()),
        )

    def inverse(self) -> "Weight":
        if any(e != 0 for e in self.endpoint_exponents) or self.interior_zeros:
            raise InvalidInputError("cannot invert a weight with vanishing factors")
        f = self.fn
        return Weight(
            fn=None if f is None else (lambda t: 1 / f(t)),
            breaks=self.breaks,
            const=1 / self.const,
            roots=tuple((e, -m) for e, m in self.roots),
        )

    def values(self, t: np.ndarray, c, d) -> np.ndarray:
        """Full value at real nodes strictly inside (c, d)."""
        out = np.full(len(t), mpc(self.const), dtype=object)
        if self.fn is not None:
            out = out * self.fn(t)
        for e, m in self.roots:
            out = out * (t - e) ** m
        ac, ad = self.endpoint_exponents
        if ac:
            out = out * vabs(t - c) ** ac
        if ad:
            out = out * vabs(t - d) ** ad
        for x, a in self.interior_zeros:
            out = out * vabs(t - x) ** (2 * a)
        return out

    def check_roots(self, c, d) -> None:
        for e, _ in self.roots:
            if e.imag == 0 and c <= e.real <= d:
                raise DomainError("polynomial factor has a root on [c, d]")


class _LogBranch:
    """Continuous branch of log fn along [c, d], fixed on a sample grid."""

    def __init__(self, fn, breaks, c, d, ctx: PrecisionContext, samples: int = 4096, max_samples: int = 1 << 17):
        self.c, self.d, self.fn, self.ctx = c, d, fn, ctx
        breaks = sorted(b for b in breaks if c < b < d)
        self.breaks = breaks
        m = samples
        while True:
            with ctx.scope():
                k = np.arange(m)
                # first-kind Chebyshev points avoid the endpoints
                grid = [(c + d) / 2 - (d - c) / 2 * gmpy2.cos(gmpy2.const_pi() * (2 * int(j) + 1) / (2 * m)) for j in k]
                eta = (d - c) * gmpy2.exp2(-(ctx.mantissa_bits // 3))
                grid = sorted(set([g for g in grid if all(abs(g - b) > eta for b in breaks)] + [b - eta for b in breaks] + [b + eta for b in breaks]))
                grid = np.array(grid, dtype=object)
                vals = np.array([mpc(v) for v in fn(grid)], dtype=object)
                if any(v == 0 for v in vals):
                    raise InvalidInputError("weight vanishes on [c, d]")
                args = np.array([float(gmpy2.phase(v)) for v in vals])
            tf = np.array([float(g) for g in grid])
            delta = np.angle(np.exp(1j * np.diff(args)))
            straddle = np.zeros(len(delta), dtype=bool)
            bf = [float(b) for b in breaks]
            for b in bf:
                straddle |= (tf[:-1] < b) & (tf[1:] > b)
            bad = (np.abs(delta) >= np.pi / 2) & ~straddle
            if not bad.any():
                break
            m *= 2
            if m > max_samples:
                raise ResolutionError("argument of the weight varies too fast to track; refine sampling")
        self.grid = tf
        self.unwrapped = args[0] + np.concatenate([[0.0], np.cumsum(delta)])
        self.variation = float(np.sum(np.abs(delta[~straddle])))
        self.jump_variation = float(np.sum(np.abs(delta[straddle])))

    def log(self, t: np.ndarray, vals: np.ndarray | None = None) -> np.ndarray:
        """Branch of log fn at nodes strictly inside (c, d), away from breaks."""
        if vals is None:
            vals = self.fn(t)
        tf = np.array([float(v) for v in t])
        idx = np.clip(np.searchsorted(self.grid, tf), 1, len(self.grid) - 1)
        left_closer = np.abs(tf - self.grid[idx - 1]) <= np.abs(self.grid[idx] - tf)
        # never borrow the reference across a break
        for b in self.breaks:
            bf = float(b)
            cross_left = (self.grid[idx - 1] < bf) & (tf > bf)
            cross_right = (self.grid[idx] > bf) & (tf < bf)
            left_closer = np.where(cross_left, False, np.where(cross_right, True, left_closer))
        ref = np.where(left_closer, self.unwrapped[idx - 1], self.unwrapped[idx])
        out = np.empty(len(t), dtype=object)
        two_pi = 2 * gmpy2.const_pi()
        for j, v in enumerate(vals):
            lg = gmpy2.log(mpc(v))
            k = round((ref[j] - float(lg.imag)) / (2 * math.pi))
            out[j] = lg + mpc(0, two_pi * k) if k else lg
        return out


def _arcsine_rule(c, d, breaks, n, ctx):
    half = mpfr(-1) / 2
    return weighted_rule(c, d, {c: half, d: half}, list(breaks), n, ctx)


class SzegoData:
    """Precomputed branch and geometric mean of a :class:`Weight` on [c, d]."""

    def __init__(self, weight: Weight, interval, ctx: PrecisionContext | None = None, samples: int = 4096):
        ctx = as_context(ctx)
        self.ctx = ctx
        c, d = _interval(interval, ctx)
        self.c, self.d = c, d
        self.weight = weight
        with ctx.scope():
            weight.check_roots(c, d)
            self.ell = 4 / (d - c)
            self.branch = None
            log_g = mpc(0)
            if weight.fn is not None:
                self.branch = _LogBranch(weight.fn, weight.breaks, c, d, ctx, samples)

                def evaluate(n):
                    rule = _arcsine_rule(c, d, weight.breaks, n, ctx)
                    lg = self.branch.log(rule.t)
                    return np.array([np.dot(rule.w, lg)], dtype=object), np.array([np.dot(rule.w, vabs(lg)) + 1], dtype=object)

                log_g = adaptive_integral(evaluate, 32, ctx, "geometric mean")[0][0]
            self.log_g_fn = log_g
            g = gmpy2.exp(log_g) * mpc(weight.const)
            for e, m in weight.roots:
                g *= (-1 / (self.ell * _psi(mpc(e), c, d))) ** m
            ac, ad = weight.endpoint_exponents
            total = ac + ad + 2 * sum(a for _, a in weight.interior_zeros)
            if total:
                g *= self.ell ** (-total)
            self.g = g

    @property
    def variation(self) -> float:
        """Total variation of the argument of the numerical factor (jumps excluded)."""
        return 0.0 if self.branch is None else self.branch.variation

    def _closed_part(self, psi):
        c, d = self.c, self.d
        out = mpc(1)
        for e, m in self.weight.roots:
            out *= (1 - _psi(mpc(e), c, d) * psi) ** m
        ac, ad = self.weight.endpoint_exponents
        if ac:
            out *= (1 + psi) ** ac
        if ad:
            out *= (1 - psi) ** ad
        for x, a in self.weight.interior_zeros:
            px = _psi(mpc(x), c, d, PLUS)
            out *= (1 - px * psi) ** a * (1 - px.conjugate() * psi) ** a
        return out

    def value(self, z):
        """S(z) for z off [c, d]."""
        ctx = self.ctx
        c, d = self.c, self.d
        with ctx.scope():
            if _is_inf(z):
                return mpc(1)
            z = to_mpc(z)
            if _on_cut(z, c, d):
                raise DomainError("Szegő function is two-valued on [c, d]; use boundary()")
            psi = _psi(z, c, d)
            out = self._closed_part(psi)
            if self.branch is None:
                return out
            w = _w(z, c, d)
            extra = graded_breaks(z, c, d)
            brk = list(self.weight.breaks) + extra

            def evaluate(n):
                rule = _arcsine_rule(c, d, brk, n, ctx)
                lg = self.branch.log(rule.t)
                f = lg / (z - rule.t)
                return np.array([np.dot(rule.w, f)], dtype=object), np.array([np.dot(rule.w, vabs(f)) + 1], dtype=object)

            integral = adaptive_integral(evaluate, 40, ctx, "Szegő integral")[0][0]
            return out * gmpy2.exp(w * integral / 2 - self.log_g_fn / 2)

    def boundary(self, t, side):
        """S^+(t) or S^-(t) for t in (c, d)."""
        ctx = self.ctx
        side = _side(side)
        if side is None:
            raise InvalidInputError("boundary values need side '+' or '-'")
        c, d = self.c, self.d
        with ctx.scope():
            t = to_mpfr(t)
            if not c < t < d:
                raise DomainError("boundary point must lie in (c, d)")
            if any(t == b for b in self.weight.breaks):
                raise DomainError("boundary value at a jump of the weight is undefined")
            psi = _psi(mpc(t), c, d, side)
            out = self._closed_part(psi)
            if self.branch is None:
                return out
            lt = self.branch.log(np.array([t], dtype=object))[0]
            pv = self._principal_value(t, lt)
            absw = gmpy2.sqrt((t - c) * (d - t))
            sgn = 1 if side == PLUS else -1
            return out * gmpy2.exp(mpc(0, sgn) * absw * pv / 2 + lt / 2 - self.log_g_fn / 2)

    def _principal_value(self, t, lt):
        """p.v. int log fn(s) domega(s) / (t - s), using p.v. int domega/(t - s) = 0."""
        ctx, c, d = self.ctx, self.c, self.d
        # near an endpoint the other segment sees that endpoint's singular factor: grade toward t
        gap = min(t - c, d - t)
        brk = list(self.weight.breaks) + [t] + graded_breaks(mpc(t, gap), c, d)

        def evaluate(n):
            rule = _arcsine_rule(c, d, brk, n, ctx)
            ls = self.branch.log(rule.t)
            f = (ls - lt) / (t - rule.t)
            return np.array([np.dot(rule.w, f)], dtype=object), np.array([np.dot(rule.w, vabs(f)) + 1], dtype=object)

        return adaptive_integral(evaluate, 40, ctx, "principal value")[0][0]

    def scf(self, t):
        """(S^+/S^-, S^-/S^+) at t in (c, d)."""
        with self.ctx.scope():
            sp, sm = self.boundary(t, PLUS), self.boundary(t, MINUS)
            return sp / sm, sm / sp


def _as_weight(weight, ctx) -> Weight:
    if isinstance(weight, Weight):
        return weight
    if isinstance(weight, MeasureSpec):
        return Weight.from_measure(weight, ctx)
    if isinstance(weight, Poly):
        return Weight.from_poly(weight, ctx=ctx)
    if callable(weight):
        return Weight(fn=weight)
    with ctx.scope():
        return Weight(const=to_mpc(weight))


def geometric_mean(weight, interval, ctx: PrecisionContext | None = None, samples: int = 4096):
    """exp(int log h domega) with the argument of h continued along [c, d]."""
    ctx = as_context(ctx)
    return SzegoData(_as_weight(weight, ctx), interval, ctx, samples).g


def szego_function(weight, z, interval, ctx: PrecisionContext | None = None, side=None):
    """S_h(z); on (c, d) pass ``side`` for the boundary value S_h^{side}."""
    ctx = as_context(ctx)
    data = SzegoData(_as_weight(weight, ctx), interval, ctx)
    if _side(side) is not None:
        return data.boundary(z, side)
    return data.value(z)


def scf(weight, t, interval, ctx: PrecisionContext | None = None):
    """Boundary ratios (S^+/S^-, S^-/S^+) at t in (c, d)."""
    ctx = as_context(ctx)
    return SzegoData(_as_weight(weight, ctx), interval, ctx).scf(t)


# ---------------------------------------------------------------- Green measure

def green_integral(geom: CondenserGeometry, fn: Callable, breaks=(), what: str = "Green integral"):
    """int fn d omega_G with Jacobi rules split at ``breaks`` (adaptive)."""
    geom.require_condenser()
    ctx = geom.ctx
    c, d = geom.c, geom.d
    with ctx.scope():

        def evaluate(n):
            rule = _arcsine_rule(c, d, breaks, n, ctx)
            g = np.array([geom.tau2 / abs(_stilde(mpc(t), c, d)) for t in rule.t], dtype=object)
            vals = fn(rule.t)
            wv = rule.w * g
            return np.array([np.dot(wv, vals)], dtype=object), np.array([np.dot(wv, vabs(vals)) + 1], dtype=object)

        return adaptive_integral(evaluate, 40, ctx, what)[0][0]


def _graded_log_integral(geom: CondenserGeometry, point) -> object:
    """int log|t - p| d omega_G for p in [c, d], by graded composite Legendre in angle."""
    ctx = geom.ctx
    c, d = geom.c, geom.d
    with ctx.scope():
        pi = gmpy2.const_pi()
        # halving panels keep the log singularity 3 half-widths away: Bernstein radius 3 + sqrt(8)
        x, wl = legendre_rule(int(math.ceil(ctx.mantissa_bits * math.log(2) / (2 * math.log(3 + math.sqrt(8))))) + 4, ctx)
        # t = (c+d)/2 - (d-c)/2 cos(theta), d omega = dtheta / pi; work in offsets u = theta - theta0
        cos0 = -(2 * point - (c + d)) / (d - c)
        cos0 = max(min(cos0, mpfr(1)), mpfr(-1))
        sin0 = gmpy2.sqrt(1 - cos0 * cos0)
        th0 = gmpy2.acos(cos0)
        floor = gmpy2.exp2(-ctx.mantissa_bits)
        total = mpfr(0)
        for span, sgn in ((pi - th0, 1), (th0, -1)):
            if span == 0:
                continue
            edges = [span]
            while edges[-1] > floor:
                edges.append(edges[-1] / 2)
            edges.append(mpfr(0))
            for hi, lo in zip(edges[:-1], edges[1:]):
                mid, half = (lo + hi) / 2, (hi - lo) / 2
                for u, wk in zip(mid + half * x, wl):
                    h = sgn * u / 2
                    sh = gmpy2.sin(h)
                    # |t - p| = (d-c) |sin(theta0 + u/2) sin(u/2)|, expanded to avoid cancellation
                    dist = (d - c) * abs((sin0 * gmpy2.cos(h) + cos0 * sh) * sh)
                    tt = (c + d) / 2 - (d - c) / 2 * (cos0 * gmpy2.cos(2 * h) - sin0 * gmpy2.sin(2 * h))
                    total += wk * half * gmpy2.log(dist) * geom.tau2 / abs(_stilde(mpc(tt), c, d))
        total /= pi
        return total


def green_geometric_mean(weight, geom: CondenserGeometry, ctx: PrecisionContext | None = None):
    """exp(int log|h| d omega_G): the geometric mean relative to the condenser."""
    ctx = geom.ctx
    w = _as_weight(weight, ctx)
    c, d = geom.c, geom.d
    with ctx.scope():
        w.check_roots(c, d)
        total = gmpy2.log(abs(mpc(w.const)))
        if w.fn is not None:
            f = w.fn
            total += green_integral(geom, lambda t: np.array([gmpy2.log(abs(v)) for v in f(t)], dtype=object), w.breaks)
        if w.roots:
            roots = w.roots
            total += green_integral(
                geom, lambda t: np.array([sum(m * gmpy2.log(abs(tt - e)) for e, m in roots) for tt in t], dtype=object)
            )
        ac, ad = w.endpoint_exponents
        if ac:
            total += ac * _graded_log_integral(geom, c)
        if ad:
            total += ad * _graded_log_integral(geom, d)
        for x, a in w.interior_zeros:
            total += 2 * a * _graded_log_integral(geom, x)
        return gmpy2.exp(total)


# ---------------------------------------------------------------- r_k products

def blaschke_rk(v, k: int, z, interval, ctx: PrecisionContext | None = None, side=None):
    """r_k(v; z) = psi**(k - deg v) prod_e ((psi - psi(e)) / (1 - psi psi(e))).

    ``v`` is a Poly or a sequence of its roots (with repetition).
    """
    ctx = as_context(ctx)
    side = _side(side)
    c, d = _interval(interval, ctx)
    with ctx.scope():
        if isinstance(v, Poly):
            if v.is_zero:
                raise InvalidInputError("zero polynomial")
            roots = list(poly_roots(v, ctx)) if v.degree > 0 else []
        else:
            roots = [to_mpc(r) for r in v]
        if k < len(roots):
            raise InvalidInputError("k must be at least deg v")
        for e in roots:
            if _on_cut(e, c, d):
                raise DomainError("a root of v lies on [c, d]")
        z = to_mpc(z)
        if _on_cut(z, c, d) and side is None and c < z.real < d:
            raise DomainError("point on (c, d): give a side")
        psi = _psi(z, c, d, side)
        out = psi ** (k - len(roots))
        for e in roots:
            pe = _psi(e, c, d)
            out *= (psi - pe) / (1 - psi * pe)
        return out


# ---------------------------------------------------------------- annulus

def annulus_szego(samples, rho: float, z):
    """Szegő function of the annulus rho < |z| < 1/rho for data on |z| = rho.

    ``samples`` are positive values Y(rho exp(2 pi i j/M)), j = 0..M-1.  The
    result S satisfies G_Y |S|^2 = Y on |z| = rho, |S| = 1 on the unit circle,
    S(z) conj(S(1/conj z)) = 1 and S(1) > 0.  Returns (S(z), G_Y); double
    precision, z may be an array.
    """
    y = np.asarray(samples, dtype=float)
    if y.ndim != 1 or len(y) < 4:
        raise InvalidInputError("need at least four samples")
    if not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise InvalidInputError("annulus data must be positive")
    rho = float(rho)
    if not 0 < rho < 1:
        raise InvalidInputError("rho must lie in (0, 1)")
    m = len(y)
    logy = np.log(y)
    a0 = logy.mean()
    f = np.fft.fft(0.5 * (logy - a0)) / m
    kmax = m // 2
    k = np.arange(1, kmax + 1)
    fk = f[1 : kmax + 1].copy()
    fmk = np.conj(fk)
    if m % 2 == 0:
        # the Nyquist mode is shared between +m/2 and -m/2
        fk[-1] *= 0.5
        fmk[-1] *= 0.5
    denom = 1 - rho ** (2 * k)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(zz) <= rho * (1 - 1e-12)) or np.any(np.abs(zz) >= (1 + 1e-12) / rho):
        raise DomainError("evaluation point outside the closed annulus")

    def big_f(x):
        zr = np.power.outer(x * rho, k)
        rz = np.power.outer(rho / x, k)
        return (-2 * zr) @ (fk / denom) + (2 * rz) @ (fmk / denom)

    f1 = big_f(np.array([1.0 + 0j]))[0]
    vals = np.exp(big_f(zz) - 1j * f1.imag)
    out = vals if np.ndim(z) else vals[0]
    return out, float(np.exp(a0))
