"""Closed-form asymptotic predictions and their comparison with computed approximants.

Predictions cover the critical values and error fields of AAK approximants,
the error of multipoint Padé approximants, pole rings around the poles of
the rational part, the outer factors of singular vectors and the bounds
that restrict the interior-zero exponents.  The o(1) terms are not modeled:
validators compare ratios and slopes over ranges of n.

Default tolerances used by the acceptance checks: rates 2 %, ring radii
20 %, angular gaps 15 degrees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .conformal import (
    CondenserGeometry,
    SzegoData,
    Weight,
    _stilde,
    _w,
    annulus_szego,
    blaschke_rk,
    condenser_map,
    cut_point,
    green_geometric_mean,
)
from .errors import InvalidInputError, ResolutionError
from .kernel.poly import Poly
from .kernel.precision import PrecisionContext, to_mpc
from .model import CauchyFunction
from .pade import InterpolationScheme, _is_inf

__all__ = [
    "RATE_TOL",
    "RADIUS_TOL",
    "ANGLE_TOL_DEG",
    "PoleRingPrediction",
    "MaPrediction",
    "PadePrediction",
    "OuterFactorReport",
    "ZeroBound",
    "RingMatch",
    "RateFit",
    "AsymptoticReport",
    "predict_ma",
    "predict_pade",
    "validate_outer_factor",
    "interior_zero_bounds",
    "argument_variation",
    "match_pole_rings",
    "ring_shrink",
    "fit_rate",
]

RATE_TOL = 0.02
RADIUS_TOL = 0.20
ANGLE_TOL_DEG = 15.0


@dataclass(frozen=True)
class PoleRingPrediction:
    """Predicted ring of m(eta) poles around eta at index n.

    Poles sit near eta + A_k radius exp(2 pi i k / m(eta)) with bounded A_k;
    ``shrink`` is the predicted factor by which the radius contracts per
    unit increase of n.
    """

    center: complex
    multiplicity: int
    n: int
    radius: float
    shrink: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInputError("ring radius must be positive")


@dataclass
class MaPrediction:
    sigma: object
    g_mean: object
    rings: list
    points: list = field(default_factory=list)
    field_modulus: list = field(default_factory=list)
    annulus_mean: float | None = None


@dataclass
class PadePrediction:
    g_mean: object
    points: list
    error: list
    rings: list


def _require_disk(F: CauchyFunction, geom: CondenserGeometry) -> None:
    geom.require_condenser()
    F.check_in_unit_disk(geom.ctx)


def _rational_data(F: CauchyFunction, ctx: PrecisionContext):
    """(poles with multiplicity, b(z) = q(z)/q~(z))."""
    poles = F.poles(ctx)

    def blaschke(z):
        out = mpc(1)
        for eta, k in poles:
            out *= ((z - eta) / (1 - eta.conjugate() * z)) ** k
        return out

    return poles, blaschke


def _ma_weight(F: CauchyFunction, geom: CondenserGeometry) -> Weight:
    """|b**2 w mu'| on [c, d] with w = T / S~, factored for Green means."""
    ctx = geom.ctx
    _, blaschke = _rational_data(F, ctx)
    c, d, tau = geom.c, geom.d, geom.tau

    def smooth(t):
        return np.array([blaschke(mpc(x)) ** 2 * tau / _stilde(mpc(x), c, d) for x in t], dtype=object)

    return Weight.from_measure(F.measure, ctx) * Weight(fn=smooth)


def predict_ma(F: CauchyFunction, geom: CondenserGeometry, n: int, points=(), annulus_samples: int = 1024) -> MaPrediction:
    """sigma_n ~ 2 G / T rho**(2(n - m)), pole rings and the error-field modulus.

    G is the Green geometric mean of |b**2 w mu'|.  At each of ``points``
    (off the cut and the poles, in the closed disk) the modulus of the error
    is predicted as 2 G / |w sr| (rho/|Phi|)**(2(n-m)) |S|**2 / |b|**2 with S
    the annulus Szegő function of the same data; this needs mu' free of
    zeros (no endpoint exponents or interior zeros).
    """
    if F.measure is None:
        raise InvalidInputError("a measure part is required")
    _require_disk(F, geom)
    ctx = geom.ctx
    m = F.m
    if n < m:
        raise InvalidInputError("need n >= deg q")
    weight = _ma_weight(F, geom)
    g_mean = green_geometric_mean(weight, geom)
    with ctx.scope():
        rho = geom.rho
        sigma = 2 * g_mean / geom.tau * rho ** (2 * (n - m))
        rings = []
        for eta, k in F.poles(ctx):
            ratio = float(rho / abs(condenser_map(geom, eta)))
            rings.append(PoleRingPrediction(complex(eta), k, n, ratio ** (2 * (n - m) / k), ratio ** (2 / k)))
    out = MaPrediction(sigma=sigma, g_mean=g_mean, rings=rings)
    if len(points):
        meas = F.measure
        ac, ad = meas.exponents(ctx)
        if ac != 0 or ad != 0 or meas.zeros(ctx):
            raise InvalidInputError("error-field prediction needs a density without zeros")
        data = _annulus_data(weight, geom, annulus_samples)
        _, blaschke = _rational_data(F, ctx)
        with ctx.scope():
            c, d = geom.c, geom.d
            for z in points:
                z = to_mpc(z)
                phi = condenser_map(geom, z)
                s_ann, g_y = annulus_szego(data, float(rho), complex(phi))
                mod = (
                    2 * g_mean * abs(_stilde(z, c, d)) / (geom.tau * abs(_w(z, c, d)))
                    * (rho / abs(phi)) ** (2 * (n - m))
                    * mpfr(abs(s_ann)) ** 2 / abs(blaschke(z)) ** 2
                )
                out.points.append(z)
                out.field_modulus.append(mod)
            out.annulus_mean = g_y
    return out


def _annulus_data(weight: Weight, geom: CondenserGeometry, samples: int) -> np.ndarray:
    """Y(rho exp(i theta)) = |weight|(t(|theta|)) on the inner circle of the annulus."""
    theta = 2 * np.pi * np.arange(samples) / samples
    ang = np.where(theta > np.pi, 2 * np.pi - theta, theta)
    t = cut_point(geom, ang)
    ctx = geom.ctx
    with ctx.scope():
        c, d = geom.c, geom.d
        # endpoints are reached exactly at theta = 0, pi; nudge inside for the factor evaluation
        tm = np.array([min(max(mpfr(float(x)), c), d) for x in t], dtype=object)
        vals = weight.values(tm, c, d)
    return np.array([float(abs(v)) for v in vals])


def _scheme_nodes(scheme: InterpolationScheme | None, n: int, ctx: PrecisionContext) -> list:
    if scheme is None:
        return []
    return [e for e in scheme.nodes(n, ctx) if not _is_inf(e)]


def predict_pade(F: CauchyFunction, n: int, scheme: InterpolationScheme | None, geom: CondenserGeometry,
                 points=(), szego: SzegoData | None = None) -> PadePrediction:
    """(C - Pi_n)(z) ~ 2 G_mu' S_mu'(z)**2 r_n(z) / (r(z)**2 w(z)) and pole rings.

    r_n = r_{2n}(v_n) for the finite nodes v_n of the scheme (psi**(2n) for
    the classical scheme), r = r_m(q).  Ring radius |r_n(eta)|**(1/m(eta));
    ``shrink`` is |r_{n+1}(eta) / r_n(eta)|**(1/m(eta)), i.e.
    |psi(eta)|**(2/m(eta)) for the classical scheme.
    """
    if F.measure is None:
        raise InvalidInputError("a measure part is required")
    ctx = geom.ctx
    interval = (geom.c, geom.d)
    if szego is None:
        szego = SzegoData(Weight.from_measure(F.measure, ctx), interval, ctx)
    nodes = _scheme_nodes(scheme, n, ctx)
    nodes_next = _scheme_nodes(scheme, n + 1, ctx)
    poles = F.poles(ctx)
    qroots = [eta for eta, k in poles for _ in range(k)]
    m = len(qroots)
    with ctx.scope():
        c, d = geom.c, geom.d
        g_mean = szego.g
        pts, errs = [], []
        for z in points:
            z = to_mpc(z)
            s = szego.value(z)
            rn = blaschke_rk(nodes, 2 * n, z, interval, ctx)
            r = blaschke_rk(qroots, m, z, interval, ctx) if m else mpc(1)
            pts.append(z)
            errs.append(2 * g_mean * s * s * rn / (r * r * _w(z, c, d)))
        rings = []
        for eta, k in poles:
            rn = abs(blaschke_rk(nodes, 2 * n, eta, interval, ctx))
            rn1 = abs(blaschke_rk(nodes_next, 2 * n + 2, eta, interval, ctx))
            rings.append(PoleRingPrediction(complex(eta), k, n, float(rn) ** (1 / k), float(rn1 / rn) ** (1 / k)))
        return PadePrediction(g_mean=g_mean, points=pts, error=errs, rings=rings)


@dataclass
class OuterFactorReport:
    """Fit of w_n - T/S~ by l(z)/q~(z) with deg l < m on a point grid."""

    max_deviation: float  # max |w_n - T/S~| on the grid
    residual: float  # max deviation left after removing the fitted l/q~
    coefficients: np.ndarray


def validate_outer_factor(points, values, geom: CondenserGeometry, qtilde: Poly | None = None) -> OuterFactorReport:
    """Compare outer-factor samples with T/S~ and fit the rational correction.

    ``points`` lie in the closed unit disk; ``values`` are the outer factor
    there (from :func:`cauchyapprox.aak.outer_factor`).
    """
    geom.require_condenser()
    ctx = geom.ctx
    with ctx.scope():
        zs = [to_mpc(z) for z in points]
        target = [geom.tau / _stilde(z, geom.c, geom.d) for z in zs]
        diff = np.array([complex(v - t) for v, t in zip(values, target)])
        m = 0 if qtilde is None else qtilde.degree
        if m == 0:
            coef = np.zeros(0, dtype=complex)
            resid = diff
        else:
            qt = np.array([complex(qtilde(z)) for z in zs])
            zc = np.array([complex(z) for z in zs])
            basis = np.stack([zc**j / qt for j in range(m)], axis=1)
            coef, *_ = np.linalg.lstsq(basis, diff, rcond=None)
            resid = diff - basis @ coef
    return OuterFactorReport(float(np.max(np.abs(diff))), float(np.max(np.abs(resid))), coef)


def argument_variation(fn, breaks, c, d, ctx: PrecisionContext, samples: int = 4096, max_samples: int = 1 << 17) -> float:
    """Total variation of arg fn on [c, d], jumps at ``breaks`` included.

    Sampled on Chebyshev extreme points (endpoints included) plus both sides
    of each break, doubling until consecutive arguments differ by < pi/2.
    """
    breaks = sorted(b for b in breaks if c < b < d)
    m = samples
    while True:
        with ctx.scope():
            pi = gmpy2.const_pi()
            grid = [(c + d) / 2 - (d - c) / 2 * gmpy2.cos(pi * j / (m - 1)) for j in range(m)]
            eta = (d - c) * gmpy2.exp2(-(ctx.mantissa_bits // 3))
            grid = sorted(set([g for g in grid if all(abs(g - b) > eta for b in breaks)]
                              + [b - eta for b in breaks] + [b + eta for b in breaks]))
            vals = fn(np.array(grid, dtype=object))
            if any(v == 0 for v in vals):
                raise InvalidInputError("function vanishes on [c, d]")
            args = np.array([float(gmpy2.phase(mpc(v))) for v in vals])
        delta = np.angle(np.exp(1j * np.diff(args)))
        tf = np.array([float(g) for g in grid])
        straddle = np.zeros(len(delta), dtype=bool)
        for b in breaks:
            straddle |= (tf[:-1] < float(b)) & (tf[1:] > float(b))
        if not np.any((np.abs(delta) >= np.pi / 2) & ~straddle):
            return float(np.sum(np.abs(delta)))
        m *= 2
        if m > max_samples:
            raise ResolutionError("argument varies too fast to track; refine sampling")


@dataclass
class ZeroBound:
    """Bound at an interior zero x and whether sin(alpha_x pi) stays below it."""

    x: object
    alpha: object
    bound: object
    satisfied: bool
    kind: str  # "upsilon" (Padé / orthogonality) or "psi" (L2 meromorphic)
    n_range: tuple | None = None


def interior_zero_bounds(F: CauchyFunction, geom: CondenserGeometry, scheme: InterpolationScheme | None = None,
                         n_range=None, points=None) -> list[ZeroBound]:
    """Upsilon_x (with a scheme) or Psi_x (without) at declared interior zeros.

    Upsilon_x = min over n in ``n_range`` of min_pm |(r_n scf_h)^pm(x)|, a
    finite-range proxy for the lim inf; for the classical scheme ``scheme``
    may be ``InterpolationScheme.classical()``.

    Psi_x = min_pm |scf^pm_{q^2 h}(x)| exp(-4 s1 (V_h + 2 m pi) / (1 - s0)),
    with V_h the argument variation of h (jumps included).
    """
    meas = F.measure
    if meas is None:
        raise InvalidInputError("a measure part is required")
    ctx = geom.ctx
    declared = meas.zeros(ctx)
    if points is None:
        chosen = declared
    else:
        chosen = []
        with ctx.scope():
            for p in points:
                p = to_mpc(p)
                hit = [(x, a) for x, a in declared if x == p.real and p.imag == 0]
                if not hit:
                    raise InvalidInputError(f"{complex(p)} is not a declared interior zero")
                chosen.append(hit[0])
    c, d = geom.c, geom.d
    interval = (c, d)
    h_weight = Weight(fn=lambda t: meas.h_values(t, ctx), breaks=tuple(meas.breakpoints(ctx)))
    out = []
    if scheme is not None:
        if n_range is None:
            raise InvalidInputError("an n range is needed with a scheme")
        ns = list(n_range)
        if not ns:
            raise InvalidInputError("empty n range")
        data = SzegoData(h_weight, interval, ctx)
        with ctx.scope():
            for x, a in chosen:
                ratio = data.scf(x)
                best = None
                for n in ns:
                    nodes = _scheme_nodes(scheme, n, ctx)
                    for side, sc in zip(("+", "-"), ratio):
                        val = abs(blaschke_rk(nodes, 2 * n, mpc(x), interval, ctx, side=side) * sc)
                        best = val if best is None else min(best, val)
                out.append(ZeroBound(x, a, best, bool(gmpy2.sin(a * gmpy2.const_pi()) < best), "upsilon", (ns[0], ns[-1])))
        return out
    geom.require_condenser()
    q_weight = h_weight
    if F.rational is not None:
        _, q = F.rational.polys(ctx)
        q_weight = h_weight * Weight.from_poly(q, power=2, ctx=ctx)
    data = SzegoData(q_weight, interval, ctx)
    var = argument_variation(h_weight.fn, h_weight.breaks, c, d, ctx)
    with ctx.scope():
        m = F.m
        damp = gmpy2.exp(-4 * mpfr(geom.s1) * (var + 2 * m * gmpy2.const_pi()) / (1 - mpfr(geom.s0)))
        for x, a in chosen:
            sp, sm = data.scf(x)
            bound = min(abs(sp), abs(sm)) * damp
            out.append(ZeroBound(x, a, bound, bool(gmpy2.sin(a * gmpy2.const_pi()) < bound), "psi"))
    return out


@dataclass
class RingMatch:
    """Observed ring around eta compared with a prediction at the same n."""

    n: int
    center: complex
    count: int
    expected: int
    mean_radius: float
    radius_ratio: float  # mean radius / predicted radius (|A| on average)
    max_gap_error_deg: float
    a_min: float
    a_max: float

    @property
    def count_ok(self) -> bool:
        return self.count == self.expected


def match_pole_rings(poles, prediction: PoleRingPrediction, attraction_radius: float) -> RingMatch:
    """Residuals of the poles within ``attraction_radius`` of the ring center."""
    eta = complex(prediction.center)
    near = [complex(p) - eta for p in poles if abs(complex(p) - eta) < attraction_radius]
    k = prediction.multiplicity
    if not near:
        return RingMatch(prediction.n, eta, 0, k, math.nan, math.nan, math.nan, math.nan, math.nan)
    mods = np.abs(near)
    mean_r = float(np.mean(mods))
    ang = np.sort(np.angle(near))
    if len(ang) > 1:
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        gap_err = float(np.degrees(np.max(np.abs(gaps - 2 * np.pi / len(ang)))))
    else:
        gap_err = 0.0
    scaled = mods / prediction.radius
    return RingMatch(prediction.n, eta, len(near), k, mean_r, mean_r / prediction.radius, gap_err,
                     float(scaled.min()), float(scaled.max()))


def ring_shrink(matches: list[RingMatch]) -> list[float]:
    """Observed per-step radius ratios r_{n+1}/r_n over consecutive n."""
    ms = sorted(matches, key=lambda r: r.n)
    out = []
    for a, b in zip(ms[:-1], ms[1:]):
        out.append((b.mean_radius / a.mean_radius) ** (1 / (b.n - a.n)))
    return out


@dataclass
class RateFit:
    slope: float
    intercept: float
    theoretical: float | None
    relative_deviation: float | None

    @property
    def factor(self) -> float:
        return math.exp(self.slope)


def fit_rate(ns, values, theoretical_slope: float | None = None) -> RateFit:
    """Least-squares slope of log values against n (at least five points)."""
    ns = np.asarray(list(ns), dtype=float)
    vals = list(values)
    if len(ns) != len(vals):
        raise InvalidInputError("ns and values differ in length")
    if len(vals) < 5:
        raise InvalidInputError("need at least five data points")
    if any(not (v > 0) for v in vals):
        raise InvalidInputError("values must be positive")
    # logs through mpfr keep values below the double range usable
    logs = np.array([float(gmpy2.log(v if isinstance(v, type(mpfr(1))) else mpfr(float(v)))) for v in vals])
    slope, icpt = np.polyfit(ns, logs, 1)
    dev = None
    if theoretical_slope is not None:
        dev = abs(slope - theoretical_slope) / abs(theoretical_slope)
    return RateFit(float(slope), float(icpt), theoretical_slope, dev)


@dataclass
class AsymptoticReport:
    """Predicted against observed values over a range of n."""

    ns: list
    predicted: list
    observed: list
    rate: RateFit | None = None
    rings: list = field(default_factory=list)
    shrink_observed: list = field(default_factory=list)
    shrink_predicted: float | None = None

    @property
    def ratios(self) -> list:
        return [float(o) / float(p) for o, p in zip(self.observed, self.predicted)]
