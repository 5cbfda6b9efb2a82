"""Diagonal Padé approximants, classical and multipoint, to Cauchy-type functions.

Both constructions are linearized: q C - p must vanish to the prescribed
orders at the finite nodes and decay like z**(f - n - 1) at infinity, f being
the number of finite nodes.  The homogeneous system is solved for (q, p);
degenerate solutions are returned with flags rather than repaired.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr
from scipy.optimize import linear_sum_assignment

from .conformal import _psi
from .errors import AccuracyError, DomainError, InvalidInputError
from .kernel.linalg import nullspace_solve, solve
from .kernel.poly import Poly, horner, poly_roots
from .kernel.precision import PrecisionContext, as_context, czeros, to_mpc, vabs
from .model import (
    CauchyFunction,
    _dist_to_interval,
    eval_cauchy,
    exclusion_radius,
    graded_breaks,
    measure_integral,
    moments,
)

__all__ = [
    "InterpolationScheme",
    "PadeApproximant",
    "classical_pade",
    "multipoint_pade",
    "admissibility_report",
    "AdmissibilityReport",
    "pade_error",
]

INF = "inf"
MONIC_TOL = mpfr("1e-8")


def _is_inf(e) -> bool:
    if isinstance(e, str):
        return e.strip().lower() in ("inf", "infinity")
    if isinstance(e, (float, complex)):
        return math.isinf(abs(e))
    return False


# ---------------------------------------------------------------- schemes

@dataclass(frozen=True)
class InterpolationScheme:
    """A rule producing the 2n interpolation nodes E_n (``"inf"`` marks infinity).

    kinds:
      * ``classical``: all nodes at infinity;
      * ``circle``: ``count`` conjugate-symmetric finite nodes on |z| = radius
        at angles (2j+1) pi / count (count defaults to 2n), the rest at infinity;
      * ``explicit``: a mapping n -> list of nodes.
    """

    kind: str = "classical"
    radius: object = None
    count: int | None = None
    points: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("classical", "circle", "explicit"):
            raise InvalidInputError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "circle" and self.radius is None:
            raise InvalidInputError("circle scheme needs a radius")
        if self.count is not None and self.count < 0:
            raise InvalidInputError("count must be nonnegative")

    @classmethod
    def classical(cls) -> "InterpolationScheme":
        return cls("classical")

    @classmethod
    def circle(cls, radius, count: int | None = None) -> "InterpolationScheme":
        return cls("circle", str(radius), count)

    @classmethod
    def explicit(cls, points: dict) -> "InterpolationScheme":
        return cls("explicit", points={int(k): list(v) for k, v in points.items()})

    @property
    def conjugate_symmetric(self) -> bool:
        return self.kind in ("classical", "circle")

    def nodes(self, n: int, ctx: PrecisionContext | None = None) -> list:
        """The 2n nodes of level n: mpc values or the string ``"inf"``."""
        ctx = as_context(ctx)
        if self.kind == "classical":
            return [INF] * (2 * n)
        if self.kind == "explicit":
            if n not in self.points:
                raise InvalidInputError(f"no explicit nodes for n={n}")
            raw = self.points[n]
            if len(raw) != 2 * n:
                raise InvalidInputError(f"level n={n} needs exactly {2 * n} nodes, got {len(raw)}")
            with ctx.scope():
                return [INF if _is_inf(e) else to_mpc(e) for e in raw]
        count = 2 * n if self.count is None else min(self.count, 2 * n)
        with ctx.scope():
            r = to_mpc(self.radius).real
            pi = gmpy2.const_pi()
            half = []
            for j in range(count // 2):
                th = pi * (2 * j + 1) / count
                half.append(mpc(r * gmpy2.cos(th), r * gmpy2.sin(th)))
            pts = half + [z.conjugate() for z in half]
            if count % 2:
                pts.append(mpc(-r))
        return pts + [INF] * (2 * n - count)


def _finite_groups(nodes: Sequence, ctx: PrecisionContext) -> list[tuple[object, int]]:
    """Distinct finite nodes with multiplicities (exact equality)."""
    out: list[list] = []
    for e in nodes:
        if _is_inf(e):
            continue
        for g in out:
            if g[0] == e:
                g[1] += 1
                break
        else:
            out.append([e, 1])
    return [(e, m) for e, m in out]


# ---------------------------------------------------------------- approximant

@dataclass
class PadeApproximant:
    """Pi_n = p/q with bookkeeping for pole classification and diagnostics."""

    n: int
    p: Poly
    q: Poly
    nodes: list
    poles: np.ndarray
    support_poles: list
    rational_poles: list
    monic: bool
    degenerate: bool = False
    tie_poles: list = field(default_factory=list)
    residual: float = 0.0
    bits: int = 256

    def __call__(self, z):
        with PrecisionContext(self.bits).scope():
            z = to_mpc(z)
            return self.p(z) / self.q(z)

    @property
    def v(self) -> Poly:
        finite = [e for e in self.nodes if not _is_inf(e)]
        return Poly.from_roots(finite, ctx=PrecisionContext(self.bits))


def _classify(F: CauchyFunction, poles: np.ndarray, ctx: PrecisionContext):
    if F.rational is None or not len(poles):
        return list(poles), [], []
    with ctx.scope():
        targets = [r for r, _ in F.poles(ctx)]
        if F.measure is not None:
            c, d = F.measure.bounds(ctx)
            dist = min(_dist_to_interval(r, c, d) for r in targets)
        else:
            dist = min(abs(a - b) for a in targets for b in targets if a is not b) if len(targets) > 1 else mpfr(1)
        radius = dist / 10
        support, rational, ties = [], [], []
        for z in poles:
            near = [abs(z - r) for r in targets]
            k = min(near)
            if abs(k - radius) <= radius * mpfr("1e-6"):
                ties.append(z)
            (rational if k < radius else support).append(z)
        return support, rational, ties


def _finish(F: CauchyFunction, n: int, qc: np.ndarray, pc: np.ndarray, nodes, ctx, residual, forced_flag=False):
    with ctx.scope():
        q, p = Poly(qc), Poly(pc)
        if q.is_zero:
            raise AccuracyError("Padé denominator vanished identically")
        lead_ok = q.degree == n and abs(q.coeffs[-1]) >= MONIC_TOL * q.norm()
        monic = lead_ok and not forced_flag
        if lead_ok:
            lead = q.lead
            q = Poly(q.coeffs / lead)
            p = Poly(p.coeffs / lead) if not p.is_zero else p
        else:
            nrm = q.norm()
            q = Poly(q.coeffs / nrm)
            p = Poly(p.coeffs / nrm) if not p.is_zero else p
        poles = poly_roots(q, ctx) if q.degree > 0 else np.empty(0, dtype=object)
        support, rational, ties = _classify(F, poles, ctx)
        return PadeApproximant(
            n=n, p=p, q=q, nodes=list(nodes), poles=poles, support_poles=support, rational_poles=rational,
            monic=monic, degenerate=not lead_ok, tie_poles=ties, residual=float(residual), bits=ctx.mantissa_bits,
        )


def _numerator(q: np.ndarray, c: np.ndarray, n: int) -> np.ndarray:
    """Polynomial part of q(z) sum c_k z**(-k-1): p_l = sum_{i>l} q_i c_{i-l-1}."""
    p = czeros(n)
    for l in range(n):
        p[l] = sum((q[i] * c[i - l - 1] for i in range(l + 1, n + 1)), mpc(0))
    return p


def classical_pade(F: CauchyFunction, n: int, ctx: PrecisionContext | None = None, c: np.ndarray | None = None) -> PadeApproximant:
    """Classical diagonal approximant from the Hankel system of the moments.

    ``c`` may supply precomputed Laurent coefficients c_0..c_{2n-1} (or more).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInputError("n must be a positive integer")
    ctx = as_context(ctx)
    if c is None:
        c = moments(F, 2 * n, ctx)
    elif len(c) < 2 * n:
        raise InvalidInputError(f"need at least {2 * n} Laurent coefficients")
    with ctx.scope():
        hank = np.array([[c[i + j] for i in range(n)] for j in range(n)], dtype=object)
        rhs = np.array([-c[n + j] for j in range(n)], dtype=object)
        flagged = False
        try:
            q = np.concatenate([solve(hank, rhs, ctx), [mpc(1)]])
        except AccuracyError:
            full = np.array([[c[i + j] for i in range(n + 1)] for j in range(n)], dtype=object)
            q, _ = nullspace_solve(full, ctx)
            flagged = True
        scale = max(vabs(c[: 2 * n]))
        res = max(abs(sum(q[i] * c[i + j] for i in range(n + 1))) for j in range(n)) / (scale * max(vabs(q)))
        return _finish(F, n, q, _numerator(q, c, n), [INF] * (2 * n), ctx, res, flagged)


# ---------------------------------------------------------------- multipoint

def _taylor_shift(coeffs: np.ndarray, e, count: int) -> np.ndarray:
    """Coefficients of a(e + h) in powers of h (first ``count``)."""
    a = [mpc(v) for v in coeffs]
    out = []
    for _ in range(count):
        if not a:
            out.append(mpc(0))
            continue
        # synthetic division by (z - e): remainder is the next Taylor coefficient
        acc = mpc(0)
        quot = [mpc(0)] * (len(a) - 1)
        for k in range(len(a) - 1, -1, -1):
            acc = acc * e + a[k]
            if k:
                quot[k - 1] = acc
        out.append(acc)
        a = quot
    return np.array(out, dtype=object)


def _series_div(a: np.ndarray, b: np.ndarray, count: int) -> np.ndarray:
    out = czeros(count)
    for k in range(count):
        acc = a[k] if k < len(a) else mpc(0)
        for j in range(1, min(k, len(b) - 1) + 1):
            acc -= b[j] * out[k - j]
        out[k] = acc / b[0]
    return out


def _taylor_of_cauchy(F: CauchyFunction, e, count: int, ctx: PrecisionContext) -> np.ndarray:
    """T_r = C^(r)(e)/r!, r < count, by quadrature of (-1)^r int dmu/(e - t)^(r+1)."""
    with ctx.scope():
        out = czeros(count)
        if F.measure is not None:
            c, d = F.measure.bounds(ctx)
            extra = graded_breaks(e, c, d)

            def fn(t):
                base = 1 / (e - t)
                cols = [base]
                for _ in range(count - 1):
                    cols.append(-cols[-1] * base)
                return np.stack(cols, axis=1)

            out = out + measure_integral(F.measure, fn, ctx, n0=48, what="Taylor coefficients", extra_breaks=extra)
        if F.rational is not None:
            p, q = F.rational.polys(ctx)
            out = out + _series_div(_taylor_shift(p.coeffs, e, count), _taylor_shift(q.coeffs, e, count), count)
        return out


def _check_node(F: CauchyFunction, e, ctx: PrecisionContext) -> None:
    with ctx.scope():
        r = exclusion_radius(F, ctx)
        if F.measure is not None:
            c, d = F.measure.bounds(ctx)
            if _dist_to_interval(e, c, d) <= r:
                raise DomainError("interpolation node inside the exclusion zone of [c, d]")
        for root, _ in F.poles(ctx):
            if abs(e - root) <= r:
                raise DomainError("interpolation node inside the exclusion zone of a pole")


def multipoint_pade(F: CauchyFunction, n: int, nodes: Sequence, ctx: PrecisionContext | None = None,
                    c: np.ndarray | None = None) -> PadeApproximant:
    """Multipoint diagonal approximant for the 2n nodes (``"inf"`` allowed).

    Unknowns are q_0..q_n, p_0..p_n.  Rows: coefficients of z**s in q C - p
    for s = n down to f - n, and for every finite node e of multiplicity M
    the Taylor coefficients of order < M of q C - p at e.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInputError("n must be a positive integer")
    if len(nodes) != 2 * n:
        raise InvalidInputError(f"need exactly {2 * n} interpolation nodes")
    ctx = as_context(ctx)
    with ctx.scope():
        nodes = [INF if _is_inf(e) else to_mpc(e) for e in nodes]
        groups = _finite_groups(nodes, ctx)
        for e, _ in groups:
            _check_node(F, e, ctx)
        f = sum(m for _, m in groups)
        k_inf = 2 * n - f  # number of Laurent coefficients with s < 0 to annihilate
        if c is None:
            c = moments(F, max(1, n + k_inf), ctx)
        rows = []
        for s in range(n, f - n - 1, -1):
            row = czeros(2 * n + 2)
            for i in range(n + 1):
                k = i - s - 1
                if 0 <= k < len(c):
                    row[i] = c[k]
            if s >= 0:
                row[n + 1 + s] = mpc(-1)
            rows.append(row)
        for e, mult in groups:
            taylor = _taylor_of_cauchy(F, e, mult, ctx)
            for k in range(mult):
                row = czeros(2 * n + 2)
                for i in range(n + 1):
                    row[i] = sum(
                        (math.comb(i, j) * e ** (i - j) * taylor[k - j] for j in range(min(k, i) + 1)), mpc(0)
                    )
                for l in range(k, n + 1):
                    row[n + 1 + l] = -math.comb(l, k) * e ** (l - k)
                rows.append(row)
        a = np.array(rows, dtype=object)
        for r in range(a.shape[0]):
            s = max(vabs(a[r]))
            if s != 0:
                a[r] = a[r] / s
        x, resid = nullspace_solve(a, ctx)
        return _finish(F, n, x[: n + 1], x[n + 1 :], nodes, ctx, resid)


# ---------------------------------------------------------------- admissibility

@dataclass
class AdmissibilityReport:
    """Per-level optimal matching sums sum |psi(conj e) - psi(Delta(e))| and separations."""

    levels: list
    matching_sums: list
    separations: list
    growth_flagged: bool
    note: str = "finite data: only separation and boundedness of matching sums are checked"


def admissibility_report(F: CauchyFunction, scheme: InterpolationScheme, n_max: int,
                         ctx: PrecisionContext | None = None, n_min: int = 1) -> AdmissibilityReport:
    """Matching sums via an optimal assignment (psi(inf) = 0) for n_min..n_max."""
    ctx = as_context(ctx)
    if F.measure is None:
        raise InvalidInputError("admissibility is measured relative to the support [c, d]")
    with ctx.scope():
        c, d = F.measure.bounds(ctx)
        poles = [r for r, _ in F.poles(ctx)]
        levels, sums, seps = [], [], []
        for n in range(n_min, n_max + 1):
            pts = scheme.nodes(n, ctx)
            finite = [e for e in pts if not _is_inf(e)]
            a = np.array([complex(_psi(e.conjugate(), c, d)) for e in finite], dtype=complex)
            b = np.array([complex(_psi(e, c, d)) for e in finite], dtype=complex)
            if len(finite):
                cost = np.abs(a[:, None] - b[None, :])
                ri, ci = linear_sum_assignment(cost)
                total = float(cost[ri, ci].sum())
                sep = min(
                    [float(_dist_to_interval(e, c, d)) for e in finite] + [float(abs(e - r)) for e in finite for r in poles]
                )
            else:
                total, sep = 0.0, math.inf
            levels.append(n)
            sums.append(total)
            seps.append(sep)
        growth = False
        if len(sums) >= 4:
            half = len(sums) // 2
            first, last = max(sums[:half]), max(sums[half:])
            slope = np.polyfit(levels, sums, 1)[0]
            growth = last > 1.5 * first + 1e-12 and slope > 1e-12
        return AdmissibilityReport(levels, sums, seps, bool(growth))


# ---------------------------------------------------------------- error

def pade_error(F: CauchyFunction, approx: PadeApproximant, z, ctx: PrecisionContext | None = None,
               cross_check: bool = False):
    """C(z) - Pi_n(z); with ``cross_check`` also the value of the integral form

    (v/(q_n q))(z) int (q_n q)(t)/(z - t) dmu(t)/v(t)

    where v collects the finite nodes and q the rational-part denominator.
    """
    ctx = as_context(ctx)
    with ctx.scope():
        z = to_mpc(z)
        direct = eval_cauchy(F, z, ctx) - approx.p(z) / approx.q(z)
        if not cross_check:
            return direct
        if F.measure is None:
            return direct, mpc(0)
        v = approx.v
        qq = approx.q * F.rational.polys(ctx)[1] if F.rational is not None else approx.q
        c, d = F.measure.bounds(ctx)
        extra = graded_breaks(z, c, d)
        integral = measure_integral(
            F.measure,
            lambda t: horner(qq.coeffs, t) / (horner(v.coeffs, t) * (z - t)),
            ctx,
            n0=2 * qq.degree + 48,
            what="Padé error integral",
            extra_breaks=extra,
        )[0]
        return direct, v(z) / qq(z) * integral
