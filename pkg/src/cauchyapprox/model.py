"""The approximated function: a Cauchy transform of an interval measure plus a
rational part, with its Laurent coefficients at infinity and pointwise values.

Numbers in the specifications are kept as exact decimal (or ``a/b``) text and
converted at the precision of each call, so one specification serves every
working precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import AccuracyError, DomainError, InvalidInputError
from .expression import Expression
from .kernel.poly import Poly, poly_roots
from .kernel.precision import PrecisionContext, as_context, czeros, to_mpc, vabs
from .kernel.quadrature import jacobi_quadrature

__all__ = [
    "Piece",
    "MeasureSpec",
    "RationalPart",
    "CauchyFunction",
    "QuadratureRule",
    "weighted_rule",
    "adaptive_integral",
    "measure_integral",
    "moments",
    "eval_cauchy",
    "exclusion_radius",
    "graded_breaks",
]

MAX_SEGMENT_NODES = 1024


# ---------------------------------------------------------------- numbers

def _canon(x) -> str:
    """Exact text form of a real number given as str/int/float/Fraction/mpfr."""
    if isinstance(x, bool):
        raise InvalidInputError("booleans are not numbers here")
    if isinstance(x, str):
        s = x.strip()
        _real(s, 64)  # validate
        return s
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise InvalidInputError(f"non-finite value {x}")
        # shortest repr, read back as an exact decimal
        return repr(float(x))
    if isinstance(x, mpfr):
        return _mpfr_text(x)
    raise InvalidInputError(f"not a real number: {x!r}")


def _mpfr_text(x) -> str:
    mant, exp, _ = x.digits(10)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    return f"{sign}0.{mant}e{exp}"


def _real(text: str, bits: int | None = None):
    """Parse exact text at the active (or given) precision."""
    if bits is not None:
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            return _real(text)
    if "/" in text:
        num, den = text.split("/", 1)
        try:
            q = gmpy2.mpq(int(num), int(den))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"bad rational literal {text!r}") from exc
        return mpfr(q)
    try:
        v = mpfr(text)
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse number {text!r}") from exc
    if not gmpy2.is_finite(v):
        raise InvalidInputError(f"non-finite number {text!r}")
    return v


def _canon_complex(x) -> tuple[str, str]:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InvalidInputError(f"complex numbers are [re, im] pairs, got {x!r}")
        return _canon(x[0]), _canon(x[1])
    if isinstance(x, (complex, np.complexfloating)):
        return _canon(float(x.real)), _canon(float(x.imag))
    if isinstance(x, mpc):
        return _canon(x.real), _canon(x.imag)
    return _canon(x), "0"


def _complex(pair: tuple[str, str]):
    return mpc(_real(pair[0]), _real(pair[1]))


# ---------------------------------------------------------------- quadrature

@dataclass
class QuadratureRule:
    """Nodes/weights on [c, d] split into segments; ``seg`` indexes segments."""

    t: np.ndarray
    w: np.ndarray
    seg: np.ndarray
    segments: list


def weighted_rule(c, d, singular: dict, breaks: Sequence, n: int, ctx: PrecisionContext) -> QuadratureRule:
    """Rule for the weight (1/pi) prod_p |t - p|**e_p on [c, d].

    The interval is split at ``breaks`` and at the singular points; on each
    segment the exponents of its own endpoints are absorbed into a
    Gauss-Jacobi weight, the remaining factors are smooth there and are
    multiplied into the weights.
    """
    with ctx.scope():
        pts = sorted({c, d, *[b for b in breaks if c < b < d], *[p for p in singular if c < p < d]})
        ts, ws, segs = [], [], []
        pi = gmpy2.const_pi()
        for k, (a, b) in enumerate(zip(pts[:-1], pts[1:])):
            ea = singular.get(a, mpfr(0))
            eb = singular.get(b, mpfr(0))
            t, w = jacobi_quadrature((a, b), ea, eb, n, ctx)
            g = np.full(len(t), 1 / pi, dtype=object)
            for p, e in singular.items():
                if p in (a, b) or e == 0:
                    continue
                g = g * vabs(t - p) ** e
            ts.append(t)
            ws.append(w * g)
            segs.append(np.full(len(t), k))
        return QuadratureRule(
            t=np.concatenate(ts), w=np.concatenate(ws), seg=np.concatenate(segs), segments=list(zip(pts[:-1], pts[1:]))
        )


def adaptive_integral(evaluate: Callable[[int], tuple[np.ndarray, np.ndarray]], n0: int, ctx: PrecisionContext, what: str):
    """Run ``evaluate(n)`` for growing per-segment node counts until stable.

    ``evaluate`` returns (values, scales); agreement is judged componentwise
    against ``scales``.  Stops early once the difference reaches near-roundoff
    level; otherwise accepts at ``convergence_tol`` or raises AccuracyError.
    """
    strict = ctx.eps * gmpy2.exp2(ctx.mantissa_bits // 8)
    loose = ctx.convergence_tol
    n = min(max(8, n0), (3 * MAX_SEGMENT_NODES) // 4)
    prev, _ = evaluate(n)
    worst = None
    while True:
        n_next = min(MAX_SEGMENT_NODES, n + max(16, n // 3))
        if n_next == n:
            break
        cur, scale = evaluate(n_next)
        worst = max((abs(a - b) / s if s != 0 else abs(a - b)) for a, b, s in zip(np.ravel(cur), np.ravel(prev), np.ravel(scale)))
        if worst <= strict:
            return cur, worst
        prev, n = cur, n_next
    if worst is not None and worst <= loose:
        return prev, worst
    if worst is None:
        raise AccuracyError(f"{what}: node budget exhausted before any convergence check")
    raise AccuracyError(f"{what}: quadrature did not converge (relative change {float(worst):.3e})", worst)


# ---------------------------------------------------------------- measure

@dataclass(frozen=True)
class Piece:
    lo: str
    hi: str
    h: Expression


@dataclass(frozen=True)
class MeasureSpec:
    """dmu = h * hbar * hbar_x domega on [c, d], h given piecewise.

    ``hbar = |t-c|**a_c |t-d|**a_d`` and ``hbar_x = prod |t-x|**(2 a_x)``;
    omega is the normalized arcsine distribution of [c, d].
    """

    interval: tuple
    pieces: tuple
    endpoint_exponents: tuple = ("0", "0")
    interior_zeros: tuple = ()

    def __post_init__(self):
        if len(self.interval) != 2:
            raise InvalidInputError("interval must be [c, d]")
        iv = (_canon(self.interval[0]), _canon(self.interval[1]))
        pieces = []
        for p in self.pieces:
            if isinstance(p, Piece):
                pieces.append(Piece(_canon(p.lo), _canon(p.hi), p.h))
            else:
                (lo, hi), h = p
                pieces.append(Piece(_canon(lo), _canon(hi), h if isinstance(h, Expression) else Expression(str(h))))
        ex = tuple(_canon(a) for a in self.endpoint_exponents)
        zeros = tuple((_canon(x), _canon(a)) for x, a in self.interior_zeros)
        object.__setattr__(self, "interval", iv)
        object.__setattr__(self, "pieces", tuple(pieces))
        object.__setattr__(self, "endpoint_exponents", ex)
        object.__setattr__(self, "interior_zeros", zeros)
        self._validate()

    def _validate(self):
        with gmpy2.context(gmpy2.get_context(), precision=256):
            c, d = _real(self.interval[0]), _real(self.interval[1])
            if not c < d:
                raise InvalidInputError("interval must satisfy c < d")
            if not self.pieces:
                raise InvalidInputError("at least one piece is required")
            if _real(self.pieces[0].lo) != c or _real(self.pieces[-1].hi) != d:
                raise InvalidInputError("pieces must start at c and end at d")
            for a, b in zip(self.pieces, self.pieces[1:]):
                if _real(a.hi) != _real(b.lo):
                    raise InvalidInputError("pieces must partition [c, d] without gaps")
            for p in self.pieces:
                if not _real(p.lo) < _real(p.hi):
                    raise InvalidInputError("each piece needs lo < hi")
            if len(self.endpoint_exponents) != 2:
                raise InvalidInputError("endpoint_exponents must have two entries")
            for a in self.endpoint_exponents:
                if not (0 <= _real(a) < mpfr(1) / 2):
                    raise InvalidInputError("endpoint exponents must lie in [0, 1/2)")
            seen = set()
            for x, a in self.interior_zeros:
                xv = _real(x)
                if not (c < xv < d):
                    raise InvalidInputError("interior zeros must lie strictly inside (c, d)")
                if not (0 < _real(a) < mpfr(1) / 2):
                    raise InvalidInputError("interior zero exponents must lie in (0, 1/2)")
                if xv in seen:
                    raise InvalidInputError("interior zeros must be distinct")
                seen.add(xv)

    @classmethod
    def simple(cls, interval, h="1", endpoint_exponents=("0", "0"), interior_zeros=()) -> "MeasureSpec":
        return cls(tuple(interval), (((interval[0], interval[1]), h),), tuple(endpoint_exponents), tuple(interior_zeros))

    def bounds(self, ctx: PrecisionContext | None = None):
        ctx = as_context(ctx)
        with ctx.scope():
            return _real(self.interval[0]), _real(self.interval[1])

    def breakpoints(self, ctx: PrecisionContext | None = None) -> list:
        """Interior piece boundaries, where h may jump."""
        ctx = as_context(ctx)
        with ctx.scope():
            return [_real(p.hi) for p in self.pieces[:-1]]

    def zeros(self, ctx: PrecisionContext | None = None) -> list:
        ctx = as_context(ctx)
        with ctx.scope():
            return [(_real(x), _real(a)) for x, a in self.interior_zeros]

    def exponents(self, ctx: PrecisionContext | None = None):
        ctx = as_context(ctx)
        with ctx.scope():
            return _real(self.endpoint_exponents[0]), _real(self.endpoint_exponents[1])

    def has_hbar(self) -> bool:
        return any(e not in ("0", "0.0") for e in self.endpoint_exponents) or bool(self.interior_zeros)

    def singular_exponents(self, ctx: PrecisionContext | None = None) -> dict:
        """Exponents of |t - p| in dmu/dt (arcsine density included)."""
        ctx = as_context(ctx)
        with ctx.scope():
            c, d = self.bounds(ctx)
            ac, ad = self.exponents(ctx)
            half = mpfr(1) / 2
            sing = {c: ac - half, d: ad - half}
            for x, a in self.zeros(ctx):
                sing[x] = 2 * a
            return sing

    def h_values(self, t: np.ndarray, ctx: PrecisionContext | None = None) -> np.ndarray:
        """The smooth factor h at nodes; nodes on a boundary take the left piece."""
        ctx = as_context(ctx)
        with ctx.scope():
            out = np.empty(len(t), dtype=object)
            his = [_real(p.hi) for p in self.pieces]
            idx = np.array([next((k for k, hi in enumerate(his) if tt <= hi), len(his) - 1) for tt in t])
            for k, p in enumerate(self.pieces):
                sel = np.nonzero(idx == k)[0]
                if len(sel):
                    vals = p.h(np.array([mpc(v) for v in t[sel]], dtype=object))
                    out[sel] = vals
            return out

    def hbar_values(self, t: np.ndarray, ctx: PrecisionContext | None = None) -> np.ndarray:
        ctx = as_context(ctx)
        with ctx.scope():
            c, d = self.bounds(ctx)
            ac, ad = self.exponents(ctx)
            out = np.full(len(t), mpfr(1), dtype=object)
            if ac != 0:
                out = out * vabs(t - c) ** ac
            if ad != 0:
                out = out * vabs(t - d) ** ad
            for x, a in self.zeros(ctx):
                out = out * vabs(t - x) ** (2 * a)
            return out

    def rule(self, n: int, ctx: PrecisionContext | None = None, extra_breaks=()) -> QuadratureRule:
        """Quadrature for integrals against |dmu| / |h| (arcsine density and hbar factors)."""
        ctx = as_context(ctx)
        c, d = self.bounds(ctx)
        return weighted_rule(c, d, self.singular_exponents(ctx), self.breakpoints(ctx) + list(extra_breaks), n, ctx)

    def scaled(self, factor) -> "MeasureSpec":
        """The measure multiplied by a complex constant ``[re, im]`` or real."""
        re, im = _canon_complex(factor)
        k = f"(({re})+({im})*i)"
        pieces = tuple(Piece(p.lo, p.hi, Expression(f"{k}*({p.h.source})")) for p in self.pieces)
        return MeasureSpec(self.interval, pieces, self.endpoint_exponents, self.interior_zeros)

    def to_dict(self) -> dict:
        return {
            "interval": list(self.interval),
            "pieces": [{"interval": [p.lo, p.hi], "h": p.h.source} for p in self.pieces],
            "endpoint_exponents": list(self.endpoint_exponents),
            "interior_zeros": [{"x": x, "alpha": a} for x, a in self.interior_zeros],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MeasureSpec":
        if not isinstance(data, dict) or "interval" not in data:
            raise InvalidInputError("measure needs an 'interval'")
        interval = data["interval"]
        raw = data.get("pieces")
        if raw is None:
            raw = [{"interval": interval, "h": data.get("h", "1")}]
        pieces = []
        for p in raw:
            if not isinstance(p, dict) or "interval" not in p or "h" not in p:
                raise InvalidInputError("each piece needs 'interval' and 'h'")
            pieces.append(((p["interval"][0], p["interval"][1]), Expression(str(p["h"]))))
        zeros = []
        for z in data.get("interior_zeros", []):
            if isinstance(z, dict):
                zeros.append((z["x"], z["alpha"]))
            else:
                zeros.append((z[0], z[1]))
        return cls(tuple(interval), tuple(pieces), tuple(data.get("endpoint_exponents", ("0", "0"))), tuple(zeros))


@dataclass(frozen=True)
class RationalPart:
    """p/q with deg p < deg q; q is monic (given by coefficients or by roots).

    Coefficients are complex ``[re, im]`` text pairs, lowest degree first.
    ``q_roots`` entries are ``(re, im, multiplicity)``.
    """

    p: tuple
    q: tuple | None = None
    q_roots: tuple | None = None

    def __post_init__(self):
        p = tuple(_canon_complex(a) for a in self.p)
        if (self.q is None) == (self.q_roots is None):
            raise InvalidInputError("give exactly one of q (coefficients) or q_roots")
        q = None if self.q is None else tuple(_canon_complex(a) for a in self.q)
        roots = None
        if self.q_roots is not None:
            roots = []
            for r in self.q_roots:
                if len(r) == 3:
                    re, im, m = r
                elif len(r) == 2:
                    (re, im), m = _canon_complex(r[0]), r[1]
                else:
                    raise InvalidInputError("q_roots entries are (re, im, multiplicity)")
                if int(m) != m or int(m) < 1:
                    raise InvalidInputError("root multiplicities must be positive integers")
                roots.append((_canon(re), _canon(im), int(m)))
            roots = tuple(roots)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "q_roots", roots)
        with gmpy2.context(gmpy2.get_context(), precision=256):
            pp, qq = self.polys()
            if qq.degree < 1:
                raise InvalidInputError("q must have degree at least 1")
            if pp.degree >= qq.degree:
                raise InvalidInputError("need deg p < deg q")
            if pp.is_zero:
                raise InvalidInputError("p must be nonzero")
            scale = pp.norm()
            for root, _ in self.poles():
                if abs(pp(root)) <= gmpy2.exp2(-100) * scale * (1 + abs(root)) ** pp.degree:
                    raise InvalidInputError("p and q share a root (not coprime)")

    @property
    def m(self) -> int:
        if self.q_roots is not None:
            return sum(r[2] for r in self.q_roots)
        return len(self.q) - 1

    def polys(self, ctx: PrecisionContext | None = None) -> tuple[Poly, Poly]:
        """(p, q) at the given precision, with q monic."""
        if ctx is not None:
            with ctx.scope():
                return self.polys()
        p = Poly(np.array([_complex(a) for a in self.p], dtype=object))
        if self.q is not None:
            q = Poly(np.array([_complex(a) for a in self.q], dtype=object))
            if q.is_zero:
                raise InvalidInputError("q must be nonzero")
            lead = q.lead
            return Poly(p.coeffs / lead) if not p.is_zero else p, q.monic()
        roots = []
        for re, im, m in self.q_roots:
            roots += [mpc(_real(re), _real(im))] * m
        return p, Poly.from_roots(roots, ctx=_active_context())

    def poles(self, ctx: PrecisionContext | None = None) -> list:
        """Distinct roots of q with multiplicities."""
        if ctx is not None:
            with ctx.scope():
                return self.poles()
        if self.q_roots is not None:
            return [(mpc(_real(re), _real(im)), m) for re, im, m in self.q_roots]
        _, q = self.polys()
        roots = poly_roots(q, _active_context())
        # cluster numerically multiple roots
        tol = gmpy2.exp2(-(gmpy2.get_context().precision // (2 * max(1, q.degree))))
        groups: list[list] = []
        for r in roots:
            for g in groups:
                if abs(g[0] - r) <= tol * (1 + abs(r)):
                    g.append(r)
                    break
            else:
                groups.append([r])
        return [(sum(g) / len(g), len(g)) for g in groups]

    def laurent(self, count: int, ctx: PrecisionContext | None = None) -> np.ndarray:
        """d_0..d_{count-1} with p/q = sum d_k z**(-k-1)."""
        ctx = as_context(ctx)
        with ctx.scope():
            p, q = self.polys()
            m = q.degree
            qc, pc = q.coeffs, p.coeffs
            d = czeros(count)
            for s in range(count):
                idx = m - 1 - s
                acc = pc[idx] if 0 <= idx < len(pc) else mpc(0)
                for j in range(max(0, m - s), m):
                    acc -= qc[j] * d[j - m + s]
                d[s] = acc
            return d

    def __call__(self, z, ctx: PrecisionContext | None = None):
        ctx = as_context(ctx)
        with ctx.scope():
            p, q = self.polys()
            return p(z) / q(z)

    def to_dict(self) -> dict:
        out = {"p": [list(a) for a in self.p]}
        if self.q is not None:
            out["q"] = [list(a) for a in self.q]
        else:
            out["q_roots"] = [[re, im, m] for re, im, m in self.q_roots]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RationalPart":
        if not isinstance(data, dict) or "p" not in data:
            raise InvalidInputError("rational part needs 'p'")
        return cls(tuple(data["p"]), tuple(data["q"]) if "q" in data else None,
                   tuple(tuple(r) for r in data["q_roots"]) if "q_roots" in data else None)


def _active_context() -> PrecisionContext:
    return PrecisionContext(gmpy2.get_context().precision)


@dataclass(frozen=True)
class CauchyFunction:
    """C(z) = int dmu(t)/(z - t) + p(z)/q(z); either part may be absent."""

    measure: MeasureSpec | None
    rational: RationalPart | None = None

    def __post_init__(self):
        if self.measure is None and self.rational is None:
            raise InvalidInputError("a function needs a measure, a rational part, or both")
        if self.measure is not None and self.rational is not None:
            with gmpy2.context(gmpy2.get_context(), precision=256):
                c, d = self.measure.bounds(PrecisionContext(256))
                for r, _ in self.rational.poles():
                    if r.imag == 0 and c <= r.real <= d:
                        raise InvalidInputError("poles of the rational part must lie off [c, d]")

    @property
    def m(self) -> int:
        return 0 if self.rational is None else self.rational.m

    def interval(self, ctx: PrecisionContext | None = None):
        if self.measure is None:
            return None
        return self.measure.bounds(ctx)

    def poles(self, ctx: PrecisionContext | None = None) -> list:
        return [] if self.rational is None else self.rational.poles(ctx)

    def check_in_unit_disk(self, ctx: PrecisionContext | None = None) -> None:
        """Raise DomainError unless [c, d] and the poles lie in the open unit disk."""
        ctx = as_context(ctx)
        with ctx.scope():
            if self.measure is not None:
                c, d = self.measure.bounds(ctx)
                if not (-1 < c and d < 1):
                    raise DomainError("[c, d] must lie inside the open unit disk")
            for r, _ in self.poles(ctx):
                if not abs(r) < 1:
                    raise DomainError("poles of the rational part must lie inside the open unit disk")

    def scaled(self, factor) -> "CauchyFunction":
        """Scale the measure part by a complex constant (rational part unchanged)."""
        if self.measure is None:
            raise InvalidInputError("no measure to scale")
        return CauchyFunction(self.measure.scaled(factor), self.rational)

    def to_dict(self) -> dict:
        out = {}
        if self.measure is not None:
            out["measure"] = self.measure.to_dict()
        if self.rational is not None:
            out["rational"] = self.rational.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CauchyFunction":
        if not isinstance(data, dict):
            raise InvalidInputError("function specification must be an object")
        unknown = set(data) - {"measure", "rational"}
        if unknown:
            raise InvalidInputError(f"unknown function fields: {sorted(unknown)}")
        meas = MeasureSpec.from_dict(data["measure"]) if data.get("measure") is not None else None
        rat = RationalPart.from_dict(data["rational"]) if data.get("rational") is not None else None
        return cls(meas, rat)


# ---------------------------------------------------------------- operations

def measure_integral(measure: MeasureSpec, fn: Callable, ctx: PrecisionContext | None = None, n0: int = 32,
                     what: str = "integral", extra_breaks=(), weight: Callable | None = None):
    """Adaptive quadrature of fn(t) against dmu (vector-valued fn allowed).

    ``fn`` maps nodes (1-d object array) to an array of shape (len(t),) or
    (len(t), k).  ``weight`` optionally multiplies the measure by a further
    smooth factor evaluated at the nodes.
    """
    ctx = as_context(ctx)

    def evaluate(n):
        with ctx.scope():
            rule = measure.rule(n, ctx, extra_breaks)
            wh = rule.w * measure.h_values(rule.t, ctx)
            if weight is not None:
                wh = wh * weight(rule.t)
            vals = fn(rule.t)
            if vals.ndim == 1:
                return np.array([np.dot(wh, vals)], dtype=object), np.array([np.dot(vabs(wh), vabs(vals))], dtype=object)
            return np.dot(wh, vals), np.dot(vabs(wh), vabs(vals))

    val, _ = adaptive_integral(evaluate, n0, ctx, what)
    return val


def moments(F: CauchyFunction, K: int, ctx: PrecisionContext | None = None) -> np.ndarray:
    """Laurent coefficients c_0..c_{K-1} of F at infinity."""
    ctx = as_context(ctx)
    if not isinstance(K, (int, np.integer)) or K < 1:
        raise InvalidInputError("moment count must be a positive integer")
    with ctx.scope():
        out = czeros(K)
        if F.measure is not None:
            meas = F.measure

            def evaluate(n):
                rule = meas.rule(n, ctx)
                vec = rule.w * meas.h_values(rule.t, ctx)
                avec = vabs(vec)
                at = vabs(rule.t)
                vals = czeros(K)
                scale = np.empty(K, dtype=object)
                for k in range(K):
                    vals[k] = vec.sum()
                    scale[k] = avec.sum()
                    vec = vec * rule.t
                    avec = avec * at
                return vals, scale

            vals, _ = adaptive_integral(evaluate, K // 2 + 24, ctx, "moments")
            out = out + vals
        if F.rational is not None:
            out = out + F.rational.laurent(K, ctx)
        return out


def exclusion_radius(F: CauchyFunction, ctx: PrecisionContext | None = None):
    ctx = as_context(ctx)
    with ctx.scope():
        if F.measure is not None:
            c, d = F.measure.bounds(ctx)
            return (d - c) * mpfr("1e-6")
        return mpfr("1e-6")


def _dist_to_interval(z, c, d):
    x = z.real
    if x < c:
        return abs(z - c)
    if x > d:
        return abs(z - d)
    return abs(z.imag)


def _bernstein_nodes(z, a, b, bits: int) -> int:
    """Gauss node estimate for 1/(z - t) on [a, b] at the given precision."""
    zc = complex(z)
    u = (2 * zc - float(a) - float(b)) / (float(b) - float(a))
    rho = abs(u + np.sqrt(u - 1) * np.sqrt(u + 1))
    rho = max(rho, 1 / max(rho, 1e-300))
    if rho <= 1 + 1e-12:
        return MAX_SEGMENT_NODES
    return int(min(MAX_SEGMENT_NODES, math.ceil(0.55 * bits * math.log(2) / math.log(rho)) + 8))


def graded_breaks(z, c, d) -> list:
    """Breakpoints refining geometrically toward the point of [c, d] nearest z.

    Keeps each segment at least about as far from z as it is long, so a
    modest Gauss rule per segment resolves 1/(z - t) close to the cut.
    """
    x0 = min(max(z.real, c), d)
    delta = abs(z - x0)
    length = d - c
    if delta <= 0 or delta >= length / 8:
        return []
    out = []
    if c < x0 < d:
        out.append(x0)
    step = delta
    while step < length:
        for b in (x0 - step, x0 + step):
            if c < b < d:
                out.append(b)
        step *= 2
    return out


def eval_cauchy(F: CauchyFunction, z, ctx: PrecisionContext | None = None, radius=None):
    """Value of F at z off [c, d] and off the poles of the rational part."""
    ctx = as_context(ctx)
    with ctx.scope():
        z = to_mpc(z)
        r = exclusion_radius(F, ctx) if radius is None else to_mpc(radius).real
        val = mpc(0)
        if F.measure is not None:
            c, d = F.measure.bounds(ctx)
            if _dist_to_interval(z, c, d) <= r:
                raise DomainError("evaluation point inside the exclusion region around [c, d]")
            extra = graded_breaks(z, c, d)
            pts = sorted({c, d, *F.measure.breakpoints(ctx), *[x for x, _ in F.measure.zeros(ctx)], *extra})
            n0 = max(_bernstein_nodes(z, a, b, ctx.mantissa_bits) for a, b in zip(pts[:-1], pts[1:]))
            val = measure_integral(
                F.measure, lambda t: 1 / (z - t), ctx, n0=n0, what="Cauchy integral", extra_breaks=extra
            )[0]
        if F.rational is not None:
            for root, _ in F.rational.poles(ctx):
                if abs(z - root) <= r:
                    raise DomainError("evaluation point inside the exclusion region around a pole")
            val += F.rational(z, ctx)
        return val
