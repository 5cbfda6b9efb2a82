"""Dense multiprecision polynomials and an Aberth-Ehrlich root finder."""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from ..errors import AccuracyError, InvalidInputError
from .precision import PrecisionContext, as_context, cvec, czeros, to_mpc, vabs

__all__ = ["Poly", "poly_roots", "horner"]


def horner(coeffs: np.ndarray, z):
    """Evaluate sum coeffs[k] z**k; ``z`` may be a scalar or an object array."""
    acc = coeffs[-1] if len(coeffs) else mpc(0)
    if isinstance(z, np.ndarray):
        acc = np.full(z.shape, acc, dtype=object)
    for a in coeffs[-2::-1]:
        acc = acc * z + a
    return acc


@dataclass(frozen=True, eq=False)
class Poly:
    """Polynomial with coefficients stored lowest degree first.

    Trailing exact zeros are stripped, so the leading coefficient is nonzero
    unless the polynomial is zero (stored as an empty array).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=object).ravel()
        k = len(c)
        while k and c[k - 1] == 0:
            k -= 1
        c = c[:k].copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, values, ctx=None) -> "Poly":
        ctx = as_context(ctx)
        with ctx.scope():
            return cls(cvec(values))

    @classmethod
    def from_roots(cls, roots, lead=1, ctx=None) -> "Poly":
        ctx = as_context(ctx)
        with ctx.scope():
            c = [to_mpc(lead)]
            for r in roots:
                r = to_mpc(r)
                nxt = [mpc(0)] * (len(c) + 1)
                for i, a in enumerate(c):
                    nxt[i + 1] += a
                    nxt[i] -= a * r
                c = nxt
            return cls(np.array(c, dtype=object))

    @classmethod
    def one(cls) -> "Poly":
        return cls(np.array([mpc(1)], dtype=object))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def lead(self):
        return self.coeffs[-1] if len(self.coeffs) else mpc(0)

    def __call__(self, z):
        return horner(self.coeffs, z)

    def __mul__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return Poly(self.coeffs * other)
        if self.is_zero or other.is_zero:
            return Poly(np.empty(0, dtype=object))
        out = czeros(len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            out[i : i + len(other.coeffs)] += a * other.coeffs
        return Poly(out)

    __rmul__ = __mul__

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        out = czeros(n)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly(-self.coeffs)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def deriv(self) -> "Poly":
        if self.degree < 1:
            return Poly(np.empty(0, dtype=object))
        k = np.arange(1, len(self.coeffs), dtype=object)
        return Poly(self.coeffs[1:] * k)

    def norm(self):
        """Euclidean norm of the coefficient vector."""
        return gmpy2.sqrt(sum(abs(a) ** 2 for a in self.coeffs)) if len(self.coeffs) else mpfr(0)

    def monic(self) -> "Poly":
        if self.is_zero:
            raise InvalidInputError("zero polynomial cannot be made monic")
        return Poly(self.coeffs / self.lead)

    def reversed_conjugate(self, n: int | None = None) -> "Poly":
        """z**n * conj(p(1/conj(z))), the reciprocal polynomial of formal degree n."""
        n = self.degree if n is None else n
        if n < self.degree:
            raise InvalidInputError("formal degree below actual degree")
        out = czeros(n + 1)
        for k, a in enumerate(self.coeffs):
            out[n - k] = a.conjugate()
        return Poly(out)

    def to_complex(self) -> np.ndarray:
        return np.array([complex(a) for a in self.coeffs], dtype=complex)

    def __repr__(self) -> str:
        return f"Poly(degree={self.degree}, coeffs={[complex(a) for a in self.coeffs]})"


def _seed_roots(coeffs: np.ndarray, deg: int) -> np.ndarray:
    """Double-precision companion eigenvalues, or a Cauchy-bound circle."""
    mags = [abs(a) for a in coeffs]
    # float64 cannot represent mpfr exponents beyond ~1e308; rescale by a power of two
    top = max(mags)
    shift = int(gmpy2.floor(gmpy2.log2(top))) if top > 0 else 0
    c64 = np.array([complex(a / gmpy2.exp2(shift)) for a in coeffs], dtype=complex)
    seeds = None
    if c64[-1] != 0 and np.all(np.isfinite(c64)):
        with np.errstate(all="ignore"):
            try:
                seeds = np.roots(c64[::-1])
            except np.linalg.LinAlgError:
                seeds = None
        if seeds is not None and (len(seeds) != deg or not np.all(np.isfinite(seeds))):
            seeds = None
    if seeds is None:
        # Cauchy bound in mpfr: the coefficient ratio may exceed the double range
        lead = abs(coeffs[-1])
        bound = 1 + max(m / lead for m in mags[:-1])
        k = np.arange(deg)
        unit = np.exp(2j * np.pi * (k + 0.25) / deg)
        return np.array([to_mpc(u) * (bound / 2) for u in unit], dtype=object)
    # separate coincident seeds; Aberth needs distinct starting points
    seeds = seeds.astype(complex)
    for i in range(deg):
        for j in range(i):
            if seeds[i] == seeds[j]:
                seeds[i] += 1e-7 * (1 + abs(seeds[i])) * np.exp(1j * (i + 1))
    return seeds


def poly_roots(p: Poly, ctx: PrecisionContext | None = None, max_iter: int | None = None) -> np.ndarray:
    """All roots of ``p`` counted with multiplicity, polished at working precision.

    Seeds come from a double-precision companion solve; Aberth-Ehrlich
    iterations then run until each root's residual is below the Horner
    rounding-error bound or its correction stalls at roundoff level.
    A constant polynomial has no roots.
    """
    ctx = as_context(ctx)
    if p.is_zero:
        raise InvalidInputError("the zero polynomial has no well-defined roots")
    with ctx.scope():
        coeffs = np.array([mpc(a) for a in p.coeffs], dtype=object)
        nzero = 0
        while nzero < len(coeffs) - 1 and coeffs[nzero] == 0:
            nzero += 1
        coeffs = coeffs[nzero:]
        deg = len(coeffs) - 1
        roots = [mpc(0)] * nzero
        if deg == 0:
            return np.array(roots, dtype=object)
        if deg == 1:
            return np.array(roots + [-coeffs[0] / coeffs[1]], dtype=object)
        z = cvec(_seed_roots(coeffs, deg))
        dcoeffs = coeffs[1:] * np.arange(1, deg + 1, dtype=object)
        absc = vabs(coeffs)
        eps = ctx.eps
        active = np.ones(deg, dtype=bool)
        limit = max_iter or (200 + 4 * deg)
        prev = np.full(deg, None, dtype=object)
        noise = gmpy2.sqrt(eps)
        for _ in range(limit):
            idx = np.nonzero(active)[0]
            if len(idx) == 0:
                break
            za = z[idx]
            pv = horner(coeffs, za)
            dv = horner(dcoeffs, za)
            bound = horner(absc, vabs(za)) * (4 * deg * eps)
            # converged roots leave the active set but still repel the others
            done = vabs(pv) <= bound
            diff = za[:, None] - z[None, :]
            diff[np.arange(len(idx)), idx] = mpc(1)
            inv = 1 / diff
            inv[np.arange(len(idx)), idx] = mpc(0)
            s = inv.sum(axis=1)
            ratio = np.empty(len(idx), dtype=object)
            for k in range(len(idx)):
                if done[k]:
                    ratio[k] = mpc(0)
                    continue
                if dv[k] == 0:
                    ratio[k] = mpc(eps ** 0.5 * (1 + abs(za[k])))
                    continue
                nt = pv[k] / dv[k]
                den = 1 - nt * s[k]
                ratio[k] = nt / den if den != 0 else nt
            z[idx] = za - ratio
            step = vabs(ratio)
            small = (step <= vabs(za) * (8 * eps)).astype(bool)
            # clustered roots stall at the evaluation noise floor: stop once the
            # correction no longer halves and is already below sqrt(eps)|z|
            stalled = np.array(
                [p is not None and st > p / 2 and st <= noise * (1 + abs(zk)) for st, p, zk in zip(step, prev[idx], za)],
                dtype=bool,
            )
            prev[idx] = step
            active[idx[done | small | stalled]] = False
        else:
            resid = max(abs(v) for v in horner(coeffs, z))
            raise AccuracyError(f"root polishing did not converge (max residual {float(resid):.3e})", resid)
        return np.array(roots + list(z), dtype=object)
