"""Working precision and multiprecision scalar/vector helpers.

Scalars are gmpy2 ``mpfr``/``mpc`` values; vectors and matrices are numpy
object arrays of them.  A value created outside an active precision scope
gets gmpy2's default 53 bits, so every public routine enters
``ctx.scope()`` before constructing numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from ..errors import InvalidInputError

__all__ = [
    "PrecisionContext",
    "DEFAULT_CONTEXT",
    "as_context",
    "to_mpfr",
    "to_mpc",
    "cvec",
    "czeros",
    "vabs",
    "vsqrt",
    "vexp",
    "vlog",
    "vconj",
    "vreal",
    "vimag",
    "to_complex_array",
    "format_real",
    "format_complex",
    "mp_pi",
]


@dataclass(frozen=True)
class PrecisionContext:
    """Binary working precision and the derived convergence tolerance.

    ``convergence_tol`` defaults to ``2**(-mantissa_bits/2)``; it is the
    threshold used by iterative refinements and cross-checks, while ``eps``
    is the unit roundoff used in rounding-error bounds.
    """

    mantissa_bits: int = 256
    convergence_tol: object = field(default=None)

    def __post_init__(self):
        bits = self.mantissa_bits
        if not isinstance(bits, int) or isinstance(bits, bool) or bits < 53:
            raise InvalidInputError("mantissa_bits must be an integer >= 53")
        tol = self.convergence_tol
        if tol is None:
            tol = gmpy2.exp2(gmpy2.mpfr(-(bits // 2), 64))
        else:
            tol = gmpy2.mpfr(tol, 64)
            if not (0 < tol < 1):
                raise InvalidInputError("convergence_tol must lie in (0, 1)")
        object.__setattr__(self, "convergence_tol", tol)

    def scope(self):
        """Context manager activating this precision for gmpy2 arithmetic."""
        return gmpy2.context(gmpy2.get_context(), precision=self.mantissa_bits)

    @property
    def eps(self):
        return gmpy2.exp2(gmpy2.mpfr(1 - self.mantissa_bits, 64))

    @property
    def digits(self) -> int:
        # enough significant digits for binary -> decimal -> binary round trips
        return 1 + math.ceil(self.mantissa_bits * math.log10(2))

    def with_bits(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(bits)


DEFAULT_CONTEXT = PrecisionContext()


def as_context(ctx) -> PrecisionContext:
    if ctx is None:
        return DEFAULT_CONTEXT
    if isinstance(ctx, PrecisionContext):
        return ctx
    if isinstance(ctx, int):
        return PrecisionContext(ctx)
    raise InvalidInputError(f"not a precision context: {ctx!r}")


def mp_pi():
    return gmpy2.const_pi()


def to_mpfr(x):
    """Real value at the active precision; strings are parsed exactly."""
    if isinstance(x, mpfr):
        return mpfr(x)
    if isinstance(x, mpc):
        if x.imag != 0:
            raise InvalidInputError(f"expected a real number, got {x}")
        return mpfr(x.real)
    if isinstance(x, (bool, np.bool_)):
        raise InvalidInputError("booleans are not numbers here")
    if isinstance(x, (int, np.integer)):
        return mpfr(int(x))
    if isinstance(x, Fraction):
        return mpfr(gmpy2.mpq(x.numerator, x.denominator))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise InvalidInputError(f"non-finite value {x}")
        return mpfr(float(x))
    if isinstance(x, str):
        try:
            v = mpfr(x.strip())
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse real number {x!r}") from exc
        if not gmpy2.is_finite(v):
            raise InvalidInputError(f"non-finite value {x!r}")
        return v
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag != 0:
            raise InvalidInputError(f"expected a real number, got {x}")
        return to_mpfr(x.real)
    raise InvalidInputError(f"cannot convert {x!r} to a real number")


def to_mpc(x):
    """Complex value at the active precision.

    Accepts numbers, decimal strings, ``[re, im]`` pairs and gmpy2 values.
    """
    if isinstance(x, mpc):
        return mpc(x)
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InvalidInputError(f"complex pair must have two entries: {x!r}")
        return mpc(to_mpfr(x[0]), to_mpfr(x[1]))
    if isinstance(x, (complex, np.complexfloating)):
        if not (math.isfinite(x.real) and math.isfinite(x.imag)):
            raise InvalidInputError(f"non-finite value {x}")
        return mpc(mpfr(float(x.real)), mpfr(float(x.imag)))
    if isinstance(x, str) and ("j" in x or "i" in x.replace("inf", "")):
        raise InvalidInputError(f"write complex numbers as [re, im] pairs: {x!r}")
    if isinstance(x, (Number, str, mpfr)):
        return mpc(to_mpfr(x), 0)
    raise InvalidInputError(f"cannot convert {x!r} to a complex number")


def cvec(values) -> np.ndarray:
    """Object array of mpc from an iterable."""
    vals = [to_mpc(v) for v in values]
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def czeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(mpc(0))
    # fill() shares one object; harmless because gmpy2 numbers are immutable
    return out


vabs = np.frompyfunc(abs, 1, 1)
vsqrt = np.frompyfunc(gmpy2.sqrt, 1, 1)
vexp = np.frompyfunc(gmpy2.exp, 1, 1)
vlog = np.frompyfunc(gmpy2.log, 1, 1)
vreal = np.frompyfunc(lambda z: z.real, 1, 1)
vimag = np.frompyfunc(lambda z: z.imag, 1, 1)
vconj = np.frompyfunc(lambda z: z.conjugate() if isinstance(z, mpc) else z, 1, 1)


def to_complex_array(a) -> np.ndarray:
    return np.array([complex(v) for v in np.ravel(a)], dtype=complex).reshape(np.shape(a))


def format_real(x, digits: int) -> str:
    """Deterministic scientific notation with ``digits`` significant digits."""
    if not isinstance(x, mpfr):
        x = mpfr(x)
    if gmpy2.is_zero(x):
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    e = exp - 1
    return f"{sign}{mant[0]}.{mant[1:]}e{'+' if e >= 0 else '-'}{abs(e):02d}"


def format_complex(z, digits: int) -> list[str]:
    if not isinstance(z, mpc):
        z = mpc(z)
    return [format_real(z.real, digits), format_real(z.imag, digits)]
