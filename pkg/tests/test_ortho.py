import gmpy2
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given
from hypothesis import strategies as st

from cauchyapprox.conformal import SzegoData
from cauchyapprox.errors import DomainError, InvalidInputError
from cauchyapprox.kernel.poly import Poly, poly_roots
from cauchyapprox.kernel.precision import PrecisionContext, to_mpc
from cauchyapprox.model import MeasureSpec
from cauchyapprox.ortho import (
    VaryingWeight,
    orthogonal_poly,
    predict_ortho,
    second_kind,
    w_value,
    weight_moments,
)
from cauchyapprox.pade import classical_pade

from conftest import markov

OFF_CUT = [2, 0.3 + 0.5j, -1.2 + 0.1j, 1.5j, -0.2 - 0.4j]


@pytest.fixture(scope="module")
def arcsine_nu(arcsine):
    return VaryingWeight(arcsine.measure)


@pytest.fixture(scope="module")
def smooth_nu():
    return VaryingWeight(MeasureSpec.from_dict({"interval": ["-1", "1"], "h": "2+cos(t)"}))


def test_arcsine_degree_one(arcsine_nu, ctx):
    r = orthogonal_poly(arcsine_nu, 1, ctx)
    assert r.monic and not r.degree_deficient
    with ctx.scope():
        assert abs(r.u.coeffs[0]) < mpfr("1e-70") and r.u.coeffs[1] == 1


def test_arcsine_degree_two_is_monic_chebyshev(arcsine_nu, ctx):
    u = orthogonal_poly(arcsine_nu, 2, ctx).u
    with ctx.scope():
        assert abs(u.coeffs[0] + mpfr("0.5")) < mpfr("1e-70")
        assert abs(u.coeffs[1]) < mpfr("1e-70")


def test_degree_zero(arcsine_nu, ctx):
    r = orthogonal_poly(arcsine_nu, 0, ctx)
    assert r.u.degree == 0
    with ctx.scope():
        assert abs(r.gamma - 1) < mpfr("1e-70")


def test_negative_degree_rejected(arcsine_nu, ctx):
    with pytest.raises(InvalidInputError):
        orthogonal_poly(arcsine_nu, -1, ctx)


def test_divisor_root_on_the_cut_rejected(ctx):
    nu = VaryingWeight(markov("-1", "1").measure, divisor=Poly.from_values([-0.25, 1], ctx))
    with pytest.raises(DomainError):
        weight_moments(nu, 4, ctx)


@pytest.mark.parametrize("n", [3, 6])
def test_matches_pade_denominator(n, ctx):
    F = markov("-0.6", "0.8", "2+cos(t)")
    u = orthogonal_poly(VaryingWeight(F.measure), n, ctx).u
    q = classical_pade(F, n, ctx).q
    with ctx.scope():
        assert max(abs(a - b) for a, b in zip(u.coeffs, q.coeffs)) < mpfr("1e-50")


def test_divisor_weight_is_orthogonal(ctx):
    # dnu = (1 + t/3) / (z - 1.5)(z + 2i) dmu, a complex varying weight
    div = Poly.from_roots([mpc(1.5), mpc(0, -2)], ctx=ctx)
    nu = VaryingWeight(markov("-0.5", "0.7").measure, extra_smooth="1+t/3", divisor=div, m_shift=1)
    r = orthogonal_poly(nu, 7, ctx)
    assert r.monic and r.u.degree == 7
    assert r.residual <= 2.0 ** (-ctx.mantissa_bits / 4)


# ---------------------------------------------------------------- second kind

def test_second_kind_markov_identity(arcsine_nu, ctx):
    val = second_kind(arcsine_nu, Poly.one(), 2, ctx)
    with ctx.scope():
        assert abs(val - 1 / gmpy2.sqrt(mpfr(3))) < mpfr("1e-70")


@pytest.mark.parametrize("z", [0.4 + 0.9j, -1.7 + 0.2j, 0.1 - 0.3j])
def test_second_kind_two_forms_agree(smooth_nu, ctx, z):
    u = orthogonal_poly(smooth_nu, 6, ctx).u
    a = second_kind(smooth_nu, u, z, ctx)
    b = second_kind(smooth_nu, u, z, ctx, squared=True)
    with ctx.scope():
        assert abs(a - b) < mpfr("1e-50") * abs(a)


def test_second_kind_leading_laurent_term(smooth_nu, ctx):
    n = 5
    r = orthogonal_poly(smooth_nu, n, ctx)
    # the plain form cancels down to ~ |z|^-(n+1), so it is only usable at moderate z
    with ctx.scope():
        z = mpc(mpfr(10) ** 8, 0)
    val = second_kind(smooth_nu, r.u, z, ctx)
    with ctx.scope():
        # next Laurent term is O(1/z)
        assert abs(val * z ** (n + 1) - r.gamma) < mpfr("1e-6") * abs(r.gamma)
        z = mpc(0, mpfr(10) ** 20)
    val = second_kind(smooth_nu, r.u, z, ctx, squared=True)
    with ctx.scope():
        assert abs(val * z ** (n + 1) - r.gamma) < mpfr("1e-18") * abs(r.gamma)


def test_second_kind_refused_on_cut(arcsine_nu, ctx):
    with pytest.raises(DomainError):
        second_kind(arcsine_nu, Poly.one(), 0.25, ctx)


# ---------------------------------------------------------------- predictions

def test_chebyshev_strong_asymptotics_at_two(arcsine_nu, ctx):
    u = orthogonal_poly(arcsine_nu, 8, ctx).u
    sn, _ = predict_ortho(arcsine_nu, 8, 2, ctx=ctx)
    with ctx.scope():
        assert abs(u(mpc(2)) * sn - 1) < mpfr("0.05")


@pytest.mark.parametrize("n", [1, 4, 9])
def test_arcsine_gamma_prediction(arcsine_nu, ctx, n):
    r = orthogonal_poly(arcsine_nu, n, ctx)
    _, gamma = predict_ortho(arcsine_nu, n, 2, ctx=ctx)
    with ctx.scope():
        assert abs(gamma - mpfr(2) / 4**n) < mpfr("1e-70")
        # monic Chebyshev: int t^n u dw = 2/4^n exactly
        assert abs(r.gamma - gamma) < mpfr("1e-60")


def test_second_kind_ratio_for_smooth_weight(smooth_nu, ctx):
    n = 16
    u = orthogonal_poly(smooth_nu, n, ctx).u
    sz = SzegoData(smooth_nu.szego_weight(ctx), smooth_nu.base, ctx)
    for z in OFF_CUT[:3]:
        sn, gamma = predict_ortho(smooth_nu, n, z, ctx=ctx, szego=sz)
        rn = second_kind(smooth_nu, u, z, ctx)
        with ctx.scope():
            ratio = rn * w_value(smooth_nu.base, z, ctx) / (gamma * sn)
            assert abs(ratio - 1) < mpfr("0.1")


def _product_error(nu, n, ctx, sz):
    u = orthogonal_poly(nu, n, ctx).u
    worst = 0.0
    for z in OFF_CUT:
        sn, _ = predict_ortho(nu, n, z, ctx=ctx, szego=sz)
        with ctx.scope():
            worst = max(worst, float(abs(u(to_mpc(z)) * sn - 1)))
    return worst


def test_product_convergence_doubles(smooth_nu, ctx):
    sz = SzegoData(smooth_nu.szego_weight(ctx), smooth_nu.base, ctx)
    e5, e10 = _product_error(smooth_nu, 5, ctx, sz), _product_error(smooth_nu, 10, ctx, sz)
    assert e10 < e5


# ---------------------------------------------------------------- invariants

def _hausdorff_to_interval(roots, c, d):
    return max(abs(complex(r) - min(max(complex(r).real, c), d)) for r in roots)


def test_real_weight_has_zeros_on_the_interval(smooth_nu, ctx):
    u = orthogonal_poly(smooth_nu, 9, ctx).u
    assert _hausdorff_to_interval(poly_roots(u, ctx), -1, 1) < 1e-40


def test_zeros_approach_the_interval_for_complex_weight(ctx):
    nu = VaryingWeight(MeasureSpec.from_dict({"interval": ["-1", "1"], "h": "exp(2*i*t)*(2+cos(t))"}))
    dists = []
    for n in (4, 8, 16):
        u = orthogonal_poly(nu, n, ctx).u
        dists.append(_hausdorff_to_interval(poly_roots(u, ctx), -1, 1))
    assert dists[0] > dists[1] > dists[2]


@pytest.mark.parametrize("n", [4, 7, 12])
def test_exact_degree_for_smooth_positive_weight(smooth_nu, ctx, n):
    r = orthogonal_poly(smooth_nu, n, ctx)
    assert r.monic and not r.degree_deficient and r.u.degree == n


@given(
    st.integers(-3, 3),
    st.floats(0.05, 1.0),
    st.integers(2, 9),
)
def test_orthogonality_residual_bound(k, shift, n):
    ctx = PrecisionContext(192)
    nu = VaryingWeight(
        MeasureSpec.from_dict({"interval": ["-0.8", "0.5"], "h": f"exp({k}*i*t)*(1.5+sin(2*t))"}),
        divisor=Poly.from_values([complex(0, -1 - shift), 1], ctx),
    )
    r = orthogonal_poly(nu, n, ctx)
    assert r.residual <= 2.0 ** (-ctx.mantissa_bits / 4)
    # the residual field is recomputed independently from the returned moments
    with ctx.scope():
        mu = r.moments
        scale = max(abs(m) for m in mu)
        for j in range(n):
            s = sum(r.u.coeffs[i] * mu[i + j] for i in range(len(r.u.coeffs)))
            assert abs(s) <= mpfr(2) ** (-ctx.mantissa_bits // 4) * scale
