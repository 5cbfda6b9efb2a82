import math

import numpy as np
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given
from hypothesis import strategies as st

from cauchyapprox.aak import aak_approximant, hankel_matrix, outer_factor
from cauchyapprox.asymptotics import (
    PoleRingPrediction,
    fit_rate,
    argument_variation,
    interior_zero_bounds,
    match_pole_rings,
    predict_ma,
    predict_pade,
    ring_shrink,
    validate_outer_factor,
)
from cauchyapprox.conformal import SzegoData, Weight, _stilde, build_geometry, cut_point, map_values
from cauchyapprox.errors import InvalidInputError
from cauchyapprox.expression import Expression
from cauchyapprox.kernel.poly import Poly
from cauchyapprox.kernel.precision import to_mpc
from cauchyapprox.model import CauchyFunction, MeasureSpec
from cauchyapprox.ortho import VaryingWeight, weight_moments
from cauchyapprox.pade import InterpolationScheme

from conftest import markov

CLASSICAL = InterpolationScheme.classical()


def _reciprocal(q: Poly, ctx) -> Poly:
    with ctx.scope():
        return Poly(np.array([c.conjugate() for c in q.coeffs[::-1]], dtype=object))


def _disk_grid(ctx):
    pts = [0.9 * np.exp(2j * np.pi * k / 24) for k in range(24)] + [0.3 * np.exp(2j * np.pi * k / 8) for k in range(8)] + [0]
    with ctx.scope():
        return np.array([to_mpc(complex(z)) for z in pts], dtype=object)


# ---------------------------------------------------------------- predict_ma

def test_critical_value_without_rational_part(half, half_geom):
    p10, p11 = predict_ma(half, half_geom, 10), predict_ma(half, half_geom, 11)
    g = half_geom
    with g.ctx.scope():
        assert abs(p10.sigma - 2 * p10.g_mean / g.tau * g.rho**20) < mpfr("1e-70") * p10.sigma
        assert abs(p11.sigma / p10.sigma - g.rho**2) < mpfr("1e-70")
    assert p10.rings == []


def test_green_mean_two_routes(half, half_geom):
    # Riemann sum of log|T/S~| over the cut parametrized by Phi^+(t) = rho e^{i theta}
    g = half_geom
    G = predict_ma(half, g, 4).g_mean
    m = 8192
    theta = (np.arange(m) + 0.5) * np.pi / m
    t = cut_point(g, theta)
    with g.ctx.scope():
        logs = [math.log(float(abs(g.tau / _stilde(mpc(float(x)), g.c, g.d)))) for x in t]
    assert abs(float(G) - math.exp(np.mean(logs))) < 1e-8


def test_ring_factor_against_geometry_oracle(sec8, sec8_geom, oracle):
    ring = predict_ma(sec8, sec8_geom, 20).rings[0]
    assert ring.multiplicity == 6 and ring.center == 0.7 + 0.2j
    assert ring.shrink == pytest.approx(float(oracle["sec8_ring_factor_ma"]), rel=1e-12)


def test_measure_required(sec8_geom):
    F = CauchyFunction.from_dict({"rational": {"p": [["1", "0"]], "q_roots": [["0.2", "0", 1]]}})
    with pytest.raises(InvalidInputError):
        predict_ma(F, sec8_geom, 4)


def test_error_field_refused_with_density_zeros(ctx):
    F = markov("-0.5", "0.5", interior_zeros=[["0.1", "0.2"]])
    geom = build_geometry(F.measure, ctx=ctx)
    with pytest.raises(InvalidInputError):
        predict_ma(F, geom, 4, points=[0.3j])


def test_degree_below_rational_degree_rejected(sec8, sec8_geom):
    with pytest.raises(InvalidInputError):
        predict_ma(sec8, sec8_geom, 5)


# ---------------------------------------------------------------- predict_pade

@pytest.mark.parametrize("n", [3, 5, 9])
def test_classical_prediction_for_arcsine(arcsine, ctx, n):
    geom = build_geometry(arcsine.measure, ctx=ctx)
    err = predict_pade(arcsine, n, CLASSICAL, geom, points=[2]).error[0]
    with ctx.scope():
        sqrt3 = mpfr(3) ** mpfr("0.5")
        assert abs(err - 2 * (2 - sqrt3) ** (2 * n) / sqrt3) < mpfr("1e-70") * abs(err)


def test_pade_ring_factor_against_geometry_oracle(sec8, sec8_geom, oracle):
    ring = predict_pade(sec8, 20, CLASSICAL, sec8_geom).rings[0]
    assert ring.shrink == pytest.approx(float(oracle["sec8_ring_factor_pade"]), rel=1e-12)


def test_prediction_without_rational_part_has_no_r_factor(half, half_geom, ctx):
    n, z = 6, 0.4 + 1.1j
    pred = predict_pade(half, n, CLASSICAL, half_geom, points=[z])
    sz = SzegoData(Weight.from_measure(half.measure, ctx), half.measure, ctx)
    with ctx.scope():
        w, psi, _ = map_values(half.measure, to_mpc(z), ctx=ctx)
        s = sz.value(to_mpc(z))
        # classical nodes: r_n = psi^(2n)
        direct = 2 * sz.g * s * s * psi ** (2 * n) / w
        assert abs(pred.error[0] - direct) < mpfr("1e-60") * abs(direct)


def test_ma_and_pade_fields_differ_by_the_scheme_factor(half, half_geom, ctx):
    z = 0.3 + 0.6j
    ratios = []
    for n in (6, 7):
        ma = predict_ma(half, half_geom, n, points=[z]).field_modulus[0]
        pade = predict_pade(half, n, CLASSICAL, half_geom, points=[z]).error[0]
        with ctx.scope():
            ratios.append(ma / abs(pade))
    g = half_geom
    with ctx.scope():
        zz = to_mpc(z)
        psi = map_values(half.measure, zz, ctx=ctx)[1]
        step = (g.rho / abs(g.phi(zz))) ** 2 / abs(psi) ** 2
        assert abs(ratios[1] / ratios[0] - step) < mpfr("1e-30") * step


# ---------------------------------------------------------------- outer factor

def test_outer_factor_deviation_decreases_for_markov(half, half_hankel, half_geom, ctx):
    pts = _disk_grid(ctx)
    devs = []
    for n in (10, 20):
        v = aak_approximant(half_hankel, n).v
        devs.append(validate_outer_factor(pts, outer_factor(v, pts, ctx), half_geom).max_deviation)
    assert devs[1] / devs[0] < 1


@pytest.mark.slow
def test_rational_correction_shrinks_for_sextic(sec8_hankel, sec8_geom, ctx):
    pts = _disk_grid(ctx)
    with ctx.scope():
        qt = Poly.from_roots([1 / mpc(mpfr("0.7"), -mpfr("0.2"))] * 6, ctx=ctx)
    sizes = []
    for n in (12, 16, 20, 24):
        v = aak_approximant(sec8_hankel, n).v
        rep = validate_outer_factor(pts, outer_factor(v, pts, ctx), sec8_geom, qt)
        sizes.append(float(np.abs(rep.coefficients).max()))
        assert rep.residual < rep.max_deviation
    assert all(a > b for a, b in zip(sizes, sizes[1:]))


# ---------------------------------------------------------------- critical values and orthogonality

def test_critical_value_over_leading_coefficient(half, ctx, half_geom):
    """sigma_n |gamma_n|^-1 -> 1/T for gamma_n = int t^n q_n w_n / q~_n^2 dmu."""
    hank = hankel_matrix(half, 48, ctx)
    devs = []
    for n in (2, 4, 8):
        a = aak_approximant(hank, n)
        qt = _reciprocal(Poly.from_roots(a.poles, ctx=ctx), ctx)
        # v_n = b_n w_n, so w_n / q~_n^2 times q_n is v_n / q~_n
        mu = weight_moments(VaryingWeight(half.measure, divisor=qt), n + len(a.v.coeffs), ctx)
        with ctx.scope():
            gamma = sum(a.v.coeffs[i] * mu[n + i] for i in range(len(a.v.coeffs)))
            devs.append(float(abs(a.sigma * half_geom.tau / abs(gamma) - 1)))
            # q_n is orthogonal against lower powers for the same varying weight
            lower = max(abs(sum(a.v.coeffs[i] * mu[j + i] for i in range(len(a.v.coeffs)))) for j in range(n))
            assert lower < mpfr("1e-20") * abs(gamma)
    assert devs[0] > devs[1] > devs[2] and devs[2] < 1e-8


# ---------------------------------------------------------------- interior-zero bounds

@pytest.fixture(scope="module")
def zero_measure():
    spec = {"interval": ["-0.5", "0.5"], "h": "2+cos(t)", "interior_zeros": [["-0.2", "0.3"], ["0.1", "0.45"], ["0.35", "0.1"]]}
    return CauchyFunction(MeasureSpec.from_dict(spec))


@pytest.mark.parametrize("scheme", [InterpolationScheme.circle(2), CLASSICAL])
def test_upsilon_is_one_for_symmetric_schemes(zero_measure, ctx, scheme):
    geom = build_geometry(zero_measure.measure, ctx=ctx)
    bounds = interior_zero_bounds(zero_measure, geom, scheme, range(4, 9))
    assert len(bounds) == 3
    for b in bounds:
        assert abs(float(b.bound) - 1) < 1e-8 and b.kind == "upsilon" and b.n_range == (4, 8)
        assert b.satisfied


def test_upsilon_tends_to_one_at_the_endpoints(ctx):
    sd = SzegoData(Weight.from_expression(Expression("exp(2*i*t)*(2+cos(t))")), ("-0.5", "0.5"), ctx)
    with ctx.scope():
        far = [abs(abs(v) - 1) for v in sd.scf(mpfr("0"))]
        assert min(far) > mpfr("0.1")
        for end in ("-0.5", "0.5"):
            devs = []
            for k in (4, 8, 16):
                x = mpfr(end) * (1 - mpfr(10) ** -k)
                devs.append(max(abs(abs(v) - 1) for v in sd.scf(x)))
            assert devs[0] > devs[1] > devs[2] and devs[2] < mpfr("1e-7")


def test_psi_bound_against_formula_oracle(ctx, oracle):
    F = CauchyFunction(MeasureSpec.from_dict({"interval": ["-0.5", "0.5"], "h": "exp(i*t)", "interior_zeros": [["0.1", "0.2"]]}))
    geom = build_geometry(F.measure, ctx=ctx)
    (b,) = interior_zero_bounds(F, geom)
    ref = oracle["psi_bound"]
    assert b.kind == "psi"
    assert float(b.bound) == pytest.approx(float(ref["value"]), rel=1e-10)
    assert geom.s0 == pytest.approx(float(ref["s0"]), rel=1e-10)
    assert geom.s1 == pytest.approx(float(ref["s1"]), rel=1e-10)
    # sin(0.2 pi) = 0.588 exceeds the bound
    assert not b.satisfied


@pytest.mark.parametrize("expr,expected", [("exp(i*t)", 1.0), ("exp(3*i*t)", 3.0), ("2+cos(t)", 0.0)])
def test_argument_variation(ctx, expr, expected):
    fn = Expression(expr)
    with ctx.scope():
        c, d = mpfr("-0.5"), mpfr("0.5")
    assert argument_variation(fn, (), c, d, ctx) == pytest.approx(expected, abs=1e-9)


def test_bounds_reject_undeclared_points(zero_measure, ctx):
    geom = build_geometry(zero_measure.measure, ctx=ctx)
    with pytest.raises(InvalidInputError):
        interior_zero_bounds(zero_measure, geom, CLASSICAL, range(2, 4), points=[0.0])


def test_scheme_bounds_need_a_range(zero_measure, ctx):
    geom = build_geometry(zero_measure.measure, ctx=ctx)
    with pytest.raises(InvalidInputError):
        interior_zero_bounds(zero_measure, geom, CLASSICAL)


# ---------------------------------------------------------------- ring matching

@pytest.mark.parametrize("m", [1, 3, 6])
def test_synthetic_ring_has_zero_residuals(m):
    eta, r = 0.7 + 0.2j, 0.01
    pred = PoleRingPrediction(eta, m, 10, r, 0.7)
    poles = [eta + r * np.exp(2j * np.pi * k / m + 0.4j) for k in range(m)] + [0.1, -0.3 + 0.01j]
    res = match_pole_rings(poles, pred, 0.1)
    assert res.count_ok
    assert res.radius_ratio == pytest.approx(1, abs=1e-12)
    assert res.max_gap_error_deg < 1e-9
    assert res.a_min == pytest.approx(1, abs=1e-12) and res.a_max == pytest.approx(1, abs=1e-12)


def test_ring_count_mismatch_is_reported():
    pred = PoleRingPrediction(0.5j, 3, 4, 0.05, 0.5)
    res = match_pole_rings([0.5j + 0.05, 0.5j - 0.05], pred, 0.2)
    assert res.count == 2 and not res.count_ok
    empty = match_pole_rings([0.0], pred, 0.2)
    assert empty.count == 0 and math.isnan(empty.mean_radius)


def test_observed_shrink_of_synthetic_rings():
    pred = lambda n: PoleRingPrediction(0.3j, 2, n, 0.1 * 0.6**n, 0.6)
    matches = [match_pole_rings([0.3j + 0.1 * 0.6**n, 0.3j - 0.1 * 0.6**n], pred(n), 0.2) for n in (3, 4, 6)]
    assert ring_shrink(matches) == pytest.approx([0.6, 0.6])


@pytest.mark.parametrize("radius", [0.0, -0.1, math.nan])
def test_ring_radius_must_be_positive(radius):
    with pytest.raises(InvalidInputError):
        PoleRingPrediction(0.5, 1, 3, radius, 0.5)


def test_predicted_shrinks_lie_in_unit_interval(ctx):
    F = CauchyFunction.from_dict({
        "measure": {"interval": ["-0.6", "0.2"], "h": "1+t*t"},
        "rational": {"p": [["1", "0"]], "q_roots": [["0.5", "0.5", 2], ["-0.3", "-0.4", 1], ["0.1", "0.05", 3]]},
    })
    geom = build_geometry(F.measure, ctx=ctx)
    rings = predict_ma(F, geom, 8).rings + predict_pade(F, 8, CLASSICAL, geom).rings
    assert len(rings) == 6
    assert all(0 < r.shrink < 1 and r.radius > 0 for r in rings)


# ---------------------------------------------------------------- rate fits

@given(st.floats(0.05, 0.95), st.floats(1e-3, 1e3), st.integers(0, 30))
def test_fit_of_exact_geometric_sequence(k, a, start):
    ns = list(range(start, start + 7))
    fit = fit_rate(ns, [a * k**n for n in ns], math.log(k))
    assert fit.slope == pytest.approx(math.log(k), abs=1e-9)
    assert fit.relative_deviation < 1e-8


def test_fit_handles_values_below_double_range():
    ns = list(range(200, 206))
    vals = [mpfr(10) ** (-3 * n) for n in ns]
    assert fit_rate(ns, vals).slope == pytest.approx(-3 * math.log(10), rel=1e-12)


@pytest.mark.parametrize("vals", [[1, 2, 3, 4], [1, 2, 0, 4, 5], [1, -2, 3, 4, 5]])
def test_fit_rejects_bad_input(vals):
    with pytest.raises(InvalidInputError):
        fit_rate(range(len(vals)), vals)


# ---------------------------------------------------------------- scaling

def test_scaling_the_measure_scales_predictions(sec8, ctx):
    k = "3*exp(i*pi/7)"
    spec = sec8.to_dict()
    for piece in spec["measure"]["pieces"]:
        piece["h"] = f"({k})*({piece['h']})"
    scaled = CauchyFunction.from_dict(spec)
    geom = build_geometry(sec8.measure, ctx=ctx)
    base, big = predict_ma(sec8, geom, 12), predict_ma(scaled, geom, 12)
    with ctx.scope():
        assert abs(abs(big.g_mean / base.g_mean) - 3) < mpfr("1e-60")
        assert abs(big.sigma / base.sigma - 3) < mpfr("1e-60")
    assert [r.radius for r in big.rings] == pytest.approx([r.radius for r in base.rings], rel=1e-14)
    pb, ps = predict_pade(sec8, 12, CLASSICAL, geom), predict_pade(scaled, 12, CLASSICAL, geom)
    assert [r.radius for r in ps.rings] == pytest.approx([r.radius for r in pb.rings], rel=1e-14)
