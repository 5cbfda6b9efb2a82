"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion k: PASS|FAIL`` line (also when it raises) and
then asserts every sub-check it reported.
"""
import time

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpc, mpfr

from cauchyapprox.aak import aak_approximant, aak_error_on_circle, outer_factor
from cauchyapprox.asymptotics import (
    fit_rate,
    interior_zero_bounds,
    match_pole_rings,
    predict_ma,
    predict_pade,
    ring_shrink,
    validate_outer_factor,
)
from cauchyapprox.conformal import blaschke_rk, build_geometry, condenser_map, map_values
from cauchyapprox.kernel.precision import PrecisionContext, to_mpc
from cauchyapprox.model import CauchyFunction, MeasureSpec, eval_cauchy
from cauchyapprox.ortho import VaryingWeight, orthogonal_poly, predict_ortho
from cauchyapprox.pade import InterpolationScheme, classical_pade
from cauchyapprox.presets import preset

from conftest import golden_poles, pole_distance

ETA = 0.7 + 0.2j


class _Verdict:
    def __init__(self, capsys):
        self.capsys = capsys
        self.k = None
        self.done = False

    def start(self, k: int) -> None:
        self.k = k

    def _print(self, line: str) -> None:
        with self.capsys.disabled():
            print(f"\ncriterion {self.k}: {line}")

    def __call__(self, k: int, checks: dict) -> None:
        self.k, self.done = k, True
        failed = [name for name, good in checks.items() if not good]
        self._print("FAIL (" + ", ".join(failed) + ")" if failed else "PASS")
        for name, good in checks.items():
            assert good, name


@pytest.fixture
def verdict(capsys):
    v = _Verdict(capsys)
    yield v
    if v.k is not None and not v.done:
        v._print("FAIL (raised before completing)")


def _chebyshev_monic(n: int, ctx) -> list:
    """Coefficients (lowest first) of T_n / 2**(n-1) via the three-term recurrence."""
    with ctx.scope():
        prev, cur = [mpfr(1)], [mpfr(0), mpfr(1)]
        for _ in range(1, n):
            nxt = [mpfr(0)] + [2 * a for a in cur]
            for i, a in enumerate(prev):
                nxt[i] -= a
            prev, cur = cur, nxt
        scale = mpfr(2) ** (n - 1) if n > 1 else mpfr(1)
        return [a / scale for a in cur] if n >= 1 else prev


# ---------------------------------------------------------------- 1

def test_criterion_1_chebyshev_denominators(verdict, arcsine):
    verdict.start(1)
    ctx = PrecisionContext(256)
    start = time.perf_counter()
    worst = mpfr(0)
    for n in range(1, 11):
        q = classical_pade(arcsine, n, ctx).q
        ref = _chebyshev_monic(n, ctx)
        with ctx.scope():
            worst = max([worst] + [abs(a - b) for a, b in zip(q.coeffs, ref)])
    elapsed = time.perf_counter() - start
    verdict(1, {"max coefficient error < 1e-30": worst < mpfr("1e-30"), "runtime < 10 s": elapsed < 10})


# ---------------------------------------------------------------- 2

def test_criterion_2_geometry(verdict):
    verdict.start(2)
    ctx = PrecisionContext(256)
    checks = {}
    for which in ("markov-half", "paper-sec8"):
        geom = build_geometry(preset(which).measure, ctx=ctx)
        c, d = geom.c, geom.d
        with ctx.scope():
            xs = [c + (d - c) * mpfr(j) / 65 for j in range(1, 65)]
            rho_dev = max(abs(abs(condenser_map(geom, mpc(x), "+")) - geom.rho) / geom.rho for x in xs[::8])
            weight_sum = abs(sum(geom.green_w) - 1)
            psi_dev = max(abs(geom.psi(x, "+") * geom.psi(x, "-") - 1) for x in xs)
            nodes = [mpc(2, 1), mpc(-0.3, 0.6), mpc(5, 0), mpc(0.1, -0.05)]
            r_dev = max(
                abs(blaschke_rk(nodes, 7, x, (c, d), ctx, side="+") * blaschke_rk(nodes, 7, x, (c, d), ctx, side="-") - 1)
                for x in xs
            )
        checks.update({
            f"{which}: rho vs |Phi+| on the cut < 1e-8": rho_dev < mpfr("1e-8"),
            f"{which}: green weights sum to 1": weight_sum < mpfr("1e-10"),
            f"{which}: psi+ psi- = 1": psi_dev < mpfr("1e-20"),
            f"{which}: r+ r- = 1": r_dev < mpfr("1e-20"),
        })
    verdict(2, checks)


# ---------------------------------------------------------------- 3

def test_criterion_3_constant_error_modulus(verdict, sec8_hankel):
    verdict.start(3)
    err = aak_error_on_circle(aak_approximant(sec8_hankel, 10), 1024)
    verdict(3, {"error modulus within 1% of sigma": err.deviation < 0.01})


# ---------------------------------------------------------------- 4

def test_criterion_4_aak_rate(verdict, half, half_hankel, half_geom):
    verdict.start(4)
    ctx = half_geom.ctx
    start = time.perf_counter()
    ns = list(range(10, 25))
    sig = [aak_approximant(half_hankel, n).sigma for n in ns]
    with ctx.scope():
        theory = 2 * float(gmpy2.log(half_geom.rho))
    fit = fit_rate(ns, sig, theory)
    elapsed = time.perf_counter() - start
    verdict(4, {
        "truncation error negligible": half_hankel.tail_bound < 1e-30,
        "slope within 2% of 2 log rho": fit.relative_deviation < 0.02,
        "runtime < 5 min": elapsed < 300,
    })


# ---------------------------------------------------------------- 5

def test_criterion_5_pade_rate(verdict, half, half_geom):
    verdict.start(5)
    ctx = half_geom.ctx
    with ctx.scope():
        z = mpc(2)
        target = abs(map_values(half.measure, z, ctx=ctx)[1]) ** 2
        value = eval_cauchy(half, z, ctx)
    ns = list(range(12, 25))
    errs, preds = {}, {}
    for n in ns:
        approx = classical_pade(half, n, ctx)
        pred = predict_pade(half, n, InterpolationScheme.classical(), half_geom, points=[z]).error[0]
        with ctx.scope():
            errs[n] = abs(value - approx(z))
            preds[n] = abs(pred)
    with ctx.scope():
        decay = [abs(errs[n + 1] / errs[n] / target - 1) for n in ns[:-1]]
        ratio = [preds[n] / errs[n] for n in ns if n >= 16]
    verdict(5, {
        "decay ratio within 1% of |psi(2)|^2": max(decay) < mpfr("0.01"),
        "prediction/observed in [0.8, 1.25]": all(mpfr("0.8") <= r <= mpfr("1.25") for r in ratio),
    })


# ---------------------------------------------------------------- 6

def _ring_checks(kind, runs, prediction, golden_name):
    checks = {}
    matches = {}
    radius = 0.25 * abs(ETA - 0.4)
    for n, poles in runs.items():
        matches[n] = match_pole_rings(poles, prediction(n), radius)
        checks[f"{kind} n={n} golden"] = pole_distance(poles, golden_poles(golden_name(n))) < 1e-6
    late = [n for n in runs if n >= 25]
    for n in late:
        checks[f"{kind} n={n} six ring poles"] = matches[n].count == 6
        checks[f"{kind} n={n} gaps within 15 deg"] = matches[n].max_gap_error_deg < 15
    shrink = ring_shrink([matches[n] for n in late])
    expected = prediction(late[0]).shrink
    for n, s in zip(late[1:], shrink):
        checks[f"{kind} n={n} shrink within 20%"] = abs(s / expected - 1) < 0.2
    return checks


@pytest.mark.slow
def test_criterion_6_pole_rings(verdict, sec8, sec8_geom, sec8_hankel_196):
    verdict.start(6)
    ctx = sec8_geom.ctx
    ns = range(21, 34)
    pade_runs = {n: [complex(p) for p in classical_pade(sec8, n, ctx).poles] for n in ns}
    aak_runs = {n: [complex(p) for p in aak_approximant(sec8_hankel_196, n).poles] for n in ns}
    scheme = InterpolationScheme.classical()
    checks = _ring_checks("pade", pade_runs, lambda n: predict_pade(sec8, n, scheme, sec8_geom).rings[0],
                          lambda n: f"sec8_pade_n{n}.csv")
    checks.update(_ring_checks("aak", aak_runs, lambda n: predict_ma(sec8, sec8_geom, n).rings[0],
                               lambda n: f"sec8_aak_n{n}_N196.csv"))
    with ctx.scope():
        psi = abs(map_values(sec8.measure, to_mpc(ETA), ctx=ctx)[1])
        ma = sec8_geom.rho / abs(condenser_map(sec8_geom, to_mpc(ETA)))
    checks["pade shrink is |psi(eta)|^(1/3)"] = abs(predict_pade(sec8, 25, scheme, sec8_geom).rings[0].shrink
                                                  - float(psi) ** (1 / 3)) < 1e-12
    checks["aak shrink is (rho/|Phi(eta)|)^(1/3)"] = abs(predict_ma(sec8, sec8_geom, 25).rings[0].shrink
                                                       - float(ma) ** (1 / 3)) < 1e-12
    verdict(6, checks)


# ---------------------------------------------------------------- 7

def test_criterion_7_product_convergence(verdict, ctx):
    verdict.start(7)
    F = preset("smooth-positive")
    nu = VaryingWeight(F.measure)
    points = [2, 0.3 + 0.5j, -1.2 + 0.1j, 1.5j, -0.2 - 0.4j]

    def worst(n):
        u = orthogonal_poly(nu, n, ctx).u
        with ctx.scope():
            return max(float(abs(u(to_mpc(z)) * predict_ortho(nu, n, z, ctx=ctx)[0] - 1)) for z in points)

    e10, e20, e24 = worst(10), worst(20), worst(24)
    verdict(7, {"n=20 below n=10": e20 < e10, "n=24 below 0.05": e24 < 0.05})


# ---------------------------------------------------------------- 8

def test_criterion_8_outer_factor(verdict, half_hankel, half_geom, ctx):
    verdict.start(8)
    pts = [0.9 * np.exp(2j * np.pi * k / 24) for k in range(24)] + [0.3 * np.exp(2j * np.pi * k / 8) for k in range(8)] + [0]
    with ctx.scope():
        grid = np.array([to_mpc(complex(z)) for z in pts], dtype=object)
    devs = []
    for n in (8, 12, 16, 20):
        v = aak_approximant(half_hankel, n).v
        devs.append(validate_outer_factor(grid, outer_factor(v, grid, ctx), half_geom).max_deviation)
    verdict(8, {"deviation decreases over n = 8, 12, 16, 20": all(a > b for a, b in zip(devs, devs[1:]))})


# ---------------------------------------------------------------- 9

def test_criterion_9_interior_zero_bounds(verdict, ctx, oracle):
    verdict.start(9)
    F = CauchyFunction(MeasureSpec.from_dict({
        "interval": ["-0.5", "0.5"], "h": "2+cos(t)",
        "interior_zeros": [["-0.2", "0.3"], ["0.1", "0.45"], ["0.35", "0.1"]],
    }))
    geom = build_geometry(F.measure, ctx=ctx)
    ups = interior_zero_bounds(F, geom, InterpolationScheme.circle(2), range(4, 9))
    G = CauchyFunction(MeasureSpec.from_dict({"interval": ["-0.5", "0.5"], "h": "exp(i*t)", "interior_zeros": [["0.1", "0.2"]]}))
    (psi,) = interior_zero_bounds(G, build_geometry(G.measure, ctx=ctx))
    ref = float(oracle["psi_bound"]["value"])
    verdict(9, {
        "three upsilon values within 1e-8 of 1": len(ups) == 3 and all(abs(float(b.bound) - 1) < 1e-8 for b in ups),
        "psi bound matches oracle to 1e-10": abs(float(psi.bound) / ref - 1) < 1e-10,
    })


# ---------------------------------------------------------------- 10

def test_criterion_10_scaling(verdict, sec8, ctx):
    verdict.start(10)
    base = CauchyFunction(sec8.measure)
    spec = base.to_dict()
    for piece in spec["measure"]["pieces"]:
        piece["h"] = f"(3*exp(i*pi/7))*({piece['h']})"
    scaled = CauchyFunction.from_dict(spec)
    n = 8
    pb, ps = classical_pade(base, n, ctx), classical_pade(scaled, n, ctx)
    ab, as_ = aak_approximant(base, n, 64, ctx), aak_approximant(scaled, n, 64, ctx)
    geom = build_geometry(base.measure, ctx=ctx)
    gb, gs = predict_ma(base, geom, n).g_mean, predict_ma(scaled, geom, n).g_mean
    with ctx.scope():
        tiny = mpfr("1e-20")
        checks = {
            "sigma scales by 3": abs(as_.sigma / ab.sigma - 3) < tiny,
            "G scales by 3": abs(abs(gs / gb) - 3) < tiny,
            "pade poles unchanged": _mp_distance(pb.poles, ps.poles) < tiny,
            "aak poles unchanged": _mp_distance(ab.poles, as_.poles) < tiny,
        }
    verdict(10, checks)


def _mp_distance(a, b):
    if len(a) != len(b):
        return mpfr("inf")
    return max(min(abs(x - y) for y in b) for x in a) if len(a) else mpfr(0)
