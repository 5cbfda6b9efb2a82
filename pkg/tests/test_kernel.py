import math

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given
from hypothesis import strategies as st

from cauchyapprox.errors import InvalidInputError
from cauchyapprox.kernel.linalg import matmul, conj_t, nullspace_solve, svd
from cauchyapprox.kernel.poly import Poly, poly_roots
from cauchyapprox.kernel.precision import PrecisionContext, format_real, to_mpc
from cauchyapprox.kernel.quadrature import jacobi_quadrature

from conftest import pole_distance


def _mat(rows, ctx):
    with ctx.scope():
        return np.array([[to_mpc(complex(v)) for v in r] for r in rows], dtype=object)


def _random_matrix(rng, m, n, ctx):
    return _mat(rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)), ctx)


def _fro(a):
    return gmpy2.sqrt(sum(gmpy2.norm(x) for x in np.ravel(a)))


# ---------------------------------------------------------------- precision

def test_precision_defaults():
    ctx = PrecisionContext()
    assert ctx.mantissa_bits == 256
    assert ctx.convergence_tol == gmpy2.exp2(-128)


@pytest.mark.parametrize("bits", [52, 0, -5, 64.0, True])
def test_precision_rejects_bad_bits(bits):
    with pytest.raises(InvalidInputError):
        PrecisionContext(bits)


def test_precision_minimum_is_double():
    assert PrecisionContext(53).mantissa_bits == 53


def test_format_real_round_trips(ctx):
    with ctx.scope():
        x = gmpy2.const_pi() / 7
        text = format_real(x, ctx.digits)
        assert gmpy2.mpfr(text) == x


# ---------------------------------------------------------------- roots

def test_roots_of_z2_minus_1(ctx):
    roots = poly_roots(Poly.from_values([-1, 0, 1], ctx), ctx)
    assert pole_distance(roots, [1, -1]) < 1e-70


def test_double_root(ctx):
    roots = poly_roots(Poly.from_values([1, -2, 1], ctx), ctx)
    assert pole_distance(roots, [1, 1]) < 1e-35


def test_roots_recovered_from_random_roots(ctx):
    rng = np.random.default_rng(8)
    true = rng.uniform(-1, 1, 8) + 1j * rng.uniform(-1, 1, 8)
    with ctx.scope():
        exact = [to_mpc(complex(r)) for r in true]
    p = Poly.from_roots(exact, ctx=ctx)
    found = poly_roots(p, ctx)
    with ctx.scope():
        worst = max(min(abs(f - e) for f in found) for e in exact)
    assert worst < mpfr("1e-20")


def test_zero_polynomial_rejected(ctx):
    with pytest.raises(InvalidInputError):
        poly_roots(Poly(np.array([], dtype=object)), ctx)


def test_root_residual_contract(ctx):
    rng = np.random.default_rng(3)
    p = Poly.from_values(rng.standard_normal(13) + 1j * rng.standard_normal(13), ctx)
    roots = poly_roots(p, ctx)
    assert len(roots) == 12
    with ctx.scope():
        nrm = p.norm()
        worst = max(abs(p(r)) / (nrm * (1 + abs(r)) ** p.degree) for r in roots)
    assert worst <= 10 * ctx.convergence_tol


@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=6, unique=True))
def test_roots_of_product_are_the_factors(pairs):
    ctx = PrecisionContext(256)
    pts = [complex(a, b) for a, b in pairs]
    if min((abs(x - y) for i, x in enumerate(pts) for y in pts[i + 1 :]), default=1) < 1e-3:
        return
    with ctx.scope():
        exact = [to_mpc(z) for z in pts]
    found = poly_roots(Poly.from_roots(exact, ctx=ctx), ctx)
    assert pole_distance(found, pts) < 1e-25


# ---------------------------------------------------------------- quadrature

def test_arcsine_total_mass_is_pi(ctx):
    t, w = jacobi_quadrature((-1, 1), mpfr(-0.5), mpfr(-0.5), 10, ctx)
    with ctx.scope():
        assert abs(w.sum() - gmpy2.const_pi()) < mpfr("1e-70")


def test_arcsine_second_moment(ctx):
    t, w = jacobi_quadrature((-1, 1), mpfr(-0.5), mpfr(-0.5), 10, ctx)
    with ctx.scope():
        assert abs((w * t * t).sum() - gmpy2.const_pi() / 2) < mpfr("1e-70")


def test_lebesgue_unit_interval(ctx):
    _, w = jacobi_quadrature((0, 1), 0, 0, 3, ctx)
    with ctx.scope():
        assert abs(w.sum() - 1) < mpfr("1e-70")


@pytest.mark.parametrize("alpha,beta", [(-1, 0), (0, -1.5)])
def test_quadrature_rejects_nonintegrable_weight(ctx, alpha, beta):
    with pytest.raises(InvalidInputError):
        jacobi_quadrature((-1, 1), alpha, beta, 4, ctx)


@given(
    st.integers(-9, 20).map(lambda k: k / 10),
    st.integers(-9, 20).map(lambda k: k / 10),
    st.integers(1, 12),
)
def test_quadrature_exact_to_degree_2n_minus_1(alpha, beta, n):
    ctx = PrecisionContext(192)
    c, d = mpfr("-0.3"), mpfr("0.8")
    t, w = jacobi_quadrature((c, d), alpha, beta, n, ctx)
    with ctx.scope():
        a, b = mpfr(alpha), mpfr(beta)
        # int_c^d (t-c)^a (d-t)^b (t-c)^k dt = (d-c)^(a+b+k+1) B(a+k+1, b+1)
        for k in range(2 * n):
            exact = (d - c) ** (a + b + k + 1) * gmpy2.gamma(a + k + 1) * gmpy2.gamma(b + 1) / gmpy2.gamma(a + b + k + 2)
            got = (w * (t - c) ** k).sum()
            assert abs(got - exact) <= 100 * ctx.convergence_tol * abs(exact)


# ---------------------------------------------------------------- SVD / null space

def test_svd_identity(ctx):
    s = svd(_mat(np.eye(3), ctx), ctx).s
    assert [float(x) for x in s] == [1.0, 1.0, 1.0]


def test_svd_diag(ctx):
    s = svd(_mat([[3, 0], [0, 1]], ctx), ctx).s
    with ctx.scope():
        assert abs(s[0] - 3) < mpfr("1e-70") and abs(s[1] - 1) < mpfr("1e-70")


def test_svd_reconstruction_random(ctx):
    a = _random_matrix(np.random.default_rng(10), 10, 10, ctx)
    res = svd(a, ctx)
    with ctx.scope():
        rec = matmul(res.u * res.s[None, :], conj_t(res.v))
        err = _fro(rec - a)
        assert err < mpfr("1e-60")
        assert all(res.s[i] >= res.s[i + 1] for i in range(len(res.s) - 1))


@given(st.floats(0, 2 * math.pi))
def test_svd_invariant_under_unimodular_scaling(phase):
    ctx = PrecisionContext(128)
    a = _random_matrix(np.random.default_rng(4), 5, 4, ctx)
    with ctx.scope():
        u = gmpy2.exp(mpc(0, phase))
        s1, s2 = svd(a, ctx).s, svd(a * u, ctx).s
        assert max(abs(x - y) for x, y in zip(s1, s2)) < 10 * ctx.convergence_tol * s1[0]


def test_nullspace_of_diag(ctx):
    x, _ = nullspace_solve(_mat([[1, 0], [0, 0]], ctx), ctx)
    with ctx.scope():
        assert abs(x[0]) < mpfr("1e-70") and abs(abs(x[1]) - 1) < mpfr("1e-70")


def test_nullspace_of_row(ctx):
    x, _ = nullspace_solve(_mat([[1, 1]], ctx), ctx)
    with ctx.scope():
        r = x[0] / x[1]
        assert abs(r + 1) < mpfr("1e-70")
        assert abs(abs(x[0]) - 1 / gmpy2.sqrt(2)) < mpfr("1e-70")


def test_nullspace_recovers_planted_kernel(ctx):
    rng = np.random.default_rng(11)
    a = _random_matrix(rng, 6, 7, ctx)
    k = _mat([rng.standard_normal(7) + 1j * rng.standard_normal(7)], ctx)[0]
    with ctx.scope():
        k = k / gmpy2.sqrt(sum(gmpy2.norm(v) for v in k))
        # project rows onto the orthogonal complement of k so that a k = 0
        kc = np.array([v.conjugate() for v in k], dtype=object)
        a = a - np.outer(np.dot(a, k), kc)
    x, resid = nullspace_solve(a, ctx)
    with ctx.scope():
        phase = np.dot(kc, x)
        assert abs(abs(phase) - 1) < mpfr("1e-50")
        assert resid < mpfr("1e-50")
