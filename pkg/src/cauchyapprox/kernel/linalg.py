"""Dense complex linear algebra on object arrays of mpc.

The SVD is a one-sided Jacobi (Hestenes) iteration preconditioned by a
Householder QR with column pivoting.  Pivoted QR also supplies numerical
rank truncation, which keeps Hankel matrices of rapidly decaying moments
cheap: only the first ``rank`` singular triplets are formed.
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from ..errors import AccuracyError, InvalidInputError
from .precision import PrecisionContext, as_context, czeros, vconj

__all__ = ["QRCP", "qrcp", "solve", "svd", "SVD", "nullspace_solve", "matmul", "conj_t", "fft"]


def conj_t(a: np.ndarray) -> np.ndarray:
    return vconj(a).T


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.dot(a, b)


def _sqnorm_cols(a: np.ndarray) -> np.ndarray:
    return np.array([sum(gmpy2.norm(x) for x in a[:, j]) for j in range(a.shape[1])], dtype=object)


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=object)
    if a.ndim != 2:
        raise InvalidInputError("expected a 2-d matrix")
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = mpc(v)
    return out


@dataclass
class QRCP:
    """A[:, perm] = Q @ R with Q having orthonormal columns.

    ``R`` is k x n where k is the number of Householder steps performed;
    ``rank`` counts the diagonal entries above the truncation tolerance.
    """

    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray
    rank: int


def qrcp(a, ctx: PrecisionContext | None = None, rank_tol=None, thin_q: bool = True) -> QRCP:
    """Householder QR with column pivoting.

    With ``rank_tol`` set, elimination stops once every remaining column
    norm is below ``rank_tol`` times the largest initial column norm.
    """
    ctx = as_context(ctx)
    with ctx.scope():
        r = _as_matrix(a)
        m, n = r.shape
        perm = np.arange(n)
        norms = _sqnorm_cols(r)
        ref = max(norms) if n else mpfr(0)
        steps = min(m, n)
        reflectors = []
        rank = 0
        for i in range(steps):
            if i:
                norms = np.array([sum(gmpy2.norm(x) for x in r[i:, j]) for j in range(n)], dtype=object)
                norms[:i] = mpfr(-1)
            j = int(np.argmax(norms))
            if rank_tol is not None and norms[j] <= (rank_tol * rank_tol) * ref:
                break
            if norms[j] == 0:
                break
            if j != i:
                r[:, [i, j]] = r[:, [j, i]]
                perm[[i, j]] = perm[[j, i]]
            x = r[i:, i].copy()
            alpha = gmpy2.sqrt(norms[j])
            x0 = x[0]
            phase = x0 / abs(x0) if x0 != 0 else mpc(1)
            v = x
            v[0] = x0 + phase * alpha
            vnorm2 = sum(gmpy2.norm(t) for t in v)
            if vnorm2 != 0:
                vh = vconj(v)
                sub = r[i:, i:]
                coef = np.dot(vh, sub) * (2 / vnorm2)
                r[i:, i:] = sub - np.outer(v, coef)
            reflectors.append((v, vnorm2))
            r[i + 1 :, i] = mpc(0)
            rank += 1
        k = len(reflectors)
        ncols = k if thin_q else m
        q = czeros((m, ncols))
        for t in range(min(ncols, m)):
            q[t, t] = mpc(1)
        for i in range(k - 1, -1, -1):
            v, vnorm2 = reflectors[i]
            if vnorm2 == 0:
                continue
            sub = q[i:, :]
            coef = np.dot(vconj(v), sub) * (2 / vnorm2)
            q[i:, :] = sub - np.outer(v, coef)
        return QRCP(q=q, r=r[:k, :], perm=perm, rank=rank)


def solve(a, b, ctx: PrecisionContext | None = None, singular_tol=None):
    """Solve the square system a x = b via pivoted QR.

    Raises AccuracyError if the matrix is numerically singular, with the
    ratio |R_kk| / |R_00| as the estimate.
    """
    ctx = as_context(ctx)
    with ctx.scope():
        f = qrcp(a, ctx)
        n = f.r.shape[1]
        if f.r.shape[0] != n:
            raise InvalidInputError("solve requires a square matrix")
        tol = singular_tol if singular_tol is not None else ctx.eps * 64 * n
        diag = [abs(f.r[i, i]) for i in range(n)]
        if diag[0] == 0 or min(diag) <= tol * diag[0]:
            raise AccuracyError("matrix is numerically singular", min(diag) / diag[0] if diag[0] else 0)
        rhs = np.dot(conj_t(f.q), np.asarray(b, dtype=object))
        y = np.empty(n, dtype=object)
        for i in range(n - 1, -1, -1):
            y[i] = (rhs[i] - np.dot(f.r[i, i + 1 :], y[i + 1 :])) / f.r[i, i] if i + 1 < n else rhs[i] / f.r[i, i]
        x = np.empty(n, dtype=object)
        x[f.perm] = y
        return x


def _jacobi_orthogonalize(g: np.ndarray, w: np.ndarray, tol, max_sweeps: int = 60):
    """Rotate the columns of g (and w alongside) until pairwise orthogonal."""
    n = g.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        norms = [sum(gmpy2.norm(x) for x in g[:, j]) for j in range(n)]
        # columns at roundoff level of the largest carry no direction worth rotating
        floor = max(norms, default=0) * tol * tol
        for i in range(n - 1):
            for j in range(i + 1, n):
                a, b = norms[i], norms[j]
                if a <= floor or b <= floor:
                    continue
                gi, gj = g[:, i], g[:, j]
                gamma = np.dot(vconj(gi), gj)
                ag = abs(gamma)
                if ag <= tol * gmpy2.sqrt(a * b):
                    continue
                rotated = True
                phase = gamma / ag
                zeta = (b - a) / (2 * ag)
                t = 1 / (abs(zeta) + gmpy2.sqrt(1 + zeta * zeta))
                if zeta < 0:
                    t = -t
                c = 1 / gmpy2.sqrt(1 + t * t)
                s = c * t
                sp, spc = s * phase, s * phase.conjugate()
                g[:, i], g[:, j] = c * gi - spc * gj, sp * gi + c * gj
                wi, wj = w[:, i].copy(), w[:, j]
                w[:, i], w[:, j] = c * wi - spc * wj, sp * wi + c * wj
                # exact norm update of the 2x2 rotation
                norms[i], norms[j] = a - t * ag, b + t * ag
        if not rotated:
            return
    raise AccuracyError("one-sided Jacobi SVD did not converge")


@dataclass
class SVD:
    """m = u @ diag(s) @ v^H with singular values descending.

    ``u`` is m x r and ``v`` is n x r where r is the number of triplets kept.
    """

    s: np.ndarray
    u: np.ndarray
    v: np.ndarray


def svd(a, ctx: PrecisionContext | None = None, rank_tol=None) -> SVD:
    """Singular value decomposition of a complex matrix.

    With ``rank_tol`` the pivoted QR stage truncates at the numerical rank
    (relative to the largest column norm) and only those triplets are
    returned; otherwise min(m, n) triplets are returned.
    """
    ctx = as_context(ctx)
    with ctx.scope():
        a = _as_matrix(a)
        m, n = a.shape
        if m < n:
            t = svd(conj_t(a), ctx, rank_tol)
            return SVD(t.s, t.v, t.u)
        f = qrcp(a, ctx, rank_tol=rank_tol)
        k = f.r.shape[0]
        if k == 0:
            return SVD(np.empty(0, dtype=object), czeros((m, 0)), czeros((n, 0)))
        # work on R^H (n x k): its columns are what the Jacobi sweep orthogonalises
        g = conj_t(f.r)
        w = czeros((k, k))
        for i in range(k):
            w[i, i] = mpc(1)
        _jacobi_orthogonalize(g, w, ctx.eps * 4)
        s = np.array([gmpy2.sqrt(sum(gmpy2.norm(x) for x in g[:, j])) for j in range(k)], dtype=object)
        order = sorted(range(k), key=lambda j: -s[j])
        s = s[order]
        g = g[:, order]
        w = w[:, order]
        # R^H W = V_R diag(s)  =>  A P = Q W diag(s) V_R^H
        vr = czeros((n, k))
        for j in range(k):
            if s[j] != 0:
                vr[:, j] = g[:, j] / s[j]
        v = czeros((n, k))
        v[f.perm, :] = vr
        u = np.dot(f.q, w)
        return SVD(s, u, v)


def nullspace_solve(m, ctx: PrecisionContext | None = None):
    """Unit vector x minimising ||m x||, with the attained residual.

    The matrix is padded with zero rows to at least square shape so the
    right singular vector of the smallest singular value is always formed.
    """
    ctx = as_context(ctx)
    with ctx.scope():
        a = _as_matrix(m)
        rows, cols = a.shape
        if rows < cols:
            a = np.vstack([a, czeros((cols - rows, cols))])
        # Jacobi on the columns of R keeps the full right factor available
        f = qrcp(a, ctx)
        r = f.r.copy()
        w = czeros((cols, cols))
        for i in range(cols):
            w[i, i] = mpc(1)
        _jacobi_orthogonalize(r, w, ctx.eps * 4)
        norms = [sum(gmpy2.norm(x) for x in r[:, j]) for j in range(cols)]
        j = int(min(range(cols), key=lambda t: norms[t]))
        x = czeros(cols)
        x[f.perm] = w[:, j]
        nrm = gmpy2.sqrt(sum(gmpy2.norm(t) for t in x))
        x = x / nrm
        resid = gmpy2.sqrt(sum(gmpy2.norm(t) for t in np.dot(_as_matrix(m), x)))
        return x, resid


def fft(x: np.ndarray, inverse: bool = False, ctx: PrecisionContext | None = None) -> np.ndarray:
    """Radix-2 discrete Fourier transform of an object array (length 2**k).

    Forward: X_k = sum_j x_j exp(-2 pi i jk/M); inverse includes the 1/M.
    """
    ctx = as_context(ctx)
    m = len(x)
    if m & (m - 1):
        raise InvalidInputError("fft length must be a power of two")
    with ctx.scope():
        bits = m.bit_length() - 1
        rev = np.array([int(format(i, f"0{bits}b")[::-1], 2) if bits else 0 for i in range(m)])
        a = np.array([mpc(v) for v in np.asarray(x, dtype=object)[rev]], dtype=object)
        sign = 1 if inverse else -1
        two_pi = 2 * gmpy2.const_pi()
        tw = np.array(
            [mpc(gmpy2.cos(two_pi * k / m), sign * gmpy2.sin(two_pi * k / m)) for k in range(m // 2)],
            dtype=object,
        )
        size = 2
        while size <= m:
            half = size // 2
            step = m // size
            a = a.reshape(-1, size)
            t = a[:, half:] * tw[::step][:half]
            lo = a[:, :half]
            a = np.concatenate([lo + t, lo - t], axis=1).reshape(-1)
            size *= 2
        if inverse:
            a = a / m
        return a
