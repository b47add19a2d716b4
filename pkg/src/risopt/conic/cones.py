"""Cone projections and symmetric/Hermitian matrix packing.

Every projection maps onto the *closure* of the primal cone.  Dual-cone
projections are obtained through the Moreau identity
``proj_dual(v) = v + proj_primal(-v)``, so only primal projections live here.
"""

from __future__ import annotations

import math

import numpy as np

# Cone kind tags used throughout the conic subpackage.
ZERO = "zero"
NONNEG = "nonneg"
SOC = "soc"
EXP = "exp"
PSD = "psd"

_SQRT2 = math.sqrt(2.0)


def svec_dim(order: int) -> int:
    """Packed length of a symmetric matrix of the given order."""
    return order * (order + 1) // 2


def svec(mat: np.ndarray) -> np.ndarray:
    """Pack a symmetric matrix into its scaled upper triangle.

    Off-diagonal entries are multiplied by sqrt(2) so that
    ``svec(X) @ svec(Y) == trace(X @ Y)`` for symmetric X, Y.
    """
    n = mat.shape[0]
    iu = np.triu_indices(n)
    out = np.asarray(mat, dtype=float)[iu].copy()
    out[iu[0] != iu[1]] *= _SQRT2
    return out


def smat(vec: np.ndarray, order: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    mat = np.zeros((order, order))
    iu = np.triu_indices(order)
    vals = np.asarray(vec, dtype=float).copy()
    off = iu[0] != iu[1]
    vals[off] /= _SQRT2
    mat[iu] = vals
    mat.T[iu] = vals
    return mat


def hermitian_embed(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian H.

    The embedding is PSD iff H is, and its trace is twice trace(H), so complex
    covariance constraints can ride on the real PSD cone.
    """
    h = np.asarray(h, dtype=complex)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def unembed_hermitian(x: np.ndarray) -> np.ndarray:
    """Recover a Hermitian matrix from a (possibly general) symmetric 2n x 2n
    matrix by averaging the embedding blocks.

    For X in the embedding subspace this inverts :func:`hermitian_embed`; for a
    general symmetric X it is the orthogonal projection onto that subspace,
    which preserves inner products against embedded Hermitian matrices.
    """
    m = x.shape[0]
    n = m // 2
    a = x[:n, :n]
    d = x[n:, n:]
    b = x[:n, n:]
    c = x[n:, :n]
    return (a + d) / 2.0 + 1j * (c - c.T) / 4.0 + 1j * (b.T - b) / 4.0


def project_nonneg(v: np.ndarray) -> np.ndarray:
    return np.maximum(v, 0.0)


def project_soc(v: np.ndarray) -> np.ndarray:
    """Project onto the second-order cone {(t, x): ||x|| <= t}."""
    v = np.asarray(v, dtype=float)
    t, x = v[0], v[1:]
    nx = np.linalg.norm(x)
    if nx <= t:
        return v.copy()
    if nx <= -t:
        return np.zeros_like(v)
    alpha = (t + nx) / 2.0
    out = np.empty_like(v)
    out[0] = alpha
    out[1:] = (alpha / nx) * x
    return out


def project_psd(mat: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero."""
    sym = (np.asarray(mat, dtype=float) + np.asarray(mat, dtype=float).T) / 2.0
    w, q = np.linalg.eigh(sym)
    if w[0] >= 0.0:
        return sym
    wc = np.maximum(w, 0.0)
    return (q * wc) @ q.T


def project_psd_packed(vec: np.ndarray, order: int) -> np.ndarray:
    return svec(project_psd(smat(vec, order)))


def _in_exp(r: float, s: float, t: float, tol: float = 1e-12) -> bool:
    if s > 0.0:
        return s * math.exp(min(r / s, 700.0)) <= t * (1.0 + tol) + tol
    return s >= -tol and r <= tol and t >= -tol


def _in_exp_dual(u: float, v: float, w: float, tol: float = 1e-12) -> bool:
    # Dual cone: closure of {(u,v,w): u < 0, -u*exp(v/u) <= e*w}.
    if u < 0.0:
        return -u * math.exp(min(v / u, 700.0)) <= math.e * w * (1.0 + tol) + tol
    return u <= tol and v >= -tol and w >= -tol


def project_exp(v: np.ndarray) -> np.ndarray:
    """Project a 3-vector onto the closure of the exponential cone
    {(x, y, z): y > 0, y*exp(x/y) <= z}.

    Case analysis: interior/polar/special-wedge points are handled in closed
    form; the remaining boundary case runs a damped Newton iteration on the
    two free coordinates of the boundary surface.
    """
    r, s, t = float(v[0]), float(v[1]), float(v[2])
    if _in_exp(r, s, t):
        return np.asarray(v, dtype=float).copy()
    if _in_exp_dual(-r, -s, -t):
        # v lies in the polar cone, so the projection is the origin.
        return np.zeros(3)
    if r <= 0.0 and s <= 0.0:
        return np.array([r, 0.0, max(t, 0.0)])
    # The cone is invariant under positive scaling, so project the
    # unit-scale point and scale back; this keeps exp() arguments tame.
    beta = max(abs(r), abs(s), abs(t), 1.0)
    p1, p2 = _exp_boundary_newton(r / beta, s / beta, t / beta)
    p3 = p2 * math.exp(min(p1 / p2, 700.0))
    return beta * np.array([p1, p2, p3])


def _exp_boundary_newton(r: float, s: float, t: float) -> tuple[float, float]:
    """Minimize (p1-r)^2 + (p2-s)^2 + (p2*exp(p1/p2)-t)^2 over p2 > 0 for
    inputs prescaled to unit magnitude.

    Full Newton with Levenberg damping and backtracking; the Hessian of the
    boundary residual is rank-one so the 2x2 system stays cheap.
    """

    def value(p1: float, p2: float) -> float:
        if p2 <= 0.0:
            return math.inf
        u = p1 / p2
        if u > 60.0 or math.log(p2) + u > 60.0:
            # Boundary point astronomically far from the unit ball.
            return math.inf
        y = p2 * math.exp(u)
        return (p1 - r) ** 2 + (p2 - s) ** 2 + (y - t) ** 2

    p1 = min(r, 1.0)
    p2 = max(s, 0.1)
    while not math.isfinite(value(p1, p2)):
        p1 -= 0.5
    best = (p1, p2, value(p1, p2))
    lam = 1e-8
    for _ in range(200):
        u = p1 / p2
        eu = math.exp(min(u, 60.0))
        y = p2 * eu
        f1, f2, f3 = p1 - r, p2 - s, y - t
        g1 = 2.0 * (f1 + f3 * eu)
        g2 = 2.0 * (f2 + f3 * eu * (1.0 - u))
        gnorm = math.hypot(g1, g2)
        if gnorm <= 1e-13:
            break
        # Hessian = J^T J + f3 * Hess(y); Hess(y) = (e^u/p2)*[[1,-u],[-u,u^2]]
        c = f3 * eu / p2
        h11 = 2.0 * (1.0 + eu * eu + c)
        h12 = 2.0 * (eu * eu * (1.0 - u) - c * u)
        h22 = 2.0 * (1.0 + (eu * (1.0 - u)) ** 2 + c * u * u)
        for _damp in range(60):
            a11, a12, a22 = h11 + lam, h12, h22 + lam
            det = a11 * a22 - a12 * a12
            if det <= 0.0:
                lam = max(lam * 10.0, 1e-8)
                continue
            d1 = (-g1 * a22 + g2 * a12) / det
            d2 = (-g2 * a11 + g1 * a12) / det
            q1, q2 = p1 + d1, p2 + d2
            if q2 <= 0.0:
                step = 0.9 * p2 / max(-d2, 1e-300)
                q1, q2 = p1 + step * d1, p2 + step * d2
            if value(q1, q2) < best[2]:
                p1, p2 = q1, q2
                best = (p1, p2, value(p1, p2))
                lam = max(lam / 5.0, 1e-12)
                break
            lam = max(lam * 10.0, 1e-8)
        else:
            break
    return best[0], best[1]


def project_block(vec: np.ndarray, kind: str, order: int | None = None) -> np.ndarray:
    """Project one slack block onto its primal cone."""
    if kind == ZERO:
        return np.zeros_like(vec)
    if kind == NONNEG:
        return project_nonneg(vec)
    if kind == SOC:
        return project_soc(vec)
    if kind == EXP:
        return project_exp(vec)
    if kind == PSD:
        return project_psd_packed(vec, order)
    raise ValueError(f"unknown cone kind {kind!r}")


def project_block_dual(vec: np.ndarray, kind: str, order: int | None = None) -> np.ndarray:
    """Project one block onto the dual cone via the Moreau identity."""
    if kind == ZERO:
        return np.asarray(vec, dtype=float).copy()
    if kind in (NONNEG, SOC, PSD):
        return project_block(vec, kind, order)
    return vec + project_exp(-np.asarray(vec, dtype=float))
