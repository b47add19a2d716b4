"""Small conic-program solver over zero/nonneg/SOC/exp/PSD cones.

Solves
    minimize    c'x
    subject to  A x + s = b,   s in K
via ADMM operator splitting on the homogeneous self-dual embedding: each
iteration is one pre-factorized linear solve plus one projection per cone
block.  Problems are Ruiz-equilibrated before iterating (rows belonging to one
SOC/exp/PSD block share a single scale factor so cone geometry survives), and
convergence is always judged on KKT residuals of the *original* data.
Infeasibility and unboundedness are detected through the standard tau/kappa
certificate tests of the embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import cones

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITER = "max_iter"


@dataclass(frozen=True)
class ConeBlock:
    """One block of the slack vector: kind, packed dimension and, for PSD
    blocks, the matrix order."""

    kind: str
    dim: int
    order: int | None = None

    def __post_init__(self):
        if self.kind not in (cones.ZERO, cones.NONNEG, cones.SOC, cones.EXP, cones.PSD):
            raise ValueError(f"unknown cone kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("cone block dimension must be positive")
        if self.kind == cones.EXP and self.dim != 3:
            raise ValueError("exponential cone blocks have dimension 3")
        if self.kind == cones.PSD:
            if self.order is None or cones.svec_dim(self.order) != self.dim:
                raise ValueError("psd block dimension must equal order*(order+1)/2")


@dataclass
class ConicProblem:
    """Sparse conic program: minimize c'x s.t. Ax + s = b, s in the product
    cone described by ``cone_spec`` (blocks cover rows of A in order)."""

    c: np.ndarray
    a_mat: sp.csc_matrix
    b: np.ndarray
    cone_spec: list[ConeBlock]
    variable_map: dict[str, range] = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.a_mat = sp.csc_matrix(self.a_mat)
        m, n = self.a_mat.shape
        if self.c.size != n:
            raise ValueError("objective length does not match column count")
        if self.b.size != m:
            raise ValueError("rhs length does not match row count")
        total = sum(blk.dim for blk in self.cone_spec)
        if total != m:
            raise ValueError(f"cone dimensions sum to {total}, expected {m} rows")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.b))
                and np.all(np.isfinite(self.a_mat.data))):
            raise ValueError("problem data contains non-finite entries")

    @property
    def num_vars(self) -> int:
        return self.a_mat.shape[1]

    @property
    def num_rows(self) -> int:
        return self.a_mat.shape[0]

    def dump(self) -> str:
        """Plain-text dump (dimensions, COO triplets, cone list) for
        cross-checking against reference solvers."""
        coo = self.a_mat.tocoo()
        lines = [f"conic-problem rows={self.num_rows} cols={self.num_vars}"]
        lines.append("cones " + " ".join(
            f"{blk.kind}:{blk.dim}" + (f"(order={blk.order})" if blk.order else "")
            for blk in self.cone_spec))
        lines.append("c " + " ".join(f"{j}:{v:.17g}" for j, v in enumerate(self.c) if v != 0.0))
        lines.append("b " + " ".join(f"{i}:{v:.17g}" for i, v in enumerate(self.b) if v != 0.0))
        for i, j, v in zip(coo.row, coo.col, coo.data):
            lines.append(f"A {i} {j} {v:.17g}")
        for name, rng in self.variable_map.items():
            lines.append(f"var {name} {rng.start}:{rng.stop}")
        return "\n".join(lines) + "\n"


@dataclass
class ConicSolution:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    status: str
    primal_residual: float
    dual_residual: float
    gap: float
    objective: float
    iterations: int
    warm_state: tuple[np.ndarray, np.ndarray] | None = None


def _block_slices(cone_spec: list[ConeBlock]) -> list[tuple[slice, ConeBlock]]:
    out, start = [], 0
    for blk in cone_spec:
        out.append((slice(start, start + blk.dim), blk))
        start += blk.dim
    return out


def _project_dual_cone(v: np.ndarray, slices) -> np.ndarray:
    out = np.empty_like(v)
    for sl, blk in slices:
        out[sl] = cones.project_block_dual(v[sl], blk.kind, blk.order)
    return out


def _equilibrate(a_mat: sp.csc_matrix, cone_spec: list[ConeBlock], iters: int = 10):
    """Ruiz equilibration.  Returns (scaled A, d, e) with A_hat = diag(d) A diag(e);
    rows inside a SOC/exp/PSD block share one factor."""
    m, n = a_mat.shape
    d = np.ones(m)
    e = np.ones(n)
    a_s = a_mat.copy().asfptype()
    slices = _block_slices(cone_spec)
    for _ in range(iters):
        abs_a = sp.csr_matrix(abs(a_s))
        row_max = np.zeros(m)
        for i in range(m):
            seg = abs_a.data[abs_a.indptr[i]:abs_a.indptr[i + 1]]
            row_max[i] = seg.max() if seg.size else 1.0
        for sl, blk in slices:
            if blk.kind in (cones.SOC, cones.EXP, cones.PSD):
                row_max[sl] = max(row_max[sl].max(), 1e-12)
        row_max = np.where(row_max <= 1e-12, 1.0, row_max)
        dr = 1.0 / np.sqrt(row_max)
        abs_ac = sp.csc_matrix(abs(a_s))
        col_max = np.zeros(n)
        for j in range(n):
            seg = abs_ac.data[abs_ac.indptr[j]:abs_ac.indptr[j + 1]]
            col_max[j] = seg.max() if seg.size else 1.0
        col_max = np.where(col_max <= 1e-12, 1.0, col_max)
        de = 1.0 / np.sqrt(col_max)
        a_s = sp.csc_matrix(sp.diags(dr) @ a_s @ sp.diags(de))
        d *= dr
        e *= de
        if np.max(np.abs(dr - 1.0)) < 1e-3 and np.max(np.abs(de - 1.0)) < 1e-3:
            break
    return a_s, d, e


def solve(problem: ConicProblem, tol: float = 1e-7, max_iter: int = 50_000,
          warm_state: tuple[np.ndarray, np.ndarray] | None = None,
          check_every: int = 25, relax: float = 1.5) -> ConicSolution:
    """Run the operator-splitting iteration until KKT residuals of the
    original problem drop below ``tol`` or the iteration cap is reached."""
    m, n = problem.num_rows, problem.num_vars
    slices = _block_slices(problem.cone_spec)

    a_hat, d, e = _equilibrate(problem.a_mat, problem.cone_spec)
    b_hat = d * problem.b
    c_hat = e * problem.c
    # Balance rhs/cost scales so tau stays O(1).
    sigma = 1.0 / max(np.linalg.norm(b_hat), 1e-6)
    rho = 1.0 / max(np.linalg.norm(c_hat), 1e-6)
    b_hat = b_hat * sigma
    c_hat = c_hat * rho

    # Factor M = [[I, A'], [-A, I]] once; (I+Q) solves reduce to M solves
    # plus a rank-one Sherman-Morrison correction with h = (c, b).
    m_mat = sp.bmat([[sp.eye(n), a_hat.T], [-a_hat, sp.eye(m)]], format="csc")
    lu = spla.splu(m_mat)
    h = np.concatenate([c_hat, b_hat])
    g = lu.solve(h)
    h_g = 1.0 + h @ g

    a_orig = problem.a_mat
    b_orig, c_orig = problem.b, problem.c
    norm_b = 1.0 + np.linalg.norm(b_orig)
    norm_c = 1.0 + np.linalg.norm(c_orig)

    nm1 = n + m + 1
    if warm_state is not None and warm_state[0].size == nm1:
        u = warm_state[0].copy()
        v = warm_state[1].copy()
    else:
        u = np.zeros(nm1)
        v = np.zeros(nm1)
        u[-1] = 1.0

    def unscale(u_vec, v_vec):
        # x_hat = sigma*E^{-1}x, y_hat = rho*D^{-1}y, s_hat = sigma*D*s.
        tau = max(u_vec[-1], 1e-300)
        x = e * u_vec[:n] / (sigma * tau)
        y = d * u_vec[n:n + m] / (rho * tau)
        s = (v_vec[n:n + m] / np.maximum(d, 1e-300)) / (sigma * tau)
        return x, y, s

    best = None
    status = MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        w = u + v
        # (I + Q)^{-1} w  via Sherman-Morrison on M.
        rhs = w[:-1] - w[-1] * h
        p = lu.solve(rhs)
        ut_z = p - g * ((h @ p) / h_g)
        ut_tau = w[-1] + c_hat @ ut_z[:n] + b_hat @ ut_z[n:]
        ut = np.concatenate([ut_z, [ut_tau]])

        over = relax * ut + (1.0 - relax) * u
        to_proj = over - v
        u_new = np.empty(nm1)
        u_new[:n] = to_proj[:n]
        u_new[n:n + m] = _project_dual_cone(to_proj[n:n + m], slices)
        u_new[-1] = max(to_proj[-1], 0.0)
        v = v - over + u_new
        u = u_new

        if it % check_every == 0 or it == max_iter:
            tau = u[-1]
            kappa = v[-1]
            if tau > 1e-12 * max(1.0, kappa):
                x, y, s = unscale(u, v)
                pres = np.linalg.norm(a_orig @ x + s - b_orig) / norm_b
                dres = np.linalg.norm(a_orig.T @ y + c_orig) / norm_c
                cx = c_orig @ x
                by = b_orig @ y
                gap = abs(cx + by) / (1.0 + abs(cx) + abs(by))
                cand = (max(pres, dres, gap), x, y, s, pres, dres, gap, cx)
                if best is None or cand[0] < best[0]:
                    best = cand
                if pres <= tol and dres <= tol and gap <= tol:
                    status = OPTIMAL
                    break
            else:
                # tau collapsed: test certificates on unscaled rays.
                xr = e * u[:n] / sigma
                yr = d * u[n:n + m] / rho
                sr = (v[n:n + m] / np.maximum(d, 1e-300)) / sigma
                ctx = c_orig @ xr
                bty = b_orig @ yr
                if bty < -1e-12:
                    y_cert = yr / (-bty)
                    if np.linalg.norm(a_orig.T @ y_cert) <= tol:
                        status = INFEASIBLE
                        best = (np.inf, xr, y_cert, sr, np.inf, np.inf, np.inf, ctx)
                        break
                if ctx < -1e-12:
                    x_cert = xr / (-ctx)
                    s_cert = sr / (-ctx)
                    if np.linalg.norm(a_orig @ x_cert + s_cert) <= tol:
                        status = UNBOUNDED
                        best = (np.inf, x_cert, yr, s_cert, np.inf, np.inf, np.inf, -1.0)
                        break

    if best is None:
        x, y, s = unscale(u, v)
        cx = c_orig @ x
        best = (np.inf, x, y, s, np.inf, np.inf, np.inf, cx)
    _, x, y, s, pres, dres, gap, cx = best
    return ConicSolution(
        x=x, y=y, s=s, status=status,
        primal_residual=pres, dual_residual=dres, gap=gap,
        objective=cx, iterations=it, warm_state=(u.copy(), v.copy()),
    )
