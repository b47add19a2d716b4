"""Transmit beamforming via semidefinite relaxation plus successive convex
approximation, with Gaussian-randomization rank-one recovery.

The convex restriction solved per iteration maximizes sum(p_i - q_i)*log2(e)
subject to: per-user rate threshold, exponential-cone epigraphs of the total
received power, the first-order linearization of the interference bound at
q_bar, the transmit power ball, elementwise trace nonnegativity, and PSD
covariances (complex matrices ride the real cone through their Hermitian
embedding).

Two internal conditioning transforms keep the conic data O(1) without
changing the problem: p_i and q_i enter shifted by q_bar_i (their difference,
hence objective and rate rows, is unchanged), and callers are expected to
noise-normalize channels so sigma^2 is about 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import conic
from .channel import ChannelSet, effective_channel

LOG2E = math.log2(math.e)


class InfeasibleError(RuntimeError):
    """Raised when the rate constraints cannot be met from the given start."""


@dataclass
class ScaBeamState:
    """Iterate of the covariance-domain beamforming subproblem."""

    covariances: list[np.ndarray]
    p: np.ndarray
    q: np.ndarray
    q_bar: np.ndarray
    iteration: int
    objective_trace: list[float] = field(default_factory=list)


def update_q_bar(covariances: list[np.ndarray], eff_channels: list[np.ndarray],
                 sigma2) -> np.ndarray:
    """Interference log-levels q_i = ln(sum_{k != i} a_i^H W_k a_i + sigma_i^2)."""
    k_users = len(eff_channels)
    sig = np.broadcast_to(np.asarray(sigma2, dtype=float), (k_users,))
    out = np.empty(k_users)
    for i, a_i in enumerate(eff_channels):
        acc = sig[i]
        for k, w_cov in enumerate(covariances):
            if k != i:
                acc += float(np.real(np.vdot(a_i, w_cov @ a_i)))
        out[i] = math.log(acc)
    return out


def build_p5(eff_channels: list[np.ndarray], q_bar: np.ndarray, sigma2,
             gamma_bits, power: float) -> conic.ConicProblem:
    """Assemble the convex restriction as a sparse conic program.

    Variables: [svec(embed(W_1)), ..., svec(embed(W_K)), p'_1..p'_K,
    q'_1..q'_K] with p' = p - q_bar, q' = q - q_bar.
    """
    k_users = len(eff_channels)
    n_t = eff_channels[0].size
    sig = np.broadcast_to(np.asarray(sigma2, dtype=float), (k_users,))
    gam = np.broadcast_to(np.asarray(gamma_bits, dtype=float), (k_users,))
    q_bar = np.asarray(q_bar, dtype=float)
    if not np.all(np.isfinite(q_bar)):
        raise ValueError("linearization points must be finite")
    order = 2 * n_t
    d = conic.svec_dim(order)
    n = k_users * d + 2 * k_users
    p_off = k_users * d
    q_off = p_off + k_users

    a_emb = []
    for a_i in eff_channels:
        outer = np.outer(a_i, a_i.conj())
        a_emb.append(conic.svec(conic.hermitian_embed(outer)))
    eq = np.exp(q_bar)

    rows, rhs, blocks = [], [], []

    def row(entries, b_val):
        rows.append(entries)
        rhs.append(b_val)

    # Nonnegative cone: rate thresholds, linearized interference bounds,
    # power ball, trace nonnegativity.
    for i in range(k_users):
        r = {p_off + i: -1.0, q_off + i: 1.0}
        row(r, -gam[i] * math.log(2.0))
    for i in range(k_users):
        r = {q_off + i: -1.0}
        for k in range(k_users):
            if k != i:
                r[(k, "psd")] = 0.5 * a_emb[i] / eq[i]
        row(r, 1.0 - sig[i] / eq[i])
    diag_sv = conic.svec(np.eye(order))
    r = {(k, "psd"): 0.5 * diag_sv for k in range(k_users)}
    row(r, power)
    for k in range(k_users):
        for i in range(k_users):
            row({(k, "psd"): -0.5 * a_emb[i] / eq[i]}, 0.0)
    blocks.append(conic.ConeBlock(conic.NONNEG, len(rows)))

    # Exponential cones: e^{p'_i} <= (total received power + sigma^2)/e^{q_bar_i}.
    for i in range(k_users):
        row({p_off + i: -1.0}, 0.0)
        row({}, 1.0)
        r = {(k, "psd"): -0.5 * a_emb[i] / eq[i] for k in range(k_users)}
        row(r, sig[i] / eq[i])
        blocks.append(conic.ConeBlock(conic.EXP, 3))

    psd_first_row = len(rows)
    blocks.extend(conic.ConeBlock(conic.PSD, d, order=order) for _ in range(k_users))

    # Assemble sparse A from the dict-form rows, then append PSD identities.
    m = len(rows) + k_users * d
    data, ri, ci = [], [], []
    for idx, entries in enumerate(rows):
        for key, val in entries.items():
            if isinstance(key, tuple):
                k, _ = key
                base = k * d
                vec = val
                nz = np.nonzero(vec)[0]
                data.extend(vec[nz])
                ri.extend([idx] * nz.size)
                ci.extend(base + nz)
            else:
                data.append(val)
                ri.append(idx)
                ci.append(key)
    for k in range(k_users):
        for j in range(d):
            data.append(-1.0)
            ri.append(psd_first_row + k * d + j)
            ci.append(k * d + j)
    rhs.extend([0.0] * (k_users * d))

    a_mat = sp.csc_matrix((data, (ri, ci)), shape=(m, n))
    c = np.zeros(n)
    c[p_off:p_off + k_users] = -LOG2E
    c[q_off:q_off + k_users] = LOG2E
    var_map = {f"w_{k}": range(k * d, (k + 1) * d) for k in range(k_users)}
    var_map["p"] = range(p_off, p_off + k_users)
    var_map["q"] = range(q_off, q_off + k_users)
    return conic.ConicProblem(c=c, a_mat=a_mat, b=np.array(rhs),
                              cone_spec=blocks, variable_map=var_map)


def matched_filter_init(eff_channels: list[np.ndarray], power: float) -> list[np.ndarray]:
    """Equal-power-split beamformers aligned with each user's channel."""
    k_users = len(eff_channels)
    out = []
    for a_k in eff_channels:
        nrm = np.linalg.norm(a_k)
        if nrm < 1e-300:
            out.append(np.zeros_like(a_k))
        else:
            out.append(math.sqrt(power / k_users) * a_k / nrm)
    return out


def _rates_of(beamformers, eff_channels, sigma2) -> np.ndarray:
    k_users = len(eff_channels)
    sig = np.broadcast_to(np.asarray(sigma2, dtype=float), (k_users,))
    rates = np.empty(k_users)
    for i, a_i in enumerate(eff_channels):
        gains = [abs(np.vdot(a_i, w)) ** 2 for w in beamformers]
        denom = sum(g for k, g in enumerate(gains) if k != i) + sig[i]
        rates[i] = math.log2(1.0 + gains[i] / denom)
    return rates


def sca_beamforming(channels: ChannelSet, phases, switch, init=None,
                    tol: float = 1e-4, max_outer: int = 30,
                    gamma_bits: float | np.ndarray = 0.0,
                    power: float = 1.0, sigma2: float | np.ndarray = 1.0,
                    conic_tol: float = 1e-6) -> ScaBeamState:
    """Iterate the convex restriction until the objective stalls.

    The covariance variables are solved in the span of the effective channels
    (a lossless compression: every constraint depends on W_k only through
    a_i^H W_k a_i and trace(W_k), both preserved by PSD compression onto the
    span) and lifted back to full size on return.
    """
    k_users = channels.k_users
    eff = [effective_channel(channels, phases, switch, k) for k in range(k_users)]
    sig = np.broadcast_to(np.asarray(sigma2, dtype=float), (k_users,)).astype(float)
    gam = np.broadcast_to(np.asarray(gamma_bits, dtype=float), (k_users,)).astype(float)

    w0 = [np.asarray(w, dtype=complex) for w in init] if init is not None \
        else matched_filter_init(eff, power)
    total_p0 = sum(np.linalg.norm(w) ** 2 for w in w0)
    if total_p0 > power * (1 + 1e-8):
        raise InfeasibleError("initial beamformers exceed the power budget")
    rates0 = _rates_of(w0, eff, sig)
    if np.any(rates0 < gam - 1e-9):
        raise InfeasibleError(
            f"initial beamformers violate the rate threshold: {rates0} < {gam}")

    n_t = channels.n_t
    stack = np.column_stack(eff) if k_users else np.zeros((n_t, 0))
    if np.linalg.norm(stack) < 1e-300:
        # Dead channels: nothing to optimize, any zero-power point is optimal.
        zero = [np.zeros((n_t, n_t), dtype=complex) for _ in range(k_users)]
        qb = update_q_bar(zero, eff, sig)
        return ScaBeamState(zero, qb.copy(), qb.copy(), qb, 0, [0.0])

    q_mat, r_mat = np.linalg.qr(stack)
    keep = np.abs(np.diag(r_mat)) > 1e-12 * max(1.0, np.abs(np.diag(r_mat)).max())
    basis = q_mat[:, keep] if keep.any() else q_mat[:, :1]
    # Noise-normalize so every user's effective noise power is one.
    eff_red = [(basis.conj().T @ eff[k]) / math.sqrt(sig[k]) for k in range(k_users)]
    w_red = [basis.conj().T @ w for w in w0]
    cov_red = [np.outer(w, w.conj()) for w in w_red]
    q_bar = update_q_bar(cov_red, eff_red, 1.0)

    trace: list[float] = []
    warm = None
    it = 0
    r_dim = basis.shape[1]
    d = conic.svec_dim(2 * r_dim)
    p_sol = q_sol = q_bar.copy()
    for it in range(1, max_outer + 1):
        prob = build_p5(eff_red, q_bar, 1.0, gam, power)
        sol = conic.solve(prob, tol=conic_tol, warm_state=warm)
        if sol.status not in (conic.OPTIMAL, conic.MAX_ITER):
            raise RuntimeError(f"conic solve failed with status {sol.status}")
        warm = sol.warm_state
        new_cov = []
        for k in range(k_users):
            packed = sol.x[k * d:(k + 1) * d]
            emb = conic.smat(packed, 2 * r_dim)
            new_cov.append(conic.unembed_hermitian(emb))
        p_shift = sol.x[k_users * d:k_users * d + k_users]
        q_shift = sol.x[k_users * d + k_users:]
        objective = float(np.sum(p_shift - q_shift) * LOG2E)
        if trace and objective < trace[-1] - 10 * max(conic_tol, 1e-9):
            break  # numerical stall; keep the last accepted iterate
        cov_red = new_cov
        p_sol = p_shift + q_bar
        q_sol = q_shift + q_bar
        trace.append(objective)
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= tol * max(1.0, abs(trace[-1])):
            break
        q_bar = update_q_bar(cov_red, eff_red, 1.0)

    cov_full = [basis @ m_red @ basis.conj().T for m_red in cov_red]
    # Undo the noise normalization on the reported log-levels.
    ln_sig = np.log(sig)
    return ScaBeamState(covariances=cov_full, p=p_sol + ln_sig, q=q_sol + ln_sig,
                        q_bar=q_bar + ln_sig, iteration=it, objective_trace=trace)


def extract_rank_one(w_cov: np.ndarray, rng: np.random.Generator,
                     trials: int = 200, score=None,
                     incumbent: np.ndarray | None = None) -> np.ndarray:
    """Recover a beamformer from a PSD covariance.

    Exact eigen-decomposition when the covariance is numerically rank one,
    Gaussian randomization otherwise: draw ``trials`` samples shaped by the
    covariance, rescale each to power trace(W), and keep the best under
    ``score`` (higher is better).  ``incumbent``, when given, competes too,
    which lets callers guarantee monotone updates.
    """
    w_cov = np.asarray(w_cov, dtype=complex)
    vals, vecs = np.linalg.eigh((w_cov + w_cov.conj().T) / 2.0)
    lead = vals[-1]
    if lead < -1e-8 * max(1.0, abs(vals).max()):
        raise ValueError("covariance is not PSD within tolerance")
    if lead <= 0.0:
        return np.zeros(w_cov.shape[0], dtype=complex)
    second = vals[-2] if vals.size > 1 else 0.0
    principal = math.sqrt(max(lead, 0.0)) * vecs[:, -1]
    if second / lead <= 1e-6:
        return principal
    total = float(np.real(np.trace(w_cov)))
    root = (vecs * np.sqrt(np.maximum(vals, 0.0))) @ vecs.conj().T
    candidates = [principal * math.sqrt(total / max(np.linalg.norm(principal) ** 2, 1e-300))]
    for _ in range(trials):
        g = (rng.standard_normal(w_cov.shape[0])
             + 1j * rng.standard_normal(w_cov.shape[0])) / math.sqrt(2.0)
        z = root @ g
        nrm2 = np.linalg.norm(z) ** 2
        if nrm2 < 1e-300:
            continue
        candidates.append(z * math.sqrt(total / nrm2))
    if incumbent is not None:
        candidates.append(np.asarray(incumbent, dtype=complex))
    if score is None:
        score = lambda w: float(np.real(np.vdot(w, w_cov @ w)))
    return max(candidates, key=score)
