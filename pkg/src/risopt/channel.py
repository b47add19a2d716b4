"""Geometric mmWave channel generation for a BS -> IRSs -> users downlink.

BS-IRS links are rank-one line-of-sight outer products; IRS-user links are
sparse sums of random-angle paths.  All arrays are half-wavelength uniform
linear arrays laid out along the y axis, so line-of-sight spatial frequencies
follow from node positions.  Path-loss dB values are converted to linear
amplitude once, at sampling time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Scenario:
    """Static problem data: geometry, dimensions, budgets and seeds."""

    bs_position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    irs_positions: list[tuple[float, float, float]] = field(
        default_factory=lambda: [(0.0, 30.0, 20.0), (0.0, 60.0, 20.0), (0.0, 90.0, 20.0)])
    user_positions: list[tuple[float, float, float]] = field(
        default_factory=lambda: [(0.0, 30.0, 0.0), (0.0, 60.0, 0.0), (0.0, 90.0, 0.0)])
    n_t: int = 16
    n_r: int = 16
    n_paths_irs_user: int = 3
    beta0_db: float = 61.4
    c_los: float = 2.0
    c_nlos: float = 5.0
    noise_power_dbm: float = -100.0
    power_budget_dbm: float = 5.0
    gamma_bits: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.n_t, self.n_r, self.l_irs, self.k_users, self.n_paths_irs_user) < 1:
            raise ValueError("all counts must be >= 1")
        if not math.isfinite(self.power_budget_dbm):
            raise ValueError("power budget must be finite")
        if self.gamma_bits < 0:
            raise ValueError("minimum rate must be nonnegative")
        pts = [tuple(self.bs_position)] + [tuple(p) for p in self.irs_positions] \
            + [tuple(p) for p in self.user_positions]
        if len(set(pts)) != len(pts):
            raise ValueError("positions must be distinct")

    @property
    def l_irs(self) -> int:
        return len(self.irs_positions)

    @property
    def k_users(self) -> int:
        return len(self.user_positions)

    @property
    def noise_power_watts(self) -> float:
        return dbm_to_watts(self.noise_power_dbm)

    @property
    def power_budget_watts(self) -> float:
        return dbm_to_watts(self.power_budget_dbm)


@dataclass
class ChannelSet:
    """One sampled realization: g[l] is the N_r x N_t BS->IRS matrix, h[k][l]
    the length-N_r IRS->user vector, all in linear amplitude scale."""

    g: list[np.ndarray]
    h: list[list[np.ndarray]]

    def __post_init__(self):
        for mat in self.g:
            if not np.all(np.isfinite(mat)):
                raise ValueError("non-finite BS-IRS channel entries")
        for row in self.h:
            for vec in row:
                if not np.all(np.isfinite(vec)):
                    raise ValueError("non-finite IRS-user channel entries")

    @property
    def l_irs(self) -> int:
        return len(self.g)

    @property
    def k_users(self) -> int:
        return len(self.h)

    @property
    def n_r(self) -> int:
        return self.g[0].shape[0]

    @property
    def n_t(self) -> int:
        return self.g[0].shape[1]


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear_amplitude(db: float) -> float:
    """Amplitude factor sqrt(10^(-db/10)) for a path loss given in dB."""
    return 10.0 ** (-db / 20.0)


def steering_vector(n: int, spatial_freq: float) -> np.ndarray:
    """Unit-norm ULA response: element m is exp(j*pi*m*f)/sqrt(n)."""
    if n < 1:
        raise ValueError("array size must be >= 1")
    m = np.arange(n)
    return np.exp(1j * np.pi * m * spatial_freq) / math.sqrt(n)


def pathloss_db(d: float, c: float, beta0_db: float) -> float:
    """Distance-power law beta0 + 10*c*log10(d), with d in meters."""
    if d <= 0:
        raise ValueError("distance must be positive")
    return beta0_db + 10.0 * c * math.log10(d)


def _los_spatial_freq(src, dst) -> float:
    # Arrays run along the y axis; the spatial frequency of a LoS link is the
    # y component of its unit direction vector (sine of angle off broadside).
    delta = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    return float(delta[1] / np.linalg.norm(delta))


def _distance(src, dst) -> float:
    d = float(np.linalg.norm(np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)))
    return max(d, 1.0)  # clamp below 1 m where the log law diverges


def _complex_normal(rng: np.random.Generator) -> complex:
    z = rng.standard_normal(2)
    return complex(z[0], z[1]) / math.sqrt(2.0)


def sample_bs_irs_channel(scenario: Scenario, irs_index: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Rank-one LoS channel sqrt(1/beta)*alpha*a*b^H for one BS->IRS link."""
    if irs_index >= scenario.l_irs:
        raise IndexError("irs_index out of range")
    pos = scenario.irs_positions[irs_index]
    dist = _distance(scenario.bs_position, pos)
    beta_db = pathloss_db(dist, scenario.c_los, scenario.beta0_db)
    amp = db_to_linear_amplitude(beta_db)
    alpha = _complex_normal(rng)
    f = _los_spatial_freq(scenario.bs_position, pos)
    a = steering_vector(scenario.n_r, f)
    b = steering_vector(scenario.n_t, f)
    return amp * alpha * np.outer(a, b.conj())


def sample_irs_user_channel(scenario: Scenario, user_index: int, irs_index: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Sparse multipath IRS->user vector with per-path iid CN(0,1) gains and
    uniformly random departure angles."""
    if user_index >= scenario.k_users or irs_index >= scenario.l_irs:
        raise IndexError("user or IRS index out of range")
    n_paths = scenario.n_paths_irs_user
    dist = _distance(scenario.irs_positions[irs_index],
                     scenario.user_positions[user_index])
    beta_db = pathloss_db(dist, scenario.c_nlos, scenario.beta0_db)
    amp = db_to_linear_amplitude(beta_db) / math.sqrt(n_paths)
    h = np.zeros(scenario.n_r, dtype=complex)
    for _ in range(n_paths):
        alpha = _complex_normal(rng)
        angle = rng.uniform(-np.pi / 2.0, np.pi / 2.0)
        h += alpha * steering_vector(scenario.n_r, math.sin(angle))
    return amp * h


def sample_channels(scenario: Scenario, rng: np.random.Generator | None = None) -> ChannelSet:
    """Draw one full realization.  Identical scenario + seed gives an
    identical ChannelSet."""
    if rng is None:
        rng = np.random.default_rng(scenario.seed)
    g = [sample_bs_irs_channel(scenario, l, rng) for l in range(scenario.l_irs)]
    h = [[sample_irs_user_channel(scenario, k, l, rng) for l in range(scenario.l_irs)]
         for k in range(scenario.k_users)]
    return ChannelSet(g=g, h=h)


def effective_channel(channels: ChannelSet, phases: list[np.ndarray],
                      switch, user_index: int) -> np.ndarray:
    """Composite BS->user channel a_k (column vector of length N_t), i.e. the
    conjugate transpose of sum_l x_l h_kl^H Theta_l G_l."""
    if len(phases) != channels.l_irs or len(switch) != channels.l_irs:
        raise ValueError("phase/switch length must match IRS count")
    row = np.zeros(channels.n_t, dtype=complex)
    for l in range(channels.l_irs):
        if not switch[l]:
            continue
        u_l = np.asarray(phases[l])
        if u_l.size != channels.n_r:
            raise ValueError("phase vector length must match element count")
        h_kl = channels.h[user_index][l]
        # h^H Theta G with Theta = diag(u): elementwise weight then project.
        row += (h_kl.conj() * u_l) @ channels.g[l]
    return row.conj()
