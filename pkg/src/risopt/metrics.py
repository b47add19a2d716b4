"""SINR, rates, transmit power and energy efficiency of a design point."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, effective_channel


@dataclass
class DesignState:
    """Optimization variables: beamformers w_k, per-IRS phase vectors u_l
    (diagonals of Theta_l) and the on/off switch vector x."""

    beamformers: list[np.ndarray]
    phases: list[np.ndarray]
    switch: np.ndarray

    def __post_init__(self):
        self.beamformers = [np.asarray(w, dtype=complex) for w in self.beamformers]
        self.phases = [np.asarray(u, dtype=complex) for u in self.phases]
        self.switch = np.asarray(self.switch, dtype=int)
        if not np.all((self.switch == 0) | (self.switch == 1)):
            raise ValueError("switch flags must be binary")

    def copy(self) -> "DesignState":
        return DesignState([w.copy() for w in self.beamformers],
                           [u.copy() for u in self.phases],
                           self.switch.copy())


@dataclass
class PowerModel:
    """Static power terms of the efficiency denominator."""

    p_rf_watts: float = 0.25
    p_irs_watts: float = 0.01
    n_rf: int = 16

    def __post_init__(self):
        if self.p_rf_watts < 0 or self.p_irs_watts < 0 or self.n_rf < 0:
            raise ValueError("power model terms must be nonnegative")


def sinr(channels: ChannelSet, state: DesignState, user_index: int,
         noise_power: float) -> float:
    """|a_k^H w_k|^2 over (interference + noise)."""
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    a_k = effective_channel(channels, state.phases, state.switch, user_index)
    gains = [abs(np.vdot(a_k, w)) ** 2 for w in state.beamformers]
    signal = gains[user_index]
    interference = sum(g for i, g in enumerate(gains) if i != user_index)
    return signal / (interference + noise_power)


def user_rate(sinr_value: float) -> float:
    """Shannon rate log2(1 + SINR) in bits/s/Hz."""
    if sinr_value < 0:
        raise ValueError("SINR must be nonnegative")
    return math.log2(1.0 + sinr_value)


def sum_rate(channels: ChannelSet, state: DesignState, noise_power: float) -> float:
    return sum(user_rate(sinr(channels, state, k, noise_power))
               for k in range(channels.k_users))


def transmit_power(state: DesignState) -> float:
    return float(sum(np.linalg.norm(w) ** 2 for w in state.beamformers))


def energy_efficiency(channels: ChannelSet, state: DesignState,
                      power_model: PowerModel, noise_power: float) -> float:
    """Sum-rate per watt counting transmit, RF-chain and active-IRS power."""
    n_r = channels.n_r
    irs_power = float(np.sum(state.switch)) * n_r * power_model.p_irs_watts
    denom = transmit_power(state) + power_model.n_rf * power_model.p_rf_watts + irs_power
    if denom <= 0:
        raise ValueError("power denominator must be positive")
    return sum_rate(channels, state, noise_power) / denom
