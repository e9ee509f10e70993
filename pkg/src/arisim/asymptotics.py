"""Closed-form SNR analysis for single-user single-antenna links: large-N
asymptotes for passive and active surfaces, the element-count crossover,
the distance condition, the exact optimal SU-SISO solutions, and the
element-level power model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system import SystemConfig


@dataclass(frozen=True)
class AsymptoticParams:
    """Inputs of the closed-form SNR expressions (linear units).

    ``p_bs_max``/``p_a_max`` are the active system's BS and RIS budgets,
    ``p_bs_p_max`` the passive system's BS budget; ``rho_f2``/``rho_g2`` the
    RIS-user and BS-RIS per-entry channel gains.  ``n`` may be real-valued
    for threshold analysis; physical configurations use integers.
    """

    n: float
    p_bs_max: float
    p_a_max: float
    p_bs_p_max: float
    sigma2: float
    sigma_v2: float
    rho_f2: float
    rho_g2: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("element count must be >= 1")
        vals = (self.p_bs_max, self.p_a_max, self.p_bs_p_max, self.sigma2,
                self.sigma_v2, self.rho_f2, self.rho_g2)
        if min(vals) <= 0.0:
            raise ValueError("powers and gains must be positive")


def snr_passive_asymptotic(p: AsymptoticParams) -> float:
    """Large-N SNR of the passive-surface SU-SISO link (proportional to N^2)."""
    return p.n ** 2 * p.p_bs_p_max * np.pi ** 2 * p.rho_f2 * p.rho_g2 / (16.0 * p.sigma2)


def snr_active_asymptotic(p: AsymptoticParams) -> float:
    """Large-N SNR of the active-surface SU-SISO link (proportional to N)."""
    den = 16.0 * (p.p_a_max * p.sigma_v2 * p.rho_f2
                  + p.p_bs_max * p.sigma2 * p.rho_g2
                  + p.sigma2 * p.sigma_v2)
    return p.n * p.p_bs_max * p.p_a_max * np.pi ** 2 * p.rho_f2 * p.rho_g2 / den


def crossover_elements(p: AsymptoticParams) -> float:
    """Element count above which the passive surface overtakes the active one
    (real-valued threshold; ceil for an integer count)."""
    den = (p.p_a_max * p.sigma_v2 * p.rho_f2
           + p.p_bs_max * p.sigma2 * p.rho_g2
           + p.sigma2 * p.sigma_v2)
    return (p.p_bs_max / p.p_bs_p_max) * p.p_a_max * p.sigma2 / den


def min_distance_active_wins(d_t: float, alpha: float, beta: float, l0: float,
                             p_max: float, sigma2: float, n: int) -> float:
    """Smallest RIS-user distance at which the active surface outperforms the
    passive one, under the equal-total-power split (passive BS = p_max,
    active BS = RIS = p_max/2) and sigma_v2 = sigma2.

    Returns ``inf`` when the condition cannot hold at any finite distance
    (the BS-RIS link alone is already too strong, so the passive N^2 gain
    wins everywhere).
    """
    if p_max <= 4.0 * n * sigma2:
        raise ValueError("requires p_max > 4*N*sigma2")
    bracket = (p_max - 4.0 * n * sigma2) / (2.0 * n * p_max * l0) - d_t ** (-alpha)
    if bracket <= 0.0:
        return np.inf
    return float(bracket ** (-1.0 / beta))


def su_siso_optimal(f: np.ndarray, g: np.ndarray,
                    cfg: SystemConfig) -> tuple[float, np.ndarray, float]:
    """Optimal SU-SISO configuration: full BS power, phase-aligning element
    phases theta_n = angle(f_n) - angle(g_n), and the common amplification
    that spends the whole reflect budget.  Returns (w, theta, p)."""
    w = float(np.sqrt(cfg.p_bs_max))
    theta = np.angle(f) - np.angle(g)
    p = float(np.sqrt(cfg.p_a_max /
                      (cfg.p_bs_max * np.sum(np.abs(g) ** 2) + len(g) * cfg.sigma_v2)))
    return w, theta, p


def snr_active_exact(f: np.ndarray, g: np.ndarray, cfg: SystemConfig) -> float:
    """Exact maximum SNR of the active-surface SU-SISO link for one channel
    realization (finite N)."""
    sfg = float(np.sum(np.abs(f) * np.abs(g)))
    sf2 = float(np.sum(np.abs(f) ** 2))
    sg2 = float(np.sum(np.abs(g) ** 2))
    n = len(f)
    num = cfg.p_bs_max * cfg.p_a_max * sfg ** 2
    den = (cfg.p_a_max * cfg.sigma_v2 * sf2
           + cfg.sigma2 * (cfg.p_bs_max * sg2 + n * cfg.sigma_v2))
    return num / den


def snr_passive_exact(f: np.ndarray, g: np.ndarray, p_bs: float, sigma2: float) -> float:
    """Exact maximum SNR of the passive-surface SU-SISO link for one channel
    realization."""
    return p_bs * float(np.sum(np.abs(f) * np.abs(g))) ** 2 / sigma2


def element_power_model(g_gain: float, p_x: float, sigma_v2: float,
                        sigma_s2: float, bandwidth: float = 1.0) -> float:
    """Element-level reflected power: P_y = G*P_x + G*sigma_v2 + sigma_s2.

    Noise terms are spectral densities multiplied by ``bandwidth`` (default
    1 Hz, matching densities quoted per Hz)."""
    return g_gain * p_x + (g_gain * sigma_v2 + sigma_s2) * bandwidth
