"""Core data types and exact performance evaluation: equivalent channels,
SINR, sum rate, and BS/RIS transmit powers.

Conventions
-----------
The RIS reflection state is a length-N vector ``psi`` with reflection matrix
``Psi = diag(conj(psi))``, so the n-th diagonal entry of ``Psi`` is
``p_n * exp(1j*theta_n) = conj(psi_n)``.  Every evaluation routine also
accepts a full (N, N) complex matrix in place of ``psi``; the matrix is then
used as the reflection matrix directly (needed for the self-interference
steady state, which is not diagonal).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class RisMode(enum.Enum):
    ACTIVE = "active"
    PASSIVE = "passive"
    NO_RIS = "no_ris"
    RANDOM_PHASE = "random_phase"


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions, power budgets and noise powers (all powers in Watts)."""

    m: int
    k: int
    n: int
    p_bs_max: float
    p_a_max: float
    sigma2: float
    sigma_v2: float
    mode: RisMode = RisMode.ACTIVE

    def __post_init__(self):
        if min(self.m, self.k, self.n) < 1:
            raise ValueError("dimensions must be >= 1")
        if min(self.p_bs_max, self.p_a_max) <= 0.0:
            raise ValueError("power budgets must be positive")
        if min(self.sigma2, self.sigma_v2) <= 0.0:
            raise ValueError("noise powers must be positive")

    @property
    def dynamic_noise(self) -> float:
        """RIS dynamic-noise power as seen in the SINR; zero for passive-type
        modes whose elements inject negligible noise."""
        return self.sigma_v2 if self.mode is RisMode.ACTIVE else 0.0


@dataclass(frozen=True)
class Precoder:
    """BS beamforming and RIS reflection state.

    ``w`` is stored as a (K, M) array whose row k is w_k; ``w.reshape(-1)``
    is the stacked length-MK vector.  ``psi`` follows the module convention
    Psi = diag(conj(psi)).
    """

    w: np.ndarray
    psi: np.ndarray

    @property
    def w_stacked(self) -> np.ndarray:
        return self.w.reshape(-1)


@dataclass(frozen=True)
class AuxiliaryState:
    """Fractional-programming auxiliary variables (one pair per user)."""

    rho: np.ndarray
    varpi: np.ndarray


@dataclass
class TrialResult:
    sum_rate: float
    sinr: np.ndarray
    iterations: int
    p_bs_realized: float
    p_a_realized: float
    converged: bool = True


def reflection_matrix(psi: np.ndarray) -> np.ndarray:
    """Materialize the (N, N) reflection matrix diag(conj(psi))."""
    return np.diag(np.conj(psi))


def _as_matrix_action(psi_like: np.ndarray):
    """Return (row_fn, mat) where row_fn(v_conj_rows) applies conj-row * Psi
    batched over rows; handles both vector and matrix reflection states."""
    psi_like = np.asarray(psi_like)
    if psi_like.ndim == 1:
        return lambda rows: rows * np.conj(psi_like)[None, :], None
    return lambda rows: rows @ psi_like, psi_like


def equivalent_channel(h_k: np.ndarray, f_k: np.ndarray, psi: np.ndarray,
                       G: np.ndarray) -> np.ndarray:
    """Equivalent BS-to-user channel hbar_k (returned untransposed, length M)
    with hbar_k^H = h_k^H + f_k^H Psi G."""
    rows = equivalent_channel_rows(f_k[None, :], psi, G) + h_k.conj()[None, :]
    return rows[0].conj()


def equivalent_channel_rows(f: np.ndarray, psi_like: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Reflected-link rows f_k^H Psi G for all users, shape (K, M)."""
    apply_psi, _ = _as_matrix_action(psi_like)
    return apply_psi(np.conj(f)) @ G


def _eval_links(channels, w, psi_like, cfg: SystemConfig):
    """Common SINR plumbing.

    Returns (S, noise) where S[k, j] = hbar_k^H w_j and noise[k] is the
    total non-interference noise power at user k.
    """
    w = np.asarray(w)
    hbar_rows = channels.h.conj() + equivalent_channel_rows(channels.f, psi_like, channels.G)
    S = hbar_rows @ w.T
    apply_psi, _ = _as_matrix_action(psi_like)
    fpsi = apply_psi(np.conj(channels.f))
    noise = np.sum(np.abs(fpsi) ** 2, axis=1) * cfg.dynamic_noise + cfg.sigma2
    return S, noise


def sinr_values(channels, w: np.ndarray, psi_like: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Per-user SINR gamma_k for beamformer rows ``w`` (K, M) and reflection
    state ``psi_like`` (vector or matrix)."""
    S, noise = _eval_links(channels, w, psi_like, cfg)
    p = np.abs(S) ** 2
    sig = np.diag(p)
    interf = p.sum(axis=1) - sig
    return sig / (interf + noise)


def sinr(k: int, channels, precoder: Precoder, cfg: SystemConfig) -> float:
    """SINR of user k under the given precoder."""
    return float(sinr_values(channels, precoder.w, precoder.psi, cfg)[k])


def sum_rate(channels, precoder: Precoder, cfg: SystemConfig) -> float:
    """Sum rate sum_k log2(1 + gamma_k) in bits/s/Hz."""
    return float(np.sum(np.log2(1.0 + sinr_values(channels, precoder.w, precoder.psi, cfg))))


def bs_power(w: np.ndarray) -> float:
    """BS transmit power sum_k ||w_k||^2."""
    return float(np.sum(np.abs(w) ** 2))


def ris_power(psi_like: np.ndarray, G: np.ndarray, w: np.ndarray, sigma_v2: float) -> float:
    """Reflect power of the RIS: sum_k ||Psi G w_k||^2 + ||Psi||_F^2 sigma_v2."""
    w = np.asarray(w)
    psi_like = np.asarray(psi_like)
    gw = G @ w.T                                   # (N, K)
    if psi_like.ndim == 1:
        amp = np.conj(psi_like)[:, None] * gw
        frob2 = float(np.sum(np.abs(psi_like) ** 2))
    else:
        amp = psi_like @ gw
        frob2 = float(np.sum(np.abs(psi_like) ** 2))
    return float(np.sum(np.abs(amp) ** 2) + frob2 * sigma_v2)


def realized_powers(channels, precoder: Precoder, cfg: SystemConfig) -> tuple[float, float]:
    """(P_BS, P_A) actually radiated by the given precoder."""
    pa = ris_power(precoder.psi, channels.G, precoder.w, cfg.dynamic_noise)
    return bs_power(precoder.w), pa


def make_trial_result(channels, precoder: Precoder, cfg: SystemConfig,
                      iterations: int, converged: bool = True) -> TrialResult:
    gam = sinr_values(channels, precoder.w, precoder.psi, cfg)
    p_bs, p_a = realized_powers(channels, precoder, cfg)
    return TrialResult(sum_rate=float(np.sum(np.log2(1.0 + gam))), sinr=gam,
                       iterations=iterations, p_bs_realized=p_bs,
                       p_a_realized=p_a, converged=converged)


def simulate_reception(channels, precoder: Precoder, cfg: SystemConfig,
                       rng: np.random.Generator, draws: int) -> np.ndarray:
    """Empirical per-user SINR from simulated symbol/noise draws.

    Simulates r_k = hbar_k^H sum_j w_j s_j + f_k^H Psi v + z_k with unit-power
    symbols, then returns mean desired power over mean interference-plus-noise
    power, separated per draw.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    S, _ = _eval_links(channels, precoder.w, precoder.psi, cfg)
    k, n = channels.k, channels.n
    apply_psi, _ = _as_matrix_action(precoder.psi)
    fpsi = apply_psi(np.conj(channels.f))          # (K, N) rows f_k^H Psi

    def cnorm(shape, var):
        return np.sqrt(var / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    s = cnorm((draws, k), 1.0)
    v = cnorm((draws, n), cfg.dynamic_noise) if cfg.dynamic_noise > 0 else np.zeros((draws, n), complex)
    z = cnorm((draws, k), cfg.sigma2)
    desired = np.diag(S)[None, :] * s              # (draws, K): hbar_k^H w_k s_k
    total = s @ S.T                                # (draws, K): sum_j hbar_k^H w_j s_j
    interf = total - desired
    ris_noise = v @ fpsi.T                         # (draws, K): f_k^H Psi v
    num = np.mean(np.abs(desired) ** 2, axis=0)
    den = np.mean(np.abs(interf + ris_noise + z) ** 2, axis=0)
    return num / den
