"""Benchmark schemes: WMMSE beamforming without any surface, WMMSE with a
random-phase passive surface, and a projected-FP passive surface."""

from __future__ import annotations

import enum

import numpy as np

from . import fp_solver
from .fp_solver import SolverOptions, build_workspace, solve_psi_qcqp, update_varpi
from .system import (AuxiliaryState, Precoder, RisMode, SystemConfig,
                     equivalent_channel_rows, make_trial_result, sinr_values)


class BaselineKind(enum.Enum):
    NO_RIS_WMMSE = "no_ris_wmmse"
    RANDOM_PHASE_WMMSE = "random_phase_wmmse"
    PASSIVE_RIS_FP = "passive_ris_fp"


def _wmmse_rate(channels_rows: np.ndarray, w: np.ndarray, sigma2: float) -> float:
    S = channels_rows @ w.T
    p = np.abs(S) ** 2
    sig = np.diag(p)
    gamma = sig / (p.sum(axis=1) - sig + sigma2)
    return float(np.sum(np.log2(1.0 + gamma)))


def wmmse_beamforming(effective_channels: np.ndarray, p_bs_max: float, sigma2: float,
                      opts: SolverOptions | None = None,
                      trace: list | None = None) -> np.ndarray:
    """Sum-rate beamforming by alternating receive filters, MSE weights and
    transmit filters, with the transmit-power multiplier pinned by bisection.

    ``effective_channels`` holds the conjugated channel rows h_k^H, shape
    (K, M).  Returns the stacked MK beamformer (rows reshaped row-major).
    """
    opts = opts or SolverOptions(max_iters=200, tol_rate=1e-5)
    rows = np.asarray(effective_channels)
    k, m = rows.shape
    h = rows.conj()                                   # column-form channels
    norms = np.linalg.norm(h, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    w = np.sqrt(p_bs_max / k) * h / safe[:, None]
    rate = _wmmse_rate(rows, w, sigma2)
    for _ in range(opts.max_iters):
        S = rows @ w.T                                # S[k, j] = h_k^H w_j
        denom = np.sum(np.abs(S) ** 2, axis=1) + sigma2
        u = np.diag(S) / denom
        mse = 1.0 - np.abs(np.diag(S)) ** 2 / denom
        v = 1.0 / np.maximum(mse, 1e-300)

        C = np.einsum('k,km,kn->mn', v * np.abs(u) ** 2, h, h.conj())
        d, Q = np.linalg.eigh(C)
        d = np.clip(d, 0.0, None)
        rhs = (v * u)[:, None] * h                    # target rows v_k u_k h_k
        coeff = rhs @ Q.conj()                        # (K, M) in eigenbasis
        c2 = np.sum(np.abs(coeff) ** 2, axis=0)

        d_floor = max(float(d[-1]), 1.0) * 1e-14
        singular = d <= d_floor
        mu = 0.0
        if np.any(c2[singular] > 1e-24 * max(float(np.sum(c2)), 1e-300)):
            need_mu = True
        else:
            p0 = float(np.sum(np.where(singular, 0.0, c2 / np.where(singular, 1.0, d) ** 2)))
            need_mu = p0 > p_bs_max * (1.0 + opts.tol_bisect)
        if need_mu:
            lo, hi = 0.0, float(np.sqrt(np.sum(c2) / p_bs_max))
            mu = hi
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                p = float(np.sum(c2 / (d + mid) ** 2))
                if p > p_bs_max:
                    lo = mid
                else:
                    hi = mid
                if abs(p - p_bs_max) <= opts.tol_bisect * p_bs_max:
                    mu = mid if p <= p_bs_max else hi
                    break
                mu = hi
            w = (coeff / (d + mu)[None, :]) @ Q.T
        else:
            y = np.where(singular[None, :], 0.0, coeff / np.where(singular, 1.0, d)[None, :])
            w = y @ Q.T
        new_rate = _wmmse_rate(rows, w, sigma2)
        if trace is not None:
            trace.append({"rate": new_rate, "mu": mu})
        if abs(new_rate - rate) <= opts.tol_rate * max(new_rate, 1e-12):
            rate = new_rate
            break
        rate = new_rate
    return w.reshape(-1)


def no_ris_baseline(channels, cfg: SystemConfig,
                    opts: SolverOptions | None = None) -> "TrialResult":
    """WMMSE on the direct channels only."""
    w = wmmse_beamforming(channels.h.conj(), cfg.p_bs_max, cfg.sigma2, opts)
    precoder = Precoder(w=w.reshape(channels.k, channels.m),
                        psi=np.zeros(channels.n, dtype=complex))
    eval_cfg = _as_mode(cfg, RisMode.NO_RIS)
    return make_trial_result(channels, precoder, eval_cfg, iterations=1)


def random_phase_baseline(channels, cfg: SystemConfig, rng: np.random.Generator,
                          opts: SolverOptions | None = None) -> "TrialResult":
    """Uniform random unit-modulus phases on the surface, then WMMSE on the
    resulting equivalent channels.  The surface is passive (no dynamic noise)."""
    eval_cfg = _as_mode(cfg, RisMode.RANDOM_PHASE)
    psi = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, channels.n))
    rows = channels.h.conj() + equivalent_channel_rows(channels.f, psi, channels.G)
    w = wmmse_beamforming(rows, cfg.p_bs_max, cfg.sigma2, opts)
    precoder = Precoder(w=w.reshape(channels.k, channels.m), psi=psi)
    return make_trial_result(channels, precoder, eval_cfg, iterations=1)


def passive_ris_fp(channels, cfg: SystemConfig, opts: SolverOptions | None = None,
                   rng: np.random.Generator | None = None,
                   trace: list | None = None) -> tuple[Precoder, "TrialResult"]:
    """Projected-FP passive surface: the active-surface FP loop with zero
    dynamic noise and no reflect-power constraint, with every reflection
    update relaxed to the radius-sqrt(N) ball and projected back to unit
    modulus.  Projection can break monotonicity, so the best iterate seen is
    returned, and the loop stops only when the incumbent has stopped
    improving (rate oscillations after projection are expected, not a sign
    of convergence).
    """
    opts = opts or SolverOptions()
    eval_cfg = _as_mode(cfg, RisMode.PASSIVE)
    n, k = channels.n, channels.k
    if rng is None:
        psi = np.ones(n, dtype=complex)
    else:
        psi = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
    h_norms = np.linalg.norm(channels.h, axis=1)
    safe = np.where(h_norms > 0.0, h_norms, 1.0)
    w = np.sqrt(cfg.p_bs_max / k) * channels.h / safe[:, None]
    precoder = Precoder(w=w, psi=psi)

    def rate_of(p):
        gam = sinr_values(channels, p.w, p.psi, eval_cfg)
        return float(np.sum(np.log2(1.0 + gam)))

    rate = rate_of(precoder)
    best = (rate, precoder)
    iterations = 0
    converged = False
    patience = 20
    stalled = 0
    for it in range(1, opts.max_iters + 1):
        iterations = it
        gamma = sinr_values(channels, precoder.w, precoder.psi, eval_cfg)
        varpi = update_varpi(channels, precoder, gamma, eval_cfg)
        aux = AuxiliaryState(rho=gamma.copy(), varpi=varpi)
        ws = build_workspace(channels, eval_cfg, precoder, aux)
        w_new, _, _ = fp_solver.solve_w_qcqp(ws.b, ws.A_blk, np.zeros_like(ws.A_blk),
                                             cfg.p_bs_max, np.inf, opts.tol_bisect)
        precoder = Precoder(w=w_new, psi=precoder.psi)
        ws2 = build_workspace(channels, eval_cfg, precoder, aux)
        psi_ball, _ = solve_psi_qcqp(ws2.upsilon, ws2.Omega, np.eye(n, dtype=complex),
                                     float(n), opts.tol_bisect)
        mags = np.abs(psi_ball)
        psi_new = np.where(mags > 0.0, psi_ball / np.where(mags > 0.0, mags, 1.0), 1.0 + 0j)
        precoder = Precoder(w=w_new, psi=psi_new)
        new_rate = rate_of(precoder)
        if trace is not None:
            trace.append({"iter": it, "rate": new_rate})
        if new_rate > best[0] + opts.tol_rate * max(best[0], 1e-12):
            best = (new_rate, precoder)
            stalled = 0
        else:
            if new_rate > best[0]:
                best = (new_rate, precoder)
            stalled += 1
            if stalled >= patience:
                converged = True
                break
        rate = new_rate
    _, precoder = best
    result = make_trial_result(channels, precoder, eval_cfg, iterations, converged)
    return precoder, result


def _as_mode(cfg: SystemConfig, mode: RisMode) -> SystemConfig:
    if cfg.mode is mode:
        return cfg
    return SystemConfig(m=cfg.m, k=cfg.k, n=cfg.n, p_bs_max=cfg.p_bs_max,
                        p_a_max=cfg.p_a_max, sigma2=cfg.sigma2,
                        sigma_v2=cfg.sigma_v2, mode=mode)
