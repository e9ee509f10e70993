"""Joint BS beamforming and RIS reflect precoding via fractional programming.

The solver alternates four block updates: the two scalar auxiliary blocks in
closed form, then two QCQP solves -- the beamformer under the BS power budget
plus the reflect-power coupling constraint, and the reflection vector under
the reflect power budget.  Both QCQPs are solved through their Lagrangian
stationarity equations with multipliers pinned by bisection so that
complementary slackness holds to ``tol_bisect`` relative power error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .system import (AuxiliaryState, Precoder, RisMode, SystemConfig,
                     equivalent_channel_rows, make_trial_result, ris_power,
                     sinr_values, sum_rate)


class InfeasibleRisPowerError(RuntimeError):
    """The reflection state alone exceeds the RIS power budget (P_m < 0);
    no beamformer can satisfy the reflect-power constraint."""


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 100
    tol_rate: float = 1e-4
    tol_bisect: float = 1e-8
    grid_points: int = 16

    def __post_init__(self):
        if min(self.max_iters, self.grid_points) < 1 or min(self.tol_rate, self.tol_bisect) <= 0:
            raise ValueError("solver options must be positive")


@dataclass
class FpWorkspace:
    """Per-iteration quadratic forms of the two QCQP subproblems.

    The beamformer-side matrices are I_K-Kronecker block diagonal with one
    shared M x M block, so only the blocks are stored; ``b`` holds the K
    linear-term rows.
    """

    b: np.ndarray            # (K, M)
    A_blk: np.ndarray        # (M, M), PSD
    Xi_blk: np.ndarray       # (M, M), PSD
    p_m_max: float
    upsilon: np.ndarray      # (N,)
    Omega: np.ndarray        # (N, N), PSD
    Pi: np.ndarray           # (N, N), PD


def update_rho(xi: np.ndarray) -> np.ndarray:
    """Closed-form stationary point of the surrogate in the first auxiliary
    block: rho = (xi^2 + xi*sqrt(xi^2 + 4)) / 2, elementwise."""
    xi = np.asarray(xi, dtype=float)
    return (xi ** 2 + xi * np.sqrt(xi ** 2 + 4.0)) / 2.0


def _link_products(channels, precoder: Precoder, cfg: SystemConfig):
    hbar_rows = channels.h.conj() + equivalent_channel_rows(channels.f, precoder.psi, channels.G)
    S = hbar_rows @ precoder.w.T
    psi = np.asarray(precoder.psi)
    if psi.ndim == 1:
        fpsi2 = np.sum(np.abs(channels.f) ** 2 * (np.abs(psi) ** 2)[None, :], axis=1)
    else:
        fpsi2 = np.sum(np.abs(channels.f.conj() @ psi) ** 2, axis=1)
    denom_extra = fpsi2 * cfg.dynamic_noise + cfg.sigma2
    return hbar_rows, S, denom_extra


def update_varpi(channels, precoder: Precoder, rho: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Closed-form second auxiliary block:
    varpi_k = sqrt(1+rho_k) hbar_k^H w_k / (sum_j |hbar_k^H w_j|^2 + noise_k)."""
    _, S, extra = _link_products(channels, precoder, cfg)
    D = np.sum(np.abs(S) ** 2, axis=1) + extra
    return np.sqrt(1.0 + rho) * np.diag(S) / D


def surrogate_value(channels, precoder: Precoder, aux: AuxiliaryState, cfg: SystemConfig) -> float:
    """Value of the concave surrogate objective (natural-log rate units)."""
    _, S, extra = _link_products(channels, precoder, cfg)
    D = np.sum(np.abs(S) ** 2, axis=1) + extra
    rho, varpi = aux.rho, aux.varpi
    g = 2.0 * np.sqrt(1.0 + rho) * np.real(np.conj(varpi) * np.diag(S)) - np.abs(varpi) ** 2 * D
    return float(np.sum(np.log(1.0 + rho) - rho + g))


def build_workspace(channels, cfg: SystemConfig, precoder: Precoder,
                    aux: AuxiliaryState) -> FpWorkspace:
    """Assemble both subproblems' quadratic forms for the current iterate."""
    w, psi = precoder.w, np.asarray(precoder.psi)
    rho, varpi = aux.rho, aux.varpi
    aw = np.abs(varpi) ** 2
    sq = np.sqrt(1.0 + rho)

    hbar_rows = channels.h.conj() + equivalent_channel_rows(channels.f, psi, channels.G)
    hbar = hbar_rows.conj()
    b = sq[:, None] * varpi[:, None] * hbar
    A_blk = np.einsum('k,km,kn->mn', aw, hbar, hbar.conj())
    Xi_blk = channels.G.conj().T @ ((np.abs(psi) ** 2)[:, None] * channels.G)
    p_m_max = cfg.p_a_max - cfg.dynamic_noise * float(np.sum(np.abs(psi) ** 2))

    gw = channels.G @ w.T                                    # (N, K)
    T = channels.f.conj()[:, None, :] * gw.T[None, :, :]     # (K, K, N): t_kj = f_k^* o (G w_j)
    w_sum = np.einsum('jm,jn->mn', w, w.conj())
    first = np.einsum('k,kkn->n', sq * np.conj(varpi), T)
    second = np.einsum('k,kn->n', aw,
                       channels.f.conj() * (channels.G @ (w_sum @ channels.h.T)).T)
    upsilon = first - second
    Omega = (cfg.dynamic_noise * np.diag(np.einsum('k,kn->n', aw, np.abs(channels.f) ** 2))
             + np.einsum('k,kjn,kjm->nm', aw, T, T.conj()))
    Pi = np.diag(np.sum(np.abs(gw) ** 2, axis=1) + cfg.dynamic_noise)
    return FpWorkspace(b=b, A_blk=A_blk, Xi_blk=Xi_blk, p_m_max=p_m_max,
                       upsilon=upsilon, Omega=Omega, Pi=Pi)


# ---------------------------------------------------------------------------
# QCQP solvers
# ---------------------------------------------------------------------------

_MAX_BISECT = 200


def solve_psi_qcqp(upsilon: np.ndarray, Omega: np.ndarray, Pi: np.ndarray,
                   budget: float, tol: float) -> tuple[np.ndarray, float]:
    """max 2 Re{psi^H upsilon} - psi^H Omega psi  s.t.  psi^H Pi psi <= budget.

    Pi must be Hermitian positive definite.  Whitening by Pi reduces the
    multiplier search to a scalar secular equation, so complementary
    slackness is met to ``tol`` relative power error with trivial cost per
    bisection step.
    """
    L = scipy.linalg.cholesky(Pi, lower=True)
    tmp = scipy.linalg.solve_triangular(L, Omega, lower=True)
    S = scipy.linalg.solve_triangular(L, tmp.conj().T, lower=True).conj().T
    S = (S + S.conj().T) / 2.0
    d, U = np.linalg.eigh(S)
    d = np.clip(d, 0.0, None)
    c = U.conj().T @ scipy.linalg.solve_triangular(L, upsilon, lower=True)
    c2 = np.abs(c) ** 2

    def back(y):
        return scipy.linalg.solve_triangular(L.conj().T, U @ y, lower=False)

    if not np.any(c2 > 0.0):
        return np.zeros_like(upsilon), 0.0

    d_floor = max(float(d[-1]), 1.0) * 1e-14
    singular = d <= d_floor
    unbounded = bool(np.any(c2[singular] > 1e-24 * float(np.sum(c2))))
    if not unbounded:
        y0 = np.where(singular, 0.0, c / np.where(singular, 1.0, d))
        if float(np.sum(np.abs(y0) ** 2)) <= budget * (1.0 + tol):
            return back(y0), 0.0

    def power(mu):
        return float(np.sum(c2 / (d + mu) ** 2))

    lo, hi = 0.0, float(np.sqrt(np.sum(c2) / budget))
    mu = hi
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        p = power(mid)
        if p > budget:
            lo = mid
        else:
            hi = mid
        if abs(p - budget) <= tol * budget:
            mu = mid if p <= budget else hi
            break
        mu = hi
    return back(c / (d + mu)), mu


def update_psi(workspace: FpWorkspace, cfg: SystemConfig,
               opts: SolverOptions) -> tuple[np.ndarray, float]:
    """Reflect-precoding block: psi = (Omega + mu*Pi)^(-1) upsilon with the
    smallest mu >= 0 meeting the reflect power budget."""
    return solve_psi_qcqp(workspace.upsilon, workspace.Omega, workspace.Pi,
                          cfg.p_a_max, opts.tol_bisect)


def solve_w_qcqp(b: np.ndarray, A_blk: np.ndarray, Xi_blk: np.ndarray,
                 p1_budget: float, p2_budget: float,
                 tol: float) -> tuple[np.ndarray, float, float]:
    """Blockwise solve of
    max 2 Re{b^H w} - w^H (I_K (x) A) w
    s.t. ||w||^2 <= p1_budget,  w^H (I_K (x) Xi) w <= p2_budget.

    Candidates w(l1, l2) = (A + l1 I + l2 Xi)^(-1) b are scanned by nested
    bisection: the inner loop pins the smallest l2 meeting the second budget
    at fixed l1, the outer loop pins l1 against the first budget.  Returns
    (w rows (K, M), l1, l2).
    """
    m = A_blk.shape[0]
    eye = np.eye(m)
    rhs = b.T  # (M, K)
    b_norm2 = float(np.sum(np.abs(b) ** 2))
    if b_norm2 == 0.0:
        return np.zeros_like(b), 0.0, 0.0

    def candidate(l1, l2):
        M_mat = A_blk + l1 * eye + l2 * Xi_blk
        if l1 > 0.0:
            x = np.linalg.solve(M_mat, rhs)
        else:
            x, *_ = np.linalg.lstsq(M_mat, rhs, rcond=None)
            resid = float(np.linalg.norm(M_mat @ x - rhs))
            if resid > 1e-10 * np.sqrt(b_norm2):
                return None, np.inf, np.inf
        w = x.T
        p1 = float(np.sum(np.abs(w) ** 2))
        p2 = float(np.real(np.einsum('km,mn,kn->', w.conj(), Xi_blk, w)))
        return w, p1, p2

    def inner_l2(l1):
        """Smallest l2 >= 0 with p2 <= p2_budget at this l1."""
        w, p1, p2 = candidate(l1, 0.0)
        if p2 <= p2_budget * (1.0 + tol):
            return 0.0, w, p1, p2
        hi = 1.0
        for _ in range(140):
            w_hi, p1_hi, p2_hi = candidate(l1, hi)
            if p2_hi <= p2_budget:
                break
            hi *= 4.0
        else:
            return np.inf, None, np.inf, np.inf
        lo = 0.0
        best = (hi, w_hi, p1_hi, p2_hi)
        for _ in range(_MAX_BISECT):
            mid = 0.5 * (lo + hi)
            w_mid, p1_mid, p2_mid = candidate(l1, mid)
            if p2_mid > p2_budget:
                lo = mid
            else:
                hi = mid
                best = (mid, w_mid, p1_mid, p2_mid)
            if p2_mid <= p2_budget and abs(p2_mid - p2_budget) <= tol * p2_budget:
                break
        return best

    w0, p1_0, p2_0 = candidate(0.0, 0.0)
    if w0 is not None and p1_0 <= p1_budget * (1.0 + tol) and p2_0 <= p2_budget * (1.0 + tol):
        return w0, 0.0, 0.0

    l2_at0, w_at0, p1_at0, _ = inner_l2(0.0)
    if p1_at0 <= p1_budget * (1.0 + tol):
        return w_at0, 0.0, l2_at0

    hi = max(1.0, float(np.sqrt(b_norm2 / p1_budget)))
    lo = 0.0
    l2_hi, w_hi, p1_hi, _ = inner_l2(hi)
    while p1_hi > p1_budget:
        lo, hi = hi, hi * 4.0
        l2_hi, w_hi, p1_hi, _ = inner_l2(hi)
    best = (hi, l2_hi, w_hi, p1_hi)
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        l2_mid, w_mid, p1_mid, _ = inner_l2(mid)
        if p1_mid > p1_budget:
            lo = mid
        else:
            hi = mid
            best = (mid, l2_mid, w_mid, p1_mid)
        if p1_mid <= p1_budget and abs(p1_mid - p1_budget) <= tol * p1_budget:
            break
    l1, l2, w, _ = best
    return w, l1, l2


def update_w(workspace: FpWorkspace, cfg: SystemConfig,
             opts: SolverOptions) -> tuple[np.ndarray, float, float]:
    """Beamforming block: w = (A + l1 I + l2 Xi)^(-1) b with the smallest
    multipliers meeting both power budgets.  Raises
    :class:`InfeasibleRisPowerError` when the reflect state alone exceeds the
    RIS budget (caller should rescale psi and retry)."""
    if workspace.p_m_max < 0.0:
        raise InfeasibleRisPowerError(
            "reflect power of psi alone exceeds the RIS budget")
    return solve_w_qcqp(workspace.b, workspace.A_blk, workspace.Xi_blk,
                        cfg.p_bs_max, workspace.p_m_max, opts.tol_bisect)


# ---------------------------------------------------------------------------
# Outer loop
# ---------------------------------------------------------------------------


def initial_precoder(channels, cfg: SystemConfig, rng: np.random.Generator) -> Precoder:
    """Feasible-by-construction start: equal-power MRT on the direct channels
    at full BS budget; random-phase reflection scaled to the reflect budget
    (unit modulus for passive-type modes, zero when there is no RIS)."""
    k, n = channels.k, channels.n
    w = np.empty_like(channels.h)
    for i in range(k):
        nrm = np.linalg.norm(channels.h[i])
        if nrm > 0.0:
            direction = channels.h[i] / nrm
        else:
            raw = rng.standard_normal(channels.m) + 1j * rng.standard_normal(channels.m)
            direction = raw / np.linalg.norm(raw)
        w[i] = np.sqrt(cfg.p_bs_max / k) * direction
    if cfg.mode is RisMode.NO_RIS:
        return Precoder(w=w, psi=np.zeros(n, dtype=complex))
    psi = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
    if cfg.mode is RisMode.ACTIVE:
        psi = psi * np.sqrt(cfg.p_a_max / ris_power(psi, channels.G, w, cfg.dynamic_noise))
    return Precoder(w=w, psi=psi)


def solve_joint(channels, cfg: SystemConfig, opts: SolverOptions | None = None,
                init: Precoder | None = None, rng: np.random.Generator | None = None,
                trace: list | None = None) -> tuple[Precoder, AuxiliaryState, TrialResult]:
    """Alternating FP solver for the sum-rate maximization problem.

    Iterates aux -> beamformer -> reflection until the relative sum-rate
    change drops below ``tol_rate``.  The auxiliary block is set to its joint
    optimum for the current (w, psi) -- rho_k equal to the current SINR, then
    the closed-form varpi -- which makes the surrogate exactly tight
    (R' = ln2 * R_sum) right after the aux update.

    ``trace``, if given, collects one dict per iteration with the sum rate,
    surrogate values after each block, multipliers and realized powers.
    """
    opts = opts or SolverOptions()
    if cfg.mode not in (RisMode.ACTIVE, RisMode.NO_RIS):
        raise ValueError("solve_joint handles ACTIVE / NO_RIS modes; "
                         "see arisim.baselines for the passive schemes")
    if init is None:
        init = initial_precoder(channels, cfg, rng if rng is not None else np.random.default_rng(0))
    precoder = init
    rate = sum_rate(channels, precoder, cfg)
    aux = AuxiliaryState(rho=np.zeros(channels.k), varpi=np.zeros(channels.k, dtype=complex))
    converged = False
    rescued = False
    iterations = 0
    for it in range(1, opts.max_iters + 1):
        iterations = it
        gamma = sinr_values(channels, precoder.w, precoder.psi, cfg)
        rho = gamma.copy()
        varpi = update_varpi(channels, precoder, rho, cfg)
        aux = AuxiliaryState(rho=rho, varpi=varpi)
        surr_aux = surrogate_value(channels, precoder, aux, cfg)

        ws = build_workspace(channels, cfg, precoder, aux)
        try:
            w_new, lam1, lam2 = update_w(ws, cfg, opts)
        except InfeasibleRisPowerError:
            if rescued:
                raise
            rescued = True
            scale = np.sqrt(0.99 * cfg.p_a_max /
                            ris_power(precoder.psi, channels.G, precoder.w, cfg.dynamic_noise))
            precoder = Precoder(w=precoder.w, psi=precoder.psi * scale)
            ws = build_workspace(channels, cfg, precoder, aux)
            w_new, lam1, lam2 = update_w(ws, cfg, opts)
        precoder = Precoder(w=w_new, psi=precoder.psi)
        surr_w = surrogate_value(channels, precoder, aux, cfg)

        mu = 0.0
        surr_psi = surr_w
        if cfg.mode is RisMode.ACTIVE:
            ws2 = build_workspace(channels, cfg, precoder, aux)
            psi_new, mu = update_psi(ws2, cfg, opts)
            precoder = Precoder(w=w_new, psi=psi_new)
            surr_psi = surrogate_value(channels, precoder, aux, cfg)

        new_rate = sum_rate(channels, precoder, cfg)
        if trace is not None:
            p_bs = float(np.sum(np.abs(w_new) ** 2))
            p_a = ris_power(precoder.psi, channels.G, w_new, cfg.dynamic_noise)
            trace.append({
                "iter": it, "rate": new_rate, "rate_prev": rate,
                "surrogate_aux": surr_aux, "surrogate_w": surr_w,
                "surrogate_psi": surr_psi, "lam1": lam1, "lam2": lam2,
                "mu": mu, "p_bs": p_bs, "p_a": p_a,
            })
        if abs(new_rate - rate) <= opts.tol_rate * max(new_rate, 1e-12):
            rate = new_rate
            converged = True
            break
        rate = new_rate
    result = make_trial_result(channels, precoder, cfg, iterations, converged)
    return precoder, aux, result
