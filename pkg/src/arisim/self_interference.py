"""Feedback self-interference of an amplifying surface: steady-state model,
approximation-error cost, penalty-based alternating suppression, and the
final power rescaling.

The non-ideal reflection state is a vector ``phi`` with matrix
Phi = diag(conj(phi)), same convention as :mod:`arisim.system`.  Under
feedback through the coupling matrix H, the surface acts as the equivalent
(non-diagonal) reflection matrix (I - Phi H)^(-1) Phi.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .system import Precoder, SystemConfig, reflection_matrix, ris_power


class SelfExcitationError(RuntimeError):
    """(I - Phi H) is numerically singular: the feedback loop has no stable
    steady state at this operating point."""


_F_FLOOR = 1e-30


@dataclass(frozen=True)
class SiProblem:
    """Inputs of the suppression problem.

    ``H_k = diag(f_k^H) H diag(f_k^H)^(-1)`` is precomputed per user; entries
    of ``f`` below the magnitude floor are perturbed (with a warning) so the
    similarity transform stays defined.
    """

    psi_opt: np.ndarray          # (N,) ideally optimized reflection vector
    H: np.ndarray                # (N, N) self-interference matrix
    f: np.ndarray                # (K, N) RIS-to-user channels
    H_k: np.ndarray = field(init=False)   # (K, N, N)

    def __post_init__(self):
        f = np.asarray(self.f, dtype=complex)
        small = np.abs(f) < _F_FLOOR
        if np.any(small):
            warnings.warn("f entries below magnitude floor perturbed for H_k construction")
            f = np.where(small, _F_FLOOR + 0j, f)
        fc = f.conj()
        hk = fc[:, :, None] * self.H[None, :, :] / fc[:, None, :]
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "H_k", hk)

    @property
    def k(self) -> int:
        return self.f.shape[0]

    @property
    def n(self) -> int:
        return self.psi_opt.shape[0]


@dataclass
class SiSolution:
    phi: np.ndarray
    tau: float
    cost: float
    penalty_final: float
    converged: bool = True


@dataclass(frozen=True)
class SiOptions:
    zeta0: float = 1e-3
    zeta_max: float = 1e8
    tol_q: float = 1e-6
    tol_gap: float = 1e-6
    cond_limit: float = 1e12


def effective_precoding(phi: np.ndarray, H: np.ndarray,
                        cond_limit: float = 1e12) -> np.ndarray:
    """Steady-state equivalent reflection matrix (I - Phi H)^(-1) Phi."""
    Phi = reflection_matrix(phi)
    A = np.eye(len(phi)) - Phi @ H
    if np.linalg.cond(A) > cond_limit:
        raise SelfExcitationError("loop matrix I - Phi H is numerically singular")
    return np.linalg.solve(A, Phi)


def _equivalent_vectors(phi: np.ndarray, problem: SiProblem) -> np.ndarray:
    """Rows phi + diag(phi) H_k^H phi for each user, shape (K, N)."""
    coupled = np.einsum('kji,j->ki', problem.H_k.conj(), phi)
    return phi[None, :] + phi[None, :] * coupled


def si_cost(phi: np.ndarray, problem: SiProblem) -> float:
    """Mean squared approximation error against the ideal reflection vector."""
    res = _equivalent_vectors(phi, problem) - problem.psi_opt[None, :]
    return float(np.mean(np.sum(np.abs(res) ** 2, axis=1)))


def q_value(phi: np.ndarray, phi_prime: np.ndarray, problem: SiProblem,
            zeta: float) -> float:
    """Penalized two-variable objective; equals ``si_cost(phi)`` whenever the
    two copies coincide."""
    coupled = np.einsum('kji,j->ki', problem.H_k.conj(), phi)
    res = phi[None, :] + phi_prime[None, :] * coupled - problem.psi_opt[None, :]
    f2 = float(np.mean(np.sum(np.abs(res) ** 2, axis=1)))
    return f2 + zeta * float(np.sum(np.abs(phi_prime - phi) ** 2))


def update_phi(phi_prime: np.ndarray, problem: SiProblem, zeta: float) -> np.ndarray:
    """Exact minimizer of the penalized objective over the first copy."""
    n, k = problem.n, problem.k
    B = np.eye(n)[None, :, :] + phi_prime[None, :, None] * np.transpose(problem.H_k.conj(), (0, 2, 1))
    M = np.einsum('kij,kil->jl', B.conj(), B) / k + zeta * np.eye(n)
    rhs = zeta * phi_prime + np.einsum('kij,i->j', B.conj(), problem.psi_opt) / k
    return np.linalg.solve(M, rhs)


def update_phi_prime(phi: np.ndarray, problem: SiProblem, zeta: float) -> np.ndarray:
    """Exact minimizer over the second copy; diagonal, so solved elementwise."""
    d = np.einsum('kji,j->ki', problem.H_k.conj(), phi)      # rows H_k^H phi
    denom = np.mean(np.abs(d) ** 2, axis=0) + zeta
    num = zeta * phi + np.mean(d.conj() * (problem.psi_opt - phi)[None, :], axis=0)
    return num / denom


def suppress(problem: SiProblem, opts: SiOptions | None = None,
             trace: list | None = None) -> SiSolution:
    """Penalty-based alternating minimization of the approximation error.

    Starts both copies at the ideal vector, runs one phi update and one
    phi-prime update per penalty level, doubling the penalty each outer step,
    until the penalized objective stalls and the copies agree, or the penalty
    cap is reached (then the best iterate is returned with
    ``converged=False``).  A zero coupling matrix short-circuits to the ideal
    vector, which is exactly optimal there.
    """
    opts = opts or SiOptions()
    psi = problem.psi_opt
    if not np.any(problem.H):
        return SiSolution(phi=psi.copy(), tau=1.0, cost=0.0,
                          penalty_final=opts.zeta0, converged=True)
    phi = psi.copy()
    phi_prime = psi.copy()
    zeta = opts.zeta0
    q_prev = q_value(phi, phi_prime, problem, zeta)
    best_phi, best_cost = phi, si_cost(phi, problem)
    converged = False
    while zeta <= opts.zeta_max:
        phi = update_phi(phi_prime, problem, zeta)
        q_mid = q_value(phi, phi_prime, problem, zeta)
        phi_prime = update_phi_prime(phi, problem, zeta)
        q_new = q_value(phi, phi_prime, problem, zeta)
        gap = float(np.linalg.norm(phi - phi_prime))
        cost = si_cost(phi, problem)
        if cost < best_cost:
            best_phi, best_cost = phi, cost
        if trace is not None:
            trace.append({"zeta": zeta, "q_before": q_prev, "q_mid": q_mid,
                          "q_after": q_new, "gap": gap, "cost": cost})
        if abs(q_new - q_prev) <= opts.tol_q * max(abs(q_new), 1.0) and gap < opts.tol_gap:
            converged = True
            break
        q_prev = q_value(phi, phi_prime, problem, 2.0 * zeta)
        zeta *= 2.0
    if not converged:
        warnings.warn("self-interference suppression hit the penalty cap "
                      "before converging; returning best iterate")
        phi = best_phi
    return SiSolution(phi=phi, tau=1.0, cost=si_cost(phi, problem),
                      penalty_final=zeta, converged=converged)


def rescale_tau(phi: np.ndarray, channels, w: np.ndarray, cfg: SystemConfig,
                tol: float = 1e-6) -> tuple[float, bool]:
    """Scaling tau > 0 so the true (feedback) reflect power meets the budget.

    Returns (tau, at_budget).  ``at_budget`` is False when self-excitation is
    reached before the budget, in which case the largest safe tau is
    returned.  Power is evaluated through the exact steady state, so a
    bracketing violation (possible at strong coupling) triggers a dense grid
    fallback.
    """
    H = channels.H if channels.H is not None else None
    if H is None or not np.any(H):
        base = ris_power(phi, channels.G, w, cfg.dynamic_noise)
        return float(np.sqrt(cfg.p_a_max / base)), True

    def power_at(tau):
        eff = effective_precoding(tau * phi, H)
        return ris_power(eff, channels.G, w, cfg.dynamic_noise)

    base = ris_power(phi, channels.G, w, cfg.dynamic_noise)
    tau = float(np.sqrt(cfg.p_a_max / base))
    lo, p_lo = 0.0, 0.0
    hi = tau
    hi_cap = None
    for _ in range(200):
        try:
            p_hi = power_at(hi)
        except SelfExcitationError:
            hi_cap = hi
            hi = 0.5 * (lo + hi) if lo > 0.0 else hi / 2.0
            continue
        if p_hi >= cfg.p_a_max:
            break
        lo, p_lo = hi, p_hi
        hi = min(2.0 * hi, hi_cap * (1.0 - 1e-9)) if hi_cap is not None else 2.0 * hi
        if hi_cap is not None and hi <= lo:
            return lo, False
    else:
        return (lo, False) if lo > 0.0 else (tau, False)

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        try:
            p_mid = power_at(mid)
        except SelfExcitationError:
            hi = mid
            continue
        if abs(p_mid - cfg.p_a_max) <= tol * cfg.p_a_max:
            return mid, True
        if p_mid < cfg.p_a_max:
            lo, p_lo = mid, p_mid
        else:
            hi, p_hi = mid, p_mid
    # bracketing violated or too flat: dense scan per fallback policy
    taus = np.linspace(hi / 1e4, hi, 10000)
    best_tau, best_err = lo if lo > 0 else tau, np.inf
    for t in taus:
        try:
            err = abs(power_at(t) - cfg.p_a_max)
        except SelfExcitationError:
            continue
        if err < best_err:
            best_tau, best_err = t, err
    return float(best_tau), best_err <= tol * cfg.p_a_max


def evaluate_with_feedback(channels, w: np.ndarray, phi: np.ndarray,
                           cfg: SystemConfig, tau: float = 1.0):
    """Equivalent reflection matrix of ``tau * phi`` under the true feedback
    model; falls back to the diagonal matrix when no coupling is present."""
    if channels.H is None or not np.any(channels.H):
        return reflection_matrix(tau * phi)
    return effective_precoding(tau * phi, channels.H)
