"""Scenario construction, Monte-Carlo sweeps, aggregation and file output.

A sweep is driven by (scenario, sweep) specs.  Every (sweep value, trial)
pair owns a derived random substream, and all schemes evaluated at that pair
consume the identical channel realization, so scheme comparisons are paired.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics, baselines, fp_solver, self_interference
from .channels import (ChannelSet, Geometry, PathLossAssignment, PathLossModel,
                       draw_channels, substream)
from .system import Precoder, RisMode, SystemConfig, make_trial_result
from .units import db2lin, dbm2watt, lin2db

SCENARIOS = ("weak", "strong")

SWEEP_SCHEMES = ("active", "passive", "random_phase", "no_ris")
SI_SCHEMES = ("active_ideal", "active_no_suppression", "active_si_suppressed")

# substream roles
_ROLE_CHANNELS = 0
_ROLE_SOLVER_INIT = 1
_ROLE_RANDOM_PHASE = 2

# parameters behind the asymptotic-SNR figure: 2 W passive BS budget versus a
# 1 W / 1 W active split, -100 dBm noise, -70 dB per-entry channel gains
ASYMPTOTIC_FIGURE_PARAMS = dict(
    p_bs_max=1.0, p_a_max=1.0, p_bs_p_max=2.0,
    sigma2=dbm2watt(-100.0), sigma_v2=dbm2watt(-100.0),
    rho_f2=db2lin(-70.0), rho_g2=db2lin(-70.0),
)


@dataclass(frozen=True)
class ScenarioSpec:
    """Deployment and power defaults (distances in meters, powers in dBm)."""

    scenario: str = "strong"
    bs_position: tuple = (0.0, -60.0)
    ris_position: tuple = (300.0, 10.0)
    user_circle_center: tuple = (300.0, 0.0)
    user_circle_radius: float = 5.0
    m: int = 4
    n: int = 512
    k: int = 4
    kappa: float = 1.0
    sigma2_dbm: float = -100.0
    sigma_v2_dbm: float = -100.0
    p_total_dbm: float = 10.0
    bs_power_fraction: float = 0.99
    carrier_ghz: float = 5.0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.user_circle_radius <= 0.0:
            raise ValueError("user circle radius must be positive")
        if not 0.0 < self.bs_power_fraction < 1.0:
            raise ValueError("BS power fraction must lie in (0, 1)")
        if min(self.m, self.n, self.k) < 1:
            raise ValueError("dimensions must be >= 1")


@dataclass(frozen=True)
class SweepSpec:
    """One Monte-Carlo sweep: which variable, its values, and the trial plan."""

    variable: str
    values: tuple
    trials: int = 20
    seed: int = 0
    schemes: tuple = SWEEP_SCHEMES

    def __post_init__(self):
        if self.variable not in ("L", "power", "elements", "si"):
            raise ValueError("variable must be one of L, power, elements, si")
        if len(self.values) == 0:
            raise ValueError("sweep values must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "schemes", tuple(self.schemes))


def path_loss_assignment(scenario: str) -> PathLossAssignment:
    strong = PathLossModel.strong_3gpp()
    weak = PathLossModel.weak_3gpp()
    return PathLossAssignment(
        bs_user=weak if scenario == "weak" else strong,
        bs_ris=strong, ris_user=strong)


def active_config(spec: ScenarioSpec, n: int | None = None) -> SystemConfig:
    p_total = dbm2watt(spec.p_total_dbm)
    return SystemConfig(
        m=spec.m, k=spec.k, n=spec.n if n is None else n,
        p_bs_max=spec.bs_power_fraction * p_total,
        p_a_max=(1.0 - spec.bs_power_fraction) * p_total,
        sigma2=dbm2watt(spec.sigma2_dbm), sigma_v2=dbm2watt(spec.sigma_v2_dbm),
        mode=RisMode.ACTIVE)


def baseline_config(cfg: SystemConfig, mode: RisMode) -> SystemConfig:
    """Benchmarks spend the whole power budget at the BS."""
    total = cfg.p_bs_max + cfg.p_a_max
    return SystemConfig(m=cfg.m, k=cfg.k, n=cfg.n, p_bs_max=total,
                        p_a_max=cfg.p_a_max, sigma2=cfg.sigma2,
                        sigma_v2=cfg.sigma_v2, mode=mode)


def place_users(spec: ScenarioSpec, rng: np.random.Generator,
                center: tuple | None = None) -> np.ndarray:
    c = np.asarray(center if center is not None else spec.user_circle_center, dtype=float)
    r = spec.user_circle_radius * np.sqrt(rng.uniform(0.0, 1.0, spec.k))
    ang = rng.uniform(0.0, 2.0 * np.pi, spec.k)
    return c[None, :] + np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)


def build_scenario(spec: ScenarioSpec, rng: np.random.Generator,
                   center: tuple | None = None,
                   n: int | None = None) -> tuple[SystemConfig, Geometry, PathLossAssignment]:
    """Place users and assemble the active-system config plus the per-link
    path loss laws for the chosen scenario."""
    users = place_users(spec, rng, center)
    geometry = Geometry(bs=np.asarray(spec.bs_position),
                        ris=np.asarray(spec.ris_position), users=users)
    return active_config(spec, n), geometry, path_loss_assignment(spec.scenario)


@dataclass
class SweepRow:
    scheme: str
    x: float
    mean_rate: float
    std_rate: float
    trials: int
    excluded: int


def _trial_value_point(spec: ScenarioSpec, variable: str, value: float):
    """Resolve one sweep value into (spec', center, n, si_delta)."""
    center = None
    n = None
    si_delta = 0.0
    if variable == "L":
        center = (value, 0.0)
    elif variable == "power":
        spec = dataclasses.replace(spec, p_total_dbm=value)
    elif variable == "elements":
        n = int(round(value))
    else:  # si: value is the coupling level in dB, delta^2 = 10^(value/10)
        si_delta = float(np.sqrt(db2lin(value)))
    return spec, center, n, si_delta


def _run_standard_trial(scheme: str, chset: ChannelSet, cfg: SystemConfig,
                        seed: int, xi: int, trial: int, opts) -> float:
    if scheme == "active":
        rng = substream(seed, xi, trial, _ROLE_SOLVER_INIT)
        _, _, res = fp_solver.solve_joint(chset, cfg, opts, rng=rng)
        return res.sum_rate
    if scheme == "passive":
        rng = substream(seed, xi, trial, _ROLE_SOLVER_INIT)
        _, res = baselines.passive_ris_fp(chset, baseline_config(cfg, RisMode.PASSIVE),
                                          opts, rng=rng)
        return res.sum_rate
    if scheme == "random_phase":
        rng = substream(seed, xi, trial, _ROLE_RANDOM_PHASE)
        res = baselines.random_phase_baseline(chset, baseline_config(cfg, RisMode.RANDOM_PHASE),
                                              rng, opts)
        return res.sum_rate
    if scheme == "no_ris":
        res = baselines.no_ris_baseline(chset, baseline_config(cfg, RisMode.NO_RIS), opts)
        return res.sum_rate
    raise ValueError(f"unknown scheme {scheme!r}")


def _run_si_trial(chset: ChannelSet, cfg: SystemConfig, seed: int, xi: int,
                  trial: int, opts, si_opts=None) -> dict[str, float]:
    """Evaluate the three self-interference curves on one realization.

    The ideal design is computed once (it ignores the coupling matrix); the
    no-suppression curve re-evaluates it under the true feedback model, and
    the suppression curve post-processes the reflection vector with the
    penalty scheme plus the power rescaling before the same evaluation.
    """
    rng = substream(seed, xi, trial, _ROLE_SOLVER_INIT)
    ideal = ChannelSet(G=chset.G, h=chset.h, f=chset.f, H=None)
    precoder, _, res_ideal = fp_solver.solve_joint(ideal, cfg, opts, rng=rng)
    out = {"active_ideal": res_ideal.sum_rate}

    def rate_with_feedback(phi, tau):
        eff = self_interference.evaluate_with_feedback(chset, precoder.w, phi, cfg, tau)
        trial_res = make_trial_result(chset, Precoder(w=precoder.w, psi=eff), cfg, 1)
        return trial_res.sum_rate

    try:
        out["active_no_suppression"] = rate_with_feedback(precoder.psi, 1.0)
    except self_interference.SelfExcitationError:
        out["active_no_suppression"] = 0.0

    problem = self_interference.SiProblem(psi_opt=precoder.psi,
                                          H=chset.H if chset.H is not None else np.zeros((chset.n, chset.n)),
                                          f=chset.f)
    solution = self_interference.suppress(problem, si_opts)
    try:
        tau, _ = self_interference.rescale_tau(solution.phi, chset, precoder.w, cfg)
        out["active_si_suppressed"] = rate_with_feedback(solution.phi, tau)
    except self_interference.SelfExcitationError:
        out["active_si_suppressed"] = 0.0
    return out


def run_sweep(scenario: ScenarioSpec, sweep: SweepSpec,
              opts: fp_solver.SolverOptions | None = None,
              si_opts=None) -> list[SweepRow]:
    """Monte-Carlo sweep over the requested variable.

    Returns one row per (scheme, value) with mean/std of the sum rate over
    trials; trials where a solver fails are excluded and counted.
    """
    opts = opts or fp_solver.SolverOptions()
    schemes = SI_SCHEMES if sweep.variable == "si" else sweep.schemes
    rates: dict[tuple[str, float], list[float]] = {(s, v): [] for v in sweep.values for s in schemes}
    excluded: dict[tuple[str, float], int] = {(s, v): 0 for v in sweep.values for s in schemes}
    for xi, value in enumerate(sweep.values):
        spec_v, center, n_override, si_delta = _trial_value_point(scenario, sweep.variable, value)
        for trial in range(sweep.trials):
            rng = substream(sweep.seed, xi, trial, _ROLE_CHANNELS)
            cfg, geometry, losses = build_scenario(spec_v, rng, center, n_override)
            chset = draw_channels(rng, geometry, losses, spec_v.kappa,
                                  cfg.m, cfg.n, si_delta)
            if sweep.variable == "si":
                try:
                    per_scheme = _run_si_trial(chset, cfg, sweep.seed, xi, trial, opts, si_opts)
                except (fp_solver.InfeasibleRisPowerError, np.linalg.LinAlgError):
                    for s in schemes:
                        excluded[(s, value)] += 1
                    continue
                for s in schemes:
                    rates[(s, value)].append(per_scheme[s])
            else:
                for s in schemes:
                    try:
                        rates[(s, value)].append(
                            _run_standard_trial(s, chset, cfg, sweep.seed, xi, trial, opts))
                    except (fp_solver.InfeasibleRisPowerError, np.linalg.LinAlgError):
                        excluded[(s, value)] += 1
    rows = []
    for value in sweep.values:
        for s in schemes:
            got = rates[(s, value)]
            mean = float(np.mean(got)) if got else float("nan")
            std = float(np.std(got)) if got else float("nan")
            rows.append(SweepRow(scheme=s, x=value, mean_rate=mean, std_rate=std,
                                 trials=len(got), excluded=excluded[(s, value)]))
    return rows


def run_asymptotic_figure(n_values) -> list[tuple[float, float, float]]:
    """Closed-form SNR of both surface types over an element-count grid,
    in dB, with the standard comparison parameters."""
    rows = []
    for n in n_values:
        p = asymptotics.AsymptoticParams(n=int(n), **ASYMPTOTIC_FIGURE_PARAMS)
        rows.append((float(n),
                     float(lin2db(asymptotics.snr_passive_asymptotic(p))),
                     float(lin2db(asymptotics.snr_active_asymptotic(p)))))
    return rows


def emit_results(rows: list[SweepRow], path: str, fmt: str = "csv") -> None:
    """Write sweep rows as CSV or JSON lines; field order and float
    formatting are fixed so identical inputs give byte-identical files."""
    if fmt not in ("csv", "json-lines"):
        raise ValueError("format must be 'csv' or 'json-lines'")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if fmt == "csv":
                fh.write("scheme,x,mean_rate,std_rate,trials,excluded\n")
                for r in rows:
                    fh.write(f"{r.scheme},{r.x:.10g},{r.mean_rate:.10g},"
                             f"{r.std_rate:.10g},{r.trials},{r.excluded}\n")
            else:
                for r in rows:
                    fh.write(json.dumps({
                        "scheme": r.scheme, "x": r.x, "mean_rate": r.mean_rate,
                        "std_rate": r.std_rate, "trials": r.trials,
                        "excluded": r.excluded}, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"could not write results to {path!r}: {exc}") from exc


def default_sweep_values(variable: str) -> tuple:
    return {
        "L": (100.0, 200.0, 300.0),
        "power": (0.0, 5.0, 10.0, 15.0, 20.0),
        "elements": (16.0, 32.0, 64.0, 128.0),
        "si": (-70.0, -50.0, -35.0),
    }[variable]
