"""Built-in oracle/property suite behind ``arisim validate``.

A fast, self-contained subset of the package's verification checks: golden
closed-form numbers, small-instance brute-force oracles, solver monotonicity
and feasibility, suppression behavior, and output determinism.
"""

from __future__ import annotations

import io

import numpy as np

from . import asymptotics, fp_solver, harness, self_interference
from .channels import ChannelSet
from .system import (AuxiliaryState, Precoder, RisMode, SystemConfig,
                     equivalent_channel, ris_power, sum_rate)
from .units import db2lin, dbm2watt, lin2db


def _random_channels(rng, m, k, n, scale=1.0):
    def c(shape):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return ChannelSet(G=c((n, m)), h=c((k, m)), f=c((k, n)))


def _check_golden_numbers():
    p = asymptotics.AsymptoticParams(n=256, **harness.ASYMPTOTIC_FIGURE_PARAMS)
    ok = abs(lin2db(asymptotics.snr_passive_asymptotic(p)) - 39.0) <= 0.1
    ok &= abs(lin2db(asymptotics.snr_active_asymptotic(p)) - 79.0) <= 0.1
    ok &= abs(asymptotics.crossover_elements(p) - 2.5e6) <= 0.01 * 2.5e6
    d = asymptotics.min_distance_active_wins(
        d_t=20.0, alpha=2.0, beta=2.0, l0=db2lin(-30.0), p_max=2.0,
        sigma2=dbm2watt(-100.0), n=1024)
    ok &= abs(d - 1.43) <= 0.01
    return bool(ok)


def _check_equivalent_channel_expansion():
    rng = np.random.default_rng(11)
    m, n = 2, 3
    G = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    h = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    got = equivalent_channel(h, f, psi, G)
    expect_h = np.array([
        h.conj()[mm] + sum(psi.conj()[nn] * f.conj()[nn] * G[nn, mm] for nn in range(n))
        for mm in range(m)])
    return bool(np.allclose(got, expect_h.conj(), rtol=0, atol=1e-12))


def _check_rho_formula():
    got = fp_solver.update_rho(np.array([0.0, 1.0, 2.0]))
    expect = np.array([0.0, (1 + np.sqrt(5.0)) / 2.0, 2.0 + 2.0 * np.sqrt(2.0)])
    return bool(np.allclose(got, expect, rtol=1e-12))


def _check_solver_properties():
    ok = True
    for seed in range(3):
        rng = np.random.default_rng(seed)
        ch = _random_channels(rng, 4, 4, 16)
        cfg = SystemConfig(m=4, k=4, n=16, p_bs_max=10.0, p_a_max=1.0,
                           sigma2=1.0, sigma_v2=0.1)
        trace = []
        _, _, res = fp_solver.solve_joint(ch, cfg, rng=rng, trace=trace)
        rates = [t["rate"] for t in trace]
        ok &= all(b >= a - 1e-9 for a, b in zip(rates, rates[1:]))
        ok &= res.p_bs_realized <= cfg.p_bs_max * (1 + 1e-6)
        ok &= res.p_a_realized <= cfg.p_a_max * (1 + 1e-6)
        tight = [abs(t["surrogate_aux"] - np.log(2.0) * t["rate_prev"])
                 / max(np.log(2.0) * t["rate_prev"], 1e-12) for t in trace]
        ok &= max(tight) < 1e-8
    return bool(ok)


def _check_suppression():
    rng = np.random.default_rng(5)
    n, k = 16, 2
    psi = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    H = 1e-3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    f = (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))) / np.sqrt(2)
    prob = self_interference.SiProblem(psi_opt=psi, H=H, f=f)
    trace = []
    sol = self_interference.suppress(prob, trace=trace)
    ok = sol.cost < self_interference.si_cost(psi, prob)
    ok &= all(t["q_before"] >= t["q_mid"] - 1e-12 and t["q_mid"] >= t["q_after"] - 1e-12
              for t in trace)
    zero = self_interference.suppress(
        self_interference.SiProblem(psi_opt=psi, H=np.zeros((n, n)), f=f))
    ok &= bool(np.array_equal(zero.phi, psi)) and zero.cost == 0.0
    return bool(ok)


def _check_determinism():
    spec = harness.ScenarioSpec(scenario="strong", n=8, user_circle_radius=5.0)
    sweep = harness.SweepSpec(variable="L", values=(300.0,), trials=2, seed=7,
                              schemes=("no_ris", "random_phase"))
    def render():
        rows = harness.run_sweep(spec, sweep)
        buf = io.StringIO()
        for r in rows:
            buf.write(f"{r.scheme},{r.x},{r.mean_rate!r},{r.std_rate!r},{r.trials},{r.excluded}\n")
        return buf.getvalue()
    return render() == render()


CHECKS = [
    ("closed-form golden numbers", _check_golden_numbers),
    ("equivalent channel brute-force expansion", _check_equivalent_channel_expansion),
    ("auxiliary-update formula", _check_rho_formula),
    ("joint solver monotonicity/feasibility/tightness", _check_solver_properties),
    ("self-interference suppression", _check_suppression),
    ("sweep determinism", _check_determinism),
]


def run_validation() -> int:
    failures = 0
    for name, fn in CHECKS:
        try:
            ok = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok = False
            print(f"FAIL {name}: {exc!r}")
        if ok:
            print(f"PASS {name}")
        else:
            failures += 1
            print(f"FAIL {name}")
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return 0 if failures == 0 else 1
