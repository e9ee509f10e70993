"""Command-line entry point.

Subcommands: ``asymptotic`` (closed-form SNR table over N), ``crossover``
(element-count threshold), ``coverage`` (minimum RIS-user distance),
``sweep`` (Monte-Carlo sum-rate sweeps) and ``validate`` (built-in
oracle/property suite).  Exit codes: 0 success, 1 invalid configuration,
2 solver infeasibility in all trials.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import harness, validate as validate_mod
from .asymptotics import AsymptoticParams, crossover_elements, min_distance_active_wins
from .units import db2lin, dbm2watt

EXIT_OK = 0
EXIT_INVALID_CONFIG = 1
EXIT_ALL_TRIALS_FAILED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; config errors are 1
        self.exit(EXIT_INVALID_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="arisim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("asymptotic", help="closed-form SNR versus element count")
    pa.add_argument("--elements-grid", type=float, nargs="+",
                    default=[10, 100, 256, 1000, 1e4, 1e5, 1e6, 2.5e6, 3e6])
    _add_output_flags(pa)

    pc = sub.add_parser("crossover", help="element count where passive overtakes active")
    pc.add_argument("--p-bs-active", type=float, default=1.0)
    pc.add_argument("--p-a", type=float, default=1.0)
    pc.add_argument("--p-bs-passive", type=float, default=2.0)
    pc.add_argument("--sigma2-dbm", type=float, default=-100.0)
    pc.add_argument("--sigma-v2-dbm", type=float, default=-100.0)
    pc.add_argument("--rho-f2-db", type=float, default=-70.0)
    pc.add_argument("--rho-g2-db", type=float, default=-70.0)

    pv = sub.add_parser("coverage", help="minimum RIS-user distance for the active surface to win")
    pv.add_argument("--dt", type=float, default=20.0)
    pv.add_argument("--alpha", type=float, default=2.0)
    pv.add_argument("--beta", type=float, default=2.0)
    pv.add_argument("--l0-db", type=float, default=-30.0)
    pv.add_argument("--p-max", type=float, default=2.0)
    pv.add_argument("--sigma2-dbm", type=float, default=-100.0)
    pv.add_argument("--elements", type=int, default=1024)

    ps = sub.add_parser("sweep", help="Monte-Carlo sum-rate sweep")
    ps.add_argument("--var", choices=["L", "power", "elements", "si"], required=True)
    ps.add_argument("--scenario", choices=list(harness.SCENARIOS), default="strong")
    ps.add_argument("--values", type=float, nargs="+", default=None)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--trials", type=int, default=20)
    ps.add_argument("--elements", type=int, default=64)
    ps.add_argument("--config", type=str, default=None,
                    help="JSON file with 'scenario' and 'sweep' field overrides")
    _add_output_flags(ps)

    sub.add_parser("validate", help="run the built-in oracle/property suite")
    return p


def _add_output_flags(p):
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=["csv", "json-lines"], default="csv")


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _scenario_from_args(args) -> harness.ScenarioSpec:
    base = {}
    if args.config:
        base = _load_config(args.config).get("scenario", {})
    radius = 5.0 if args.var == "L" else 50.0
    spec = harness.ScenarioSpec(scenario=args.scenario, n=args.elements,
                                user_circle_radius=radius)
    known = {f.name for f in dataclasses.fields(harness.ScenarioSpec)}
    unknown = set(base) - known
    if unknown:
        raise ValueError(f"unknown scenario config keys: {sorted(unknown)}")
    fixed = {k: tuple(v) if isinstance(v, list) else v for k, v in base.items()}
    return dataclasses.replace(spec, **fixed)


def _sweep_from_args(args) -> harness.SweepSpec:
    base = {}
    if args.config:
        base = _load_config(args.config).get("sweep", {})
    values = args.values if args.values is not None else harness.default_sweep_values(args.var)
    spec = harness.SweepSpec(variable=args.var, values=tuple(values),
                             trials=args.trials, seed=args.seed)
    known = {f.name for f in dataclasses.fields(harness.SweepSpec)}
    unknown = set(base) - known
    if unknown:
        raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
    fixed = {k: tuple(v) if isinstance(v, list) else v for k, v in base.items()}
    return dataclasses.replace(spec, **fixed)


def _emit_or_print(lines_header: str, lines, args) -> None:
    if args.out:
        harness.emit_results(lines, args.out, args.format)
        print(f"wrote {args.out}")
    else:
        print(lines_header)
        for r in lines:
            print(f"{r.scheme},{r.x:.10g},{r.mean_rate:.10g},{r.std_rate:.10g},"
                  f"{r.trials},{r.excluded}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "asymptotic":
            rows = harness.run_asymptotic_figure(args.elements_grid)
            if args.out:
                with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                    if args.format == "csv":
                        fh.write("elements,snr_passive_db,snr_active_db\n")
                        for n, pdb, adb in rows:
                            fh.write(f"{n:.10g},{pdb:.10g},{adb:.10g}\n")
                    else:
                        for n, pdb, adb in rows:
                            fh.write(json.dumps({"elements": n, "snr_passive_db": pdb,
                                                 "snr_active_db": adb}, sort_keys=True) + "\n")
                print(f"wrote {args.out}")
            else:
                print("elements,snr_passive_db,snr_active_db")
                for n, pdb, adb in rows:
                    print(f"{n:.10g},{pdb:.10g},{adb:.10g}")
            return EXIT_OK

        if args.command == "crossover":
            p = AsymptoticParams(
                n=1, p_bs_max=args.p_bs_active, p_a_max=args.p_a,
                p_bs_p_max=args.p_bs_passive,
                sigma2=dbm2watt(args.sigma2_dbm), sigma_v2=dbm2watt(args.sigma_v2_dbm),
                rho_f2=db2lin(args.rho_f2_db), rho_g2=db2lin(args.rho_g2_db))
            print(f"{crossover_elements(p):.10g}")
            return EXIT_OK

        if args.command == "coverage":
            d = min_distance_active_wins(
                d_t=args.dt, alpha=args.alpha, beta=args.beta,
                l0=db2lin(args.l0_db), p_max=args.p_max,
                sigma2=dbm2watt(args.sigma2_dbm), n=args.elements)
            print(f"{d:.10g}")
            return EXIT_OK

        if args.command == "sweep":
            scenario = _scenario_from_args(args)
            sweep = _sweep_from_args(args)
            rows = harness.run_sweep(scenario, sweep)
            _emit_or_print("scheme,x,mean_rate,std_rate,trials,excluded", rows, args)
            if rows and all(r.trials == 0 for r in rows):
                return EXIT_ALL_TRIALS_FAILED
            return EXIT_OK

        if args.command == "validate":
            return validate_mod.run_validation()
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
