import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from arisim import cli
from arisim.channels import PathLossKind, draw_channels, substream
from arisim.harness import (ScenarioSpec, SweepRow, SweepSpec, build_scenario,
                            default_sweep_values, emit_results,
                            path_loss_assignment, run_asymptotic_figure,
                            run_sweep)


def tiny_spec(**kw):
    base = dict(scenario="strong", n=8, m=2, k=2, user_circle_radius=5.0)
    base.update(kw)
    return ScenarioSpec(**base)


class TestBuildScenario:
    def test_weak_scenario_law_assignment(self):
        pl = path_loss_assignment("weak")
        assert pl.bs_user.kind is PathLossKind.WEAK_3GPP
        assert pl.bs_ris.kind is PathLossKind.STRONG_3GPP
        assert pl.ris_user.kind is PathLossKind.STRONG_3GPP

    def test_strong_scenario_law_assignment(self):
        pl = path_loss_assignment("strong")
        assert pl.bs_user.kind is PathLossKind.STRONG_3GPP

    def test_users_inside_circle(self):
        spec = tiny_spec(k=50)
        cfg, geo, _ = build_scenario(spec, substream(0, 1))
        center = np.asarray(spec.user_circle_center)
        dist = np.linalg.norm(geo.users - center[None, :], axis=1)
        assert np.all(dist <= spec.user_circle_radius + 1e-12)

    def test_same_seed_same_placement(self):
        spec = tiny_spec()
        _, geo_a, _ = build_scenario(spec, substream(5, 0))
        _, geo_b, _ = build_scenario(spec, substream(5, 0))
        assert np.array_equal(geo_a.users, geo_b.users)

    def test_power_split(self):
        spec = tiny_spec(p_total_dbm=10.0, bs_power_fraction=0.99)
        cfg, _, _ = build_scenario(spec, substream(0, 0))
        assert_allclose(cfg.p_bs_max, 0.99 * 1e-2)
        assert_allclose(cfg.p_a_max, 0.01 * 1e-2)

    def test_bad_scenario_rejected(self):
        with pytest.raises(ValueError):
            ScenarioSpec(scenario="medium")


class TestPairing:
    def test_same_key_same_channels(self):
        spec = tiny_spec()
        cfg, geo, pl = build_scenario(spec, substream(3, 0, 0, 0))
        a = draw_channels(substream(3, 0, 0, 0), geo, pl, 1.0, cfg.m, cfg.n)
        b = draw_channels(substream(3, 0, 0, 0), geo, pl, 1.0, cfg.m, cfg.n)
        assert np.array_equal(a.G, b.G) and np.array_equal(a.h, b.h)

    def test_trials_are_independent(self):
        spec = tiny_spec()
        _, geo, pl = build_scenario(spec, substream(3, 0, 0, 0))
        a = draw_channels(substream(3, 0, 0, 0), geo, pl, 1.0, 2, 8)
        b = draw_channels(substream(3, 0, 1, 0), geo, pl, 1.0, 2, 8)
        assert not np.array_equal(a.G, b.G)


class TestRunSweep:
    def test_single_scheme_single_value(self):
        rows = run_sweep(tiny_spec(), SweepSpec(variable="L", values=(300.0,),
                                                trials=1, seed=0, schemes=("no_ris",)))
        assert len(rows) == 1
        assert rows[0].scheme == "no_ris" and rows[0].trials == 1
        assert rows[0].excluded == 0 and np.isfinite(rows[0].mean_rate)

    def test_all_schemes_present(self):
        rows = run_sweep(tiny_spec(), SweepSpec(variable="L", values=(250.0, 300.0),
                                                trials=1, seed=0,
                                                schemes=("no_ris", "random_phase")))
        assert {(r.scheme, r.x) for r in rows} == {
            ("no_ris", 250.0), ("no_ris", 300.0),
            ("random_phase", 250.0), ("random_phase", 300.0)}

    def test_si_sweep_schemes(self):
        rows = run_sweep(tiny_spec(), SweepSpec(variable="si", values=(-70.0,),
                                                trials=1, seed=0))
        assert {r.scheme for r in rows} == {"active_ideal", "active_no_suppression",
                                            "active_si_suppressed"}

    def test_deterministic_rows(self):
        spec = tiny_spec()
        sweep = SweepSpec(variable="L", values=(300.0,), trials=2, seed=4,
                          schemes=("no_ris", "random_phase"))
        a = run_sweep(spec, sweep)
        b = run_sweep(spec, sweep)
        assert [(r.scheme, r.x, r.mean_rate, r.std_rate) for r in a] == \
               [(r.scheme, r.x, r.mean_rate, r.std_rate) for r in b]

    def test_rejects_bad_variable(self):
        with pytest.raises(ValueError):
            SweepSpec(variable="bandwidth", values=(1.0,))


class TestAsymptoticFigure:
    def test_reference_row(self):
        rows = run_asymptotic_figure([256])
        _, passive_db, active_db = rows[0]
        assert abs(passive_db - 39.0) <= 0.1
        assert abs(active_db - 79.0) <= 0.1

    def test_crossing_between_2e6_and_3e6(self):
        rows = run_asymptotic_figure([2e6, 3e6])
        assert rows[0][2] > rows[0][1]          # active still ahead at 2e6
        assert rows[1][2] < rows[1][1]          # passive ahead at 3e6

    def test_log_log_slopes(self):
        ns = np.array([10.0, 100.0, 1000.0])
        rows = run_asymptotic_figure(ns)
        passive = np.array([r[1] for r in rows])
        active = np.array([r[2] for r in rows])
        # dB per decade of N
        slope_p = np.polyfit(np.log10(ns), passive, 1)[0]
        slope_a = np.polyfit(np.log10(ns), active, 1)[0]
        assert_allclose(slope_p, 20.0, rtol=1e-9)
        assert_allclose(slope_a, 10.0, rtol=1e-9)


class TestEmitResults:
    def rows(self):
        return [SweepRow("no_ris", 300.0, 1.5, 0.1, 2, 0),
                SweepRow("active", 300.0, 4.5, 0.2, 2, 1)]

    def test_empty_table_header_only(self, tmp_path):
        path = tmp_path / "out.csv"
        emit_results([], str(path), "csv")
        assert path.read_text() == "scheme,x,mean_rate,std_rate,trials,excluded\n"

    def test_csv_column_count(self, tmp_path):
        path = tmp_path / "out.csv"
        emit_results(self.rows(), str(path), "csv")
        lines = path.read_text().strip().split("\n")
        assert all(len(line.split(",")) == 6 for line in lines)

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_results(self.rows(), str(a), "csv")
        emit_results(self.rows(), str(b), "csv")
        assert a.read_bytes() == b.read_bytes()

    def test_json_lines(self, tmp_path):
        path = tmp_path / "out.jsonl"
        emit_results(self.rows(), str(path), "json-lines")
        recs = [json.loads(line) for line in path.read_text().strip().split("\n")]
        assert recs[0]["scheme"] == "no_ris" and recs[1]["excluded"] == 1

    def test_bad_format_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results([], str(tmp_path / "x"), "xml")

    def test_unwritable_path_raises_with_context(self):
        with pytest.raises(OSError, match="no/such/dir"):
            emit_results([], "/no/such/dir/out.csv", "csv")


class TestCli:
    def test_asymptotic_stdout(self, capsys):
        assert cli.main(["asymptotic", "--elements-grid", "256"]) == 0
        out = capsys.readouterr().out
        assert "snr_passive_db" in out and "256" in out

    def test_crossover_value(self, capsys):
        assert cli.main(["crossover"]) == 0
        assert abs(float(capsys.readouterr().out.strip()) - 2.5e6) < 0.01 * 2.5e6

    def test_coverage_value(self, capsys):
        assert cli.main(["coverage"]) == 0
        assert abs(float(capsys.readouterr().out.strip()) - 1.43) < 0.01

    def test_sweep_writes_file(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = cli.main(["sweep", "--var", "L", "--values", "300", "--trials", "1",
                         "--elements", "8", "--seed", "1", "--out", str(out),
                         "--config", str(_tiny_config(tmp_path))])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "scheme,x,mean_rate,std_rate,trials,excluded"
        assert len(lines) > 1

    def test_bad_config_returns_1(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"scenario": {"nonsense_key": 1}}')
        code = cli.main(["sweep", "--var", "L", "--values", "300", "--trials", "1",
                         "--config", str(cfg)])
        assert code == 1

    def test_malformed_json_returns_1(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        code = cli.main(["sweep", "--var", "L", "--config", str(cfg)])
        assert code == 1

    def test_unknown_flag_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["sweep", "--var", "L", "--frobnicate"])
        assert exc.value.code == 1


def _tiny_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "scenario": {"m": 2, "k": 2, "n": 8},
        "sweep": {"schemes": ["no_ris", "random_phase"]},
    }))
    return cfg
