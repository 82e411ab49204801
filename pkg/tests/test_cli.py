import json

import numpy as np
import pytest

from collapsebox.cli import main, parse_sweep_grid, parse_time_grid, scenario_hash


def write_scenario(path, **overrides):
    scen = {
        "p0": [0.3, 0.7],
        "family": {"kind": "frozen", "dt": [0.0, 1.0]},
        "window": {"dt_window": 1.0, "g": {"kind": "uniform"}},
        "schedule": {"tA": 0.0, "tB": 0.5, "x": 1},
    }
    scen.update(overrides)
    path.write_text(json.dumps(scen))
    return scen


def data_section(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# scenario=")
    return "\n".join(lines[1:])


class TestValidate:
    def test_pass(self, tmp_path, capsys):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        assert main(["validate", "--scenario", str(scen)]) == 0
        assert "validation passed" in capsys.readouterr().out

    def test_violating_table_names_clause(self, tmp_path, capsys):
        scen = tmp_path / "s.json"
        prior = [[0.3, 0.7], [0.3, 0.7]]
        bad = [[0.9, 0.1], [0.0, 1.0]]  # row 0 never reaches its delta exactly
        write_scenario(scen, family={
            "kind": "table",
            "grid": {"times": [0.0, 1.0, 2.0], "values": [prior, bad, bad]},
        })
        assert main(["validate", "--scenario", str(scen)]) == 2
        out = capsys.readouterr().out
        assert "clause 'final'" in out and "VIOLATED" in out

    def test_missing_file(self, tmp_path):
        assert main(["validate", "--scenario", str(tmp_path / "nope.json")]) == 1


class TestWitnessCommand:
    def test_summary_and_csv(self, tmp_path, capsys):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        out = tmp_path / "out"
        rc = main(["witness", "--scenario", str(scen), "--out", str(out),
                   "--n", "20000", "--seed", "1", "--grid", "0:1:5"])
        assert rc == 0
        text = capsys.readouterr().out
        assert "max TV 2.100e-01" in text
        assert "verdict: signaling" in text
        lines = (out / "witness.csv").read_text().splitlines()
        assert lines[1].split(",")[0] == "elapsed"
        assert len(lines) == 2 + 5

    def test_instantaneous_summary(self, tmp_path, capsys):
        scen = tmp_path / "s.json"
        write_scenario(scen, family={"kind": "instantaneous"})
        rc = main(["witness", "--scenario", str(scen), "--out", str(tmp_path),
                   "--n", "5000"])
        assert rc == 0
        text = capsys.readouterr().out
        assert "max TV 0.000e+00" in text
        assert "verdict: non-signaling" in text

    def test_empty_grid(self, tmp_path):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        rc = main(["witness", "--scenario", str(scen), "--out", str(tmp_path),
                   "--grid", " "])
        assert rc == 1


class TestSimulateCommand:
    def test_schedule_run(self, tmp_path, capsys):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        out = tmp_path / "out"
        rc = main(["simulate", "--scenario", str(scen), "--out", str(out),
                   "--n", "20000", "--seed", "42"])
        assert rc == 0
        assert "gof vs analytic" in capsys.readouterr().out
        lines = (out / "empirical.csv").read_text().splitlines()
        assert len(lines) == 2 + 2  # header comment, columns, two outcomes

    def test_window_run(self, tmp_path, capsys):
        scen = tmp_path / "s.json"
        write_scenario(scen, family={"kind": "linear", "dt": [0.25, 1.0]})
        scenario = json.loads(scen.read_text())
        del scenario["schedule"]
        scen.write_text(json.dumps(scenario))
        rc = main(["simulate", "--scenario", str(scen), "--out", str(tmp_path),
                   "--n", "100000", "--seed", "1"])
        assert rc == 0
        text = capsys.readouterr().out
        assert "gof vs prior" in text and "reject" in text

    def test_zero_replicas(self, tmp_path):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        rc = main(["simulate", "--scenario", str(scen), "--out", str(tmp_path),
                   "--n", "0"])
        assert rc == 1


class TestSweepCommand:
    def test_theta_column(self, tmp_path):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        out = tmp_path / "out"
        rc = main(["sweep", "--scenario", str(scen), "--out", str(out),
                   "--grid", "dt=0,0.25,0.5", "--n", "2000"])
        assert rc == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        cols = lines[1].split(",")
        ti = cols.index("theta")
        thetas = [float(l.split(",")[ti]) for l in lines[2:]]
        assert thetas == pytest.approx([0.0, 0.4375, 0.75], abs=1e-6)
        assert not (out / "MANIFEST.partial").exists()

    def test_dt_beyond_window(self, tmp_path):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        out = tmp_path / "out"
        rc = main(["sweep", "--scenario", str(scen), "--out", str(out),
                   "--grid", "dt=1.5", "--n", "1000"])
        assert rc == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        cols = lines[1].split(",")
        assert float(lines[2].split(",")[cols.index("theta")]) == 1.0

    def test_partial_marker_on_failure(self, tmp_path):
        scen = tmp_path / "s.json"
        write_scenario(scen, family={"kind": "exponential", "rates": [2.0, 3.0]})
        out = tmp_path / "out"
        rc = main(["sweep", "--scenario", str(scen), "--out", str(out),
                   "--grid", "dt=0.5", "--n", "1000"])
        assert rc == 1
        assert (out / "MANIFEST.partial").exists()


class TestReproducibility:
    def test_identical_runs_byte_identical(self, tmp_path):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["witness", "--scenario", str(scen), "--out", str(out),
                         "--n", "5000", "--seed", "7", "--grid", "0:1:5"]) == 0
            outs.append(data_section(out / "witness.csv"))
        assert outs[0] == outs[1]

    def test_worker_count_irrelevant(self, tmp_path, monkeypatch):
        scen = tmp_path / "s.json"
        write_scenario(scen)
        sections = []
        for name, threads in (("w1", "1"), ("w8", "8")):
            monkeypatch.setenv("COLLAPSE_BOX_THREADS", threads)
            out = tmp_path / name
            assert main(["simulate", "--scenario", str(scen), "--out", str(out),
                         "--n", "30000", "--seed", "5"]) == 0
            sections.append(data_section(out / "empirical.csv"))
        assert sections[0] == sections[1]


class TestParsers:
    def test_time_grid_forms(self):
        assert np.allclose(parse_time_grid("0:1:3", None), [0, 0.5, 1])
        assert np.allclose(parse_time_grid("0.1,0.2", None), [0.1, 0.2])

    def test_sweep_grid(self):
        g = parse_sweep_grid("dt=0,0.5;n=100,200")
        assert g == {"dt": [0.0, 0.5], "n": [100, 200]}
        with pytest.raises(Exception):
            parse_sweep_grid("bogus=1")

    def test_hash_stable(self):
        a = scenario_hash({"b": 1, "a": [1, 2]})
        b = scenario_hash({"a": [1, 2], "b": 1})
        assert a == b and len(a) == 12
