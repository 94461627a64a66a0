"""Command-line interface: scenarios, probes, plots and the report format."""

import copy
import csv
import json
import math
from pathlib import Path

import pytest

from paracalc import cli

BUNDLED = Path(cli.__file__).parent / "scenarios"

SMALL = {
    "schema_version": 1,
    "name": "small_constant",
    "system": {"m": 2, "A": {"type": "constant", "matrix": [[0.0, 1.0], [1.0, 0.0]]}},
    "solver": {"n_points": 64, "t_end": 0.5, "dt": 0.005},
    "initial": {"type": "random", "seed": 1, "kmax": 8, "decay": 2.0},
    "loss": {"j_min": 2, "j_max": 4, "s": 0.5},
    "schedule": {"s": 0.5, "beta": 0.0, "T_star": 0.5, "mu": "calibrate"},
    "commutator": {"seed": 5, "kmax": 2},
    "gates": {"conservation_tol": 1e-8, "beta_hat_max": 0.02, "gronwall_basic": [1.01, 0.0], "mu_max": 64},
}


def write(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2) if isinstance(doc, dict) else doc)
    return path


def svg_count(svg, tag):
    return svg.count(f"<{tag} ")


@pytest.fixture
def small(tmp_path):
    return write(tmp_path, SMALL)


class TestScenarioFiles:
    @pytest.mark.parametrize("name", ["constant_symmetric", "ll_time_loss"])
    def test_bundled_files_validate(self, name):
        scen = cli.load_scenario(BUNDLED / f"{name}.json")
        assert scen["name"] == name
        base = json.loads((BUNDLED / f"{name}.baseline.json").read_text())
        cli.jsonschema.validate(base, cli.BASELINE_SCHEMA)

    def test_schema_error_names_line_and_field(self, tmp_path, capsys):
        doc = copy.deepcopy(SMALL)
        doc["system"]["A"] = {"type": "wave", "speed": {"type": "ll_x", "mean": 1.0}}
        path = write(tmp_path, doc)
        assert cli.main(["run", str(path), "--out", str(tmp_path / "o")]) == 2
        err = capsys.readouterr().err
        assert "field system.A.speed" in err and "'seed' is a required property" in err
        line = int(err.split("line ")[1].split(":")[0])
        assert '"speed"' in path.read_text().splitlines()[line - 1]

    def test_malformed_json(self, tmp_path, capsys):
        path = write(tmp_path, '{\n  "schema_version": 1,\n  "name": \n}')
        assert cli.main(["run", str(path)]) == 2
        assert "line 4, column 1" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "absent.json")]) == 2

    def test_wrong_schema_version(self, tmp_path):
        doc = dict(SMALL, schema_version=2)
        assert cli.main(["run", str(write(tmp_path, doc))]) == 2

    def test_inadmissible_schedule(self, tmp_path, capsys):
        doc = copy.deepcopy(SMALL)
        doc["schedule"].update(beta=0.6, T_star=1.0)
        assert cli.main(["run", str(write(tmp_path, doc))]) == 2
        assert "field schedule" in capsys.readouterr().err

    def test_unknown_property(self, tmp_path, capsys):
        doc = copy.deepcopy(SMALL)
        doc["solver"]["order"] = 4
        assert cli.main(["run", str(write(tmp_path, doc))]) == 2
        assert "field solver" in capsys.readouterr().err


class TestRun:
    def test_outputs(self, small, tmp_path):
        out = tmp_path / "o"
        assert cli.main(["run", str(small), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert sorted(report) == ["baseline", "checks", "fitted", "passed", "results", "scenario",
                                  "schema_version", "seed_override"]
        assert report["passed"] and report["baseline"] is None and report["seed_override"] is None
        assert {c["provenance"] for c in report["checks"]} <= {"invariant", "scenario", "baseline",
                                                              "fitted-in-run"}
        for name in ("energy.csv", "loss.csv", "spectral_summary.csv", "plots/energy.svg", "plots/loss.svg"):
            assert (out / name).exists()
        header = next(csv.reader((out / "energy.csv").open()))
        assert header == cli.PLOT_COLUMNS["energy"]

    def test_golden_structure(self, tmp_path):
        out = tmp_path / "o"
        assert cli.main(["run", str(BUNDLED / "constant_symmetric.json"), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert [c["name"] for c in report["checks"]] == [
            "hyperbolic.max_imag_eigenvalue", "symmetrizer.hermitian", "symmetrizer.positivity",
            "symmetrizer.symmetrizes", "symmetrizer.homogeneity", "solver.l2_conservation", "loss.beta_hat",
            "loss.beta_hat_vs_baseline", "schedule.lifespan", "energy.calibration", "energy.mu",
            "energy.derivative_C1", "energy.derivative_C23", "gronwall.basic_margin", "gronwall.refined_margin",
            "commutator.decay"]
        assert sorted(report["fitted"]) == ["beta_hat", "gronwall_C1", "gronwall_C2"]
        assert report["baseline"] == "constant_symmetric.baseline.json"
        for c in report["checks"]:
            assert set(c) >= {"name", "value", "op", "bound", "provenance", "passed"}

    def test_seed_override(self, small, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("PARACALC_SEED", "7")
        out = tmp_path / "o"
        assert cli.main(["run", str(small), "--out", str(out)]) == 0
        assert "PARACALC_SEED=7" in capsys.readouterr().err
        assert json.loads((out / "report.json").read_text())["seed_override"] == 7

    def test_seed_override_must_be_integer(self, small, monkeypatch):
        monkeypatch.setenv("PARACALC_SEED", "seven")
        assert cli.main(["run", str(small)]) == 2

    def test_override_rewrites_every_seed(self):
        doc = {"a": {"seed": 1, "seed_x": 2}, "b": [{"seed": 3}], "seeds": 4}
        new = cli._override_seeds(doc, 7)
        assert new["seeds"] == 4 and new == cli._override_seeds(doc, 7)
        assert new["a"]["seed"] != 1 and new["b"][0]["seed"] != 3 and new != cli._override_seeds(doc, 8)

    def test_guard_exit_code(self, tmp_path):
        doc = copy.deepcopy(SMALL)
        doc["solver"]["dt"] = 0.2
        assert cli.main(["run", str(write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 3

    def test_failed_gate_exit_code(self, tmp_path):
        doc = copy.deepcopy(SMALL)
        doc["gates"]["beta_hat_max"] = -1.0
        out = tmp_path / "o"
        assert cli.main(["run", str(write(tmp_path, doc)), "--out", str(out)]) == 1
        report = json.loads((out / "report.json").read_text())
        assert not report["passed"] and [c["name"] for c in report["checks"] if not c["passed"]] == ["loss.beta_hat"]

    def test_rebaseline(self, small, tmp_path):
        out = tmp_path / "o"
        assert cli.main(["run", str(small), "--out", str(out), "--rebaseline"]) == 0
        base = json.loads((tmp_path / "scenario.baseline.json").read_text())
        assert base["scenario"] == "small_constant" and set(base["values"]) == {"beta_hat", "gronwall_C1",
                                                                                "gronwall_C2"}
        assert cli.main(["run", str(small), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["baseline"] == "scenario.baseline.json"
        assert any(c["provenance"] == "baseline" for c in report["checks"])

    def test_rebaseline_refused_on_failure(self, tmp_path, capsys):
        doc = copy.deepcopy(SMALL)
        doc["gates"]["beta_hat_max"] = -1.0
        path = write(tmp_path, doc)
        assert cli.main(["run", str(path), "--out", str(tmp_path / "o"), "--rebaseline"]) == 1
        assert "refusing to rebaseline" in capsys.readouterr().err
        assert not (tmp_path / "scenario.baseline.json").exists()

    def test_corrupt_baseline(self, small, tmp_path):
        (tmp_path / "scenario.baseline.json").write_text('{"values": 3}')
        assert cli.main(["run", str(small), "--out", str(tmp_path / "o")]) == 2


class TestProbes:
    def test_unknown_name(self, tmp_path, capsys):
        assert cli.main(["probe", "order:nonsense", "--out", str(tmp_path)]) == 2
        assert "unknown probe" in capsys.readouterr().err

    def test_empty_selection(self, tmp_path):
        assert cli.main(["probe", "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["probes"] == {} and report["passed"]
        assert not (tmp_path / "order.csv").exists()

    def test_single_order_probe(self, tmp_path):
        assert cli.main(["probe", "order:paraproduct", "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert list(report["probes"]) == ["order:paraproduct"]
        rows = list(csv.DictReader((tmp_path / "order.csv").open()))
        assert rows and {r["probe"] for r in rows} == {"order:paraproduct"}

    def test_selection_expands_and_deduplicates(self):
        names = cli.resolve_selection(["dyadic:exactness", "all", "dyadic:exactness"])
        assert names[0] == "dyadic:exactness" and len(names) == len(cli.PROBES)

    def test_threads_do_not_change_results(self):
        sel = ["dyadic:exactness", "oracle:bony"]
        assert cli.dumps_report(cli.probe_suite(sel, 1)) == cli.dumps_report(cli.probe_suite(sel, 2))


class TestPlots:
    def test_empty_csv_gives_axes(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text(",".join(cli.PLOT_COLUMNS["energy"]) + "\n")
        assert cli.main(["plot", str(path), "--kind", "energy"]) == 0
        svg = path.with_suffix(".svg").read_text()
        assert svg_count(svg, "polyline") == 0 and svg.count('class="axis"') == 2

    def test_loss_plot(self, tmp_path):
        path = tmp_path / "loss.csv"
        rows = [(j, t / 10, 0.1 * j * t / 10) for j in (3, 4, 5) for t in range(11)]
        cli._write_csv(path, cli.PLOT_COLUMNS["loss"], rows)
        svg = cli.plot_csv(path, "loss")
        # three growth curves plus the rates panel
        assert svg_count(svg, "polyline") == 4
        assert "beta_hat: slope 0.1<" in svg

    def test_energy_plot(self, tmp_path):
        path = tmp_path / "energy.csv"
        rows = [(t / 10, 0.5, math.exp(t / 10), 2 * math.exp(t / 10), 1.0, 0.1) for t in range(11)]
        cli._write_csv(path, cli.PLOT_COLUMNS["energy"], rows)
        svg = cli.plot_csv(path, "energy")
        assert svg_count(svg, "polyline") == 2 and svg.count('class="fit"') == 2
        assert f"slope {1 / math.log(10):.4g}" in svg

    def test_order_plot_one_series_per_pair(self, tmp_path):
        path = tmp_path / "order.csv"
        rows = [(p, pair, j, 2.0**j) for p in ("a", "b") for pair in ("0.5,0", "1,0") for j in range(3, 7)]
        cli._write_csv(path, cli.PLOT_COLUMNS["order"], rows)
        svg = cli.plot_csv(path, "order")
        assert svg_count(svg, "polyline") == 4 and "slope 1" in svg

    def test_column_mismatch(self, tmp_path, capsys):
        path = tmp_path / "loss.csv"
        path.write_text("j,t,growth\n1,0,0\n")
        assert cli.main(["plot", str(path), "--kind", "energy"]) == 2
        assert "do not match" in capsys.readouterr().err

    def test_output_path(self, tmp_path):
        path = tmp_path / "o.csv"
        path.write_text(",".join(cli.PLOT_COLUMNS["order"]) + "\n")
        target = tmp_path / "fig.svg"
        assert cli.main(["plot", str(path), "--kind", "order", "--out", str(target)]) == 0
        assert target.read_text().startswith("<svg")


class TestReportFormat:
    def test_twelve_significant_digits(self):
        text = cli.dumps_report({"b": 1 / 3, "a": [float("inf"), 2]})
        doc = json.loads(text)
        assert doc["b"] == 0.333333333333 and doc["a"] == ["inf", 2]
        assert text.index('"a"') < text.index('"b"')

    def test_check_ops(self):
        assert cli._check("x", 1.0, 2.0, "<=", "invariant")["passed"]
        assert not cli._check("x", 1.0, 2.0, ">=", "invariant")["passed"]
        assert cli._check("x", 1.1, 1.0, "within", "baseline", 0.2)["passed"]
        assert not cli._check("x", 1.3, 1.0, "within", "baseline", 0.2)["passed"]
        with pytest.raises(ValueError):
            cli._check("x", 1.0, 1.0, "<", "invariant")
