"""Desk-scale acceptance suite; each test prints one PASS/FAIL line."""

import filecmp
import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from paracalc import cli
from paracalc.energy import EnergySchedule, gronwall_check

BUNDLED = Path(cli.__file__).parent / "scenarios"


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def probes(*names):
    return cli.probe_suite(list(names))


@pytest.fixture(scope="module")
def scenario_runs(tmp_path_factory):
    """Every bundled scenario run twice through the command line, with wall times."""
    os.environ.pop("PARACALC_SEED", None)
    root = tmp_path_factory.mktemp("bundled")
    out = {}
    for path in sorted(BUNDLED.glob("*.json")):
        if path.name.endswith(".baseline.json"):
            continue
        dirs, codes = [], []
        t0 = time.perf_counter()
        for k in range(2):
            d = root / f"{path.stem}_{k}"
            codes.append(cli.main(["run", str(path), "--out", str(d)]))
            dirs.append(d)
        out[path.stem] = {"dirs": dirs, "codes": codes, "elapsed": time.perf_counter() - t0}
    return out


def test_ac1_dyadic_exactness(acceptance_line):
    with Timer() as t:
        r = probes("dyadic:exactness")["dyadic:exactness"]
    ok = r["verdict"] and t.elapsed <= 10
    acceptance_line("AC1", ok, f"reconstruction {r['reconstruction']:.1e}, orthogonality {r['orthogonality']:.1e}, "
                    f"Bernstein [{r['bernstein_min']:.3f}, {r['bernstein_max']:.3f}]", t.elapsed, 10)
    assert ok


def test_ac2_norm_machinery(acceptance_line):
    with Timer() as t:
        r = probes("norms:equivalence", "product:holder", "product:ll")
    worst = max(r["norms:equivalence"]["brackets"].values())
    ok = all(v["verdict"] for v in r.values()) and t.elapsed <= 60
    acceptance_line("AC2", ok, f"equivalence max/min {worst:.3f}, Holder region "
                    f"{r['product:holder']['verdict']}, LL region {r['product:ll']['verdict']}", t.elapsed, 60)
    assert ok


def test_ac3_mollifier_laws(acceptance_line):
    with Timer() as t:
        r = probes("mollifier:laws")["mollifier:laws"]
    ok = r["verdict"] and t.elapsed <= 30
    acceptance_line("AC3", ok, f"approximation spread {max(r['approx_max_over_min']):.3f}, "
                    f"derivative spread {max(r['slope_max_over_min']):.3f}", t.elapsed, 30)
    assert ok


def _scales(obj):
    if isinstance(obj, dict):
        if "scales" in obj:
            yield from obj["scales"]
        for v in obj.values():
            yield from _scales(v)


def test_ac4_operator_orders(acceptance_line):
    names = ["order:action", "order:paraproduct", "order:cutoff", "order:composition", "order:adjoint",
             "order:paralin", "order:time_commutator"]
    with Timer() as t:
        r = probes(*names)
    tols = {"action": r["order:action"]["tol"], "cutoff": r["order:cutoff"]["tol"],
            "adjoint": r["order:adjoint"]["tol"],
            "composition": max(c["tol"] for c in r["order:composition"]["cases"].values())}
    tol_ok = tols["action"] <= 0.1 and tols["cutoff"] <= 0.15 and tols["adjoint"] <= 0.2 \
        and tols["composition"] <= 0.2
    scale_ok = max(_scales(r)) <= 9
    residual = r["order:time_commutator"]["identity_residual"]
    failed = [n for n in names if not r[n]["verdict"]]
    ok = not failed and tol_ok and scale_ok and residual <= 1e-6 and t.elapsed <= 600
    acceptance_line("AC4", ok, f"{len(names) - len(failed)}/{len(names)} probes pass, "
                    f"time identity residual {residual:.1e}, max scale {max(_scales(r))}", t.elapsed, 600)
    assert ok, failed


def test_ac5_symmetrizer(acceptance_line):
    with Timer() as t:
        r = probes("symmetrizer:wave")["symmetrizer:wave"]
    res = max(s["residual"] for s in r["systems"])
    mu = max(s["mu"] for s in r["systems"])
    ok = r["verdict"] and len(r["systems"]) == 10 and res <= 1e-10 and mu <= 64 and t.elapsed <= 60
    acceptance_line("AC5", ok, f"10 systems, worst residual {res:.1e}, largest mu {mu:g}", t.elapsed, 60)
    assert ok


def test_ac6_no_loss_control(acceptance_line):
    with Timer() as t:
        r = probes("solver:conservation", "solver:transport", "loss:lipschitz")
    drift = r["solver:conservation"]["l2_drift"]
    err = r["solver:transport"]["max_error"]
    beta = r["loss:lipschitz"]["beta_hat"]
    ok = drift <= 1e-8 and err <= 1e-6 and beta <= 0.05 and t.elapsed <= 60
    acceptance_line("AC6", ok, f"L2 drift {drift:.1e}, transport error {err:.1e}, Lipschitz beta_hat {beta:.4f}",
                    t.elapsed, 60)
    assert ok


@pytest.mark.slow
def test_ac7_loss_phenomenon(acceptance_line, scenario_runs):
    with Timer() as t:
        coarse, runs = cli.ll_time_loss(1024, return_runs=True)
        corr = min(c for j, c in zip(coarse.j_values, coarse.correlations) if j in coarse.fitted_j)
        beta = 1.2 * coarse.beta_hat
        sched = EnergySchedule(0.9, beta, 2.0)
        C1, C2 = cli.en.fit_gronwall_constants(runs, 0.9, beta, 2.0, refined=True)
        closure = [gronwall_check(run, sched, 1.1 * C1, C2, refined=True) for run in runs]
        fine = cli.ll_time_loss(2048)
    change = abs(fine.beta_hat - coarse.beta_hat) / coarse.beta_hat
    report = json.loads((scenario_runs["ll_time_loss"]["dirs"][0] / "report.json").read_text())
    refined = next(c for c in report["checks"] if c["name"] == "gronwall.refined_margin")
    ok = (np.isfinite(coarse.beta_hat) and coarse.beta_hat >= 0.1 and corr >= 0.9
          and all(g.verdict for g in closure) and refined["passed"] and change <= 0.2 and t.elapsed <= 600)
    acceptance_line("AC7", ok, f"beta_hat {coarse.beta_hat:.4f} (N=2048: {fine.beta_hat:.4f}, change "
                    f"{100 * change:.1f}%), min correlation {corr:.4f}, refined closure margin "
                    f"{min(g.margin for g in closure):.3f}, scenario margin {refined['value']:.3f}",
                    t.elapsed, 600)
    assert ok


def test_ac8_commutators(acceptance_line):
    with Timer() as t:
        r = probes("commutator:smooth", "commutator:ll")
    ratios = {k.split(":")[1]: v["ratio"] for k, v in r.items()}
    ok = all(v["verdict"] and v["ratio"] <= 1e-2 for v in r.values()) and t.elapsed <= 60
    acceptance_line("AC8", ok, ", ".join(f"{k} final/initial {v:.1e}" for k, v in ratios.items()), t.elapsed, 60)
    assert ok


def test_ac9_oracles(acceptance_line):
    with Timer() as t:
        r = probes("oracle:dense", "oracle:bony")
    dense, bony = r["oracle:dense"]["residual"], r["oracle:bony"]["residual"]
    ok = dense <= 1e-12 and bony <= 1e-10 and t.elapsed <= 10
    acceptance_line("AC9", ok, f"dense residual {dense:.1e}, Bony residual {bony:.1e}", t.elapsed, 10)
    assert ok


@pytest.mark.slow
def test_ac10_determinism(acceptance_line, scenario_runs):
    same = {name: filecmp.cmp(r["dirs"][0] / "report.json", r["dirs"][1] / "report.json", shallow=False)
            for name, r in scenario_runs.items()}
    codes = {name: r["codes"] for name, r in scenario_runs.items()}
    elapsed = sum(r["elapsed"] for r in scenario_runs.values())
    ok = all(same.values()) and all(c == [0, 0] for c in codes.values()) and elapsed <= 1500
    acceptance_line("AC10", ok, f"{len(same)} scenarios, byte-identical {sum(same.values())}/{len(same)}, "
                    f"exit codes {codes}", elapsed, 1500)
    assert ok
