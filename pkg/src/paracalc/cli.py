"""Command-line front end: scenario runs, the probe suite and SVG plots.

    paracalc run <scenario.json> [--out DIR] [--threads K] [--rebaseline]
    paracalc probe <name ...|all> [--out DIR] [--threads K]
    paracalc plot <csv> --kind {energy,loss,order} [--out FILE]

Exit codes: 0 all gated checks pass, 1 a check failed, 2 invalid input,
3 a numerical guard tripped.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import energy as en
from . import paradiff as pd
from . import spaces as sp
from . import spectral_core as sc
from . import symbols as sy
from . import systems as st
from .solver import (
    HyperbolicSystem,
    NumericalGuardError,
    SolverConfig,
    commutator_probe,
    evolve,
    loss_experiment,
    packet,
    stable_step,
    write_spectral_summary_csv,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


class ScenarioError(ValueError):
    """Scenario file is malformed or violates the schema."""


# --- scenario schema --------------------------------------------------------------------

_SEEDED = ["ll_x", "holder_x", "ll_t", "ll_tx"]

SCALAR_PRESET = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["constant", "smooth_x", "ll_x", "holder_x", "lipschitz_t", "ll_t", "ll_tx"]},
        "seed": {"type": "integer", "minimum": 0},
        "seed_x": {"type": "integer", "minimum": 0},
        "terms": {"type": "integer", "minimum": 1, "maximum": 16},
        "terms_x": {"type": "integer", "minimum": 1, "maximum": 16},
        "j_min": {"type": "integer", "minimum": 0},
        "mean": {"type": "number"},
        "amplitude": {"type": "number"},
        "value": {"type": "number"},
        "mode": {"type": "integer"},
        "phase": {"type": "number"},
        "frequency": {"type": "number"},
        "gamma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "profile": {"enum": ["saturated", "weierstrass"]},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"type": {"enum": _SEEDED}}}, "then": {"required": ["seed"]}},
        {"if": {"properties": {"type": {"const": "holder_x"}}}, "then": {"required": ["gamma"]}},
    ],
}

MATRIX_PRESET = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["zero", "constant", "wave", "scalar_times"]},
        "matrix": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "speed": SCALAR_PRESET,
        "scalar": SCALAR_PRESET,
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"type": {"const": "constant"}}}, "then": {"required": ["matrix"]}},
        {"if": {"properties": {"type": {"const": "wave"}}}, "then": {"required": ["speed"]}},
        {"if": {"properties": {"type": {"const": "scalar_times"}}}, "then": {"required": ["matrix", "scalar"]}},
    ],
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "name", "system", "solver"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "system": {
            "type": "object",
            "required": ["A"],
            "additionalProperties": False,
            "properties": {
                "m": {"type": "integer", "minimum": 1, "maximum": 4},
                "kind": {"enum": ["L", "L*"]},
                "A": MATRIX_PRESET,
                "B": MATRIX_PRESET,
                "f": {
                    "type": "object",
                    "required": ["type"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"enum": ["zero", "mode"]},
                        "k": {"type": "integer"},
                        "component": {"type": "integer", "minimum": 0},
                        "amplitude": {"type": "number"},
                        "frequency": {"type": "number"},
                    },
                },
            },
        },
        "solver": {
            "type": "object",
            "required": ["n_points", "t_end"],
            "additionalProperties": False,
            "properties": {
                "n_points": {"type": "integer", "minimum": 16, "maximum": 65536},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 2.8},
                "dealias": {"type": "boolean"},
                "record_stride": {"type": "integer", "minimum": 1},
            },
        },
        "initial": {
            "type": "object",
            "required": ["type", "seed"],
            "additionalProperties": False,
            "properties": {
                "type": {"enum": ["random"]},
                "seed": {"type": "integer", "minimum": 0},
                "kmax": {"type": "integer", "minimum": 1},
                "decay": {"type": "number", "minimum": 0},
            },
        },
        "loss": {
            "type": "object",
            "required": ["j_min", "j_max", "s"],
            "additionalProperties": False,
            "properties": {
                "j_min": {"type": "integer", "minimum": 0},
                "j_max": {"type": "integer", "minimum": 1},
                "s": {"type": "number"},
                "fit_from": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            },
        },
        "schedule": {
            "type": "object",
            "required": ["s", "beta", "T_star"],
            "additionalProperties": False,
            "properties": {
                "s": {"type": "number"},
                "beta": {"oneOf": [{"type": "number", "minimum": 0}, {"const": "fit"}]},
                "beta_factor": {"type": "number", "exclusiveMinimum": 0},
                "T_star": {"type": "number", "exclusiveMinimum": 0},
                "mu": {"oneOf": [{"type": "number", "minimum": 2}, {"const": "calibrate"}]},
                "kind": {"enum": ["L", "L*"]},
                "gamma": {"type": "number", "exclusiveMinimum": 0},
                "record_stride": {"type": "integer", "minimum": 1},
            },
        },
        "commutator": {
            "type": "object",
            "required": ["seed"],
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "kmax": {"type": "integer", "minimum": 1},
                "s": {"type": "number"},
            },
        },
        "gates": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "beta_hat_max": {"type": "number"},
                "beta_hat_min": {"type": "number"},
                "correlation_min": {"type": "number"},
                "conservation_tol": {"type": "number", "exclusiveMinimum": 0},
                "symmetrizer_tol": {"type": "number", "exclusiveMinimum": 0},
                "mu_max": {"type": "number", "minimum": 2},
                "derivative_fit_max": {"type": "number"},
                "gronwall_basic": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "baseline_rel_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "probes": {"type": "array", "items": {"type": "string"}},
    },
}

BASELINE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "scenario", "values"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "scenario": {"type": "string"},
        "values": {"type": "object"},
    },
}


def _line_of(text: str, path) -> str:
    """Best-effort line number of the deepest string key in ``path``."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return ""
    needle = f'"{keys[-1]}"'
    for no, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return f"line {no}: "
    return ""


def load_scenario(path) -> dict:
    """Parse and validate a scenario file; raises ScenarioError with a line/field diagnostic."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    errors = sorted(jsonschema.Draft202012Validator(SCENARIO_SCHEMA).iter_errors(data),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        where = ".".join(map(str, err.absolute_path)) or "<root>"
        raise ScenarioError(f"{path}: {_line_of(text, err.absolute_path)}field {where}: {err.message}")
    sched = data.get("schedule")
    if sched and sched["beta"] != "fit":
        try:
            _schedule(sched, float(sched["beta"]), 2.0)
        except ValueError as exc:
            raise ScenarioError(f"{path}: field schedule: {exc}") from exc
    return data


def _override_seeds(obj, override: int):
    """Replace every integer ``seed``/``seed_x`` entry by a hash of (override, original)."""
    if isinstance(obj, dict):
        return {k: (sp.mix(override, v) % 2**31 if k in ("seed", "seed_x") and isinstance(v, int)
                    else _override_seeds(v, override)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_override_seeds(v, override) for v in obj]
    return obj


# --- report helpers ------------------------------------------------------------------------

def _clean(obj):
    """JSON-ready copy with floats at 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return repr(x)
        return float(f"{x:.12g}")
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def _check(name: str, value, bound, op: str, provenance: str, tolerance=None, gated: bool = True) -> dict:
    value = float(value)
    if op == "<=":
        passed = value <= bound
    elif op == ">=":
        passed = value >= bound
    elif op == "within":
        passed = abs(value - bound) <= tolerance * abs(bound)
    else:
        raise ValueError(op)
    return {"name": name, "value": value, "op": op, "bound": bound, "tolerance": tolerance,
            "provenance": provenance, "gated": gated, "passed": bool(passed)}


def _verdict_check(name: str, verdict: bool, provenance: str, detail=None) -> dict:
    return {"name": name, "value": bool(verdict), "op": "is", "bound": True, "tolerance": None,
            "provenance": provenance, "gated": True, "passed": bool(verdict), "detail": detail}


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- scenario execution ----------------------------------------------------------------

def _schedule(spec: dict, beta: float, mu: float) -> en.EnergySchedule:
    return en.EnergySchedule(float(spec["s"]), beta, float(spec["T_star"]), mu,
                             spec.get("kind", "L"), float(spec.get("gamma", 1.0)))


def _time_grid(system: HyperbolicSystem, cfg: SolverConfig, t_end: float) -> np.ndarray:
    if not system.time_dependent:
        return np.array([0.0])
    dt = cfg.dt if cfg.dt is not None else stable_step(system, cfg)
    n = int(round(t_end / dt))
    return np.linspace(0.0, t_end, n + 1)


def execute_scenario(scen: dict, baseline: dict | None, threads: int = 1, out: Path | None = None) -> dict:
    """Run every block of a validated scenario; returns the report dictionary."""
    name = scen["name"]
    gates = scen.get("gates", {})
    rel_tol = float(gates.get("baseline_rel_tol", 0.2))
    base = (baseline or {}).get("values", {})
    solver_spec = scen["solver"]
    n = int(solver_spec["n_points"])
    cfg = SolverConfig(n, float(solver_spec["t_end"]), solver_spec.get("dt"),
                       float(solver_spec.get("cfl", 0.4)), bool(solver_spec.get("dealias", True)),
                       int(solver_spec.get("record_stride", 1)))
    system = st.build_system(scen["system"], n, name)
    checks: list[dict] = []
    results: dict = {}
    fitted: dict = {}
    csv_out: dict[str, tuple[list[str], list]] = {}

    # hyperbolicity and symmetrizer
    verify_times = np.linspace(0.0, cfg.t_end, 257) if system.time_dependent else None
    hyp = st.check_hyperbolic(system, verify_times)
    checks.append(_check("hyperbolic.max_imag_eigenvalue", hyp["max_imag"], 1e-9, "<=", "invariant"))
    S = st.build_symmetrizer(system, verify_times)
    v = st.verify_symmetrizer(S, system, verify_times)
    tol = float(gates.get("symmetrizer_tol", 1e-10))
    for key in ("hermitian", "positivity", "symmetrizes", "homogeneity"):
        checks.append(_check(f"symmetrizer.{key}", v[key], tol, "<=", "invariant"))
    results["symmetrizer"] = {k: v[k] for k in ("lambda", "Lambda", "ll_x", "ll_t")}

    # main trajectory
    traj = None
    if "initial" in scen:
        ini = scen["initial"]
        u0 = sp.random_field(int(ini["seed"]), n, ini.get("kmax"), system.m,
                             float(ini.get("decay", 0.0)), real=False)
        traj = evolve(system, u0, cfg, name)
        norms = np.linalg.norm(traj.states.reshape(len(traj.times), -1), axis=1)
        drift = float(np.max(np.abs(norms / norms[0] - 1.0)))
        results["l2_drift"] = drift
        if "conservation_tol" in gates:
            checks.append(_check("solver.l2_conservation", drift, float(gates["conservation_tol"]), "<=",
                                 "scenario"))
        if out is not None:
            write_spectral_summary_csv(traj, out / "spectral_summary.csv")

    # loss experiment
    loss_runs, beta_hat = None, None
    if "loss" in scen:
        ls = scen["loss"]
        report, loss_runs = loss_experiment(system, range(int(ls["j_min"]), int(ls["j_max"]) + 1),
                                            float(ls["s"]), cfg, float(ls.get("fit_from", 0.2)),
                                            scenario=name, return_runs=True)
        beta_hat = report.beta_hat
        fitted["beta_hat"] = beta_hat
        results["loss"] = {k: v for k, v in report.to_dict().items() if k not in ("times", "growth")}
        if "beta_hat_max" in gates:
            checks.append(_check("loss.beta_hat", beta_hat, float(gates["beta_hat_max"]), "<=", "scenario"))
        if "beta_hat_min" in gates:
            checks.append(_check("loss.beta_hat", beta_hat, float(gates["beta_hat_min"]), ">=", "scenario"))
        if "correlation_min" in gates:
            fitted_corr = [c for j, c in zip(report.j_values, report.correlations) if j in report.fitted_j]
            checks.append(_check("loss.min_fitted_correlation", min(fitted_corr),
                                 float(gates["correlation_min"]), ">=", "scenario"))
        if "beta_hat" in base:
            checks.append(_check("loss.beta_hat_vs_baseline", beta_hat, float(base["beta_hat"]), "within",
                                 "baseline", rel_tol))
        csv_out["loss.csv"] = (["j", "t", "growth"],
                               [(j, float(t), float(g)) for j, curve in zip(report.j_values, report.growth)
                                for t, g in zip(report.times, curve)])

    # energy schedule, calibration, derivative fit and Gronwall closure
    if "schedule" in scen:
        sch = scen["schedule"]
        T = float(sch["T_star"])
        if sch["beta"] == "fit":
            if beta_hat is None:
                raise ScenarioError("schedule beta 'fit' needs a loss block")
            beta = max(0.0, float(sch.get("beta_factor", 1.2)) * beta_hat)
        else:
            beta = float(sch["beta"])
        results["schedule"] = {"s": float(sch["s"]), "beta": beta, "T_star": T}
        lifespan_ok = beta * T < (float(sch["s"]) if sch.get("kind", "L") == "L"
                                  else float(sch.get("gamma", 1.0)) + float(sch["s"]))
        checks.append(_verdict_check("schedule.lifespan", lifespan_ok, "invariant",
                                     {"beta_T": beta * T}))
        if lifespan_ok:
            times = _time_grid(system, cfg, T)
            S_e = st.build_symmetrizer(system, times) if system.time_dependent else S
            mu_spec = sch.get("mu", "calibrate")
            if mu_spec == "calibrate":
                slices = list(np.linspace(0.0, T, 5)) if system.time_dependent else [None]
                cal = en.calibrate_mu(S_e, en.calibration_corpus(n, system.m, 0),
                                      times=times if system.time_dependent else None, t_slices=slices)
                results["calibration"] = cal.to_dict()
                checks.append(_verdict_check("energy.calibration", cal.passed, "invariant"))
                checks.append(_check("energy.mu", cal.mu, float(gates.get("mu_max", 64)), "<=", "scenario"))
                mu = cal.mu
            else:
                mu = float(mu_spec)
            sched = _schedule(sch, beta, mu)
            functional = en.EnergyFunctional(S_e, mu, times if system.time_dependent else None)

            # energy trace: the main trajectory, or the highest packet of the loss experiment
            if traj is not None:
                etraj = traj
            else:
                j_top = int(scen["loss"]["j_max"])
                stride = int(sch.get("record_stride", 2))
                ecfg = SolverConfig(n, T, cfg.dt, cfg.cfl, cfg.dealias, stride)
                etraj = evolve(system, packet(j_top, n, system.m), ecfg, name)
            fit = en.energy_derivative_probe(etraj, sched, functional)
            results["energy_derivative"] = {"C1": fit.C1, "C23": fit.C23, "worst_violation": fit.worst_violation}
            if "derivative_fit_max" in gates:
                lim = float(gates["derivative_fit_max"])
                checks.append(_check("energy.derivative_C1", fit.C1, lim, "<=", "scenario"))
                checks.append(_check("energy.derivative_C23", fit.C23, lim, "<=", "scenario"))

            gron_runs = loss_runs if loss_runs is not None else [etraj]
            if "gronwall_basic" in gates:
                c1, c2 = map(float, gates["gronwall_basic"])
                worst = min(en.gronwall_check(r, sched, c1, c2).margin for r in gron_runs)
                checks.append(_check("gronwall.basic_margin", worst, 0.0, ">=", "scenario"))
            fC1, fC2 = en.fit_gronwall_constants(gron_runs, sched.s, beta, T, refined=True)
            fitted["gronwall_C1"], fitted["gronwall_C2"] = 1.1 * fC1, fC2
            if "gronwall_C1" in base:
                C1, C2, prov = float(base["gronwall_C1"]), float(base["gronwall_C2"]), "baseline"
            else:
                C1, C2, prov = 1.1 * fC1, fC2, "fitted-in-run"
            margins = [en.gronwall_check(r, sched, C1, C2, refined=True).margin for r in gron_runs]
            results["gronwall"] = {"C1": C1, "C2": C2, "constants": prov, "fitted_C1": 1.1 * fC1,
                                   "fitted_C2": fC2, "margins": margins}
            checks.append(_check("gronwall.refined_margin", min(margins), 0.0, ">=", prov))
            rows = en.energy_csv_rows(etraj, sched, functional, C1, C2)
            cols = ["t", "s(t)", "E", "E_log", "norm_Hs_t", "margin"]
            csv_out["energy.csv"] = (cols, [tuple(r[c] for c in cols) for r in rows])

    # weak = strong commutators
    if "commutator" in scen:
        cm = scen["commutator"]
        u = sp.random_field(int(cm["seed"]), n, int(cm.get("kmax", 2)), system.m)
        decay = commutator_probe(system, u, s=float(cm.get("s", 0.0)))
        results["commutator"] = decay.to_dict()
        checks.append(_verdict_check("commutator.decay", decay.verdict, "invariant",
                                     {"ratio": decay.ratio, "monotone": decay.monotone}))

    if scen.get("probes"):
        suite = probe_suite(scen["probes"], threads)
        results["probes"] = suite
        for key, res in suite.items():
            checks.append(_verdict_check(f"probe.{key}", res["verdict"], "invariant"))

    gated = [c for c in checks if c["gated"]]
    return {"schema_version": SCHEMA_VERSION, "scenario": name, "checks": checks, "results": results,
            "fitted": fitted, "passed": all(c["passed"] for c in gated), "_csv": csv_out}


def _invariant_failures(report: dict) -> list[str]:
    return [c["name"] for c in report["checks"] if c["provenance"] in ("invariant", "scenario") and not c["passed"]]


def run_scenario(path, out=None, threads: int = 1, rebaseline: bool = False) -> int:
    path = Path(path)
    try:
        scen = load_scenario(path)
    except ScenarioError as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT
    override = os.environ.get("PARACALC_SEED")
    if override is not None:
        try:
            value = int(override)
        except ValueError:
            _log(f"error: PARACALC_SEED must be an integer, got {override!r}")
            return EXIT_INPUT
        scen = _override_seeds(scen, value)
        _log(f"PARACALC_SEED={value}: scenario seeds overridden")
    baseline_path = path.with_name(path.stem + ".baseline.json")
    baseline = None
    if baseline_path.exists() and not rebaseline:
        try:
            baseline = json.loads(baseline_path.read_text())
            jsonschema.validate(baseline, BASELINE_SCHEMA)
        except (json.JSONDecodeError, jsonschema.ValidationError) as exc:
            _log(f"error: {baseline_path}: {exc}")
            return EXIT_INPUT
    out = Path(out) if out else Path("paracalc_out") / scen["name"]
    (out / "plots").mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = execute_scenario(scen, baseline, threads, out)
    except NumericalGuardError as exc:
        _log(f"numerical guard: {exc}")
        return EXIT_GUARD
    except ScenarioError as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT
    csv_out = report.pop("_csv")
    report["seed_override"] = None if override is None else int(override)
    report["baseline"] = None if baseline is None else str(baseline_path.name)
    (out / "report.json").write_text(dumps_report(report))
    for fname, (header, rows) in csv_out.items():
        _write_csv(out / fname, header, rows)
        kind = fname.split(".")[0]
        (out / "plots" / f"{kind}.svg").write_text(plot_csv(out / fname, kind))
    for c in report["checks"]:
        _log(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} = {c['value']}")
    _log(f"{scen['name']}: {'passed' if report['passed'] else 'FAILED'} "
         f"in {time.perf_counter() - t0:.1f} s -> {out}")
    if rebaseline:
        bad = _invariant_failures(report)
        if bad:
            _log(f"refusing to rebaseline: failing checks {', '.join(bad)}")
            return EXIT_FAIL
        doc = {"schema_version": SCHEMA_VERSION, "scenario": scen["name"], "values": report["fitted"]}
        baseline_path.write_text(dumps_report(doc))
        _log(f"baseline written to {baseline_path}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


# --- probe suite ----------------------------------------------------------------------------

_N_ORDER = 1024


def _ll_coefficient(seed: int = 3, n: int = _N_ORDER) -> np.ndarray:
    return sp.gen_ll_function(seed, 7, n, profile="weierstrass", j_min=0).values[0].real


def _order_dict(rep: pd.OperatorProbeReport) -> dict:
    d = rep.to_dict()
    d["verdict"] = rep.verdict
    return d


def probe_dyadic_exactness(seed: int = 0) -> dict:
    n = 1024
    part = sc.DyadicPartition(n)
    recon = ortho = 0.0
    bern_lo, bern_hi = np.inf, 0.0
    for i in range(100):
        u = sp.random_field(seed + i, n)
        blocks = [sc.dyadic_block(u, j).values for j in range(part.j_max + 1)]
        recon = max(recon, sc.l2_norm(u.values - sum(blocks)) / sc.l2_norm(u))
        for j in range(part.j_max + 1):
            for k in range(j + 2, part.j_max + 1):
                ortho = max(ortho, float(np.abs(sc.dyadic_block(blocks[k], j).values).max()))
        for j in range(1, part.j_max + 1):
            r = sc.bernstein_ratio(u, j)
            bern_lo, bern_hi = min(bern_lo, r), max(bern_hi, r)
    ok = recon <= 1e-10 and ortho <= 1e-12 and bern_lo >= 0.5 and bern_hi <= 2.0
    return {"reconstruction": recon, "orthogonality": ortho, "bernstein_min": bern_lo,
            "bernstein_max": bern_hi, "verdict": bool(ok)}


def probe_norm_equivalence(seed: int = 0) -> dict:
    n = 1024
    corpus = [sp.random_field(seed + i, n, decay=d).values for i, d in enumerate([0, 0.5, 1, 1.5, 2] * 4)]
    corpus += [sp.dyadic_packet(seed + 100 + j, n, j).values for j in range(1, 8)]
    brackets = {}
    for s, alpha in [(-0.5, 0.0), (0.0, 0.5), (0.5, -0.5), (0.7, 1.0), (1.0, 0.0)]:
        r = [sp.log_sobolev_norm(u, sp.SobolevIndex(s, alpha)) / sp.log_besov_norm(u, s, alpha, 2, 2)
             for u in corpus]
        brackets[f"s={s:+.2f},alpha={alpha:+.2f}"] = float(max(r) / min(r))
    return {"brackets": brackets, "verdict": bool(max(brackets.values()) <= 4.0)}


def _product_family(kind: str, inner, outer) -> dict:
    n = 16384
    a = (sp.gen_holder_function(0.6, 1, 11, n) if kind == "holder"
         else sp.gen_ll_function(1, 11, n, profile="weierstrass"))
    out, ok = {}, True
    for s in inner + outer:
        p = sp.product_probe(a, (s, 0.0))
        expect = s in inner
        out[f"s={s:+.2f}"] = {"last_octave_slope": p.last_octave_slope, "bounded": p.bounded,
                              "expected_bounded": expect}
        ok &= p.bounded == expect
    return {"cases": out, "verdict": bool(ok)}


def probe_product_holder(seed: int = 0) -> dict:
    return _product_family("holder", [0.5, -0.5], [0.8, -0.8])


def probe_product_ll(seed: int = 0) -> dict:
    return _product_family("ll", [0.9, -0.9], [1.2, -1.2])


def probe_mollifier(seed: int = 0) -> dict:
    eps = [2.0**-p for p in range(4, 11)]
    approx, slope = [], []
    for i in range(10):
        ts, vals = sp.gen_ll_time_coefficient(seed + i, 14, 2**16 + 1)
        r = sy.mollifier_law_constants(ts, vals, eps)
        approx.append(float(r["approx"].max() / r["approx"].min()))
        slope.append(float(r["slope"].max() / r["slope"].min()))
    return {"approx_max_over_min": approx, "slope_max_over_min": slope,
            "verdict": bool(max(approx) <= 3.0 and max(slope) <= 3.0)}


def probe_action(seed: int = 0) -> dict:
    c = _ll_coefficient()
    a = sy.Symbol.from_coefficient(1.0 + c, mult=lambda k: 1j * k, order_m=1, class_tag="LL")
    return _order_dict(pd.action_probe(a, seed=seed))


def probe_paraproduct(seed: int = 0) -> dict:
    c = 1.0 + _ll_coefficient()
    rep = pd.operator_order_fit(lambda u: pd.paraproduct(c, u), (0.0, 0.0), _N_ORDER, seed=seed,
                                tol=0.1, name="paraproduct")
    return _order_dict(rep)


def probe_cutoff(seed: int = 0) -> dict:
    a = sy.Symbol.from_coefficient(_ll_coefficient(), mult=lambda k: 1j * k, order_m=1, class_tag="LL")
    return _order_dict(pd.cutoff_independence_probe(a, sy.AdmissibleCutoff(_N_ORDER, 3),
                                                    sy.AdmissibleCutoff(_N_ORDER, 4), seed=seed))


def probe_composition(seed: int = 0) -> dict:
    c = sy.Symbol.from_coefficient(_ll_coefficient(), order_m=0, class_tag="LL")
    c2 = sy.Symbol.from_coefficient(_ll_coefficient(5), order_m=0, class_tag="LL")
    dx = sy.Symbol.multiplier(lambda k: 1j * k, _N_ORDER, order_m=1)
    cases = {"derivative_after_coefficient": pd.composition_remainder_probe(dx, c, seed=seed),
             "coefficient_after_derivative": pd.composition_remainder_probe(c, dx, seed=seed),
             "coefficient_pair": pd.composition_remainder_probe(c, c2, seed=seed)}
    return {"cases": {k: _order_dict(v) for k, v in cases.items()},
            "verdict": all(v.verdict for v in cases.values())}


def probe_adjoint(seed: int = 0) -> dict:
    a = sy.Symbol.from_coefficient(_ll_coefficient(), mult=lambda k: 1j * k, order_m=1, class_tag="LL")
    return _order_dict(pd.adjoint_remainder_probe(a, seed=seed))


def probe_paralin(seed: int = 0) -> dict:
    h = sp.gen_holder_function(0.6, 2, 7, _N_ORDER)
    return _order_dict(pd.paralin_probe(h, 0.6, 1, 0.7, seed=seed))


def probe_time_commutator(seed: int = 0) -> dict:
    c = _ll_coefficient()
    ts, path = sp.gen_ll_time_coefficient(4, 8, 2049, 1.0, j_min=0, profile="weierstrass")
    coef = (1.0 + 0.5 * path)[:, None] * c[None, :]
    a = sy.Symbol.from_coefficient(coef, times=ts, mult=lambda k: 1j * k, order_m=1,
                                   class_tag="LL", time_tag="LL")
    r = pd.time_commutator_probe(a, times=[0.3, 0.5, 0.7], h=1e-5, seed=seed)
    ok = r["identity_residual"] <= 1e-6 and r["commutator"].verdict and r["tilde_difference"].verdict
    return {"identity_residual": r["identity_residual"], "commutator": _order_dict(r["commutator"]),
            "tilde_difference": _order_dict(r["tilde_difference"]), "verdict": bool(ok)}


def wave_system(seed: int, n: int) -> HyperbolicSystem:
    """2x2 wave reduction [[0, a], [1, 0]] with a log-Lipschitz speed a(x) >= 0.5."""
    spec = {"m": 2, "A": {"type": "wave", "speed": {"type": "ll_x", "seed": seed, "terms": 5, "mean": 1.5,
                                                     "amplitude": 0.4, "profile": "weierstrass"}}}
    return st.build_system(spec, n, f"wave_{seed}")


def probe_symmetrizer(seed: int = 0) -> dict:
    n = 512
    rows, ok = [], True
    for i in range(10):
        system = wave_system(seed + i, n)
        S = st.build_symmetrizer(system)
        v = st.verify_symmetrizer(S, system)
        res = max(v[k] for k in ("hermitian", "positivity", "symmetrizes", "homogeneity"))
        cal = en.calibrate_mu(S, en.calibration_corpus(n, 2, seed + i))
        rows.append({"residual": res, "mu": cal.mu, "C_mu": cal.C_mu, "C0": cal.C0})
        ok &= res <= 1e-10 and cal.passed and cal.mu <= 64
    return {"systems": rows, "verdict": bool(ok)}


def _commutator_case(speed: dict, seed: int) -> dict:
    n = 256
    spec = {"m": 2, "A": {"type": "wave", "speed": speed},
            "B": {"type": "scalar_times", "matrix": [[0.5, 0.0], [0.0, 0.5]], "scalar": dict(speed)}}
    system = st.build_system(spec, n)
    u = sp.random_field(seed + 5, n, 2, 2)
    d = commutator_probe(system, u)
    out = d.to_dict()
    out["verdict"] = d.verdict
    return out


def probe_commutator_smooth(seed: int = 0) -> dict:
    return _commutator_case({"type": "smooth_x", "mean": 2.0, "amplitude": 0.5}, seed)


def probe_commutator_ll(seed: int = 0) -> dict:
    return _commutator_case({"type": "ll_x", "seed": 4, "terms": 3, "mean": 2.0, "amplitude": 0.5,
                             "profile": "weierstrass"}, seed)


def probe_oracle_dense(seed: int = 0) -> dict:
    n = 32
    c = sp.gen_ll_function(seed + 3, 2, n).values[0].real
    a = sy.Symbol.from_coefficient(c, mult=lambda k: 1j * k, order_m=1, class_tag="LL")
    sigma = sy.smooth_symbol(a, sy.AdmissibleCutoff(n, 3))
    u = sp.random_field(seed + 1, n, real=False)
    fast = pd.apply_paradiff(sigma, u).values
    dense = pd.quantize_dense(sigma.dense(), u).values
    matrix = pd.matrix_operator(pd.fourier_matrix(sigma), 1)(u).values
    res = float(max(np.abs(fast - dense).max(), np.abs(fast - matrix).max()) / np.abs(fast).max())
    return {"residual": res, "verdict": bool(res <= 1e-12)}


def probe_oracle_bony(seed: int = 0) -> dict:
    n = 256
    a, u = sp.random_field(seed + 1, n), sp.random_field(seed + 2, n)
    res = (a.values * u.values - pd.paraproduct(a, u).values - pd.paraproduct_swapped(a, u).values
           - pd.bony_remainder(a, u).values)
    r = float(np.abs(res).max() / np.abs(a.values * u.values).max())
    return {"residual": r, "verdict": bool(r <= 1e-10)}


def probe_transport(seed: int = 0) -> dict:
    n = 256
    x = sc.grid(n)
    system = HyperbolicSystem(np.array([[1.0]]), n, 1)
    tr = evolve(system, np.sin(x)[None], SolverConfig(n, 1.0))
    err = float(np.abs(tr.states[-1, 0] - np.sin(x - 1.0)).max())
    return {"max_error": err, "verdict": bool(err <= 1e-6)}


def probe_conservation(seed: int = 0) -> dict:
    n = 256
    system = HyperbolicSystem(np.array([[0.0, 1.0], [1.0, 0.0]]), n, 2)
    u0 = sp.random_field(seed + 1, n, 16, 2, decay=2.0, real=False)
    tr = evolve(system, u0, SolverConfig(n, 1.0, dt=1e-3))
    norms = np.linalg.norm(tr.states.reshape(len(tr.times), -1), axis=1)
    drift = float(np.max(np.abs(norms / norms[0] - 1.0)))
    return {"l2_drift": drift, "verdict": bool(drift <= 1e-8)}


def lipschitz_loss(n: int = 512) -> dict:
    spec = {"m": 2, "A": {"type": "wave", "speed": {"type": "lipschitz_t", "mean": 1.0, "amplitude": 0.3}}}
    rep = loss_experiment(st.build_system(spec, n), range(3, 8), 0.9, SolverConfig(n, 2.0, dt=1e-3))
    return {"beta_hat": rep.beta_hat, "rates": rep.rates, "verdict": bool(abs(rep.beta_hat) <= 0.05)}


def probe_loss_lipschitz(seed: int = 0) -> dict:
    return lipschitz_loss()


LL_LOSS_SPEED = {"type": "ll_t", "seed": 1, "terms": 9, "j_min": 7, "mean": 1.0, "amplitude": 1.5}


def ll_time_loss(n: int = 1024, return_runs: bool = False):
    spec = {"m": 2, "A": {"type": "wave", "speed": dict(LL_LOSS_SPEED)}}
    return loss_experiment(st.build_system(spec, n), range(4, 9), 0.9, SolverConfig(n, 2.0, dt=2e-4),
                           return_runs=return_runs)


def probe_loss_ll_time(seed: int = 0) -> dict:
    rep = ll_time_loss()
    corr = [c for j, c in zip(rep.j_values, rep.correlations) if j in rep.fitted_j]
    return {"beta_hat": rep.beta_hat, "rates": rep.rates, "fitted_correlations": corr,
            "verdict": bool(rep.beta_hat >= 0.1 and min(corr) >= 0.9)}


PROBES = {
    "dyadic:exactness": probe_dyadic_exactness,
    "norms:equivalence": probe_norm_equivalence,
    "product:holder": probe_product_holder,
    "product:ll": probe_product_ll,
    "mollifier:laws": probe_mollifier,
    "order:action": probe_action,
    "order:paraproduct": probe_paraproduct,
    "order:cutoff": probe_cutoff,
    "order:composition": probe_composition,
    "order:adjoint": probe_adjoint,
    "order:paralin": probe_paralin,
    "order:time_commutator": probe_time_commutator,
    "symmetrizer:wave": probe_symmetrizer,
    "commutator:smooth": probe_commutator_smooth,
    "commutator:ll": probe_commutator_ll,
    "oracle:dense": probe_oracle_dense,
    "oracle:bony": probe_oracle_bony,
    "solver:transport": probe_transport,
    "solver:conservation": probe_conservation,
    "loss:lipschitz": probe_loss_lipschitz,
    "loss:ll_time": probe_loss_ll_time,
}


def resolve_selection(selection) -> list[str]:
    names = []
    for item in selection:
        if item == "all":
            names.extend(PROBES)
        elif item in PROBES:
            names.append(item)
        else:
            raise KeyError(item)
    return list(dict.fromkeys(names))


def probe_suite(selection, threads: int = 1, seed: int = 0) -> dict:
    """Run the named probes (``"all"`` expands to every probe); ordered by the selection."""
    names = resolve_selection(selection)

    def run(name):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return PROBES[name](seed)

    if threads > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, names))
    else:
        results = [run(name) for name in names]
    return dict(zip(names, results))


def _order_rows(suite: dict) -> list[tuple]:
    rows = []

    def walk(name, obj):
        if isinstance(obj, dict) and "scales" in obj and "ratios" in obj:
            for pair, ratios in obj["ratios"].items():
                for j, r in zip(obj["scales"], ratios):
                    rows.append((name, pair, int(j), float(r)))
        elif isinstance(obj, dict):
            for k, v in obj.items():
                if isinstance(v, dict):
                    walk(f"{name}/{k}" if k not in ("cases",) else name, v)

    for name, res in suite.items():
        walk(name, res)
    return rows


def run_probes(selection, out=None, threads: int = 1) -> int:
    try:
        names = resolve_selection(selection)
    except KeyError as exc:
        _log(f"error: unknown probe {exc.args[0]!r}; known: {', '.join(PROBES)}")
        return EXIT_INPUT
    override = os.environ.get("PARACALC_SEED")
    seed = int(override) if override is not None else 0
    if override is not None:
        _log(f"PARACALC_SEED={seed}: probe seeds shifted")
    suite = probe_suite(names, threads, seed)
    report = {"schema_version": SCHEMA_VERSION, "probes": suite,
              "passed": all(r["verdict"] for r in suite.values()), "seed": seed}
    out = Path(out) if out else Path("paracalc_out") / "probes"
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps_report(report))
    rows = _order_rows(suite)
    if rows:
        _write_csv(out / "order.csv", ["probe", "pair", "j", "ratio"], rows)
    for name, res in suite.items():
        _log(f"{'PASS' if res['verdict'] else 'FAIL'} {name}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


# --- SVG plots -----------------------------------------------------------------------------

PLOT_COLUMNS = {
    "energy": ["t", "s(t)", "E", "E_log", "norm_Hs_t", "margin"],
    "loss": ["j", "t", "growth"],
    "order": ["probe", "pair", "j", "ratio"],
}
_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def svg_figure(series, title: str, xlabel: str, ylabel: str, fits=(), notes=(),
               width: int = 640, height: int = 420) -> str:
    """Line chart: ``series`` is [(label, xs, ys)], ``fits`` is [(label, slope, intercept, x0, x1)]."""
    left, right, top, bottom = 70, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom
    xs = [x for _, sx, _ in series for x in sx] + [v for f in fits for v in (f[3], f[4])]
    ys = [y for _, _, sy_ in series for y in sy_] + [f[1] * v + f[2] for f in fits for v in (f[3], f[4])]
    if xs:
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="13">{_esc(title)}</text>',
           f'<line class="axis" x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line class="axis" x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{_fmt(px(xv))}" y="{top + ph + 15}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{left - 5}" y="{_fmt(py(yv) + 4)}" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.0f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="15" y="{top + ph / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2:.0f})">{_esc(ylabel)}</text>')
    for i, (label, sx, sy_) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(sx, sy_))
        out.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{left + pw + 10}" y="{top + 14 * i + 10}" fill="{color}">{_esc(label)}</text>')
    for k, (label, slope, icpt, a, b) in enumerate(fits):
        out.append(f'<line class="fit" x1="{_fmt(px(a))}" y1="{_fmt(py(slope * a + icpt))}" '
                   f'x2="{_fmt(px(b))}" y2="{_fmt(py(slope * b + icpt))}" stroke="black" '
                   f'stroke-dasharray="5,3"/>')
        out.append(f'<text class="annotation" x="{left + 8}" y="{top + 14 + 14 * k}">'
                   f'{_esc(label)}: slope {slope:.4g}</text>')
    for k, note in enumerate(notes):
        out.append(f'<text class="annotation" x="{left + 8}" y="{top + ph - 8 - 14 * k}">{_esc(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _stack(*panels: str, width: int = 640, height: int = 420) -> str:
    """Stack full SVG documents vertically as nested panels."""
    body = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height * len(panels)}" '
            f'viewBox="0 0 {width} {height * len(panels)}">']
    for i, panel in enumerate(panels):
        body.append(panel.replace("<svg ", f'<svg x="0" y="{height * i}" ', 1).strip())
    body.append("</svg>")
    return "\n".join(body) + "\n"


def _esc(text: str) -> str:
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _read_csv(path, kind: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if header != PLOT_COLUMNS[kind]:
            raise ScenarioError(f"{path}: columns {header} do not match the {kind} schema {PLOT_COLUMNS[kind]}")
        return list(reader)


def plot_csv(path, kind: str) -> str:
    """Self-contained SVG for an energy, loss or order CSV."""
    if kind not in PLOT_COLUMNS:
        raise ScenarioError(f"unknown plot kind {kind!r}")
    rows = _read_csv(path, kind)
    if kind == "energy":
        t = [float(r["t"]) for r in rows]
        series, fits = [], []
        for col in ("E", "E_log"):
            vals = [float(r[col]) for r in rows]
            if vals and min(vals) > 0:
                logs = [math.log10(v) for v in vals]
                series.append((f"log10 {col}", t, logs))
                if len(t) > 1:
                    slope, icpt = np.polyfit(t, logs, 1)
                    fits.append((f"log10 {col} fit", float(slope), float(icpt), t[0], t[-1]))
        return svg_figure(series, "energy trace", "t", "log10 energy", fits)
    if kind == "loss":
        curves: dict[int, tuple[list, list]] = {}
        for r in rows:
            c = curves.setdefault(int(r["j"]), ([], []))
            c[0].append(float(r["t"]))
            c[1].append(float(r["growth"]))
        series = [(f"j={j}", xs, ys) for j, (xs, ys) in sorted(curves.items())]
        fits, notes = [], []
        if len(curves) >= 2:
            js = sorted(curves)
            rates = {}
            for j in js:
                xs, ys = map(np.asarray, curves[j])
                w = xs >= 0.2 * xs.max()
                rates[j] = float(np.polyfit(xs[w], ys[w], 1)[0]) if w.sum() > 1 else 0.0
            top = js[len(js) // 2:] if len(js) > 2 else js
            beta = float(np.polyfit(top, [rates[j] for j in top], 1)[0])
            xs, ys = curves[js[-1]]
            fits.append((f"rate at j={js[-1]}", rates[js[-1]], 0.0, xs[0], xs[-1]))
            icpt = float(np.mean([rates[j] for j in top]) - beta * np.mean(top))
            lower = svg_figure([("rate", js, [rates[j] for j in js])], "growth rate against j", "j",
                               "rate", [("beta_hat", beta, icpt, top[0], top[-1])],
                               [f"fitted over j = {top[0]}..{top[-1]}"])
            upper = svg_figure(series, "packet growth log2(|u(t)|/|u0|)", "t", "growth", fits)
            return _stack(upper, lower)
        return svg_figure(series, "packet growth log2(|u(t)|/|u0|)", "t", "growth", fits, notes)
    groups: dict[str, tuple[list, list]] = {}
    for r in rows:
        g = groups.setdefault(f'{r["probe"]} {r["pair"]}', ([], []))
        g[0].append(float(r["j"]))
        g[1].append(math.log2(max(float(r["ratio"]), 1e-300)))
    series = [(k, xs, ys) for k, (xs, ys) in groups.items()]
    fits = []
    for k, (xs, ys) in groups.items():
        if len(xs) > 1:
            slope, icpt = np.polyfit(xs, ys, 1)
            fits.append((k, float(slope), float(icpt), xs[0], xs[-1]))
    return svg_figure(series, "operator order probes", "scale j", "log2 ratio", fits)


# --- entry point -----------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="paracalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--out")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--rebaseline", action="store_true")
    p_probe = sub.add_parser("probe", help="run named probes, or 'all'")
    p_probe.add_argument("names", nargs="*")
    p_probe.add_argument("--out")
    p_probe.add_argument("--threads", type=int, default=1)
    p_plot = sub.add_parser("plot", help="render a CSV as SVG")
    p_plot.add_argument("csv")
    p_plot.add_argument("--kind", required=True, choices=sorted(PLOT_COLUMNS))
    p_plot.add_argument("--out")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_scenario(args.scenario, args.out, args.threads, args.rebaseline)
    if args.command == "probe":
        return run_probes(args.names, args.out, args.threads)
    try:
        svg = plot_csv(args.csv, args.kind)
    except (ScenarioError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT
    target = Path(args.out) if args.out else Path(args.csv).with_suffix(".svg")
    target.write_text(svg)
    _log(f"wrote {target}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
