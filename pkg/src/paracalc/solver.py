"""Pseudospectral method-of-lines solver (RK4 in time, spectral derivative
in x, 2/3-rule dealiasing), the smoothing family J_eps, the commutator
decay probe and the loss-of-derivatives experiment."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import linprog

from .spaces import SobolevIndex, log_sobolev_norm, sobolev_weight
from .spectral_core import (
    DOMAIN_LENGTH,
    DyadicPartition,
    FieldLike,
    GridFunction,
    _values,
    fft_unitary,
    grid,
    ifft_unitary,
    resolved_band,
    wavenumbers,
)
from .systems import HyperbolicSystem, _samples


class NumericalGuardError(RuntimeError):
    """A run left the regime where its output can be trusted (CFL, NaN)."""


@dataclass
class SolverConfig:
    n_points: int
    t_end: float
    dt: float | None = None
    cfl: float = 0.4
    dealias: bool = True
    record_stride: int = 1
    integrator: str = "rk4"

    def __post_init__(self):
        if self.integrator != "rk4":
            raise ValueError("only the classical RK4 integrator is provided")
        if self.t_end <= 0 or self.record_stride < 1:
            raise ValueError("t_end must be positive and record_stride >= 1")


@dataclass
class Trajectory:
    """Recorded states, shape (n_rec, m, N), with the forcing L u at the same times."""

    times: np.ndarray
    states: np.ndarray
    lu: np.ndarray
    scenario: str = ""

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("recorded times must increase strictly")
        if self.states.shape[0] != len(self.times) or self.lu.shape != self.states.shape:
            raise ValueError("inconsistent trajectory shapes")

    def state(self, i: int) -> GridFunction:
        return GridFunction(self.states[i])

    def norms(self, s, alpha: float = 0.0) -> np.ndarray:
        """H^{s(t)+alpha log} norms; ``s`` is a number or a function of t."""
        return np.array([log_sobolev_norm(self.states[i], SobolevIndex(_index(s, t), alpha))
                         for i, t in enumerate(self.times)])


def _index(s, t):
    return float(s(t)) if callable(s) else float(s)


# --- right-hand side ----------------------------------------------------------------------

def _apply_matrix(a: np.ndarray, u: np.ndarray) -> np.ndarray:
    """(m, m, n_x) coefficient times (..., m, N) field, broadcasting n_x = 1."""
    return np.sum(a * u[..., None, :, :], axis=-2)


class _Rhs:
    def __init__(self, sys: HyperbolicSystem, dealias: bool):
        n = sys.n_points
        self.sys = sys
        self.ik = 1j * wavenumbers(n)
        self.mask = (np.abs(wavenumbers(n)) <= n // 3).astype(float) if dealias else None

    def __call__(self, t: float, u: np.ndarray) -> np.ndarray:
        sys = self.sys
        c = np.fft.fft(u, axis=-1)
        if self.mask is not None:
            c *= self.mask
            u = np.fft.ifft(c, axis=-1)
        A = sys.A_at(t)
        if sys.kind == "L":
            out = -_apply_matrix(A, np.fft.ifft(self.ik * c, axis=-1))
        else:
            flux = np.fft.fft(_apply_matrix(A, u), axis=-1)
            out = -np.fft.ifft(self.ik * flux, axis=-1)
        B = sys.B_at(t)
        if B is not None:
            out = out - _apply_matrix(B, u)
        f = sys.f_at(t)
        if f is not None:
            out = out + f
        if self.mask is not None:
            out = np.fft.ifft(np.fft.fft(out, axis=-1) * self.mask, axis=-1)
        return out


def rhs(sys: HyperbolicSystem, t: float, u: FieldLike, dealias: bool = False) -> GridFunction:
    """-A u_x - B u + f, or -(A u)_x - B u + f for the conservative kind."""
    return GridFunction(_Rhs(sys, dealias)(t, _values(u).astype(complex)))


# --- time stepping ----------------------------------------------------------------------

def wave_speed_bound(sys: HyperbolicSystem, t: float = 0.0) -> float:
    mats = _samples(sys.A_at(t))
    return float(np.abs(np.linalg.eigvals(mats)).max())


def stable_step(sys: HyperbolicSystem, cfg: SolverConfig) -> float:
    dx = DOMAIN_LENGTH / cfg.n_points
    return cfg.cfl * dx / max(wave_speed_bound(sys), 1e-12)


def evolve(sys: HyperbolicSystem, u0: FieldLike | np.ndarray, cfg: SolverConfig,
           scenario: str = "") -> Trajectory | list[Trajectory]:
    """Integrate L u = f from u0 with RK4.

    ``u0`` may carry a leading batch axis (P, m, N); a list of trajectories
    is returned in that case.
    """
    u = np.array(_values(u0) if not (isinstance(u0, np.ndarray) and u0.ndim == 3) else u0,
                 dtype=complex)
    if u.shape[-1] != sys.n_points or u.shape[-2] != sys.m:
        raise ValueError("initial data does not match the system")
    batched = u.ndim == 3
    limit = stable_step(sys, cfg)
    dt = cfg.dt if cfg.dt is not None else limit
    n_steps = int(np.ceil(cfg.t_end / dt - 1e-9))
    dt = cfg.t_end / n_steps
    f = _Rhs(sys, cfg.dealias)
    dx = DOMAIN_LENGTH / cfg.n_points
    times, states, lus = [0.0], [u.copy()], [_forcing(sys, 0.0, u)]
    t = 0.0
    for step in range(1, n_steps + 1):
        if sys.time_dependent and dt * wave_speed_bound(sys, t) > cfg.cfl * dx * (1 + 1e-9):
            raise NumericalGuardError(f"CFL condition violated at t={t:.6g}")
        k1 = f(t, u)
        k2 = f(t + 0.5 * dt, u + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, u + 0.5 * dt * k2)
        k4 = f(t + dt, u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = step * dt
        if not np.all(np.isfinite(u)):
            raise NumericalGuardError(f"non-finite state at t={t:.6g}")
        if step % cfg.record_stride == 0 or step == n_steps:
            times.append(t)
            states.append(u.copy())
            lus.append(_forcing(sys, t, u))
    if dt > limit * (1 + 1e-9) and not sys.time_dependent:
        raise NumericalGuardError(f"time step {dt:.3g} exceeds the CFL bound {limit:.3g}")
    times = np.array(times)
    states = np.stack(states)
    lus = np.stack(lus)
    if not batched:
        return Trajectory(times, states, lus, scenario)
    return [Trajectory(times, states[:, p], lus[:, p], scenario) for p in range(u.shape[0])]


def _forcing(sys: HyperbolicSystem, t: float, u: np.ndarray) -> np.ndarray:
    f = sys.f_at(t)
    return np.zeros_like(u) if f is None else np.broadcast_to(f, u.shape).copy()


# --- smoothing and commutators ---------------------------------------------------------

def j_epsilon(u: FieldLike, eps: float) -> GridFunction:
    """J_eps = (1 + eps |D|^2)^(-1/2)."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    vals = _values(u)
    k = wavenumbers(vals.shape[-1]).astype(float)
    return GridFunction(ifft_unitary(fft_unitary(vals) / np.sqrt(1.0 + eps * k * k)))


@dataclass
class CommutatorDecay:
    eps: list[float]
    norms: list[float]
    ratio: float
    monotone: bool
    slope: float
    verdict: bool

    def to_dict(self) -> dict:
        return asdict(self)


def commutator_probe(sys: HyperbolicSystem, u: FieldLike, eps_ladder=None, t: float = 0.0,
                     s: float = 0.0, jitter: float = 0.05, target: float = 1e-2) -> CommutatorDecay:
    """||[A, J_eps] u_x + [B, J_eps] u||_{H^s} along a ladder of eps values.

    Passes when the sequence decreases (up to relative ``jitter``) and the
    last value is at most ``target`` times the first.
    """
    eps_ladder = list(eps_ladder) if eps_ladder is not None else [2.0**-p for p in range(2, 13)]
    vals = _values(u).astype(complex)
    n = vals.shape[-1]
    k = wavenumbers(n)
    ux = ifft_unitary(1j * k * fft_unitary(vals))
    A = sys.A_at(t)
    B = sys.B_at(t)
    norms = []
    for eps in eps_ladder:
        g = _apply_matrix(A, j_epsilon(ux, eps).values) - j_epsilon(_apply_matrix(A, ux), eps).values
        if B is not None:
            g = g + _apply_matrix(B, j_epsilon(vals, eps).values) - j_epsilon(_apply_matrix(B, vals), eps).values
        norms.append(log_sobolev_norm(g, SobolevIndex(s)))
    norms = np.array(norms)
    first = max(norms[0], 1e-300)
    ratio = float(norms[-1] / first)
    monotone = bool(np.all(norms[1:] <= norms[:-1] * (1 + jitter)))
    tiny = norms.max() <= 1e-13 * max(1.0, np.abs(vals).max())
    slope = 0.0 if tiny else float(np.polyfit(np.log2(eps_ladder), np.log2(np.maximum(norms, 1e-300)), 1)[0])
    verdict = bool(tiny or (monotone and ratio <= target))
    return CommutatorDecay(list(map(float, eps_ladder)), norms.tolist(), 0.0 if tiny else ratio,
                           monotone, slope, verdict)


# --- loss of derivatives ----------------------------------------------------------------

@dataclass
class LossReport:
    """Growth rates of dyadic packets and the fitted loss rate beta_hat.

    ``rates[j]`` is the slope of log2(||u(t)||_{H^s} / ||u0||_{H^s}) in t over
    the fit window; beta_hat is the slope of these rates against j over the
    top half of the j range.
    """

    s: float
    j_values: list[int]
    rates: list[float]
    correlations: list[float]
    fitted_j: list[int]
    beta_hat: float
    C1: float
    C2: float
    constants_fitted: bool
    margin: float
    verdict: bool
    times: list[float] = field(repr=False)
    growth: list[list[float]] = field(repr=False)

    def to_dict(self) -> dict:
        return asdict(self)


def packet(j: int, n_points: int, m: int, polarization=None) -> np.ndarray:
    """Single-mode dyadic packet e^{i 2^j x} times a fixed polarization vector."""
    pol = np.asarray(polarization if polarization is not None else [1.0, 0.5j][:m] + [0.0] * max(0, m - 2),
                     dtype=complex)
    return pol[:, None] * np.exp(1j * 2**j * grid(n_points))[None, :]


def envelope_constants(times: np.ndarray, ratios: np.ndarray) -> tuple[float, float]:
    """Smallest line log C1 + C2 t above log(ratios) (all rows), minimizing its mean over [0, T].

    ``ratios`` has shape (n_curves, n_times); C1 >= 1 and C2 >= 0.
    """
    t = np.repeat(np.asarray(times)[None, :], ratios.shape[0], axis=0).ravel()
    y = np.log(np.maximum(ratios.ravel(), 1e-300))
    T = float(np.max(times))
    res = linprog(c=[1.0, 0.5 * T], A_ub=np.column_stack([-np.ones_like(t), -t]), b_ub=-y,
                  bounds=[(0.0, None), (0.0, None)], method="highs")
    if not res.success:
        raise RuntimeError(f"envelope fit failed: {res.message}")
    return float(np.exp(res.x[0])), float(res.x[1])


def _thinned(sys: HyperbolicSystem, cfg: SolverConfig, max_records: int) -> SolverConfig:
    dt = cfg.dt if cfg.dt is not None else stable_step(sys, cfg)
    n_steps = int(np.ceil(cfg.t_end / dt - 1e-9))
    stride = max(cfg.record_stride, -(-n_steps // max_records))
    return replace(cfg, record_stride=stride)


def loss_experiment(sys: HyperbolicSystem, j_values, s: float, cfg: SolverConfig,
                    fit_from: float = 0.2, constants: tuple[float, float] | None = None,
                    polarization=None, scenario: str = "", max_records: int = 400,
                    return_runs: bool = False):
    """Evolve packets at frequencies 2^j and fit the loss rate beta_hat.

    With ``return_runs`` the packet trajectories are returned alongside the report.
    """
    j_values = list(j_values)
    n = cfg.n_points
    if 2 ** max(j_values) > resolved_band(n):
        raise ValueError("packet frequencies are not resolved on this grid")
    u0 = np.stack([packet(j, n, sys.m, polarization) for j in j_values])
    runs = evolve(sys, u0, _thinned(sys, cfg, max_records), scenario)
    times = runs[0].times
    idx = SobolevIndex(s)
    growth, rates, corrs = [], [], []
    window = times >= fit_from * times[-1]
    for run in runs:
        norms = np.array([log_sobolev_norm(x, idx) for x in run.states])
        g = np.log2(norms / norms[0])
        growth.append(g)
        slope = np.polyfit(times[window], g[window], 1)[0]
        rates.append(float(slope))
        corrs.append(float(np.corrcoef(times[window], g[window])[0, 1]))
    half = len(j_values) // 2
    fitted = j_values[half:] if len(j_values) > 2 else j_values
    beta_hat = float(np.polyfit(fitted, rates[-len(fitted):], 1)[0])
    # sup_t ||u(t)||_{H^{s - beta t}} relative to ||u0||_{H^s}
    shifted = []
    for run in runs:
        num = np.array([log_sobolev_norm(x, SobolevIndex(s - beta_hat * t)) for x, t in zip(run.states, times)])
        shifted.append(num / num[0])
    shifted = np.array(shifted)
    envelope = np.maximum.accumulate(shifted, axis=1)
    if constants is None:
        C1, C2 = envelope_constants(times, envelope)
        fitted_constants = True
    else:
        C1, C2 = constants
        fitted_constants = False
    bound = 1.1 * C1 * np.exp(C2 * times)
    margin = float(np.min(bound[None, :] - envelope))
    report = LossReport(s, j_values, rates, corrs, list(fitted), beta_hat, C1, C2,
                        fitted_constants, margin, bool(margin >= 0), times.tolist(),
                        [g.tolist() for g in growth])
    return (report, runs) if return_runs else report


# --- export ---------------------------------------------------------------------------

def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Long format: t, x_index, component, re, im."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x_index", "component", "re", "im"])
        for t, state in zip(traj.times, traj.states):
            for c, row in enumerate(state):
                for i, v in enumerate(row):
                    w.writerow([f"{t:.12g}", i, c, f"{v.real:.12g}", f"{v.imag:.12g}"])


def spectral_summary(traj: Trajectory) -> list[tuple[float, int, float]]:
    """(t, j, ||Delta_j u(t)||_{L^2}) for every recorded time and block."""
    part = DyadicPartition(traj.states.shape[-1])
    blocks = [part.block(j) for j in range(part.j_max + 1)]
    rows = []
    for t, state in zip(traj.times, traj.states):
        c = fft_unitary(state)
        for j, b in enumerate(blocks):
            rows.append((float(t), j, float(np.sqrt(np.sum(np.abs(c * b) ** 2)))))
    return rows


def write_spectral_summary_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "j", "block_l2"])
        for t, j, v in spectral_summary(traj):
            w.writerow([f"{t:.12g}", j, f"{v:.12g}"])
