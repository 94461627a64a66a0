"""Energy functional with a low-frequency cutoff and a Sobolev index that
decays linearly in time; calibration of the cutoff scale, the differential
inequality fit and the Gronwall closure check."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linprog

from .paradiff import apply_paradiff
from .spaces import SobolevIndex, dyadic_packet, log_sobolev_norm, random_field, sobolev_weight
from .spectral_core import FieldLike, _values, fft_unitary, smooth_step, wavenumbers
from .solver import Trajectory, envelope_constants
from .symbols import AdmissibleCutoff, Symbol, SymbolTerm, band_index, mollify_samples, smooth_symbol
from .systems import Symmetrizer

MU_MAX = 2**10


@dataclass(frozen=True)
class EnergySchedule:
    """s(t) = s - beta t on [0, T_star] with cutoff scale mu.

    beta = 0 is allowed and gives the fixed-index energy of the no-loss case.

    kind "L" needs 0 < s < gamma and beta T_star < s; the conservative
    kind "L*" needs -gamma < s < 0 and beta T_star < gamma + s.
    """

    s: float
    beta: float
    T_star: float
    mu: float = 2.0
    kind: str = "L"
    gamma: float = 1.0
    alpha_log: float = 0.0

    def __post_init__(self):
        if self.beta < 0 or self.T_star <= 0:
            raise ValueError("beta must be nonnegative and T_star positive")
        if self.mu < 2:
            raise ValueError("the cutoff scale mu must be at least 2")
        if self.kind == "L":
            if not 0 < self.s < self.gamma:
                raise ValueError(f"s={self.s} must lie in (0, {self.gamma})")
            if self.beta * self.T_star >= self.s:
                raise ValueError("lifespan violates beta * T_star < s")
        elif self.kind == "L*":
            if not -self.gamma < self.s < 0:
                raise ValueError(f"s={self.s} must lie in (-{self.gamma}, 0)")
            if self.beta * self.T_star >= self.gamma + self.s:
                raise ValueError("lifespan violates beta * T_star < gamma + s")
        else:
            raise ValueError("kind must be 'L' or 'L*'")

    def index(self, t: float) -> float:
        return self.s - self.beta * t


def theta_cutoff(mu: float, k: np.ndarray) -> np.ndarray:
    """theta(k / mu): 1 for |k| <= mu, 0 for |k| >= 2 mu, smooth in between."""
    if mu < 2:
        raise ValueError("mu must be at least 2")
    return smooth_step(np.abs(np.asarray(k, dtype=float)) / mu - 1.0)


def _hermitian_sqrt(mats: np.ndarray) -> np.ndarray:
    """Principal square root of Hermitian positive samples, shape (..., m, m)."""
    w, v = np.linalg.eigh(0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2))))
    if w.min() <= 0:
        raise ValueError("symmetrizer sample is not positive definite")
    return (v * np.sqrt(w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def _sqrt_coef(coef: np.ndarray) -> np.ndarray:
    """(..., m, m, n_x) -> entrywise principal root per x sample."""
    moved = np.moveaxis(coef, -1, -3)
    return np.moveaxis(_hermitian_sqrt(moved), -3, -1)


def sigma_tilde(S: Symmetrizer, mu: float, times=None) -> Symbol:
    """(S~)^(1/2) (1 - theta_mu); S~ is S mollified in time with width 2^-j on band j.

    A time-dependent symmetrizer needs ``times``: a uniform grid fine
    enough for the narrowest width used above the cutoff.
    """
    n = S.n_points
    k = wavenumbers(n)
    high = 1.0 - theta_cutoff(mu, k)
    if not S.time_dependent:
        root = _sqrt_coef(np.asarray(S.at(0.0), dtype=complex))
        return Symbol.from_coefficient(root, n, high, class_tag="LL")
    if times is None:
        raise ValueError("a time-dependent symmetrizer needs a time grid")
    times = np.asarray(times, dtype=float)
    stack = np.stack([S.at(t) for t in times]).astype(complex)
    bands = band_index(k)
    terms = []
    for j in range(int(bands.max()) + 1):
        mult = high * (bands == j)
        if not np.any(mult):
            continue
        smoothed = mollify_samples(times, stack, min(1.0, 2.0**-j))
        terms.append(SymbolTerm(_sqrt_coef(smoothed), mult.astype(complex)))
    return Symbol(tuple(terms), n, S.m, class_tag="LL", time_tag="LL", times=times)


def sigma_square_residual(sigma: Symbol, S: Symmetrizer, mu: float, t: float | None = None) -> float:
    """max |Sigma~^2 - S~ (1 - theta_mu)^2| over (x, k) at time t, for time-independent S."""
    if S.time_dependent:
        raise ValueError("residual check is for time-independent symmetrizers")
    dense = sigma.dense(t)  # (m, m, x, k)
    sq = np.einsum("abxk,bcxk->acxk", dense, dense)
    high = 1.0 - theta_cutoff(mu, wavenumbers(S.n_points))
    ref = np.asarray(S.at(0.0))[..., None] * high**2
    return float(np.abs(sq - ref).max())


class EnergyFunctional:
    """E_{s,alpha}[u] = ||T_Sigma u||^2_{H^{s+alpha log}} + ||theta_mu(D) u||^2_{H^{s+alpha log}}."""

    def __init__(self, S: Symmetrizer, mu: float, times=None, psi: AdmissibleCutoff | None = None):
        self.S = S
        self.mu = mu
        self.n_points = S.n_points
        psi = psi or AdmissibleCutoff(S.n_points, 3)
        self.sigma = smooth_symbol(sigma_tilde(S, mu, times), psi)
        self.theta = theta_cutoff(mu, wavenumbers(S.n_points))

    def parts(self, u: FieldLike, t: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Fourier coefficients of T_Sigma u and theta_mu(D) u."""
        vals = _values(u)
        high = fft_unitary(apply_paradiff(self.sigma, vals, t).values)
        return high, fft_unitary(vals) * self.theta

    def __call__(self, u: FieldLike, s: float, alpha: float = 0.0, t: float | None = None) -> float:
        high, low = self.parts(u, t)
        w2 = sobolev_weight(wavenumbers(self.n_points), s, alpha) ** 2
        return float(np.sum((np.abs(high) ** 2 + np.abs(low) ** 2) * w2))


def energy(u: FieldLike, t: float, sched: EnergySchedule, functional: EnergyFunctional) -> tuple[float, float]:
    """(E(t), E_log(t)) at the index s(t) and s(t) + (1/2) log."""
    if not -1e-12 <= t <= sched.T_star * (1 + 1e-12):
        raise ValueError("t outside [0, T_star]")
    s = sched.index(t)
    high, low = functional.parts(u, t if functional.S.time_dependent else None)
    k = wavenumbers(functional.n_points)
    dens = np.abs(high) ** 2 + np.abs(low) ** 2
    e = float(np.sum(dens * sobolev_weight(k, s) ** 2))
    e_log = float(np.sum(dens * sobolev_weight(k, s, 0.5) ** 2))
    return e, e_log


def norm_rate(v: FieldLike, s: float, ds: float) -> float:
    """d/dt ||v||^2_{H^{s(t)}} when s changes at rate ds, by differentiating the weight."""
    vals = _values(v)
    k = wavenumbers(vals.shape[-1]).astype(float)
    dens = np.sum(np.abs(fft_unitary(vals)) ** 2, axis=0)
    return float(ds * np.sum(np.log1p(k * k) * (1.0 + k * k) ** s * dens))


# --- calibration ------------------------------------------------------------------------

def calibration_corpus(n_points: int, m: int, seed: int = 0, n_random: int = 20,
                       n_packets: int = 20) -> list[np.ndarray]:
    """Seeded random band-limited fields and dyadic packets."""
    corpus = [random_field(seed + i, n_points, n_components=m, real=False).values
              for i in range(n_random)]
    top = int(np.log2(n_points / 2 / 1.5))
    scales = np.arange(1, top + 1)
    for i in range(n_packets):
        j = int(scales[i % len(scales)])
        corpus.append(dyadic_packet(seed + 1000 + i, n_points, j, n_components=m).values)
    return corpus


@dataclass
class Calibration:
    mu: float
    C_mu: float
    C0: float
    tried: list[float]
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def calibrate_mu(S: Symmetrizer, corpus, pairs=((0.5, 0.0), (0.5, 0.5)), times=None,
                 t_slices=(None,), mu_max: float = MU_MAX) -> Calibration:
    """Smallest mu = 2, 4, 8, ... with ||u||_{H^{s+alpha log}} <= C_mu E_{s,alpha}[u]^(1/2).

    The lower bound passes when C_mu stays below 2 sqrt(2 / min(lambda, 1)),
    twice what a pointwise partition-of-unity argument gives for an exactly
    quantized symbol. C0 is the measured upper constant.
    """
    threshold = 2.0 * np.sqrt(2.0 / min(S.lam, 1.0))
    tried = []
    mu = 2.0
    best = None
    while mu <= mu_max:
        functional = EnergyFunctional(S, mu, times)
        lower, upper = 0.0, 0.0
        for u in corpus:
            for s, alpha in pairs:
                norm = log_sobolev_norm(u, SobolevIndex(s, alpha))
                for t in t_slices:
                    root = np.sqrt(functional(u, s, alpha, t))
                    lower = max(lower, norm / max(root, 1e-300))
                    upper = max(upper, root / norm)
        tried.append(mu)
        best = Calibration(mu, float(lower), float(upper), list(tried), float(threshold), bool(lower <= threshold))
        if best.passed:
            return best
        mu *= 2
    return best


# --- differential inequality and Gronwall closure --------------------------------------

@dataclass
class DerivativeFit:
    C1: float
    C23: float
    worst_violation: float
    times: list[float]
    E: list[float]
    E_log: list[float]
    dE: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def energy_trace(traj: Trajectory, sched: EnergySchedule, functional: EnergyFunctional):
    """E(t), E_log(t) and the forcing pairing bound at each recorded time inside [0, T_star]."""
    keep = traj.times <= sched.T_star * (1 + 1e-12)
    ts = traj.times[keep]
    E, El, src = [], [], []
    for i in np.flatnonzero(keep):
        t = float(traj.times[i])
        e, el = energy(traj.states[i], t, sched, functional)
        E.append(e)
        El.append(el)
        f = traj.lu[i]
        ef = 0.0 if not np.any(f) else functional(f, sched.index(t), 0.0,
                                                   t if functional.S.time_dependent else None)
        src.append(2.0 * np.sqrt(e * ef))
    return ts, np.array(E), np.array(El), np.array(src)


def energy_derivative_probe(traj: Trajectory, sched: EnergySchedule,
                            functional: EnergyFunctional) -> DerivativeFit:
    """Fit dE/dt <= C1 E + C23 E_log + source along the trajectory.

    C23 stands for the combination C2 - C3 beta (it may be negative). The
    fit minimizes the summed right-hand side, with a small penalty on |C23|
    to break ties when E and E_log stay proportional.
    """
    ts, E, El, src = energy_trace(traj, sched, functional)
    steps = np.diff(ts)
    if len(steps) > 1 and abs(steps[-1] - steps[0]) > 1e-9 * steps[0]:
        # the final record may close the run off the stride
        ts, E, El, src = ts[:-1], E[:-1], El[:-1], src[:-1]
        steps = steps[:-1]
    if len(ts) < 9:
        raise ValueError("trajectory too sparse for finite differences (need >= 9 records)")
    if np.ptp(steps) > 1e-9 * steps.mean():
        raise ValueError("energy derivative needs uniformly recorded times")
    dE = np.gradient(E, ts, edge_order=2)
    coarse = np.gradient(E[::2], ts[::2], edge_order=2)
    spread = np.max(np.abs(dE[::2][1:-1] - coarse[1:-1]))
    if spread > 0.1 * max(np.abs(dE).max(), 1e-6 * E.max()):
        raise ValueError("dE/dt is under-resolved by the recorded time step")
    scale = max(E.max(), 1e-300)
    lhs = (dE - src) / scale
    e, el = E / scale, El / scale
    # variables: C1 >= 0, C23 = p - q with p, q >= 0
    tie = 1e-6 * e.sum()
    res = linprog(c=[e.sum(), el.sum() + tie, -el.sum() + tie],
                  A_ub=-np.column_stack([e, el, -el]), b_ub=-lhs,
                  bounds=[(0, None)] * 3, method="highs")
    if not res.success:
        raise RuntimeError(f"energy inequality fit failed: {res.message}")
    c1, c23 = float(res.x[0]), float(res.x[1] - res.x[2])
    worst = float(np.max(lhs - c1 * e - c23 * el))
    return DerivativeFit(c1, c23, worst, ts.tolist(), E.tolist(), El.tolist(), dE.tolist())


@dataclass
class GronwallResult:
    verdict: bool
    margin: float
    worst_time: float
    lhs: list[float]
    rhs: list[float]
    times: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def _trapezoid_running(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(times))
    return out


def gronwall_sides(traj: Trajectory, s: float, beta: float, T_star: float,
                   refined: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Running left side and the data term at each recorded time t <= T_star.

    Left: sup_{tau<=t} ||u||_{H^{s - beta tau}}, plus (int_0^t ||u||^2_{H^{s - beta tau + (1/2) log}})^(1/2)
    when ``refined``. Data: ||u(0)||_{H^s} + int_0^t ||L u||_{H^{s - beta tau}}.
    """
    keep = traj.times <= T_star * (1 + 1e-12)
    ts = traj.times[keep]
    states, lus = traj.states[keep], traj.lu[keep]
    sup = np.maximum.accumulate([log_sobolev_norm(x, SobolevIndex(s - beta * t))
                                 for x, t in zip(states, ts)])
    lhs = np.array(sup, dtype=float)
    if refined:
        sq = np.array([log_sobolev_norm(x, SobolevIndex(s - beta * t, 0.5)) ** 2
                       for x, t in zip(states, ts)])
        lhs = lhs + np.sqrt(_trapezoid_running(sq, ts))
    forcing = np.array([log_sobolev_norm(f, SobolevIndex(s - beta * t)) for f, t in zip(lus, ts)])
    data = log_sobolev_norm(states[0], SobolevIndex(s)) + _trapezoid_running(forcing, ts)
    return ts, lhs, data


def gronwall_check(traj: Trajectory, sched: EnergySchedule, C1: float, C2: float,
                   refined: bool = False) -> GronwallResult:
    """Verify lhs(t) <= C1 e^{C2 t} data(t) at every recorded t <= T_star.

    ``margin`` is the smallest relative gap (rhs - lhs) / rhs; the verdict
    is margin >= 0. Checking every intermediate time is the estimate applied
    on each shorter horizon.
    """
    ts, lhs, data = gronwall_sides(traj, sched.s, sched.beta, sched.T_star, refined)
    rhs = C1 * np.exp(C2 * ts) * data
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(rhs > 0, (rhs - lhs) / np.where(rhs > 0, rhs, 1.0), np.where(lhs > 0, -np.inf, 0.0))
    i = int(np.argmin(rel))
    return GronwallResult(bool(rel[i] >= 0), float(rel[i]), float(ts[i]), lhs.tolist(), rhs.tolist(), ts.tolist())


def fit_gronwall_constants(trajs, s: float, beta: float, T_star: float,
                           refined: bool = True) -> tuple[float, float]:
    """Tightest (C1 >= 1, C2 >= 0) with lhs <= C1 e^{C2 t} data over all runs."""
    ratios, times = [], None
    for traj in trajs:
        ts, lhs, data = gronwall_sides(traj, s, beta, T_star, refined)
        ratios.append(lhs / data)
        times = ts
    C1, C2 = envelope_constants(times, np.array(ratios))
    return max(C1, 1.0), C2


def energy_csv_rows(traj: Trajectory, sched: EnergySchedule, functional: EnergyFunctional,
                    C1: float = 1.0, C2: float = 0.0) -> list[dict]:
    """Rows t, s(t), E, E_log, norm_Hs_t, margin for the energy trace."""
    ts, E, El, _ = energy_trace(traj, sched, functional)
    g = gronwall_check(traj, sched, C1, C2)
    rows = []
    for i, t in enumerate(ts):
        norm = log_sobolev_norm(traj.states[i], SobolevIndex(sched.index(t)))
        margin = (g.rhs[i] - g.lhs[i]) / g.rhs[i] if g.rhs[i] > 0 else 0.0
        rows.append({"t": float(t), "s(t)": sched.index(t), "E": float(E[i]), "E_log": float(El[i]),
                     "norm_Hs_t": norm, "margin": float(margin)})
    return rows
