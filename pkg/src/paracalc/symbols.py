"""Symbols a(t, x, xi) with values in m x m matrices, their seminorms, and the
three smoothing operations used by the paradifferential calculus:

* spatial smoothing ``a -> sigma_a`` by an admissible cutoff psi(D_x, xi),
* time mollification ``a -> a_eps`` by a compactly supported even kernel,
* the frequency-linked mollification ``a -> a~`` with eps tied to |xi|.

A symbol is stored as a finite sum of separable terms
``coef(t, x) * mult(xi)``.  Every operation above maps separable terms to
separable terms, so nothing is ever densified unless explicitly asked for.
Coefficients are sampled on a uniform time grid; an x-independent
coefficient is stored with a single x sample and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import fftconvolve

from .spaces import holder_seminorm_samples, ll_seminorm_samples
from .spectral_core import (
    DOMAIN_LENGTH,
    DyadicPartition,
    block_symbol,
    chi,
    fft_unitary,
    ifft_unitary,
    resolved_band,
    wavenumbers,
)

DENSE_LIMIT = 2**24  # m^2 N^2 entries

# --- time mollifier ---------------------------------------------------------------

def _bump(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def _bump_slope(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti**2)) * (-2.0 * ti / (1.0 - ti**2) ** 2)
    return out


_NODES = np.linspace(-1.0, 1.0, 401)
BUMP_MASS = float(np.trapezoid(_bump(_NODES), _NODES))


def mollifier(t: np.ndarray, eps: float) -> np.ndarray:
    """rho_eps(t) = rho(t/eps)/eps with rho the unit-mass bump on (-1, 1)."""
    return _bump(np.asarray(t) / eps) / (eps * BUMP_MASS)


def mollifier_derivative(t: np.ndarray, eps: float) -> np.ndarray:
    return _bump_slope(np.asarray(t) / eps) / (eps * eps * BUMP_MASS)


def _check_resolution(eps: float, dt: float):
    if eps < 4.0 * dt * (1.0 - 1e-12):
        raise ValueError(f"mollifier width {eps:g} spans fewer than 4 time samples (dt={dt:g})")


def mollify_samples(times: np.ndarray, values: np.ndarray, eps: float,
                    derivative: bool = False) -> np.ndarray:
    """Mollify samples along axis 0 on their own uniform grid.

    The path is continued by its end values outside the sampled window.
    The kernel is renormalized by its discrete mass, so constants are
    reproduced exactly.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values)
    dt = times[1] - times[0]
    _check_resolution(eps, dt)
    half = int(np.ceil(eps / dt))
    offsets = dt * np.arange(-half, half + 1)
    weights = mollifier(offsets, eps)
    mass = weights.sum()
    kernel = (mollifier_derivative(offsets, eps) if derivative else weights) / mass
    pad = [(half, half)] + [(0, 0)] * (values.ndim - 1)
    padded = np.pad(values, pad, mode="edge")
    kernel = kernel.reshape((-1,) + (1,) * (values.ndim - 1))
    # correlation with the reversed kernel: sum_l k(t_i - s_l) v_l
    return fftconvolve(padded, kernel, mode="valid", axes=0)


def _mollified_at(times: np.ndarray, samples: np.ndarray, t: float, eps: float,
                  derivative: bool) -> np.ndarray:
    """Ratio form sum rho_eps(t - s_l) a_l / sum rho_eps(t - s_l) at any t."""
    dt = times[1] - times[0]
    lo = int(np.floor((t - eps - times[0]) / dt))
    hi = int(np.ceil((t + eps - times[0]) / dt))
    idx = np.arange(lo, hi + 1)
    s = times[0] + dt * idx
    vals = samples[np.clip(idx, 0, len(times) - 1)]
    w = mollifier(t - s, eps)
    den = w.sum()
    num = np.tensordot(w, vals, axes=(0, 0))
    if not derivative:
        return num / den
    dw = mollifier_derivative(t - s, eps)
    dden = dw.sum()
    dnum = np.tensordot(dw, vals, axes=(0, 0))
    return (dnum * den - num * dden) / den**2


# --- admissible cutoff ------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibleCutoff:
    """psi(eta, xi) = sum_k chi(2^(shift-k) eta) phi_k(xi), phi_0 = chi.

    For k < shift the inner factor keeps only eta = 0 on the integer grid.
    ``eps1``/``eps2`` are the inner/outer support fractions measured on the
    grid: psi = 1 for |eta| <= eps1 (1+|xi|), psi = 0 for |eta| >= eps2 (1+|xi|).
    """

    n_points: int
    shift: int = 3
    eps1: float = field(init=False)
    eps2: float = field(init=False)

    def __post_init__(self):
        n = self.n_points
        eta = np.arange(-(n // 2), n // 2)[:, None]
        xi = np.arange(-(n // 2), n // 2)[None, :]
        p = self.psi(eta, xi)
        frac = np.abs(eta) / (1.0 + np.abs(xi)) * np.ones_like(p)
        object.__setattr__(self, "eps1", float(frac[p < 1 - 1e-12].min()) * (1 - 1e-9))
        object.__setattr__(self, "eps2", float(frac[p > 1e-12].max()) * (1 + 1e-9))

    @property
    def n_blocks(self) -> int:
        # blocks 0..log2(N)-1 cover every grid frequency
        return int(np.log2(self.n_points))

    def inner(self, k: int, eta: np.ndarray) -> np.ndarray:
        return chi(np.asarray(eta, dtype=float) * 2.0 ** (self.shift - k))

    def psi(self, eta: np.ndarray, xi: np.ndarray) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return sum(self.inner(k, eta) * block_symbol(k, xi) for k in range(self.n_blocks))


def make_psi_minus3(part: DyadicPartition) -> AdmissibleCutoff:
    return AdmissibleCutoff(part.n_points, 3)


# --- symbols -----------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolTerm:
    """coef (n_t, m, m, n_x) times mult (N,); optional lazy time mollification."""

    coef: np.ndarray
    mult: np.ndarray
    eps: float | None = None
    time_derivative: bool = False
    xfilter: np.ndarray | None = None  # deferred x-frequency filter of a time-dependent coef


def _as_coef(values, m: int | None = None) -> np.ndarray:
    c = np.asarray(values, dtype=complex)
    if c.ndim == 0:
        c = c.reshape(1, 1, 1, 1)
    elif c.ndim == 1:
        c = c.reshape(1, 1, 1, -1)
    elif c.ndim == 2:
        c = c.reshape(1, *c.shape, 1)  # constant matrix
    elif c.ndim == 3:
        c = c[None]
    if c.ndim != 4 or c.shape[1] != c.shape[2]:
        raise ValueError("coefficient must be scalar, (N,), (m,m), (m,m,N) or (n_t,m,m,N)")
    if m is not None and c.shape[1] != m:
        if c.shape[1] == 1:
            c = c * np.eye(m)[None, :, :, None]
        else:
            raise ValueError("coefficient size does not match the system size")
    return c


@dataclass(frozen=True)
class Symbol:
    """Matrix symbol a(t, x, k) on an N-point grid, as a sum of separable terms."""

    terms: tuple[SymbolTerm, ...]
    n_points: int
    m: int = 1
    order_m: float = 0.0
    order_delta: float = 0.0
    class_tag: str | tuple = "Linf"
    time_tag: str = "Linf"
    times: np.ndarray | None = None
    admissible: bool = False

    # constructors
    @classmethod
    def multiplier(cls, weights, n_points: int, m: int = 1, order_m: float = 0.0,
                   order_delta: float = 0.0) -> "Symbol":
        k = wavenumbers(n_points).astype(float)
        w = weights(k) if callable(weights) else np.asarray(weights)
        term = SymbolTerm(_as_coef(np.eye(m)), np.asarray(w, dtype=complex))
        return cls((term,), n_points, m, order_m, order_delta, admissible=True)

    @classmethod
    def from_coefficient(cls, coef, n_points: int | None = None, mult=None, *,
                         order_m: float = 0.0, order_delta: float = 0.0,
                         class_tag="Linf", times=None, time_tag: str = "Linf") -> "Symbol":
        """coef(t, x) * mult(k); ``coef`` may carry a leading time axis when ``times`` is given."""
        c = np.asarray(coef)
        if times is not None:
            c = np.asarray(coef, dtype=complex)
            if c.ndim == 2:
                c = c[:, None, None, :]
            elif c.ndim == 1:
                c = c[:, None, None, None]
            if c.shape[0] != len(times):
                raise ValueError("time samples do not match the coefficient")
            times = np.asarray(times, dtype=float)
        else:
            c = _as_coef(c)
        n = n_points or c.shape[-1]
        if c.shape[-1] not in (1, n):
            raise ValueError("coefficient grid does not match n_points")
        k = wavenumbers(n).astype(float)
        w = np.ones(n) if mult is None else (mult(k) if callable(mult) else np.asarray(mult))
        term = SymbolTerm(c, np.asarray(w, dtype=complex))
        return cls((term,), n, c.shape[1], order_m, order_delta, class_tag,
                   time_tag, times, admissible=c.shape[-1] == 1)

    # structure
    @property
    def time_dependent(self) -> bool:
        return any(t.coef.shape[0] > 1 for t in self.terms)

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.n_points)

    def with_terms(self, terms, **changes) -> "Symbol":
        return replace(self, terms=tuple(terms), **changes)

    def coefficient_at(self, term: SymbolTerm, t: float | None = None) -> np.ndarray:
        """(m, m, n_x) coefficient of one term at time t."""
        c = term.coef
        if c.shape[0] == 1:
            if term.time_derivative:
                return np.zeros_like(c[0])
            return c[0]
        if t is None:
            raise ValueError("time-dependent symbol needs an evaluation time")
        if term.eps is not None:
            out = _mollified_at(self.times, c, float(t), term.eps, term.time_derivative)
        elif term.time_derivative:
            raise ValueError("time derivative requires a mollified term")
        else:
            ts = self.times
            pos = np.clip((t - ts[0]) / (ts[1] - ts[0]), 0.0, len(ts) - 1.0)
            i = min(int(pos), len(ts) - 2)
            w = pos - i
            out = (1 - w) * c[i] + w * c[i + 1]
        if term.xfilter is not None:
            out = _filter_x(out, term.xfilter)
        return out

    def freeze(self, t: float | None) -> "Symbol":
        """The time-independent symbol a(t, ., .) at a fixed time."""
        if not self.time_dependent and not any(term.time_derivative for term in self.terms):
            return self
        terms = [SymbolTerm(self.coefficient_at(term, t)[None], term.mult) for term in self.terms]
        return self.with_terms(terms, times=None)

    def dense(self, t: float | None = None, k_index: np.ndarray | None = None) -> np.ndarray:
        """Values as an array (m, m, N_x, N_k) at time t (k in FFT order)."""
        n = self.n_points
        nk = n if k_index is None else len(k_index)
        if self.m**2 * n * nk > DENSE_LIMIT:
            raise MemoryError("dense symbol evaluation exceeds the memory guard")
        out = np.zeros((self.m, self.m, n, nk), dtype=complex)
        for term in self.terms:
            c = self.coefficient_at(term, t)
            mult = term.mult if k_index is None else term.mult[k_index]
            out += c[..., None] * mult
        return out

    def at(self, t: float | None, x_index: int, k: int) -> np.ndarray:
        col = int(k) % self.n_points
        out = np.zeros((self.m, self.m), dtype=complex)
        for term in self.terms:
            c = self.coefficient_at(term, t)
            out += c[..., x_index % c.shape[-1]] * term.mult[col]
        return out

    # algebra
    def _compatible(self, other: "Symbol"):
        if self.n_points != other.n_points or self.m != other.m:
            raise ValueError("symbols live on different grids or sizes")

    def __add__(self, other: "Symbol") -> "Symbol":
        self._compatible(other)
        times = self.times if self.times is not None else other.times
        return self.with_terms(self.terms + other.terms, times=times,
                               order_m=max(self.order_m, other.order_m),
                               order_delta=max(self.order_delta, other.order_delta),
                               admissible=self.admissible and other.admissible)

    def __mul__(self, scalar) -> "Symbol":
        return self.with_terms([replace(t, mult=t.mult * scalar) for t in self.terms])

    __rmul__ = __mul__

    def __neg__(self) -> "Symbol":
        return self * -1.0

    def __sub__(self, other: "Symbol") -> "Symbol":
        return self + (-other)

    def product(self, other: "Symbol") -> "Symbol":
        """Pointwise matrix product (a b)(t, x, k)."""
        self._compatible(other)
        terms = []
        for ta in self.terms:
            for tb in other.terms:
                if ta.eps is not None or tb.eps is not None:
                    raise ValueError("products of lazily mollified terms are not separable")
                coef = np.einsum("tabx,tbcx->tacx", ta.coef, tb.coef)
                terms.append(SymbolTerm(coef, ta.mult * tb.mult))
        times = self.times if self.times is not None else other.times
        tag = self.class_tag if self.class_tag == other.class_tag else "Linf"
        return Symbol(tuple(terms), self.n_points, self.m,
                      self.order_m + other.order_m, self.order_delta + other.order_delta,
                      tag, self.time_tag, times,
                      admissible=all(t.coef.shape[-1] == 1 for t in terms))

    def adjoint(self) -> "Symbol":
        """Pointwise conjugate transpose a*(t, x, k)."""
        terms = [replace(t, coef=np.conj(np.swapaxes(t.coef, 1, 2)), mult=np.conj(t.mult))
                 for t in self.terms]
        return self.with_terms(terms)


# --- smoothing operations ------------------------------------------------------------

def _filter_x(coef: np.ndarray, weights: np.ndarray) -> np.ndarray:
    if coef.shape[-1] == 1:
        return coef
    return ifft_unitary(fft_unitary(coef) * weights)


def smooth_symbol(a: Symbol, psi: AdmissibleCutoff) -> Symbol:
    """sigma_a(., xi) = psi(D_x, xi) a(., xi), one term per xi-block."""
    if psi.n_points != a.n_points:
        raise ValueError("cutoff and symbol live on different grids")
    n = a.n_points
    eta = wavenumbers(n).astype(float)
    xi = eta
    blocks = [block_symbol(k, xi) for k in range(psi.n_blocks)]
    terms = []
    for term in a.terms:
        if term.coef.shape[-1] == 1:
            terms.append(term)
            continue
        spectrum = np.abs(fft_unitary(term.coef)).max(axis=(0, 1, 2)) > 0
        if term.xfilter is not None:
            spectrum &= term.xfilter != 0
        pending = None  # blocks whose inner filter is the identity on this coefficient
        for k in range(psi.n_blocks):
            mult = term.mult * blocks[k]
            if not np.any(mult):
                continue
            inner = psi.inner(k, eta)
            if np.all(inner[spectrum] == 1.0):
                pending = mult if pending is None else pending + mult
                continue
            if term.coef.shape[0] == 1:
                terms.append(replace(term, coef=_filter_x(term.coef, inner), mult=mult))
            else:
                prior = 1.0 if term.xfilter is None else term.xfilter
                terms.append(replace(term, xfilter=prior * inner, mult=mult))
        if pending is not None:
            terms.append(replace(term, mult=pending))
    return a.with_terms(terms, admissible=True)


def band_index(k: np.ndarray) -> np.ndarray:
    """Dyadic band j of each frequency: 2^j/sqrt2 <= |k| < 2^j sqrt2, with k = 0 in band 0."""
    ak = np.abs(np.asarray(k, dtype=float))
    out = np.zeros(ak.shape, dtype=int)
    nz = ak >= 1
    out[nz] = np.floor(np.log2(ak[nz]) + 0.5).astype(int)
    return out


def _time_step(a: Symbol) -> float:
    if a.times is None or len(a.times) < 2:
        raise ValueError("symbol has no time grid")
    return float(a.times[1] - a.times[0])


def mollifier_law_constants(times: np.ndarray, values: np.ndarray, eps_list) -> dict[str, np.ndarray]:
    """Per-eps constants of the two log-Lipschitz mollifier laws.

    ``approx[i] = max|a_eps - a| / (eps log(1 + 1/eps))`` and
    ``slope[i] = max|d/dt a_eps| / log(1 + 1/eps)``.
    """
    approx, slope = [], []
    for eps in eps_list:
        w = np.log1p(1.0 / eps)
        approx.append(np.max(np.abs(mollify_samples(times, values, eps) - values)) / (eps * w))
        slope.append(np.max(np.abs(mollify_samples(times, values, eps, derivative=True))) / w)
    return {"eps": np.asarray(eps_list, dtype=float), "approx": np.array(approx), "slope": np.array(slope)}


def mollify_time(a: Symbol, eps: float) -> Symbol:
    """a_eps = rho_eps *_t a with constant continuation outside the time window."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if not a.time_dependent:
        return a
    _check_resolution(eps, _time_step(a))
    terms = []
    for term in a.terms:
        if term.eps is not None:
            raise ValueError("symbol is already mollified in time")
        terms.append(term if term.coef.shape[0] == 1 else replace(term, eps=eps))
    return a.with_terms(terms)


def tilde_symbol(a: Symbol, derivative: bool = False) -> Symbol:
    """a~(t, x, xi) = a_eps(t, x, xi) with eps = 2^-j on dyadic band j.

    ``derivative=True`` returns the exact time derivative of a~ instead.
    """
    if not a.time_dependent:
        return a if not derivative else a * 0.0
    dt = _time_step(a)
    bands = band_index(a.k)
    terms = []
    for term in a.terms:
        if term.eps is not None:
            raise ValueError("symbol is already mollified in time")
        if term.coef.shape[0] == 1:
            if not derivative:
                terms.append(term)
            continue
        for j in range(bands.max() + 1):
            mult = term.mult * (bands == j)
            if not np.any(mult):
                continue
            eps = min(1.0, 2.0**-j)
            _check_resolution(eps, dt)
            terms.append(replace(term, mult=mult, eps=eps, time_derivative=derivative))
    out = a.with_terms(terms)
    if derivative:
        out = replace(out, order_delta=a.order_delta + 1)
    return out


def commutation_check(a: Symbol, psi: AdmissibleCutoff, times: np.ndarray | None = None) -> float:
    """max |sigma_{a~} - (sigma_a)~| over the given times (default: 5 samples)."""
    one = smooth_symbol(tilde_symbol(a), psi)
    two = tilde_symbol(smooth_symbol(a, psi))
    if times is None:
        times = [None] if not a.time_dependent else np.linspace(a.times[0], a.times[-1], 5)
    return float(max(np.max(np.abs(one.dense(t) - two.dense(t))) for t in times))


# --- seminorms ------------------------------------------------------------------------

def _xi_differences(values: np.ndarray, order: int) -> np.ndarray:
    """Centered integer-step differences along the last axis (natural k order)."""
    if order == 0:
        return values
    if order == 1:
        return 0.5 * (values[..., 2:] - values[..., :-2])
    return values[..., 2:] - 2.0 * values[..., 1:-1] + values[..., :-2]


def _x_norm(vals: np.ndarray, tag) -> np.ndarray:
    """X-norm in x (axis -2) for each k; vals has shape (m, m, n_x, n_k)."""
    n_x = vals.shape[-2]
    if tag == "Linf":
        return np.abs(vals).max(axis=(0, 1, 2))
    if n_x == 1:
        return np.zeros(vals.shape[-1])
    moved = np.moveaxis(vals, -2, -1)  # (m, m, n_k, n_x)
    h = DOMAIN_LENGTH / n_x
    out = np.empty(vals.shape[-1])
    for i in range(vals.shape[-1]):
        if tag == "LL":
            out[i] = ll_seminorm_samples(moved[..., i, :], h, True)
        else:
            _, gamma, rho = tag
            out[i] = holder_seminorm_samples(moved[..., i, :], h, gamma, True, rho)
    return out


def symbol_seminorm(a: Symbol, k_max: int = 2, tag=None, times=None) -> dict[int, float]:
    """sup_xi (1+|xi|)^(-m+alpha) log^-delta(2+|xi|) ||d_xi^alpha a(., xi)||_X for alpha <= k_max.

    Frequencies are restricted to the resolved band; X is sup in x, the LL
    seminorm or the Hölder-log seminorm (``tag``, default the class tag).
    """
    if k_max > 2:
        raise ValueError("seminorms are provided up to two xi-derivatives")
    tag = a.class_tag if tag is None else tag
    kb = resolved_band(a.n_points)
    ks = np.arange(-kb - 1, kb + 2)
    if times is None:
        times = [None] if not a.time_dependent else np.linspace(a.times[0], a.times[-1], 4)
    table = {alpha: 0.0 for alpha in range(k_max + 1)}
    for t in times:
        vals = _collapse_x(a, t, ks % a.n_points)
        if not np.all(np.isfinite(vals)):
            raise ValueError("symbol evaluation is not finite")
        kk = ks[1:-1]
        for alpha in range(k_max + 1):
            diff = vals[..., 1:-1] if alpha == 0 else _xi_differences(vals, alpha)
            weight = (1.0 + np.abs(kk)) ** (alpha - a.order_m) * np.log(2.0 + np.abs(kk)) ** -a.order_delta
            table[alpha] = max(table[alpha], float(np.max(weight * _x_norm(diff, tag))))
    return table


def _collapse_x(a: Symbol, t, k_index) -> np.ndarray:
    """Dense (m, m, n_x, n_k) values, keeping a single x sample when a is x-independent."""
    if all(term.coef.shape[-1] == 1 for term in a.terms):
        out = np.zeros((a.m, a.m, 1, len(k_index)), dtype=complex)
        for term in a.terms:
            out += a.coefficient_at(term, t)[..., None] * term.mult[k_index]
        return out
    return a.dense(t, k_index)
