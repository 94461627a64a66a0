"""Logarithmic Sobolev and Besov norms, log-Lipschitz estimators and
seeded generators of coefficients with prescribed regularity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds

from .spectral_core import (
    DOMAIN_LENGTH,
    DyadicPartition,
    FieldLike,
    GridFunction,
    _values,
    fft_unitary,
    grid,
    ifft_unitary,
    multiplier_apply,
    resolved_band,
    wavenumbers,
)

_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SobolevIndex:
    """The pair (s, alpha) of the space H^{s + alpha log}."""

    s: float
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("s", "alpha"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or abs(v) > 10:
                raise ValueError(f"{name} must be finite with |{name}| <= 10, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class RegularitySeminorms:
    """Bounds K0 (sup), K1 (LL in x and t) and the Hölder pair (gamma, K2)."""

    linf: float
    ll_x: float = 0.0
    ll_t: float = 0.0
    holder_gamma: tuple[float, float] | None = None

    def __post_init__(self):
        vals = [self.linf, self.ll_x, self.ll_t]
        if self.holder_gamma is not None:
            vals.extend(self.holder_gamma)
        if any(v < 0 or not np.isfinite(v) for v in vals):
            raise ValueError("seminorm bounds must be finite and nonnegative")


# --- norms ------------------------------------------------------------------

def sobolev_weight(k: np.ndarray, s: float, alpha: float = 0.0) -> np.ndarray:
    """log(2+|k|)^alpha * (1+k^2)^(s/2)."""
    k = np.abs(np.asarray(k, dtype=float))
    w = (1.0 + k * k) ** (0.5 * s)
    if alpha:
        w = w * np.log(2.0 + k) ** alpha
    return w


def _index(idx: SobolevIndex | tuple | float) -> SobolevIndex:
    if isinstance(idx, SobolevIndex):
        return idx
    if isinstance(idx, tuple):
        return SobolevIndex(*idx)
    return SobolevIndex(float(idx))


def log_sobolev_norm(u: FieldLike, idx: SobolevIndex | tuple | float) -> float:
    idx = _index(idx)
    vals = _values(u)
    w = sobolev_weight(wavenumbers(vals.shape[-1]), idx.s, idx.alpha)
    return float(np.sqrt(np.sum(np.abs(fft_unitary(vals) * w) ** 2)))


def log_besov_norm(u: FieldLike, s: float, alpha: float = 0.0, p: float = 2, r: float = 2) -> float:
    """l^r over j of 2^(js) (1+j)^alpha ||Delta_j u||_{L^p}, p in {2, inf}, r in {1, 2, inf}."""
    if p not in (2, np.inf):
        raise ValueError(f"unsupported Lebesgue exponent p={p}")
    if r not in (1, 2, np.inf):
        raise ValueError(f"unsupported summation exponent r={r}")
    vals = _values(u)
    part = DyadicPartition(vals.shape[-1])
    c = fft_unitary(vals)
    terms = []
    for j in range(part.j_max + 1):
        cj = c * part.block(j)
        if p == 2:
            size = np.sqrt(np.sum(np.abs(cj) ** 2))
        else:
            size = np.max(np.sqrt(np.sum(np.abs(ifft_unitary(cj)) ** 2, axis=0)))
        terms.append(2.0 ** (j * s) * (1.0 + j) ** alpha * size)
    terms = np.array(terms)
    if r == np.inf:
        return float(terms.max())
    return float(np.sum(terms**r) ** (1.0 / r))


# --- moduli of continuity ---------------------------------------------------

def _difference_quotient_sup(values: np.ndarray, spacing: float, periodic: bool,
                             modulus, max_sep: float | None) -> float:
    """sup over sample pairs at separation d (< max_sep) of |f(y)-f(z)| / modulus(d).

    ``values`` has the sample axis last; leading axes are maximized over.
    """
    vals = np.asarray(values)
    n = vals.shape[-1]
    limit = n // 2 if periodic else n - 1
    if max_sep is not None:
        limit = min(limit, int(np.ceil(max_sep / spacing)) - 1)
        while limit > 0 and limit * spacing >= max_sep:
            limit -= 1
    best = 0.0
    for shift in range(1, limit + 1):
        if periodic:
            diff = np.abs(vals - np.roll(vals, -shift, axis=-1))
        else:
            diff = np.abs(vals[..., shift:] - vals[..., :-shift])
        d = shift * spacing
        best = max(best, float(diff.max()) / modulus(d))
    return best


def _ll_modulus(d: float) -> float:
    return d * np.log(1.0 + 1.0 / d)


def ll_seminorm_direct(f: FieldLike) -> float:
    """Brute-force log-Lipschitz seminorm over grid pairs closer than 1."""
    vals = _values(f)
    if vals.shape[0] != 1:
        raise ValueError("expected a single-component field")
    vals = vals[0].real
    return _difference_quotient_sup(vals, DOMAIN_LENGTH / vals.size, True, _ll_modulus, 1.0)


def ll_seminorm_samples(values: np.ndarray, spacing: float, periodic: bool = False) -> float:
    """Log-Lipschitz seminorm of sampled data along the last axis (max over leading axes)."""
    return _difference_quotient_sup(values, spacing, periodic, _ll_modulus, 1.0)


def lipschitz_seminorm(f: FieldLike) -> float:
    """Largest difference quotient; on a grid it is attained by neighbours."""
    vals = _values(f)[0].real
    return _difference_quotient_sup(vals, DOMAIN_LENGTH / vals.size, True, lambda d: d, None) \
        if vals.size <= 64 else float(np.max(np.abs(vals - np.roll(vals, -1)))) / (DOMAIN_LENGTH / vals.size)


def holder_seminorm_samples(values: np.ndarray, spacing: float, gamma: float,
                            periodic: bool = True, rho: float = 0.0) -> float:
    """Hölder-log seminorm with modulus d^gamma log(1+1/d)^-rho over pairs closer than 1."""
    return _difference_quotient_sup(values, spacing, periodic,
                                    lambda d: d**gamma * np.log(1.0 + 1.0 / d) ** -rho, 1.0)


@dataclass(frozen=True)
class DyadicLL:
    """Dyadic log-Lipschitz estimates of a scalar field.

    ``value`` is max_k 2^k ||Delta_k f||_inf / (k+1); ``tail`` uses
    ||f - S_k f||_inf and ``gradient`` uses ||d S_k f||_inf instead.
    """

    value: float
    tail: float
    gradient: float
    per_block: np.ndarray = field(repr=False, compare=False)


def ll_seminorm_dyadic(f: FieldLike) -> DyadicLL:
    vals = _values(f)
    if vals.shape[0] != 1:
        raise ValueError("expected a single-component field")
    n = vals.shape[-1]
    part = DyadicPartition(n)
    c = fft_unitary(vals[0])
    k = wavenumbers(n)
    blocks, tails, grads = [], [], []
    for j in range(part.j_max + 1):
        blk = ifft_unitary(c * part.block(j))
        low = c * part.lowpass(j)
        blocks.append(2.0**j * np.max(np.abs(blk)) / (j + 1))
        tails.append(2.0**j * np.max(np.abs(vals[0] - ifft_unitary(low))) / (j + 1))
        grads.append(np.max(np.abs(ifft_unitary(1j * k * low))) / (j + 1))
    blocks = np.array(blocks)
    return DyadicLL(float(blocks.max()), float(max(tails)), float(max(grads)), blocks)


# --- seeded generators ---------------------------------------------------------

def splitmix64(state: int) -> int:
    z = (state + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def mix(seed: int, j: int) -> int:
    """64-bit hash of (seed, j)."""
    return splitmix64(splitmix64(int(seed) & _MASK) ^ (int(j) & _MASK))


def seeded_phases(seed: int, n_terms: int) -> np.ndarray:
    """phi_j = 2 pi mix(seed, j) / 2^64 for j = 0..n_terms."""
    return np.array([2.0 * np.pi * mix(seed, j) / 2.0**64 for j in range(n_terms + 1)])


LL_PROFILES = {
    # block amplitude (1+j) 2^-j: sharp for the dyadic LL bound
    "saturated": lambda j: (1.0 + j) * 2.0**-j,
    # block amplitude 2^(1-j): LL seminorm bounded uniformly in the truncation
    "weierstrass": lambda j: 2.0 ** (1 - j),
}


def _lacunary(points: np.ndarray, seed: int, n_terms: int, amplitude, j_min: int = 1) -> np.ndarray:
    ph = seeded_phases(seed, n_terms)
    out = np.zeros_like(points, dtype=float)
    for j in range(j_min, n_terms + 1):
        out += amplitude(j) * np.cos(2.0**j * points + ph[j])
    return out


def gen_ll_function(seed: int, n_terms: int, n_points: int = 1024,
                    profile: str = "saturated", j_min: int = 1) -> GridFunction:
    """Lacunary series sum_{j=j_min..J} A_j cos(2^j x + phi_j).

    ``profile="saturated"`` uses A_j = (1+j) 2^-j; ``"weierstrass"`` uses
    A_j = 2^(1-j), whose direct LL seminorm stays bounded as J grows.
    """
    part = DyadicPartition(n_points)
    if n_terms > part.j_max - 1:
        raise ValueError(f"J={n_terms} exceeds j_max - 1 = {part.j_max - 1}")
    if profile not in LL_PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    return GridFunction(_lacunary(grid(n_points), seed, n_terms, LL_PROFILES[profile], j_min))


def gen_holder_function(gamma: float, seed: int, n_terms: int, n_points: int = 1024) -> GridFunction:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    part = DyadicPartition(n_points)
    if n_terms > part.j_max - 1:
        raise ValueError(f"J={n_terms} exceeds j_max - 1 = {part.j_max - 1}")
    return GridFunction(_lacunary(grid(n_points), seed, n_terms, lambda j: 2.0 ** (-gamma * j)))


def ll_time_profile(seed: int, n_terms: int, j_min: int = 1, profile: str = "saturated"):
    """Closed-form lacunary LL path t -> sum_{j=j_min..J} A_j cos(2^j t + phi_j)."""
    if profile not in LL_PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    amp = LL_PROFILES[profile]

    def path(t):
        return _lacunary(np.asarray(t, dtype=float), seed, n_terms, amp, j_min)

    return path


def gen_ll_time_coefficient(seed: int, n_terms: int, n_t: int, t_end: float = 1.0,
                            j_min: int = 1, profile: str = "saturated") -> tuple[np.ndarray, np.ndarray]:
    """Sample the lacunary LL path on ``n_t`` uniform times over [0, t_end]."""
    times = np.linspace(0.0, t_end, n_t)
    return times, ll_time_profile(seed, n_terms, j_min, profile)(times)


def random_field(seed: int, n_points: int, kmax: int | None = None, n_components: int = 1,
                 decay: float = 0.0, real: bool = True) -> GridFunction:
    """Random band-limited field with coefficients ~ N(0,1) (1+|k|)^-decay on |k| <= kmax."""
    rng = np.random.default_rng(seed)
    kmax = resolved_band(n_points) if kmax is None else kmax
    k = wavenumbers(n_points)
    c = (rng.standard_normal((n_components, n_points))
         + 1j * rng.standard_normal((n_components, n_points)))
    c *= (np.abs(k) <= kmax) * (1.0 + np.abs(k)) ** -decay
    vals = ifft_unitary(c)
    return GridFunction(vals.real if real else vals)


def dyadic_packet(seed: int, n_points: int, j: int, n_components: int = 1,
                  lo: float = 0.75, hi: float = 1.5) -> GridFunction:
    """Random real field with spectrum in lo*2^j <= |k| <= hi*2^j."""
    rng = np.random.default_rng(seed)
    k = np.abs(wavenumbers(n_points))
    mask = (k >= lo * 2.0**j) & (k <= hi * 2.0**j)
    if not mask.any() or hi * 2.0**j > n_points // 2:
        raise ValueError(f"packet at scale {j} is not resolved on {n_points} points")
    c = (rng.standard_normal((n_components, n_points))
         + 1j * rng.standard_normal((n_components, n_points))) * mask
    return GridFunction(ifft_unitary(c).real)


# --- multiplication probe -------------------------------------------------------

@dataclass(frozen=True)
class ProductProbe:
    """Operator norms of u -> a u on H^{s+alpha log}, compressed to |k| <= 2^j."""

    index: SobolevIndex
    scales: np.ndarray
    ratios: np.ndarray
    slopes: np.ndarray
    last_octave_slope: float
    bounded: bool
    threshold: float = 0.05


def _compressed_norm(a: np.ndarray, band: int, w_band: np.ndarray) -> float:
    n = a.size
    ks = np.arange(-band, band + 1)
    idx = ks % n

    def apply(v, coef, fwd):
        c = np.zeros(n, dtype=complex)
        c[idx] = np.ravel(v) / (w_band if fwd else 1 / w_band)
        out = fft_unitary(coef * ifft_unitary(c))
        return out[idx] * (w_band if fwd else 1 / w_band)

    size = ks.size
    if size <= 513:
        eye = np.eye(size)
        mat = np.column_stack([apply(eye[:, i], a, True) for i in range(size)])
        return float(np.linalg.norm(mat, 2))
    op = LinearOperator((size, size), matvec=lambda v: apply(v, a, True),
                        rmatvec=lambda v: apply(v, np.conj(a), False), dtype=complex)
    return float(svds(op, k=1, return_singular_vectors=False, tol=1e-8, random_state=0)[0])


def product_probe(a: FieldLike, idx: SobolevIndex | tuple | float,
                  scales: list[int] | None = None, threshold: float = 0.05) -> ProductProbe:
    """Table of multiplication norms on H^{s+alpha log} over fields band-limited at 2^j.

    For each scale j the ratio is sup ||a u|| / ||u|| over all u with
    spectrum in |k| <= 2^j (the top singular value of the compressed
    operator).  Scales stop one octave below the top frequency of ``a`` so
    every coefficient mode is seen.  The verdict is bounded iff the
    last-octave growth slope of log2(ratio) is <= ``threshold``.
    """
    idx = _index(idx)
    vals = _values(a)
    if vals.shape[0] != 1:
        raise ValueError("expected a scalar coefficient")
    a = vals[0]
    n = a.size
    part = DyadicPartition(n)
    if scales is None:
        c = np.abs(fft_unitary(a))
        k = np.abs(wavenumbers(n))
        sig = k[c > 1e-10 * max(c.max(), 1e-300)]
        top = int(sig.max()) if sig.size else 0
        j_top = part.j_max - 1 if top < 2 else min(part.j_max - 1, int(np.floor(np.log2(top))) - 1)
        scales = list(range(1, j_top + 1))
    if len(scales) < 2:
        raise ValueError("product probe needs at least two scales")
    ratios = []
    for j in scales:
        band = 2**j
        w = sobolev_weight(np.arange(-band, band + 1), idx.s, idx.alpha)
        ratios.append(_compressed_norm(a, band, w))
    ratios = np.array(ratios)
    slopes = np.diff(np.log2(ratios)) / np.diff(scales)
    last = float(slopes[-1])
    return ProductProbe(idx, np.array(scales), ratios, slopes, last, last <= threshold, threshold)
