"""Grid functions on the periodic line, unitary Fourier transforms and the
Littlewood-Paley decomposition.

The grid is ``x_n = 2*pi*n/N`` with ``N`` a power of two.  Spectral
coefficients use the unitary convention on L^2(0, 2*pi)::

    c_k = sqrt(2*pi)/N * sum_n u_n exp(-i k x_n)

so that ``sum_k |c_k|^2 = (2*pi/N) * sum_n |u_n|^2`` holds exactly.  Every
norm in the package is computed from these coefficients.

Frequencies above ``N/4`` are called unresolved: fields whose spectrum sits
in ``|k| <= N/4`` can be multiplied pairwise without aliasing, and the
dyadic blocks up to ``j_max = log2(N) - 2`` cover them completely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

MIN_POINTS = 16
MAX_POINTS = 65536
DOMAIN_LENGTH = 2.0 * np.pi


def _check_points(n: int) -> int:
    n = int(n)
    if n < MIN_POINTS or n > MAX_POINTS or n & (n - 1):
        raise ValueError(f"grid size must be a power of two in [16, 65536], got {n}")
    return n


def wavenumbers(n: int) -> np.ndarray:
    """Integer frequencies in FFT order, ``{-N/2, ..., N/2 - 1}``."""
    return np.fft.fftfreq(n, d=1.0 / n).round().astype(np.int64)


def grid(n: int) -> np.ndarray:
    return DOMAIN_LENGTH * np.arange(n) / n


def fft_unitary(values: np.ndarray) -> np.ndarray:
    """Forward transform along the last axis with the unitary L^2 scaling."""
    n = values.shape[-1]
    return np.fft.fft(values, axis=-1) * (np.sqrt(DOMAIN_LENGTH) / n)


def ifft_unitary(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    return np.fft.ifft(coeffs, axis=-1) * (n / np.sqrt(DOMAIN_LENGTH))


def resolved_band(n: int) -> int:
    """Largest frequency treated as resolved on an ``n``-point grid."""
    return n // 4


@dataclass(frozen=True)
class GridFunction:
    """Vector-valued periodic field sampled on the uniform grid.

    ``values`` has shape ``(m, N)``; a 1-D input is promoted to one component.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2:
            raise ValueError("values must have shape (m, N)")
        _check_points(vals.shape[1])
        vals = np.array(vals, dtype=np.complex128)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_points(self) -> int:
        return self.values.shape[1]

    @property
    def n_components(self) -> int:
        return self.values.shape[0]

    @property
    def domain_length(self) -> float:
        return DOMAIN_LENGTH

    @property
    def x(self) -> np.ndarray:
        return grid(self.n_points)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def coeffs(self) -> np.ndarray:
        return fft_unitary(self.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.values + _values(other))

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.values - _values(other))

    def __mul__(self, scalar) -> "GridFunction":
        return GridFunction(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(-self.values)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], n: int) -> "GridFunction":
        return cls(func(grid(_check_points(n))))


@dataclass(frozen=True)
class SpectralCoeffs:
    """Unitary Fourier coefficients, shape ``(m, N)`` in FFT order."""

    coeffs: np.ndarray
    normalization: str = field(default="unitary-L2", compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim != 2:
            raise ValueError("coeffs must have shape (m, N)")
        _check_points(c.shape[1])
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_points(self) -> int:
        return self.coeffs.shape[1]

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.n_points)


FieldLike = Union[GridFunction, np.ndarray]


def _values(u: FieldLike) -> np.ndarray:
    if isinstance(u, GridFunction):
        return u.values
    arr = np.asarray(u)
    return arr[None, :] if arr.ndim == 1 else arr


def as_grid_function(u: FieldLike) -> GridFunction:
    return u if isinstance(u, GridFunction) else GridFunction(u)


def to_spectral(u: FieldLike) -> SpectralCoeffs:
    return SpectralCoeffs(fft_unitary(_values(u)))


def from_spectral(c: SpectralCoeffs | np.ndarray) -> GridFunction:
    coeffs = c.coeffs if isinstance(c, SpectralCoeffs) else np.asarray(c)
    if coeffs.ndim == 1:
        coeffs = coeffs[None, :]
    return GridFunction(ifft_unitary(coeffs))


def l2_norm(u: FieldLike) -> float:
    """L^2(0, 2*pi) norm summed over components."""
    vals = _values(u)
    return float(np.sqrt(DOMAIN_LENGTH / vals.shape[-1] * np.sum(np.abs(vals) ** 2)))


def linf_norm(u: FieldLike) -> float:
    """Max over grid points of the Euclidean norm across components."""
    vals = _values(u)
    return float(np.max(np.sqrt(np.sum(np.abs(vals) ** 2, axis=0))))


# --- cutoff profile ---------------------------------------------------------

def _exp_ramp(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(s: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 for s <= 0, 0 for s >= 1, decreasing in between."""
    a = _exp_ramp(1.0 - np.asarray(s, dtype=float))
    b = _exp_ramp(np.asarray(s, dtype=float))
    return a / (a + b)


def chi(xi: np.ndarray) -> np.ndarray:
    """Radial cutoff: 1 on |xi| <= 1.1 and 0 on |xi| >= 1.9."""
    return smooth_step((np.abs(np.asarray(xi, dtype=float)) - 1.1) / 0.8)


def phi(xi: np.ndarray) -> np.ndarray:
    """Ring profile ``chi(xi) - chi(2 xi)``, supported in 0.55 <= |xi| <= 1.9."""
    xi = np.asarray(xi, dtype=float)
    return chi(xi) - chi(2.0 * xi)


def block_symbol(j: int, k: np.ndarray) -> np.ndarray:
    """Fourier weight of the block Delta_j at the frequencies ``k`` (any j >= 0)."""
    if j < 0:
        return np.zeros(np.shape(k))
    if j == 0:
        return chi(k)
    return phi(np.asarray(k, dtype=float) / 2.0**j)


def lowpass_symbol(j: int, k: np.ndarray) -> np.ndarray:
    """Fourier weight of S_j = chi(2^-j D); zero for j < 0."""
    if j < 0:
        return np.zeros(np.shape(k))
    return chi(np.asarray(k, dtype=float) / 2.0**j)


@dataclass(frozen=True)
class DyadicPartition:
    """The chi/phi pair on an ``N``-point grid together with the block range."""

    n_points: int

    def __post_init__(self):
        _check_points(self.n_points)

    @property
    def j_max(self) -> int:
        # largest j with 2^(j+1) <= N/2
        return int(np.log2(self.n_points)) - 2

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.n_points)

    chi = staticmethod(chi)
    phi = staticmethod(phi)

    def phi_j(self, j: int) -> np.ndarray:
        return block_symbol(j, self.k)

    def block(self, j: int) -> np.ndarray:
        self._check_block(j)
        return block_symbol(j, self.k)

    def lowpass(self, j: int) -> np.ndarray:
        if j > self.j_max + 2:
            raise ValueError(f"low-pass index {j} exceeds the grid ({self.j_max + 2})")
        return lowpass_symbol(j, self.k)

    def _check_block(self, j: int):
        if not 0 <= j <= self.j_max:
            raise ValueError(f"block index {j} outside [0, {self.j_max}]")


# --- operations ---------------------------------------------------------------

Multiplier = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def multiplier_apply(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Array-level Fourier multiplier.

    ``weights`` has shape ``(N,)`` (scalar) or ``(N, m, m)`` (matrix).
    """
    c = fft_unitary(values)
    w = np.asarray(weights)
    if w.ndim == 1:
        c = c * w
    else:
        c = np.einsum("kab,...bk->...ak", w, c)
    return ifft_unitary(c)


def apply_multiplier(u: FieldLike, w: Multiplier) -> GridFunction:
    """Apply ``w(D)``; ``w`` is an array on the FFT frequency grid or a callable of k."""
    vals = _values(u)
    n = vals.shape[-1]
    weights = w(wavenumbers(n).astype(float)) if callable(w) else np.asarray(w)
    if weights.shape[0] != n:
        raise ValueError("multiplier must be defined on every grid frequency")
    if weights.ndim == 3 and weights.shape[1:] != (vals.shape[0],) * 2:
        raise ValueError("matrix multiplier does not match the number of components")
    return GridFunction(multiplier_apply(vals, weights))


def dyadic_block(u: FieldLike, j: int) -> GridFunction:
    vals = _values(u)
    part = DyadicPartition(vals.shape[-1])
    return GridFunction(multiplier_apply(vals, part.block(j)))


def low_pass(u: FieldLike, j: int) -> GridFunction:
    vals = _values(u)
    part = DyadicPartition(vals.shape[-1])
    return GridFunction(multiplier_apply(vals, part.lowpass(j)))


def derivative(u: FieldLike, order: int = 1) -> GridFunction:
    vals = _values(u)
    k = wavenumbers(vals.shape[-1]).astype(float)
    return GridFunction(multiplier_apply(vals, (1j * k) ** order))


def bernstein_ratio(u: FieldLike, j: int, k_deriv: int = 1) -> float:
    """``||d^k Delta_j u|| / (2^(jk) ||Delta_j u||)``."""
    block = dyadic_block(u, j)
    base = l2_norm(block)
    if base <= 1e-300:
        raise ValueError(f"block {j} of the field vanishes")
    return l2_norm(derivative(block, k_deriv)) / (2.0 ** (j * k_deriv) * base)


def band_limit(u: FieldLike, kmax: int | None = None) -> GridFunction:
    """Zero every coefficient with ``|k| > kmax`` (default: the resolved band)."""
    vals = _values(u)
    n = vals.shape[-1]
    kmax = resolved_band(n) if kmax is None else kmax
    return GridFunction(multiplier_apply(vals, (np.abs(wavenumbers(n)) <= kmax).astype(float)))
