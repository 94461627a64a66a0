"""Paraproducts, Bony remainders, quantization of symbols and numerical
order probes for paradifferential operators.

An operator P is *of order m + delta log* when it maps H^{s + alpha log}
into H^{(s-m) + (alpha-delta) log}.  The probes below measure this on
seeded dyadic packets: the ratio of output to input norm is computed at
each frequency scale 2^j and the log2-slope of the ratios against j is
fitted.  A flat slope means the claimed order is attained, not exceeded.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .spaces import SobolevIndex, dyadic_packet, log_sobolev_norm
from .spectral_core import (
    FieldLike,
    GridFunction,
    _values,
    block_symbol,
    fft_unitary,
    ifft_unitary,
    lowpass_symbol,
    wavenumbers,
)
from .symbols import AdmissibleCutoff, Symbol, smooth_symbol, tilde_symbol

DEFAULT_PAIRS = tuple((s, a) for s in (-0.7, -0.3, 0.3, 0.7) for a in (0.0, 1.0))
VANISHING = 1e-10
PARAPRODUCT_SHIFT = 3
PACKET_LO, PACKET_HI = 0.75, 1.25


# --- paraproducts ---------------------------------------------------------------------

def _n_blocks(n: int) -> int:
    return int(np.log2(n))


def _coefficient_array(a, n: int) -> np.ndarray:
    """Scalar (1, 1, N) or matrix (m, m, N) coefficient array."""
    vals = a.values if isinstance(a, GridFunction) else np.asarray(a)
    if vals.ndim == 1:
        vals = vals[None, None, :]
    elif vals.ndim == 2:
        if vals.shape[0] != 1:
            raise ValueError("scalar coefficient expected with shape (1, N)")
        vals = vals[None]
    if vals.shape[-1] != n:
        raise ValueError("coefficient and field live on different grids")
    return vals


def _times(a: np.ndarray, u: np.ndarray) -> np.ndarray:
    if a.shape[0] == 1:
        return a[0, 0] * u
    return np.einsum("abx,bx->ax", a, u)


def _blocks(values: np.ndarray, n_blocks: int) -> list[np.ndarray]:
    k = wavenumbers(values.shape[-1])
    c = fft_unitary(values)
    return [ifft_unitary(c * block_symbol(j, k)) for j in range(n_blocks)]


def _lowpasses(values: np.ndarray, n_blocks: int, shift: int) -> list[np.ndarray]:
    k = wavenumbers(values.shape[-1])
    c = fft_unitary(values)
    return [ifft_unitary(c * lowpass_symbol(j - shift, k)) for j in range(n_blocks)]


def paraproduct(a, u: FieldLike) -> GridFunction:
    """T_a u = sum_j S_{j-3} a Delta_j u with S_k = 0 for k < 0."""
    uv = _values(u)
    n = uv.shape[-1]
    av = _coefficient_array(a, n)
    nb = _n_blocks(n)
    du = _blocks(uv, nb)
    sa = _lowpasses(av, nb, PARAPRODUCT_SHIFT)
    out = np.zeros_like(uv, dtype=complex)
    for j in range(PARAPRODUCT_SHIFT, nb):
        out += _times(sa[j], du[j])
    return GridFunction(out)


def bony_remainder(a, u: FieldLike) -> GridFunction:
    """R(a, u) = sum over blocks with |j - k| <= 2 of Delta_j a Delta_k u.

    With the S_{j-3} convention this closes a u = T_a u + T_u a + R(a, u).
    """
    uv = _values(u)
    n = uv.shape[-1]
    av = _coefficient_array(a, n)
    nb = _n_blocks(n)
    da, du = _blocks(av, nb), _blocks(uv, nb)
    out = np.zeros_like(uv, dtype=complex)
    reach = PARAPRODUCT_SHIFT - 1
    for j in range(nb):
        for k in range(max(0, j - reach), min(nb, j + reach + 1)):
            out += _times(da[j], du[k])
    return GridFunction(out)


def paraproduct_swapped(a, u: FieldLike) -> GridFunction:
    """T_u a = sum_k S_{k-3} u Delta_k a (the high-frequency part of a)."""
    uv = _values(u)
    n = uv.shape[-1]
    av = _coefficient_array(a, n)
    nb = _n_blocks(n)
    da = _blocks(av, nb)
    su = _lowpasses(uv, nb, PARAPRODUCT_SHIFT)
    out = np.zeros_like(uv, dtype=complex)
    for k in range(PARAPRODUCT_SHIFT, nb):
        out += _times(da[k], su[k])
    return GridFunction(out)


# --- quantization ---------------------------------------------------------------------

def _check_spectral_condition(sigma: np.ndarray, eps2: float = 0.5) -> bool:
    """x-spectrum of sigma(., xi) inside |eta| <= eps2 (1+|xi|) for every xi."""
    n = sigma.shape[-1]
    k = wavenumbers(n).astype(float)
    spec = np.abs(fft_unitary(np.moveaxis(sigma, -1, -2))).max(axis=(0, 1))  # (k, eta)
    outside = np.abs(k)[None, :] > eps2 * (1.0 + np.abs(k)[:, None])
    return bool(np.all(spec[outside] <= 1e-10 * max(spec.max(), 1e-300)))


def quantize_dense(sigma: np.ndarray, u: FieldLike) -> GridFunction:
    """(sigma(x, D) u)(x) = (2 pi)^-1/2 sum_k e^{ikx} sigma(x, k) c_k by direct quadrature.

    ``sigma`` has shape (m, m, N, N) indexed by (x, k), k in FFT order.
    """
    uv = _values(u)
    n = uv.shape[-1]
    c = fft_unitary(uv)
    k = wavenumbers(n)
    x = 2.0 * np.pi * np.arange(n) / n
    phase = np.exp(1j * np.outer(x, k)) / np.sqrt(2.0 * np.pi)  # (x, k)
    out = np.einsum("abxk,xk,bk->ax", sigma, phase, c)
    return GridFunction(out)


def apply_paradiff(sigma: Symbol | np.ndarray, u: FieldLike, t: float | None = None,
                   warn: bool = True) -> GridFunction:
    """Apply sigma(x, D) to u; a dense (m, m, N, N) array is applied by quadrature."""
    if isinstance(sigma, np.ndarray):
        if warn and not _check_spectral_condition(sigma):
            warnings.warn("symbol violates the spectral condition", stacklevel=2)
        return quantize_dense(sigma, u)
    uv = _values(u)
    if uv.shape[-1] != sigma.n_points or uv.shape[0] != sigma.m:
        raise ValueError("symbol and field do not match")
    if warn and not sigma.admissible:
        warnings.warn("symbol is not spectrally admissible; quantizing it as is", stacklevel=2)
    c = fft_unitary(uv)
    out = np.zeros_like(uv, dtype=complex)
    for term in sigma.terms:
        coef = sigma.coefficient_at(term, t)
        if not np.any(coef):
            continue
        v = ifft_unitary(c * term.mult)
        out += np.einsum("abx,bx->ax", coef, v)
    return GridFunction(out)


def paradiff_operator(a: Symbol, psi: AdmissibleCutoff | None = None, t: float | None = None,
                      tilde: bool = False) -> Callable[[FieldLike], GridFunction]:
    """u -> T_a u (or T~_a u) at time t, with the psi_{-3} cutoff by default."""
    psi = psi or AdmissibleCutoff(a.n_points, 3)
    sigma = smooth_symbol(tilde_symbol(a) if tilde else a, psi).freeze(t)
    return lambda u: apply_paradiff(sigma, u)


def fourier_matrix(sigma: Symbol, t: float | None = None) -> np.ndarray:
    """Matrix of sigma(x, D) in the unitary Fourier basis, shape (mN, mN).

    Entry [(a, k), (b, l)] is the eta = k - l coefficient of sigma_ab(., l),
    so (T u)^(k) = sum_l M[k, l] u^(l).
    """
    n, m = sigma.n_points, sigma.m
    if n > 1024:
        raise ValueError("dense operator matrices are limited to N <= 1024")
    k = wavenumbers(n)
    diff = (k[:, None] - k[None, :]) % n  # eta index for each (k, l)
    mat = np.zeros((m, n, m, n), dtype=complex)
    for term in sigma.terms:
        coef = sigma.coefficient_at(term, t)
        if coef.shape[-1] == 1:
            chat = np.zeros(coef.shape[:-1] + (n,), dtype=complex)
            chat[..., 0] = coef[..., 0]
        else:
            chat = np.fft.fft(coef, axis=-1) / n  # plain Fourier coefficients
        mat += np.einsum("abkl,l->akbl", chat[:, :, diff], term.mult)
    return mat.reshape(m * n, m * n)


def matrix_operator(mat: np.ndarray, m: int) -> Callable[[FieldLike], GridFunction]:
    def apply(u):
        uv = _values(u)
        c = fft_unitary(uv).reshape(-1)
        return GridFunction(ifft_unitary((mat @ c).reshape(m, -1)))
    return apply


# --- order probes ---------------------------------------------------------------------

@dataclass
class OperatorProbeReport:
    """Per-scale norm ratios of a probed operator and the fitted log2-slope.

    ``criterion`` is "flat" (|slope| <= tol), "bounded" (slope <= tol) or
    "vanishing" (the operator is zero to rounding on every test function).
    """

    name: str
    claimed_order: tuple[float, float]
    scales: list[int]
    ratios: dict[str, list[float]]
    slopes: dict[str, float]
    fitted_slope: float
    tol: float
    criterion: str
    verdict: bool
    n_tests: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _pair_key(s: float, alpha: float) -> str:
    return f"s={s:+.2f},alpha={alpha:+.2f}"


def probe_scales(n_points: int, j_min: int = 3, j_top: int | None = None) -> list[int]:
    """Scales whose packets (up to 1.25 2^j) stay alias-free after a paradifferential product."""
    top = int(np.floor(np.log2(n_points / 2 / (PACKET_HI * 1.45))))
    top = min(top, int(np.log2(n_points)) - 2, 11)
    if j_top is not None:
        top = min(top, j_top)
    return list(range(j_min, top + 1))


def operator_order_fit(P: Callable, claimed: tuple[float, float], n_points: int, *,
                       m: int = 1, pairs: Sequence[tuple[float, float]] = DEFAULT_PAIRS,
                       scales: Sequence[int] | None = None, seed: int = 0, n_tests: int = 5,
                       tol: float = 0.1, criterion: str = "flat", name: str = "operator") -> OperatorProbeReport:
    """Measure ||P u_j||_{H^{(s-m)+(alpha-delta)log}} / ||u_j||_{H^{s+alpha log}} over packets u_j.

    ``P`` maps a field to a field, or to a list of fields (e.g. one per time
    sample); the ratio at each scale is the maximum over test functions and
    outputs.  The reported slope is the worst over the (s, alpha) pairs.
    """
    cm, cd = claimed
    scales = list(scales) if scales is not None else probe_scales(n_points)
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    ratios = {_pair_key(*p): [] for p in pairs}
    biggest = 0.0
    for j in scales:
        best = {key: 0.0 for key in ratios}
        for i in range(n_tests):
            for attempt in range(4):
                u = dyadic_packet(seed + 7919 * j + 104729 * i + attempt, n_points, j, m,
                                  PACKET_LO, PACKET_HI)
                if np.max(np.abs(u.values)) > 1e-12:
                    break
            else:
                raise RuntimeError(f"degenerate test function at scale {j}")
            out = P(u)
            outs = out if isinstance(out, (list, tuple)) else [out]
            for s, alpha in pairs:
                base = log_sobolev_norm(u, SobolevIndex(s, alpha))
                num = max(log_sobolev_norm(o, SobolevIndex(s - cm, alpha - cd)) for o in outs)
                key = _pair_key(s, alpha)
                best[key] = max(best[key], num / base)
        for key in ratios:
            ratios[key].append(best[key])
            biggest = max(biggest, best[key])
    if biggest <= VANISHING:
        slopes = {key: 0.0 for key in ratios}
        return OperatorProbeReport(name, (cm, cd), scales, ratios, slopes, 0.0, tol,
                                   "vanishing", True, n_tests)
    slopes = {key: float(np.polyfit(scales, np.log2(np.maximum(r, 1e-300)), 1)[0])
              for key, r in ratios.items()}
    if criterion == "bounded":
        worst = max(slopes.values())
        verdict = worst <= tol
    else:
        worst = max(slopes.values(), key=abs)
        verdict = abs(worst) <= tol
    return OperatorProbeReport(name, (cm, cd), scales, ratios, slopes, float(worst), tol,
                               criterion, bool(verdict), n_tests)


def _difference(P: Callable, Q: Callable) -> Callable:
    return lambda u: GridFunction(P(u).values - Q(u).values)


def action_probe(a: Symbol, psi: AdmissibleCutoff | None = None, t: float | None = None,
                 tol: float = 0.1, **kw) -> OperatorProbeReport:
    """T_a against its symbol order."""
    P = paradiff_operator(a, psi, t)
    return operator_order_fit(P, (a.order_m, a.order_delta), a.n_points, m=a.m, tol=tol,
                              name="action", **kw)


def cutoff_independence_probe(a: Symbol, psi1: AdmissibleCutoff, psi2: AdmissibleCutoff,
                              t: float | None = None, tol: float = 0.15, **kw) -> OperatorProbeReport:
    """T^{psi1}_a - T^{psi2}_a against order (m-1) + (delta+1) log."""
    P = _difference(paradiff_operator(a, psi1, t), paradiff_operator(a, psi2, t))
    return operator_order_fit(P, (a.order_m - 1, a.order_delta + 1), a.n_points, m=a.m,
                              tol=tol, criterion="bounded", name="cutoff_independence", **kw)


def composition_remainder_probe(a: Symbol, b: Symbol, psi: AdmissibleCutoff | None = None,
                                t: float | None = None, tilde: bool = False, tol: float = 0.2,
                                **kw) -> OperatorProbeReport:
    """T_a T_b - T_{ab} against order (m+n-1) + (delta+rho+1) log."""
    Ta = paradiff_operator(a, psi, t, tilde)
    Tb = paradiff_operator(b, psi, t, tilde)
    Tab = paradiff_operator(a.product(b), psi, t, tilde)
    P = lambda u: GridFunction(Ta(Tb(u)).values - Tab(u).values)
    order = (a.order_m + b.order_m - 1, a.order_delta + b.order_delta + 1)
    return operator_order_fit(P, order, a.n_points, m=a.m, tol=tol,
                              criterion="bounded", name="composition_remainder", **kw)


def adjoint_remainder_probe(a: Symbol, psi: AdmissibleCutoff | None = None, t: float | None = None,
                            tol: float = 0.2, **kw) -> OperatorProbeReport:
    """(T_a)* - T_{a*} against order (m-1) + (delta+1) log, from dense Fourier matrices."""
    if a.n_points > 1024:
        raise ValueError("adjoint probe is limited to N <= 1024")
    psi = psi or AdmissibleCutoff(a.n_points, 3)
    mat = fourier_matrix(smooth_symbol(a, psi), t)
    mat_bar = fourier_matrix(smooth_symbol(a.adjoint(), psi), t)
    P = matrix_operator(mat.conj().T - mat_bar, a.m)
    return operator_order_fit(P, (a.order_m - 1, a.order_delta + 1), a.n_points, m=a.m,
                              tol=tol, criterion="bounded", name="adjoint_remainder", **kw)


def paralin_residual(a, u: FieldLike, deriv_order: int = 0) -> GridFunction:
    """a d^eta u - T_a d^eta u for eta in {0, 1}."""
    if deriv_order not in (0, 1):
        raise ValueError("derivative order must be 0 or 1")
    uv = _values(u)
    n = uv.shape[-1]
    if deriv_order:
        uv = ifft_unitary(1j * wavenumbers(n) * fft_unitary(uv))
    av = _coefficient_array(a, n)
    return GridFunction(_times(av, uv) - paraproduct(av, uv).values)


def paralin_probe(a, gamma: float, deriv_order: int, s: float, rho: float = 0.0,
                  alpha: float = 0.0, tol: float = 0.1, **kw) -> OperatorProbeReport:
    """Boundedness H^{s+alpha log} -> H^{(s-eta+gamma)+(alpha+rho) log} of the paralinearization residual."""
    av = _coefficient_array(a, _values(a).shape[-1] if not isinstance(a, np.ndarray) else a.shape[-1])
    n = av.shape[-1]
    P = lambda u: paralin_residual(av, u, deriv_order)
    return operator_order_fit(P, (deriv_order - gamma, -rho), n, m=av.shape[0],
                              pairs=[(s, alpha)], tol=tol, criterion="bounded",
                              name="paralinearization", **kw)


def time_commutator_identity(a: Symbol, u: FieldLike, t: float, h: float = 1e-5,
                             psi: AdmissibleCutoff | None = None, _symbols=None) -> float:
    """Relative residual of d/dt (T~_a u) = T_{d_t a~} u by centered differences."""
    psi = psi or AdmissibleCutoff(a.n_points, 3)
    if _symbols is None:
        _symbols = (smooth_symbol(tilde_symbol(a), psi),
                    smooth_symbol(tilde_symbol(a, derivative=True), psi))
    sig, dsig = _symbols
    fd = (apply_paradiff(sig, u, t + h).values - apply_paradiff(sig, u, t - h).values) / (2 * h)
    exact = apply_paradiff(dsig, u, t).values
    return float(np.max(np.abs(fd - exact)) / max(np.max(np.abs(exact)), 1e-300))


def time_commutator_probe(a: Symbol, times: Sequence[float], psi: AdmissibleCutoff | None = None,
                          tol: float = 0.15, h: float = 1e-5, **kw) -> dict:
    """Identity residual and order probes for [d_t, T~_a] and T_a - T~_a.

    For u independent of t the commutator [d_t, T~_a] u is d_t (T~_a u).
    """
    psi = psi or AdmissibleCutoff(a.n_points, 3)
    dsig = smooth_symbol(tilde_symbol(a, derivative=True), psi)
    sig = smooth_symbol(a, psi)
    tsig = smooth_symbol(tilde_symbol(a), psi)
    probe_u = dyadic_packet(kw.get("seed", 0), a.n_points, 4, a.m)
    residual = max(time_commutator_identity(a, probe_u, t, h, psi, (tsig, dsig)) for t in times)
    dfrozen = [dsig.freeze(t) for t in times]
    gaps = [(sig.freeze(t), tsig.freeze(t)) for t in times]
    comm = operator_order_fit(lambda u: [apply_paradiff(d, u) for d in dfrozen],
                              (a.order_m, a.order_delta + 1), a.n_points, m=a.m, tol=tol,
                              criterion="bounded", name="time_commutator", **kw)
    diff = operator_order_fit(
        lambda u: [GridFunction(apply_paradiff(p, u).values - apply_paradiff(q, u).values)
                   for p, q in gaps],
        (a.order_m - 1, a.order_delta + 1), a.n_points, m=a.m, tol=tol,
        criterion="bounded", name="tilde_difference", **kw)
    return {"identity_residual": residual, "commutator": comm, "tilde_difference": diff}
