"""First-order hyperbolic systems u_t + A(t,x) u_x + B(t,x) u = f on the
periodic line, their principal symbol and microlocal symmetrizers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spaces import (
    RegularitySeminorms,
    gen_holder_function,
    gen_ll_function,
    holder_seminorm_samples,
    ll_seminorm_samples,
    ll_time_profile,
)
from .spectral_core import DOMAIN_LENGTH, grid
from .symbols import Symbol

TimeField = Callable[[float], np.ndarray]


def _as_time_field(value, m: int) -> tuple[TimeField, bool]:
    """Wrap a constant array as a function of t; returns (field, time_dependent)."""
    if callable(value):
        return value, True
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.shape[:2] != (m, m):
        raise ValueError("coefficient must have shape (m, m) or (m, m, N)")
    return (lambda t, arr=arr: arr), False


@dataclass
class HyperbolicSystem:
    """L u = u_t + A u_x + B u (kind "L") or u_t + (A u)_x + B u (kind "L*").

    ``A`` and ``B`` are constant arrays of shape (m, m) or (m, m, N), or
    callables t -> such arrays; ``f`` is None or a callable t -> (m, N).
    """

    A: object
    n_points: int
    m: int
    B: object = None
    f: Callable[[float], np.ndarray] | None = None
    kind: str = "L"
    reg: RegularitySeminorms | None = None
    name: str = ""
    time_dependent: bool = field(init=False)

    def __post_init__(self):
        if self.kind not in ("L", "L*"):
            raise ValueError("kind must be 'L' or 'L*'")
        self._A, ta = _as_time_field(self.A, self.m)
        if self.B is None:
            self._B, tb = None, False
        else:
            self._B, tb = _as_time_field(self.B, self.m)
        self.time_dependent = ta or tb

    def A_at(self, t: float) -> np.ndarray:
        return self._A(t)

    def B_at(self, t: float) -> np.ndarray | None:
        return None if self._B is None else self._B(t)

    def f_at(self, t: float) -> np.ndarray | None:
        return None if self.f is None else self.f(t)

    @property
    def x(self) -> np.ndarray:
        return grid(self.n_points)


def principal_symbol(sys: HyperbolicSystem, t: float, x_index: int, k: float) -> np.ndarray:
    """calA(t, x, k) = k A(t, x)."""
    a = sys.A_at(t)
    return k * a[:, :, x_index % a.shape[-1]].astype(complex)


def _samples(arr: np.ndarray) -> np.ndarray:
    """(m, m, n_x) -> (n_x, m, m)."""
    return np.moveaxis(arr, -1, 0)


def _sample_times(sys: HyperbolicSystem, times) -> list[float]:
    if times is None:
        return [0.0]
    return list(np.atleast_1d(times))


def check_hyperbolic(sys: HyperbolicSystem, times=None) -> dict:
    """Eigenvalues of A over the sample set; hyperbolic iff all are real."""
    worst, scale, eigs = 0.0, 0.0, []
    for t in _sample_times(sys, times):
        mats = _samples(sys.A_at(t))
        try:
            lam = np.linalg.eigvals(mats)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"eigenvalue solver failed at t={t}") from exc
        eigs.append(lam)
        worst = max(worst, float(np.abs(lam.imag).max()))
        scale = max(scale, float(np.abs(mats).max()))
    return {"eigenvalues": np.concatenate(eigs), "max_imag": worst,
            "hyperbolic": worst <= 1e-9 * max(scale, 1e-300)}


def measure_regularity(sys: HyperbolicSystem, times=None, gamma: float | None = None) -> RegularitySeminorms:
    """K0 (sup of operator norms), LL seminorms of A in x and t, Hölder seminorm of B."""
    ts = _sample_times(sys, times)
    h = DOMAIN_LENGTH / sys.n_points
    k0, llx, holder = 0.0, 0.0, 0.0
    a_t = []
    for t in ts:
        a = sys.A_at(t)
        a_t.append(np.broadcast_to(a, a.shape[:2] + (a.shape[-1],)))
        k0 = max(k0, float(np.linalg.norm(_samples(a), ord=2, axis=(1, 2)).max()))
        if a.shape[-1] > 1:
            llx = max(llx, ll_seminorm_samples(a, h, periodic=True))
        b = sys.B_at(t)
        if b is not None:
            k0 = max(k0, float(np.linalg.norm(_samples(b), ord=2, axis=(1, 2)).max()))
            if gamma is not None and b.shape[-1] > 1:
                holder = max(holder, holder_seminorm_samples(b, h, gamma))
    llt = 0.0
    if sys.time_dependent and len(ts) > 1:
        width = max(x.shape[-1] for x in a_t)
        stack = np.stack([np.broadcast_to(x, x.shape[:2] + (width,)) for x in a_t], axis=-1)
        llt = ll_seminorm_samples(stack, ts[1] - ts[0], periodic=False)
    return RegularitySeminorms(k0, llx, llt, (gamma, holder) if gamma is not None else None)


def check_invariants(sys: HyperbolicSystem, times=None) -> list[str]:
    """Violations of the declared bounds (empty list when all hold)."""
    if sys.reg is None:
        return []
    gamma = sys.reg.holder_gamma[0] if sys.reg.holder_gamma else None
    got = measure_regularity(sys, times, gamma)
    bad = []
    if got.linf > sys.reg.linf * (1 + 1e-12):
        bad.append(f"sup bound {got.linf:.6g} exceeds K0={sys.reg.linf:.6g}")
    if got.ll_x > 1.05 * sys.reg.ll_x:
        bad.append(f"LL-in-x seminorm {got.ll_x:.6g} exceeds 1.05 K1")
    if got.ll_t > 1.05 * sys.reg.ll_t:
        bad.append(f"LL-in-t seminorm {got.ll_t:.6g} exceeds 1.05 K1")
    if gamma is not None and got.holder_gamma[1] > 1.05 * sys.reg.holder_gamma[1]:
        bad.append(f"Hölder seminorm of B {got.holder_gamma[1]:.6g} exceeds 1.05 K2")
    return bad


# --- symmetrizers ---------------------------------------------------------------------

@dataclass
class Symmetrizer:
    """S(t, x) Hermitian positive with S A self-adjoint; independent of the sign of xi."""

    S: TimeField
    m: int
    n_points: int
    lam: float
    Lam: float
    time_dependent: bool = False

    def at(self, t: float, sign: int = 1) -> np.ndarray:
        return self.S(t)

    def symbol(self, times: np.ndarray | None = None) -> Symbol:
        """Symbol S(t, x) (order 0), sampled on ``times`` when time-dependent."""
        if not self.time_dependent or times is None:
            return Symbol.from_coefficient(self.S(0.0), self.n_points, class_tag="LL")
        stack = np.stack([self.S(t) for t in times])
        return Symbol.from_coefficient(stack, self.n_points, times=times, class_tag="LL", time_tag="LL")

    @classmethod
    def identity(cls, m: int, n_points: int) -> "Symmetrizer":
        eye = np.eye(m)[..., None]
        return cls(lambda t: eye, m, n_points, 1.0, 1.0)


def _eigvec_basis(mats: np.ndarray, gap_min: float) -> np.ndarray:
    """Right eigenvectors (columns) sorted by eigenvalue, unit norm, first nonzero entry positive."""
    lam, vec = np.linalg.eig(mats)
    if np.abs(lam.imag).max() > 1e-9 * max(np.abs(mats).max(), 1e-300):
        raise ValueError("system is not hyperbolic: complex eigenvalues")
    lam = lam.real
    order = np.argsort(lam, axis=-1)
    lam = np.take_along_axis(lam, order, axis=-1)
    vec = np.take_along_axis(vec, order[:, None, :], axis=-1)
    gaps = np.diff(lam, axis=-1)
    if gaps.size and gaps.min() < gap_min:
        raise ValueError(f"eigenvalue gap {gaps.min():.3g} below {gap_min:.3g}: "
                         "eigenvalues coalesce, no symmetrizer constructed")
    vec = vec / np.linalg.norm(vec, axis=1, keepdims=True)
    first = np.argmax(np.abs(vec) > 1e-12, axis=1)  # (n, m)
    lead = np.take_along_axis(vec, first[:, None, :], axis=1)[:, 0, :]
    return vec * (np.abs(lead) / lead)[:, None, :]


def build_symmetrizer(sys: HyperbolicSystem, times=None) -> Symmetrizer:
    """S = (R^-1)* R^-1 from the eigenvectors of A; S = Id for symmetric A."""
    ts = _sample_times(sys, times)
    symmetric = all(np.allclose(a := sys.A_at(t), np.swapaxes(a, 0, 1), atol=1e-14, rtol=0)
                    for t in ts)
    if symmetric:
        out = Symmetrizer.identity(sys.m, sys.n_points)
        out.time_dependent = False
        return out

    def S(t):
        a = sys.A_at(t)
        mats = _samples(a)
        scale = max(np.linalg.norm(mats, ord=2, axis=(1, 2)).max(), 1e-300)
        R = _eigvec_basis(mats, 1e-6 * scale)
        Rinv = np.linalg.inv(R)
        s = np.conj(np.swapaxes(Rinv, 1, 2)) @ Rinv
        return np.moveaxis(0.5 * (s + np.conj(np.swapaxes(s, 1, 2))), 0, -1)

    lo, hi = np.inf, 0.0
    for t in ts:
        w = np.linalg.eigvalsh(_samples(S(t)))
        lo, hi = min(lo, float(w.min())), max(hi, float(w.max()))
    return Symmetrizer(S, sys.m, sys.n_points, lo, hi, sys.time_dependent)


def verify_symmetrizer(S: Symmetrizer, sys: HyperbolicSystem, times=None) -> dict:
    """Residuals of the symmetrizer conditions and LL seminorms of S."""
    ts = _sample_times(sys, times)
    herm = pos = sa = homog = 0.0
    lo, hi = np.inf, 0.0
    stack = []
    for t in ts:
        s = _samples(S.at(t))
        stack.append(S.at(t))
        a = _samples(sys.A_at(t)).astype(complex)
        herm = max(herm, float(np.abs(s - np.conj(np.swapaxes(s, 1, 2))).max()))
        w = np.linalg.eigvalsh(0.5 * (s + np.conj(np.swapaxes(s, 1, 2))))
        lo, hi = min(lo, float(w.min())), max(hi, float(w.max()))
        pos = max(pos, S.lam - float(w.min()), float(w.max()) - S.Lam, 0.0)
        sa_mat = np.broadcast_to(s, np.broadcast_shapes(s.shape, a.shape)) @ a
        sa = max(sa, float(np.abs(sa_mat - np.conj(np.swapaxes(sa_mat, 1, 2))).max()))
        homog = max(homog, float(np.abs(S.at(t, 1) - S.at(t, -1)).max()))
    h = DOMAIN_LENGTH / sys.n_points
    ll_x = max((ll_seminorm_samples(x, h, periodic=True) for x in stack if x.shape[-1] > 1), default=0.0)
    ll_t = 0.0
    if len(ts) > 1 and S.time_dependent:
        width = max(x.shape[-1] for x in stack)
        arr = np.stack([np.broadcast_to(x, x.shape[:2] + (width,)) for x in stack], axis=-1)
        ll_t = ll_seminorm_samples(arr, ts[1] - ts[0], periodic=False)
    return {"hermitian": herm, "positivity": pos, "symmetrizes": sa, "homogeneity": homog,
            "lambda": lo, "Lambda": hi, "ll_x": ll_x, "ll_t": ll_t}


# --- presets ----------------------------------------------------------------------------

def scalar_field(spec: dict, n_points: int) -> tuple[Callable[[float], np.ndarray], bool, bool]:
    """Closed-form scalar coefficient g(t, x) from a preset; returns (g, depends_on_t, depends_on_x).

    ``g(t)`` returns shape (N,) or (1,) for x-independent presets.
    """
    kind = spec.get("type", "constant")
    mean = float(spec.get("mean", 0.0))
    amp = float(spec.get("amplitude", 1.0))
    x = grid(n_points)
    if kind == "constant":
        v = np.array([float(spec.get("value", mean))])
        return (lambda t: v), False, False
    if kind == "smooth_x":
        v = mean + amp * np.sin(int(spec.get("mode", 1)) * x + float(spec.get("phase", 0.0)))
        return (lambda t: v), False, True
    if kind == "ll_x":
        f = gen_ll_function(int(spec["seed"]), int(spec.get("terms", 6)), n_points,
                            spec.get("profile", "saturated"), int(spec.get("j_min", 1))).values[0].real
        v = mean + amp * f
        return (lambda t: v), False, True
    if kind == "holder_x":
        f = gen_holder_function(float(spec["gamma"]), int(spec["seed"]), int(spec.get("terms", 6)),
                                n_points).values[0].real
        v = mean + amp * f
        return (lambda t: v), False, True
    if kind == "lipschitz_t":
        w = float(spec.get("frequency", 1.0))
        return (lambda t: np.array([mean + amp * np.sin(w * t)])), True, False
    if kind == "ll_t":
        path = ll_time_profile(int(spec["seed"]), int(spec.get("terms", 6)), int(spec.get("j_min", 1)),
                               spec.get("profile", "saturated"))
        return (lambda t: np.array([mean + amp * float(path(t))])), True, False
    if kind == "ll_tx":
        path = ll_time_profile(int(spec["seed"]), int(spec.get("terms", 6)), int(spec.get("j_min", 1)),
                               spec.get("profile", "saturated"))
        f = gen_ll_function(int(spec.get("seed_x", spec["seed"] + 1)), int(spec.get("terms_x", 5)),
                            n_points, spec.get("profile", "saturated")).values[0].real
        return (lambda t: mean + amp * float(path(t)) * f), True, True
    raise ValueError(f"unknown coefficient preset {kind!r}")


def matrix_field(spec: dict | None, m: int, n_points: int):
    """Matrix coefficient preset: constant matrix, wave reduction [[0, a], [1, 0]] or scalar * M."""
    if spec is None or spec.get("type") == "zero":
        return None, False
    kind = spec["type"]
    if kind == "constant":
        M = np.asarray(spec["matrix"], dtype=float)
        if M.shape != (m, m):
            raise ValueError(f"constant matrix must be {m}x{m}")
        return M, False
    if kind == "wave":
        if m != 2:
            raise ValueError("the wave reduction is a 2x2 system")
        g, dep_t, _ = scalar_field(spec["speed"], n_points)
        def A(t):
            a = g(t)
            out = np.zeros((2, 2, a.shape[-1]))
            out[0, 1] = a
            out[1, 0] = 1.0
            return out
        return (A if dep_t else A(0.0)), dep_t
    if kind == "scalar_times":
        M = np.asarray(spec["matrix"], dtype=float)
        g, dep_t, _ = scalar_field(spec["scalar"], n_points)
        A = lambda t: M[..., None] * g(t)
        return (A if dep_t else A(0.0)), dep_t
    raise ValueError(f"unknown matrix preset {kind!r}")


def forcing_field(spec: dict | None, m: int, n_points: int):
    if spec is None or spec.get("type") == "zero":
        return None
    if spec["type"] == "mode":
        x = grid(n_points)
        vec = np.zeros(m, dtype=complex)
        vec[int(spec.get("component", 0))] = float(spec.get("amplitude", 1.0))
        wave = np.exp(1j * int(spec.get("k", 1)) * x)
        freq = float(spec.get("frequency", 0.0))
        return lambda t: vec[:, None] * wave[None, :] * np.cos(freq * t)
    raise ValueError(f"unknown forcing preset {spec['type']!r}")


def build_system(spec: dict, n_points: int, name: str = "") -> HyperbolicSystem:
    """System from a scenario ``system`` block."""
    m = int(spec.get("m", 2))
    A, _ = matrix_field(spec["A"], m, n_points)
    if A is None:
        A = np.zeros((m, m))
    B, _ = matrix_field(spec.get("B"), m, n_points)
    f = forcing_field(spec.get("f"), m, n_points)
    return HyperbolicSystem(A, n_points, m, B, f, spec.get("kind", "L"), name=name)
