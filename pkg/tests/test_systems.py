import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paracalc import systems as sy
from paracalc.spaces import RegularitySeminorms, gen_ll_function, ll_seminorm_samples
from paracalc.spectral_core import DOMAIN_LENGTH, grid


def wave(seed, n=256, mean=1.5, amplitude=0.4):
    spec = {"m": 2, "A": {"type": "wave", "speed": {"type": "ll_x", "seed": seed, "terms": 5, "mean": mean,
                                                     "amplitude": amplitude, "profile": "weierstrass"}}}
    return sy.build_system(spec, n)


def speed_of(system):
    return system.A_at(0.0)[0, 1]


class TestPrincipalSymbol:
    def test_zero_frequency(self):
        s = wave(0)
        assert np.all(sy.principal_symbol(s, 0.0, 7, 0.0) == 0)

    @given(st.integers(0, 255), st.floats(-100, 100))
    def test_odd_in_frequency(self, i, k):
        s = wave(1)
        np.testing.assert_allclose(sy.principal_symbol(s, 0.0, i, -k), -sy.principal_symbol(s, 0.0, i, k))

    def test_hermitian_for_symmetric_coefficient(self):
        a = np.cos(grid(64))
        A = np.stack([np.stack([a, 1 + 0 * a]), np.stack([1 + 0 * a, -a])])
        s = sy.HyperbolicSystem(A, 64, 2)
        for i in range(0, 64, 9):
            p = sy.principal_symbol(s, 0.0, i, 3.0)
            np.testing.assert_allclose(p, p.conj().T)

    def test_same_for_both_forms(self):
        A = wave(2).A
        l, lstar = sy.HyperbolicSystem(A, 256, 2), sy.HyperbolicSystem(A, 256, 2, kind="L*")
        for i in (0, 50, 200):
            np.testing.assert_array_equal(sy.principal_symbol(l, 0.0, i, 5.0), sy.principal_symbol(lstar, 0.0, i, 5.0))

    def test_kind_validated(self):
        with pytest.raises(ValueError):
            sy.HyperbolicSystem(np.eye(2), 32, 2, kind="M")


class TestHyperbolicity:
    def test_symmetric_constant(self):
        r = sy.check_hyperbolic(sy.HyperbolicSystem(np.array([[0.0, 1.0], [1.0, 0.0]]), 32, 2))
        assert r["hyperbolic"]
        np.testing.assert_allclose(np.sort(r["eigenvalues"].real.ravel()), [-1, 1])

    def test_wave_speeds(self):
        s = wave(3)
        r = sy.check_hyperbolic(s)
        a = speed_of(s)
        assert r["hyperbolic"]
        np.testing.assert_allclose(np.sort(r["eigenvalues"].real, axis=1), np.stack([-np.sqrt(a), np.sqrt(a)], axis=1))

    def test_rotation_is_not_hyperbolic(self):
        r = sy.check_hyperbolic(sy.HyperbolicSystem(np.array([[0.0, -1.0], [1.0, 0.0]]), 32, 2))
        assert not r["hyperbolic"] and r["max_imag"] == pytest.approx(1.0)

    def test_time_samples(self):
        spec = {"m": 2, "A": {"type": "wave", "speed": {"type": "lipschitz_t", "mean": 0.0, "amplitude": 1.0}}}
        s = sy.build_system(spec, 32)
        assert sy.check_hyperbolic(s, [0.5])["hyperbolic"]
        # speed sin(t) turns negative after pi
        assert not sy.check_hyperbolic(s, np.linspace(0, 4, 9))["hyperbolic"]


class TestRegularity:
    def test_constant_system(self):
        r = sy.measure_regularity(sy.HyperbolicSystem(2 * np.eye(2), 32, 2))
        assert r.linf == pytest.approx(2.0) and r.ll_x == 0 and r.ll_t == 0

    def test_ll_seminorm_of_speed(self):
        s = wave(4)
        direct = ll_seminorm_samples(speed_of(s), DOMAIN_LENGTH / 256, periodic=True)
        assert sy.measure_regularity(s).ll_x == pytest.approx(direct, rel=1e-12)

    def test_invariants_reported(self):
        s = wave(5)
        got = sy.measure_regularity(s)
        s.reg = RegularitySeminorms(got.linf, got.ll_x, 0.0)
        assert sy.check_invariants(s) == []
        s.reg = RegularitySeminorms(got.linf, 0.5 * got.ll_x, 0.0)
        assert any("LL-in-x" in v for v in sy.check_invariants(s))
        s.reg = RegularitySeminorms(0.5 * got.linf, got.ll_x, 0.0)
        assert any("sup bound" in v for v in sy.check_invariants(s))


class TestSymmetrizer:
    def test_identity_for_symmetric(self):
        for M in ([[0.0, 1.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, -1.0]]):
            S = sy.build_symmetrizer(sy.HyperbolicSystem(np.array(M), 32, 2))
            assert S.lam == S.Lam == 1.0
            np.testing.assert_array_equal(S.at(0.0)[..., 0], np.eye(2))

    @pytest.mark.parametrize("seed", range(4))
    def test_wave_closed_form(self, seed):
        s = wave(seed)
        a = speed_of(s)
        S = sy.build_symmetrizer(s).at(0.0)
        # eigenvector normalisation gives diag((1 + a) / 2a, (1 + a) / 2)
        np.testing.assert_allclose(S[0, 0], (1 + a) / (2 * a), rtol=1e-12)
        np.testing.assert_allclose(S[1, 1], (1 + a) / 2, rtol=1e-12)
        assert np.abs(S[0, 1]).max() < 1e-12
        v = sy.verify_symmetrizer(sy.build_symmetrizer(s), s)
        assert max(v["hermitian"], v["positivity"], v["symmetrizes"], v["homogeneity"]) <= 1e-12

    def test_scaling_doubles_bounds(self):
        s = wave(1)
        S = sy.build_symmetrizer(s)
        S2 = sy.Symmetrizer(lambda t: 2 * S.at(t), 2, 256, 2 * S.lam, 2 * S.Lam)
        v, v2 = sy.verify_symmetrizer(S, s), sy.verify_symmetrizer(S2, s)
        assert v2["lambda"] == pytest.approx(2 * v["lambda"]) and v2["Lambda"] == pytest.approx(2 * v["Lambda"])
        assert v2["positivity"] <= 1e-12

    def test_regularity_follows_coefficient(self):
        ratios = []
        for seed in range(10):
            s = wave(seed)
            v = sy.verify_symmetrizer(sy.build_symmetrizer(s), s)
            ratios.append(v["ll_x"] / sy.measure_regularity(s).ll_x)
        assert max(ratios) / min(ratios) < 3.0 and min(ratios) > 0

    def test_coalescing_eigenvalues_refused(self):
        # speed touches zero, the two characteristic speeds merge
        a = np.abs(np.sin(grid(64)))
        A = np.zeros((2, 2, 64))
        A[0, 1], A[1, 0] = a, 1.0
        with pytest.raises(ValueError, match="coalesce"):
            sy.build_symmetrizer(sy.HyperbolicSystem(A, 64, 2))

    def test_complex_eigenvalues_refused(self):
        with pytest.raises(ValueError, match="not hyperbolic"):
            sy.build_symmetrizer(sy.HyperbolicSystem(np.array([[0.0, -1.0], [1.0, 0.0]]), 32, 2))

    def test_time_dependent(self):
        spec = {"m": 2, "A": {"type": "wave", "speed": {"type": "ll_t", "seed": 1, "terms": 6, "mean": 1.0,
                                                         "amplitude": 0.3}}}
        s = sy.build_system(spec, 32)
        times = np.linspace(0, 1, 65)
        S = sy.build_symmetrizer(s, times)
        v = sy.verify_symmetrizer(S, s, times)
        assert S.time_dependent and v["symmetrizes"] <= 1e-12 and v["ll_t"] > 0
        assert S.symbol(times).time_tag == "LL"


class TestPresets:
    def test_constant_shape_checked(self):
        with pytest.raises(ValueError):
            sy.build_system({"m": 2, "A": {"type": "constant", "matrix": [[1.0]]}}, 32)

    def test_wave_needs_two_components(self):
        with pytest.raises(ValueError):
            sy.build_system({"m": 3, "A": {"type": "wave", "speed": {"type": "constant", "value": 1}}}, 32)

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            sy.build_system({"m": 2, "A": {"type": "spiral"}}, 32)

    def test_ll_speed_matches_generator(self):
        s = sy.build_system({"m": 2, "A": {"type": "wave", "speed": {"type": "ll_x", "seed": 3, "terms": 4,
                                                                     "mean": 2.0, "amplitude": 0.5}}}, 128)
        f = gen_ll_function(3, 4, 128).values[0].real
        np.testing.assert_allclose(speed_of(s), 2.0 + 0.5 * f)

    def test_forcing_mode(self):
        s = sy.build_system({"m": 2, "A": {"type": "zero"},
                             "f": {"type": "mode", "k": 3, "component": 1, "amplitude": 2.0}}, 32)
        f = s.f_at(0.0)
        np.testing.assert_allclose(f[1], 2 * np.exp(3j * grid(32)))
        assert np.all(f[0] == 0)
