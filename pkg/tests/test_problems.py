import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riccati_dichotomy import (assemble, certify_quasi_sectorial,
                               compute_dichotomy, spectral_gap_check)
from riccati_dichotomy.errors import NotDichotomousError, ParameterError
from riccati_dichotomy.dichotomy import choose_strip
from riccati_dichotomy.hamiltonian import pbh_controllability, pbh_observability
from riccati_dichotomy.problems import (
    KINDS, ProblemSpec, gen_axis_eigen_detect, gen_heat1d, gen_random_shifted,
    gen_random_stable, gen_scalar, generate, laplacian_1d)


class TestSpec:
    @pytest.mark.parametrize("kw", [dict(kind="wave"), dict(kind="scalar", n=0),
                                    dict(kind="scalar", r=0.6, s=0.4)])
    def test_validation(self, kw):
        with pytest.raises(ParameterError):
            ProblemSpec(**kw)

    @pytest.mark.parametrize("kind,extras", [
        ("scalar", {"a": 2, "b": 0, "c": 1}),
        ("random_stable", {}), ("random_shifted", {"mu": 1.0}),
        ("heat1d", {}), ("axis_eigen_detect", {"omega": 2.0}),
    ])
    def test_reproducible(self, kind, extras):
        spec = ProblemSpec(kind, n=6, m=2, p=2, r=0.1, s=0.2, seed=4, extras=extras)
        a, b = generate(spec), generate(spec)
        for M, N in zip((a.A, a.B, a.C), (b.A, b.B, b.C)):
            assert M.tobytes() == N.tobytes()

    def test_all_kinds_covered(self):
        assert set(KINDS) == {"scalar", "random_stable", "random_shifted",
                              "heat1d", "axis_eigen_detect"}


class TestScalar:
    def test_fixture(self):
        s = gen_scalar(1, 1, 1)
        assert (s.A[0, 0], s.B[0, 0], s.C[0, 0]) == (-1, 1, 1)

    def test_unobservable(self):
        assert not pbh_observability(gen_scalar(1, 1, 0))
        assert pbh_controllability(gen_scalar(1, 1, 0))


class TestRandomStable:
    @given(st.integers(0, 500), st.integers(1, 8))
    def test_margin_and_pbh(self, seed, n):
        s = gen_random_stable(n, 2, 2, seed, margin=0.5)
        assert np.linalg.eigvals(s.A).real.max() <= -0.5 + 1e-10
        assert pbh_controllability(s) and pbh_observability(s)

    def test_unit_scale_norms(self):
        s = gen_random_stable(6, 2, 3, seed=1, r=0.3, s=0.4)
        sc = assemble(s).scale
        assert np.linalg.norm(sc.power("plain", -0.3) @ s.B, 2) == pytest.approx(1)
        assert np.linalg.norm(s.C @ sc.power("star", -0.4), 2) == pytest.approx(1)

    def test_sector_certificate(self):
        s = gen_random_stable(6, 2, 2, seed=2)
        radius = np.abs(np.linalg.eigvals(s.A)).max()
        est = certify_quasi_sectorial(s.A, rho=1.1 * radius)
        assert np.isfinite(est.M)

    def test_bad_margin(self):
        with pytest.raises(ParameterError):
            gen_random_stable(3, 1, 1, 0, margin=0)


class TestRandomShifted:
    @pytest.mark.parametrize("seed", range(4))
    def test_placement(self, seed):
        s = gen_random_shifted(6, 2, 2, seed, mu=1.0, k_unstable=2)
        ev = np.linalg.eigvals(s.A)
        assert np.sum(ev.real > 0) == 2
        assert ev.real.max() < 1.0
        assert np.abs(ev.real).min() >= 1e-3

    def test_dichotomy_succeeds(self):
        s = gen_random_shifted(5, 1, 1, 3)
        d = compute_dichotomy(assemble(s).T0)
        assert d.basis_minus.shape[1] == 5

    @pytest.mark.parametrize("kw", [dict(k_unstable=0), dict(k_unstable=4), dict(mu=-1)])
    def test_validation(self, kw):
        args = dict(n=4, m=1, p=1, seed=0)
        with pytest.raises(ParameterError):
            gen_random_shifted(**args, **kw)


class TestHeat:
    def test_eigenvalues_n3(self):
        ev = np.sort(np.linalg.eigvalsh(laplacian_1d(3)))
        expected = np.sort([-16 * (2 - np.sqrt(2)), -32, -16 * (2 + np.sqrt(2))])
        np.testing.assert_allclose(ev, expected)

    def test_self_adjoint_and_scales_coincide(self):
        s = gen_heat1d(20, 0.2, 0.2)
        assert np.array_equal(s.A, s.A.conj().T)
        sc = assemble(s).scale
        np.testing.assert_allclose(sc.power("plain", 0.5), sc.power("star", 0.5), atol=1e-10)

    def test_unweighted_unit_vectors(self):
        s = gen_heat1d(10)
        for v in (s.B.ravel(), s.C.ravel()):
            big = np.abs(v) > 1e-12
            assert big.sum() == 1
            assert np.abs(v[big][0]) == pytest.approx(1)

    def test_plain_norm_grows(self):
        norms = []
        for n in (25, 50, 100):
            s = gen_heat1d(n, 0.4, 0.4)
            sc = assemble(s).scale
            assert np.linalg.norm(sc.power("plain", -0.4) @ s.B, 2) == pytest.approx(1)
            norms.append(np.linalg.norm(s.B))
        assert norms[0] < norms[1] < norms[2]

    def test_nodes_clamped(self):
        s = gen_heat1d(5, control_node=0.0, obs_node=2.0)
        assert np.argmax(np.abs(s.B[:, 0])) == 0
        assert np.argmax(np.abs(s.C[0])) == 4

    def test_validation(self):
        with pytest.raises(ParameterError):
            gen_heat1d(2)


class TestAxisEigen:
    def test_observed_passes(self):
        s = gen_axis_eigen_detect(4)
        assert spectral_gap_check(s).condition_holds
        assert any(abs(z - 1j) < 1e-14 for z in np.linalg.eigvals(s.A))
        choose_strip(assemble(s).T0)

    def test_unobserved_fails(self):
        s = gen_axis_eigen_detect(4, observe=False)
        assert not spectral_gap_check(s).condition_holds
        with pytest.raises(NotDichotomousError):
            choose_strip(assemble(s).T0)
