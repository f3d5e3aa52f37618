import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riccati_dichotomy.errors import DimensionError, ParameterError, SingularityError
from riccati_dichotomy.hilbert_scale import (
    SpaceTag, build_scale, check_resolvent_point, heinz_check, lambda_power,
    operator_scale_norm, pairing, plain, resolvent_scale_bound_scan,
    scale_norm, star)

from conftest import random_matrix

exponents = st.floats(-1.0, 1.0, allow_nan=False)


class TestBuildScale:
    def test_zero_base_gives_identity(self):
        sc = build_scale(np.zeros((3, 3)))
        np.testing.assert_allclose(sc.power("plain", 1), np.eye(3))
        np.testing.assert_allclose(sc.power("star", 1), np.eye(3))

    def test_scalar(self):
        sc = build_scale([[-1.0]])
        assert sc.power("plain", 1)[0, 0] == pytest.approx(np.sqrt(2))
        assert sc.power("star", 1)[0, 0] == pytest.approx(np.sqrt(2))

    def test_square_reproduces_gram(self, rng):
        A = random_matrix(rng, 5)
        sc = build_scale(A)
        L = sc.power("plain", 1)
        G = np.eye(5) + A @ A.conj().T
        assert np.linalg.norm(L @ L - G) <= 1e-10 * np.linalg.norm(G)
        Ls = sc.power("star", 1)
        Gs = np.eye(5) + A.conj().T @ A
        assert np.linalg.norm(Ls @ Ls - Gs) <= 1e-10 * np.linalg.norm(Gs)

    def test_gram_eigenvalues_at_least_one(self, rng):
        sc = build_scale(random_matrix(rng, 6))
        assert sc.eig_plus.values.min() >= 1 - 1e-12
        assert sc.eig_star.values.min() >= 1 - 1e-12

    @pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros(3)])
    def test_rejects_non_square(self, bad):
        with pytest.raises(DimensionError):
            build_scale(bad)

    def test_rejects_nan(self):
        with pytest.raises(ParameterError):
            build_scale([[np.nan]])


class TestPowers:
    def test_scalar_powers(self):
        sc = build_scale([[-1.0]])
        assert lambda_power(sc, plain(1))[0, 0] == pytest.approx(np.sqrt(2))
        assert lambda_power(sc, plain(-1))[0, 0] == pytest.approx(1 / np.sqrt(2))

    def test_zero_power_is_identity(self, rng):
        sc = build_scale(random_matrix(rng, 4))
        np.testing.assert_allclose(lambda_power(sc, star(0)), np.eye(4), atol=1e-14)

    def test_diagonal_star_half(self):
        sc = build_scale(np.diag([-1.0, -2.0]))
        np.testing.assert_allclose(lambda_power(sc, star(0.5)),
                                   np.diag([2 ** 0.25, 5 ** 0.25]), rtol=1e-12)

    @given(s=exponents, t=exponents)
    def test_group_law(self, s, t):
        A = random_matrix(np.random.default_rng(3), 4)
        sc = build_scale(A)
        lhs = sc.power("plain", s) @ sc.power("plain", t)
        rhs = sc.power("plain", s + t)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)

    @pytest.mark.parametrize("tag", [("plain", 1.5), ("middle", 0.0)])
    def test_tag_validation(self, tag):
        with pytest.raises(ParameterError):
            SpaceTag(*tag)


class TestNorms:
    def test_zero_vector(self, rng):
        sc = build_scale(random_matrix(rng, 3))
        assert scale_norm(sc, plain(0.7), np.zeros(3)) == 0.0

    def test_scalar_norm(self):
        assert scale_norm(build_scale([[-1.0]]), plain(1), [1.0]) == pytest.approx(np.sqrt(2))

    @given(s=st.floats(0, 1), t=st.floats(0, 1))
    def test_monotone_in_exponent(self, s, t):
        s, t = sorted((s, t))
        rng = np.random.default_rng(11)
        sc = build_scale(random_matrix(rng, 5))
        x = random_matrix(rng, 5, 1).ravel()
        assert scale_norm(sc, star(s), x) <= scale_norm(sc, star(t), x) * (1 + 1e-12)

    def test_wrong_length(self, rng):
        with pytest.raises(DimensionError):
            scale_norm(build_scale(random_matrix(rng, 3)), plain(0), np.ones(4))


class TestPairing:
    def test_orthogonal(self, rng):
        sc = build_scale(random_matrix(rng, 2))
        assert pairing(sc, plain(0.4), [1, 0], [0, 1]) == 0

    def test_unit(self, rng):
        sc = build_scale(random_matrix(rng, 3))
        e = np.array([1.0, 0, 0])
        assert pairing(sc, star(-0.6), e, e) == pytest.approx(1.0)

    @given(s=exponents)
    def test_equals_inner_product(self, s):
        rng = np.random.default_rng(5)
        sc = build_scale(random_matrix(rng, 4))
        x, y = random_matrix(rng, 4, 2).T
        assert pairing(sc, plain(s), x, y) == pytest.approx(np.vdot(y, x), rel=1e-12)


class TestOperatorNorm:
    def test_identity(self, rng):
        sc = build_scale(random_matrix(rng, 3))
        assert operator_scale_norm(sc, np.eye(3), plain(0.3), plain(0.3)) == pytest.approx(1.0)

    def test_inverse_lambda_into_h1(self, rng):
        sc = build_scale(random_matrix(rng, 4))
        M = sc.power("plain", -1)
        assert operator_scale_norm(sc, M, plain(0), plain(1)) == pytest.approx(1.0)

    def test_sampling_lower_bound(self, rng):
        sc = build_scale(random_matrix(rng, 3))
        M = random_matrix(rng, 3)
        src, dst = plain(-0.4), star(0.7)
        exact = operator_scale_norm(sc, M, src, dst)
        x = random_matrix(rng, 3, 10_000)
        ratios = (np.linalg.norm(lambda_power(sc, dst) @ M @ x, axis=0)
                  / np.linalg.norm(lambda_power(sc, src) @ x, axis=0))
        assert ratios.max() <= exact * (1 + 1e-12)
        assert ratios.max() >= 0.5 * exact

    def test_unweighted_ends(self, rng):
        sc = build_scale(random_matrix(rng, 3))
        B = random_matrix(rng, 3, 2)
        assert operator_scale_norm(sc, B, None, None) == pytest.approx(np.linalg.norm(B, 2))

    def test_dimension_check(self, rng):
        sc = build_scale(random_matrix(rng, 3))
        with pytest.raises(DimensionError):
            operator_scale_norm(sc, np.eye(4), plain(0), plain(0))


class TestHeinz:
    def test_identity_equality(self, rng):
        sc = build_scale(random_matrix(rng, 3))
        rep = heinz_check(sc, np.eye(3), plain(0), plain(0), plain(0.5), plain(0.5), 0.5)
        assert rep.holds
        assert rep.lhs == pytest.approx(1.0)

    def test_diagonal_closed_form(self):
        a = np.array([-1.0, -3.0, -0.5])
        m = np.array([2.0, 0.5, 1.0])
        sc = build_scale(np.diag(a))
        lam = np.sqrt(1 + a ** 2)
        norm = lambda r, s: np.max(np.abs(m) * lam ** (s - r))
        rep = heinz_check(sc, np.diag(m), plain(-1), plain(-0.5), plain(0.2), plain(1), 0.3)
        assert rep.lhs == pytest.approx(norm(rep.src.exponent, rep.dst.exponent))
        assert rep.holds

    @pytest.mark.parametrize("seed", range(30))
    def test_random_half_mix(self, seed):
        rng = np.random.default_rng(seed)
        sc = build_scale(random_matrix(rng, 4))
        rep = heinz_check(sc, random_matrix(rng, 4), star(-0.8), plain(-0.6),
                          star(0.4), plain(0.9), 0.5)
        assert rep.holds

    def test_rejects_bad_mix(self, rng):
        sc = build_scale(random_matrix(rng, 2))
        with pytest.raises(ParameterError):
            heinz_check(sc, np.eye(2), plain(0), plain(0), plain(1), plain(1), 1.0)


class TestResolvent:
    @pytest.mark.parametrize("t", [0.5, 1.0, 10.0])
    def test_scalar_axis(self, t):
        (mod, val), = resolvent_scale_bound_scan(
            build_scale([[-1.0]]), plain(0), plain(0), [1j * t])
        assert mod == pytest.approx(t)
        assert val == pytest.approx(1 / np.sqrt(1 + t * t))
        assert val <= 1 / t

    def test_diagonal_closed_form(self):
        a = np.array([-1.0, -4.0])
        sc = build_scale(np.diag(a))
        lam = 2j
        (_, val), = resolvent_scale_bound_scan(sc, plain(-0.5), plain(0.0), [lam])
        w = np.sqrt(1 + a ** 2) ** 0.5
        assert val == pytest.approx(np.max(w / np.abs(a - lam)))

    def test_singular_point(self):
        with pytest.raises(SingularityError):
            check_resolvent_point(np.diag([-1.0, 2j]), 2j)

    def test_heat_window_bounded(self):
        from riccati_dichotomy.problems import gen_heat1d
        sysd = gen_heat1d(60)
        sc = build_scale(sysd.A)
        lams = 1j * np.geomspace(1, 1e3, 12)
        rows = resolvent_scale_bound_scan(sc, star(-0.25), plain(0.25), lams)
        weighted = [m ** 0.5 * v for m, v in rows]
        assert max(weighted) < 10 * weighted[0] + 1
