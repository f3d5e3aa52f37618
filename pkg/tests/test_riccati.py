import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riccati_dichotomy import (assemble, gen_heat1d, gen_random_stable,
                               gen_scalar, solve_riccati)
from riccati_dichotomy.dichotomy import oracle_projections
from riccati_dichotomy.errors import (NotAGraphError, ParameterError,
                                      SimilarityError)
from riccati_dichotomy.hamiltonian import SystemData
from riccati_dichotomy.riccati import (
    angular_operator, canonical_projections, closed_loop, cograph_check,
    f1f2_diagnostics, graph_check, graph_residual, inverse_angular_operator,
    newton_kleinman, operator_norms, residual_tolerance, riccati_residual,
    scalar_oracle, solution_properties)

from conftest import SQRT2, random_matrix


@pytest.fixture(scope="module")
def scalar_solution():
    return solve_riccati(gen_scalar(1, 1, 1))


class TestScalarOracle:
    @pytest.mark.parametrize("abc,xm,xp,w", [
        ((1, 1, 1), SQRT2 - 1, -(SQRT2 + 1), SQRT2),
        ((1, 1, 0), 0.0, -2.0, 1.0),
        ((2, 1, 3), np.sqrt(13) - 2, -(np.sqrt(13) + 2), np.sqrt(13)),
    ])
    def test_closed_form(self, abc, xm, xp, w):
        Xm, Xp, spec = scalar_oracle(*abc)
        assert Xm == pytest.approx(xm, abs=1e-15)
        assert Xp == pytest.approx(xp)
        np.testing.assert_allclose(spec, [-w, w])

    def test_lyapunov_branch(self):
        Xm, Xp, _ = scalar_oracle(1, 0, 1)
        assert Xm == 0.5 and Xp is None

    def test_lyapunov_unstable(self):
        with pytest.raises(ParameterError):
            scalar_oracle(-1, 0, 1)

    @given(a=st.floats(-5, 5), b=st.floats(0.1, 5), c=st.floats(0.1, 5))
    def test_roots_solve_quadratic(self, a, b, c):
        Xm, Xp, _ = scalar_oracle(a, b, c)
        for X in (Xm, Xp):
            # -2aX - b^2 X^2 + c^2 = 0 for A = -a
            assert -2 * a * X - b * b * X * X + c * c == pytest.approx(
                0, abs=1e-9 * (1 + abs(a * X) + (b * X) ** 2 + c * c))


class TestGraph:
    @given(st.integers(0, 1000))
    def test_graph_of_any_matrix(self, seed):
        rng = np.random.default_rng(seed)
        X = random_matrix(rng, 3)
        basis = np.vstack([np.eye(3), X])
        assert graph_check(basis)
        np.testing.assert_allclose(angular_operator(basis), X, atol=1e-10 * (1 + np.abs(X).max()))
        assert graph_residual(basis, X) < 1e-12

    def test_antigraph(self):
        basis = np.vstack([np.zeros((2, 2)), np.eye(2)])
        assert not graph_check(basis)
        with pytest.raises(NotAGraphError):
            angular_operator(basis)
        assert cograph_check(basis)

    def test_dimension_mismatch(self):
        chk = graph_check(np.ones((4, 1)))
        assert not chk and "dimension" in chk.reason

    def test_scalar_margin(self):
        v = np.array([1.0, SQRT2 - 1])
        chk = graph_check((v / np.linalg.norm(v)).reshape(2, 1))
        assert chk.margin == pytest.approx(0.9238795325, abs=1e-9)

    def test_poor_margin_warns(self):
        basis = np.array([[1e-8], [1.0]])
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            X = angular_operator(basis)
        assert X[0, 0] == pytest.approx(1e8)
        assert any("poorly angular" in str(w.message) for w in rec)

    def test_inverse_angular(self):
        Y = np.array([[2.0, 1.0], [0.0, 3.0]])
        assert np.allclose(inverse_angular_operator(np.vstack([Y, np.eye(2)])), Y)


class TestExtraction:
    def test_scalar(self, scalar_solution):
        sol, _, _ = scalar_solution
        assert sol.X0minus[0, 0] == pytest.approx(SQRT2 - 1, abs=1e-10)
        assert sol.X0plus[0, 0] == pytest.approx(-(SQRT2 + 1), abs=1e-10)
        assert sol.Y0plus[0, 0] == pytest.approx(-(SQRT2 - 1), abs=1e-10)
        assert sol.graph_margin == pytest.approx(0.9238795325, abs=1e-9)

    def test_uncoupled_stable_gives_zero(self):
        s = SystemData(np.diag([-1.0, -2.0]), np.zeros((2, 1)), np.zeros((1, 2)))
        sol, _, _ = solve_riccati(s)
        assert np.abs(sol.X0minus).max() < 1e-10

    def test_newton_oracle(self, random8):
        sol, _, _ = solve_riccati(random8)
        Xn = newton_kleinman(random8)
        assert np.linalg.norm(sol.X0minus - Xn, 2) <= 1e-8 * np.linalg.norm(Xn, 2)

    def test_oracle_source(self, random8):
        a, _, _ = solve_riccati(random8)
        b, _, _ = solve_riccati(random8, source="oracle")
        assert np.linalg.norm(a.X0minus - b.X0minus, 2) <= 1e-8 * np.linalg.norm(b.X0minus, 2)

    def test_unknown_source(self, random8):
        with pytest.raises(ParameterError):
            solve_riccati(random8, source="guess")

    def test_three_geometries_coincide_without_weights(self, scalar_solution):
        sol, _, _ = scalar_solution
        assert sol.norms["V0"] == pytest.approx(sol.norms["H"]) == pytest.approx(sol.norms["V1"])

    def test_geometry_formulas(self, rng):
        from riccati_dichotomy.hilbert_scale import build_scale
        A = random_matrix(rng, 3)
        sc = build_scale(A)
        X = random_matrix(rng, 3)
        nrm = operator_norms(X, sc, 0.3, 0.2)
        Ls, L = sc.power("star", -0.2), sc.power("plain", 0.3)
        assert nrm["V0"] == pytest.approx(np.linalg.norm(Ls @ X @ L, 2))
        assert nrm["V1"] == pytest.approx(np.linalg.norm(L @ X @ Ls, 2))


class TestResidual:
    def test_closed_form_zero(self):
        rep = riccati_residual(gen_scalar(1, 1, 1), [[SQRT2 - 1]])
        assert rep.plain < 1e-15 and rep.weighted < 1e-15

    def test_zero_X(self):
        s = gen_heat1d(10, 0.2, 0.3)
        rep = riccati_residual(s, np.zeros((10, 10)))
        sc = assemble(s).scale
        CC = s.C.conj().T @ s.C
        expected = np.linalg.norm(sc.power("star", -0.3) @ CC @ sc.power("star", -0.8), 2)
        assert rep.weighted == pytest.approx(expected)
        assert rep.plain == pytest.approx(np.linalg.norm(CC, 2))

    def test_newton_oracle_small(self, random8):
        rep = riccati_residual(random8, newton_kleinman(random8))
        assert rep.weighted_rel <= 1e-10 and rep.plain_rel <= 1e-10

    def test_shape_check(self, random8):
        with pytest.raises(ParameterError):
            riccati_residual(random8, np.eye(3))

    def test_tolerance_widening(self):
        assert residual_tolerance(1e-8, 1e-10, 0.5) == 1e-8
        assert residual_tolerance(1e-8, 1e-8, 0.5) == pytest.approx(1e-7)
        assert residual_tolerance(1e-8, 0.0, 1e-8) == pytest.approx(1e-6)


class TestProperties:
    def test_scalar_all_pass(self, scalar_solution):
        sol, _, _ = scalar_solution
        checks = solution_properties(sol.X0minus, gen_scalar(1, 1, 1),
                                     sol.X0plus, sol.Y0plus)
        assert {c.name for c in checks} >= {"hermiticity_X0minus", "nonneg_X0minus",
                                            "nonpos_X0plus", "inverse_X0plus_Y0plus"}
        assert all(c.passed for c in checks)

    def test_inverse_skipped_without_observability(self):
        s = gen_scalar(1, 1, 0)
        sol, _, _ = solve_riccati(s)
        names = {c.name for c in solution_properties(sol.X0minus, s, sol.X0plus, sol.Y0plus)}
        assert "inverse_X0plus_Y0plus" not in names

    def test_detects_asymmetry(self):
        X = np.array([[1.0, 0.5], [0.0, 1.0]])
        s = SystemData(-np.eye(2), np.eye(2), np.eye(2))
        chk = {c.name: c for c in solution_properties(X, s, pbh=(True, True))}
        assert not chk["hermiticity_X0minus"].passed

    def test_random_all_pass(self, random8):
        sol, _, _ = solve_riccati(random8)
        checks = solution_properties(sol.X0minus, random8, sol.X0plus, sol.Y0plus)
        assert all(c.passed for c in checks), [c.line() for c in checks]


class TestClosedLoop:
    def test_scalar(self, scalar_solution):
        sol, _, H = scalar_solution
        cl = closed_loop(gen_scalar(1, 1, 1), sol.X0minus, H.T0)
        assert cl.spectrum[0] == pytest.approx(-SQRT2, abs=1e-10)

    def test_no_input(self):
        A = np.diag([-1.0, -3.0])
        s = SystemData(A, np.zeros((2, 1)), np.ones((1, 2)))
        X = newton_kleinman(s)
        cl = closed_loop(s, X)
        np.testing.assert_allclose(cl.Acl, A)
        assert cl.max_real < 0

    def test_wrong_solution(self):
        s = gen_scalar(1, 1, 1)
        with pytest.raises(SimilarityError):
            closed_loop(s, np.array([[-(SQRT2 + 1)]]))

    def test_sector_and_axis_scans(self, heat50):
        sol, _, H = solve_riccati(heat50)
        cl = closed_loop(heat50, sol.X0minus, H.T0, sector_radii=np.geomspace(0.1, 1e4, 8),
                         axis_t=[1.0, 10.0, 100.0], scale=H.scale)
        assert cl.max_real < 0
        bounded = [v for *_, v in cl.sector_scan]
        assert max(bounded) < 2.0
        decay = [v for _, v in cl.axis_decay]
        assert decay[0] > decay[1] > decay[2]


class TestNewton:
    def test_scalar(self):
        X = newton_kleinman(gen_scalar(1, 1, 1))
        assert X[0, 0] == pytest.approx(SQRT2 - 1, abs=1e-13)

    def test_against_scipy(self, random8):
        import scipy.linalg as sla
        s = random8
        Xs = sla.solve_continuous_are(s.A, s.B, s.C.conj().T @ s.C, np.eye(s.m))
        assert np.linalg.norm(newton_kleinman(s) - Xs, 2) <= 1e-9 * np.linalg.norm(Xs, 2)

    def test_unstable_start(self):
        with pytest.raises(ParameterError):
            newton_kleinman(gen_scalar(-1, 1, 1))


class TestAngularDiagnostics:
    def test_identical_projections(self):
        Q = canonical_projections(2)[0]
        d = f1f2_diagnostics(Q, Q, basis_minus=np.vstack([np.eye(2), np.zeros((2, 2))]))
        assert d.cond_F1 == pytest.approx(1) and d.cond_F2 == pytest.approx(1)
        np.testing.assert_allclose(d.F1, np.eye(4))

    def test_scalar(self, scalar_solution):
        _, dich, H = scalar_solution
        d = f1f2_diagnostics(dich.Pminus, H=H, basis_minus=dich.basis_minus)
        assert d.min_sv_F1 > 0.5 and d.min_sv_F2 > 0.5

    def test_mesh_probe(self):
        tops = []
        for n in (50, 100, 200):
            H = assemble(gen_heat1d(n, 0.2, 0.2))
            P = oracle_projections(H.T0).Pminus_oracle
            d = f1f2_diagnostics(P, H=H)
            tops.append(min(d.min_sv_F1, d.min_sv_F2))
        assert min(tops) > 0.5 and max(tops) <= 2 * min(tops)
