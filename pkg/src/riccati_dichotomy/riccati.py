"""Riccati solutions as angular operators of the Hamiltonian's invariant
subspaces.

If ``V0- = range [U1; U2]`` with invertible ``U1`` then ``V0-`` is the graph
of ``X0- = U2 U1^-1`` and ``X0-`` solves

    A^H X + X A - X B B^H X + C^H C = 0.

The same matrix stands for the operator on the ``V0``, ``V`` and ``V1``
geometries; :func:`operator_norms` reports all three norms.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .checks import Check
from .dichotomy import compute_dichotomy, oracle_projections, range_basis
from .errors import NotAGraphError, ParameterError, SimilarityError
from .hamiltonian import (assemble, match_spectra, pbh_controllability,
                          pbh_observability)
from .policy import DEFAULT_POLICY

GRAPH_TOL = 1e-10
POOR_MARGIN = 1e-6


@dataclass(frozen=True)
class GraphCheck:
    ok: bool
    margin: float
    k: int
    n: int
    reason: str = ""

    def __bool__(self):
        return self.ok


def _split(basis):
    basis = np.asarray(basis)
    N, k = basis.shape
    if N % 2:
        raise ParameterError("basis must have an even number of rows")
    n = N // 2
    return basis[:n], basis[n:], n, k


def graph_check(basis_minus, tol=GRAPH_TOL):
    """Is ``range(basis)`` the graph ``{(x, Xx)}`` of an ``n x n`` matrix?

    Requires ``k == n`` columns and a top block with smallest singular value
    above ``tol``; the margin is that singular value.
    """
    U1, _, n, k = _split(basis_minus)
    if k != n:
        return GraphCheck(False, 0.0, k, n,
                          f"dimension mismatch: {k} columns for n = {n}")
    margin = float(np.linalg.svd(U1, compute_uv=False)[-1]) if n else 1.0
    return GraphCheck(margin > tol, margin, k, n)


def cograph_check(basis_plus, tol=GRAPH_TOL):
    """Is ``range(basis)`` of the form ``{(Yy, y)}``?"""
    U1, U2, n, k = _split(basis_plus)
    return graph_check(np.vstack([U2, U1]), tol)


def angular_operator(basis_minus, tol=GRAPH_TOL, warn=True):
    """``X = U2 U1^-1`` for a graph basis ``[U1; U2]``.

    Solved through an LU factorisation of ``U1^T`` (pivoting over the
    columns of ``U1``).  Margins below ``1e-6`` trigger a warning unless
    ``warn`` is false.

    Raises
    ------
    NotAGraphError
        If ``U1`` is singular within ``tol`` or the shapes do not match.
    """
    chk = graph_check(basis_minus, tol)
    if not chk:
        raise NotAGraphError(chk.reason or
                             f"top block singular (margin {chk.margin:.3e})")
    if warn and chk.margin < POOR_MARGIN:
        warnings.warn(f"poorly angular subspace, margin {chk.margin:.2e}",
                      RuntimeWarning, stacklevel=2)
    U1, U2, n, _ = _split(basis_minus)
    return sla.solve(U1.T, U2.T).T


def inverse_angular_operator(basis_plus, tol=GRAPH_TOL):
    """``Y = U1 U2^-1`` for a co-graph basis ``[U1; U2]``."""
    U1, U2, n, _ = _split(basis_plus)
    return angular_operator(np.vstack([U2, U1]), tol)


def graph_residual(basis, X):
    """Distance of ``range [I; X]`` from ``range(basis)``."""
    n = X.shape[0]
    G = np.vstack([np.eye(n), X])
    Qb = np.linalg.qr(basis)[0]
    return float(np.linalg.norm(G - Qb @ (Qb.conj().T @ G), 2)
                 / np.linalg.norm(G, 2))


# -- angular diagnostics ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AngularDiagnostics:
    F1: np.ndarray
    F2: np.ndarray
    cond_F1: float
    cond_F2: float
    min_sv_F1: float
    min_sv_F2: float
    top_block_min_sv: float
    pq_diff_svals: np.ndarray = field(repr=False)


def canonical_projections(n):
    Qm = sla.block_diag(np.eye(n), np.zeros((n, n))).astype(complex)
    return Qm, np.eye(2 * n) - Qm


def f1f2_diagnostics(P0minus, Q0minus=None, H=None, basis_minus=None):
    """``F1 = I - Q0- + P0-`` and ``F2 = I - P0- + Q0-`` with conditioning.

    Norms are taken in the ``V0`` geometry when ``H`` is given.
    """
    N = P0minus.shape[0]
    n = N // 2
    if Q0minus is None:
        Q0minus = canonical_projections(n)[0]
    I = np.eye(N)
    F1 = I - Q0minus + P0minus
    F2 = I - P0minus + Q0minus
    D = P0minus - Q0minus
    if H is not None:
        W = H.block_weight("V0")
        Winv = np.linalg.inv(W)
        F1w, F2w, Dw = W @ F1 @ Winv, W @ F2 @ Winv, W @ D @ Winv
    else:
        F1w, F2w, Dw = F1, F2, D
    s1 = np.linalg.svd(F1w, compute_uv=False)
    s2 = np.linalg.svd(F2w, compute_uv=False)
    if basis_minus is None:
        basis_minus = range_basis(P0minus, int(round(np.trace(P0minus).real)))
    top = basis_minus[:n]
    top_sv = (float(np.linalg.svd(top, compute_uv=False)[-1])
              if top.size else 0.0)
    return AngularDiagnostics(
        F1=F1, F2=F2,
        cond_F1=float(s1[0] / s1[-1]) if s1[-1] > 0 else np.inf,
        cond_F2=float(s2[0] / s2[-1]) if s2[-1] > 0 else np.inf,
        min_sv_F1=float(s1[-1]), min_sv_F2=float(s2[-1]),
        top_block_min_sv=top_sv,
        pq_diff_svals=np.linalg.svd(Dw, compute_uv=False),
    )


# -- residual and properties --------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    weighted: float
    plain: float
    weighted_rel: float
    plain_rel: float


def riccati_residual(system, X, scale=None):
    """Residual ``E = A^H X + X A - X B B^H X + C^H C``.

    ``weighted`` is the norm of ``E`` as a map ``H_{1-r}^(*) -> H_{-s}^(*)``,
    i.e. ``||Lambda_*^{-s} E Lambda_*^{-(1-r)}||``; relative values divide
    by the largest of the four terms and of ``A^H`` itself, measured the same
    way.  The ``A^H`` floor keeps the ratio meaningful when ``X`` is near 0.
    """
    A, B, C = system.A, system.B, system.C
    X = np.asarray(X, dtype=complex)
    if X.shape != A.shape:
        raise ParameterError(f"X must be {A.shape}, got {X.shape}")
    terms = [A.conj().T @ X, X @ A, X @ B @ B.conj().T @ X, C.conj().T @ C]
    E = terms[0] + terms[1] - terms[2] + terms[3]
    if scale is None:
        scale = assemble(system).scale
    left = scale.power("star", -system.s)
    right = scale.power("star", -(1.0 - system.r))
    wn = lambda M: float(np.linalg.norm(left @ M @ right, 2))
    pn = lambda M: float(np.linalg.norm(M, 2))
    floor = A.conj().T
    wden = max(wn(T) for T in terms + [floor])
    pden = max(pn(T) for T in terms + [floor])
    w, p = wn(E), pn(E)
    return ResidualReport(w, p, w / wden if wden > 0 else w,
                          p / pden if pden > 0 else p)


def residual_tolerance(base, quad_error=0.0, margin=1.0):
    """``max(base, 10 * quad_error)``, widened by ``1e-6 / margin`` for
    poorly angular subspaces (margin below ``1e-6``)."""
    tol = max(base, 10.0 * quad_error)
    if 0 < margin < POOR_MARGIN:
        tol *= POOR_MARGIN / margin
    return tol


def operator_norms(X, scale, r, s):
    """Norms of ``X`` in the three geometries:
    ``V0`` (``H_-r -> H_-s^(*)``), plain, and ``V1`` (``H_s^(*) -> H_r``)."""
    return {
        "V0": float(np.linalg.norm(
            scale.power("star", -s) @ X @ scale.power("plain", r), 2)),
        "H": float(np.linalg.norm(X, 2)),
        "V1": float(np.linalg.norm(
            scale.power("plain", r) @ X @ scale.power("star", -s), 2)),
    }


def hermitian_part(X):
    return 0.5 * (X + X.conj().T)


def _size(X):
    # relative measures use max(||X||, 1) so that X = 0 is not ill-posed
    return max(float(np.linalg.norm(X, 2)), 1.0)


def hermiticity_defect(X):
    return float(np.linalg.norm(X - X.conj().T, 2)) / _size(X)


def solution_properties(X0minus, system, X0plus=None, Y0plus=None, tol=1e-8,
                        inverse_tol=1e-7, pbh=None):
    """Symmetry, sign and inverse-relation checks for extracted solutions.

    ``pbh`` is ``(controllable, observable)``; computed when omitted.  The
    inverse relation ``X0+ Y0+ = I`` is only checked when both hold.
    Hermiticity on the anti-stabilising side is checked on ``Y0+``, which
    stays bounded when ``X0+ = Y0+^-1`` is huge (weak controllability).
    Returns a list of :class:`Check`.
    """
    checks = []
    nm = _size(X0minus)
    checks.append(Check("hermiticity_X0minus", hermiticity_defect(X0minus), tol))
    lmin = float(np.linalg.eigvalsh(hermitian_part(X0minus))[0])
    checks.append(Check("nonneg_X0minus", lmin, -tol * nm, "ge"))
    if X0plus is not None:
        npl = _size(X0plus)
        lmax = float(np.linalg.eigvalsh(hermitian_part(X0plus))[-1])
        checks.append(Check("nonpos_X0plus", lmax, tol * npl))
    if Y0plus is not None:
        checks.append(Check("hermiticity_Y0plus", hermiticity_defect(Y0plus), tol))
    if pbh is None:
        pbh = (bool(pbh_controllability(system)), bool(pbh_observability(system)))
    if all(pbh) and X0plus is not None and Y0plus is not None:
        n = X0plus.shape[0]
        checks.append(Check("inverse_X0plus_Y0plus",
                            float(np.linalg.norm(X0plus @ Y0plus - np.eye(n), 2)),
                            inverse_tol))
    return checks


# -- closed loop ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClosedLoop:
    Acl: np.ndarray
    spectrum: np.ndarray
    max_real: float
    match_distance: float
    match_threshold: float
    sector_scan: list = field(default_factory=list, repr=False)
    axis_decay: list = field(default_factory=list, repr=False)


def closed_loop(system, X0minus, T0=None, rel_tol=1e-8, sector_radii=None,
                axis_t=None, scale=None):
    """Closed-loop matrix ``A - B B^H X0-`` and its spectral checks.

    Optional scans: ``sector_radii`` samples ``|lam| ||(Acl - lam)^-1||`` in
    the ``H_-r`` norm on right half-plane rays; ``axis_t`` records the
    ``H_-r -> H`` norm of ``(Acl - it)^-1``.

    Raises
    ------
    SimilarityError
        If the spectrum does not match the stable part of ``sigma(T0)``.
    """
    A, B = system.A, system.B
    Acl = A - B @ B.conj().T @ X0minus
    ev = np.linalg.eigvals(Acl)
    if T0 is None:
        T0 = assemble(system).T0
    evT = np.linalg.eigvals(T0)
    stable = evT[evT.real < 0]
    dist = match_spectra(ev, stable) if len(stable) == len(ev) else np.inf
    thr = rel_tol * max(1.0, np.linalg.norm(T0, 2))
    if not dist <= thr:
        raise SimilarityError(
            f"closed-loop spectrum off the stable Hamiltonian spectrum by {dist:.3e}")
    n = system.n
    I = np.eye(n)
    if scale is None and (sector_radii is not None or axis_t is not None):
        scale = assemble(system).scale
    sector = []
    if sector_radii is not None:
        W = scale.power("plain", -system.r)
        Winv = scale.power("plain", system.r)
        for phi in np.linspace(-np.pi / 2, np.pi / 2, 5):
            for R in sector_radii:
                lam = R * np.exp(1j * phi)
                Rz = np.linalg.inv(Acl - lam * I)
                sector.append((float(phi), float(R),
                               float(R * np.linalg.norm(W @ Rz @ Winv, 2))))
    decay = []
    if axis_t is not None:
        Winv = scale.power("plain", system.r)
        for t in axis_t:
            Rz = np.linalg.inv(Acl - 1j * t * I)
            decay.append((float(t), float(np.linalg.norm(Rz @ Winv, 2))))
    return ClosedLoop(Acl=Acl, spectrum=ev, max_real=float(ev.real.max()),
                      match_distance=float(dist), match_threshold=thr,
                      sector_scan=sector, axis_decay=decay)


# -- oracles -------------------------------------------------------------------

def scalar_oracle(a, b, c):
    """Closed-form solutions for ``A = -a``, ``B = b``, ``C = c``.

    Returns ``(X0minus, X0plus, spectrum)``; ``X0plus`` is ``None`` in the
    ``b = 0`` (Lyapunov) branch.
    """
    a = float(a)
    b2, c2 = abs(b) ** 2, abs(c) ** 2
    if b2 == 0:
        if c2 == 0:
            return 0.0, None, np.array([-a, a])
        if a <= 0:
            raise ParameterError("Lyapunov branch needs a > 0")
        return c2 / (2 * a), None, np.array([-a, a])
    w = np.sqrt(a * a + b2 * c2)
    if w == 0:
        raise ParameterError("a^2 + b^2 c^2 must be positive")
    return (w - a) / b2, -(w + a) / b2, np.array([-w, w])


def newton_kleinman(system, X0=None, tol=1e-13, maxiter=100):
    """Stabilising Riccati solution by Newton's method (Lyapunov solves).

    Starts from ``X0`` (default zero, which needs a stable ``A``).

    Raises
    ------
    ParameterError
        If the initial closed loop is not stable.
    RuntimeError
        If the iteration does not converge.
    """
    A, B, C = system.A, system.B, system.C
    n = system.n
    BB = B @ B.conj().T
    CC = C.conj().T @ C
    X = np.zeros((n, n), dtype=complex) if X0 is None else np.asarray(X0, complex)
    if np.linalg.eigvals(A - BB @ X).real.max() >= 0:
        raise ParameterError("initial guess is not stabilising")
    for _ in range(maxiter):
        Ak = A - BB @ X
        Xn = sla.solve_continuous_lyapunov(Ak.conj().T, -(CC + X @ BB @ X))
        Xn = hermitian_part(Xn)
        if np.linalg.norm(Xn - X) <= tol * max(1.0, np.linalg.norm(Xn)):
            return Xn
        X = Xn
    raise RuntimeError("Newton-Kleinman iteration did not converge")


# -- pipeline ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    X0minus: np.ndarray
    X0plus: np.ndarray
    Y0plus: np.ndarray
    norms: dict
    hermiticity_defect: float
    min_eig: float
    residual: ResidualReport
    source: str
    graph_margin: float
    cograph_margin: float
    plus_graph_margin: float

    @property
    def norm_V0(self):
        return self.norms["V0"]

    @property
    def norm_H(self):
        return self.norms["H"]


def extract_solution(H, basis_minus, basis_plus, source="contour"):
    """Angular operators of both invariant subspaces plus diagnostics."""
    gm = graph_check(basis_minus)
    if not gm:
        raise NotAGraphError(gm.reason or
                             f"stable subspace is not a graph (margin {gm.margin:.3e})")
    X0m = angular_operator(basis_minus)
    gp = graph_check(basis_plus)
    cg = cograph_check(basis_plus)
    # large X0+ is expected for weakly controllable systems; no warning
    X0p = angular_operator(basis_plus, warn=False) if gp else None
    Y0p = inverse_angular_operator(basis_plus) if cg else None
    sys = H.system
    return RiccatiSolution(
        X0minus=X0m, X0plus=X0p, Y0plus=Y0p,
        norms=operator_norms(X0m, H.scale, sys.r, sys.s),
        hermiticity_defect=hermiticity_defect(X0m),
        min_eig=float(np.linalg.eigvalsh(hermitian_part(X0m))[0]),
        residual=riccati_residual(sys, X0m, H.scale),
        source=source, graph_margin=gm.margin, cograph_margin=cg.margin,
        plus_graph_margin=gp.margin,
    )


def solve_riccati(system, policy=DEFAULT_POLICY, source="contour",
                  dichotomy=None):
    """Stabilising (and anti-stabilising) solution from the dichotomy.

    ``source="contour"`` uses the quadrature projections, ``"oracle"`` the
    eigendecomposition ones.  Returns ``(solution, dichotomy_or_oracle, H)``.
    """
    H = assemble(system)
    if source == "contour":
        d = dichotomy or compute_dichotomy(H.T0, policy=policy)
        bm, bp = d.basis_minus, d.basis_plus
    elif source == "oracle":
        d = oracle_projections(H.T0, policy=policy)
        bm = range_basis(d.Pminus_oracle, d.n_stable)
        bp = range_basis(d.Pplus_oracle, 2 * system.n - d.n_stable)
    else:
        raise ParameterError(f"unknown source {source!r}")
    return extract_solution(H, bm, bp, source), d, H
