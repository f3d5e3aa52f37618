"""Dichotomy operators and spectral projections by resolvent quadrature.

The operators

    L_+- = (+-1)/(2 pi i) * int_{+-h - i inf}^{+-h + i inf} (1/lam) (T0 - lam)^-1 dlam

are computed along the vertical lines ``Re lam = +-h`` inside the
spectrum-free strip, and ``P_+- = T0 L_+-``.  An eigendecomposition
(or ordered Schur) route gives the same projections without quadrature and
serves as the oracle.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (AccuracyError, NotDichotomousError, ParameterError,
                     SingularityError)
from .hamiltonian import _negate
from .policy import DEFAULT_POLICY
from .quadrature import frobenius, integrate

_CHUNK = 16


@dataclass(frozen=True)
class ContourSpec:
    """Integration setup.

    ``h`` is the half-width of the vertical lines, ``t_max`` the truncation
    height (the tail beyond it is bounded, not integrated), ``rho`` the
    radius of the semicircles used in the diagonal-part identity.
    """

    h: float
    t_max: float
    rule: str = "gauss_kronrod"
    abs_tol: float = 1e-10
    rho: float = 0.0
    resolvent: str = "lu"

    def __post_init__(self):
        if not self.h > 0:
            raise ParameterError("strip half-width h must be positive")
        if not self.t_max > self.h:
            raise ParameterError("t_max must exceed h")
        if not self.abs_tol > 0:
            raise ParameterError("abs_tol must be positive")


def tail_t_max(norm_T0, abs_tol):
    """Truncation height whose certified tail is at most ``abs_tol / 10``.

    For ``|lam| >= 2 ||T0||`` a Neumann series gives
    ``||(T0 - lam)^-1|| <= 2/|lam|``, so the two tails of the ``P`` integrand
    contribute at most ``2 max(1, ||T0||) / (pi t_max)``.
    """
    w = max(1.0, norm_T0)
    return max(2.0 * w, 20.0 * w / (np.pi * abs_tol))


def tail_bound(norm_T0, t_max):
    return 2.0 * max(1.0, norm_T0) / (np.pi * t_max)


def choose_strip(T0, abs_tol=None, rule="gauss_kronrod", policy=DEFAULT_POLICY):
    """Pick ``h = min|Re sigma(T0)| / 2`` and derive ``t_max``.

    Raises
    ------
    NotDichotomousError
        If an eigenvalue lies within ``eigen_tol * ||T0||`` of the axis.
    """
    T0 = np.asarray(T0, dtype=complex)
    abs_tol = policy.quad_tol if abs_tol is None else abs_tol
    ev = np.linalg.eigvals(T0)
    nrm = np.linalg.norm(T0, 2)
    thr = policy.eigen_tol * max(1.0, nrm)
    axis = [complex(z) for z in ev if abs(z.real) <= thr]
    if axis:
        raise NotDichotomousError(
            "eigenvalues on the imaginary axis: "
            + ", ".join(f"{z.real:+.3e}{z.imag:+.12g}j" for z in axis), axis)
    h = 0.5 * float(np.min(np.abs(ev.real)))
    return ContourSpec(h=h, t_max=tail_t_max(nrm, abs_tol), rule=rule,
                       abs_tol=abs_tol, rho=0.5 * h,
                       resolvent=policy.resolvent)


# -- resolvent batches -------------------------------------------------------

def _resolvents(T0, lams):
    """``(T0 - lam)^-1`` for a 1-d array of shifts, shape ``(k, N, N)``."""
    return ShiftedInverse(T0)(np.ones(len(lams)), lams)


_trtri = sla.get_lapack_funcs("trtri", dtype=complex)


class ShiftedInverse:
    """Inverses ``(a_k M - b_k I)^-1`` of one matrix for many ``(a_k, b_k)``.

    With ``schur=True`` ``M = Z S Z^H`` is
    reduced once to complex Schur form and every inverse is a triangular
    inversion, returned in Schur coordinates; map integrals back with
    :meth:`back`.  Frobenius norms are unchanged by the unitary ``Z``.
    """

    def __init__(self, M, schur=False):
        M = np.asarray(M, dtype=complex)
        self.N = M.shape[0]
        if schur and self.N > 8:
            self.S, self.Z = sla.schur(M, output="complex")
        else:
            self.S, self.Z = M, None

    def __call__(self, a, b):
        a = np.broadcast_to(np.asarray(a, dtype=complex), np.shape(b))
        b = np.asarray(b, dtype=complex)
        N = self.N
        I = np.eye(N)
        out = np.empty((len(b), N, N), dtype=complex)
        if self.Z is None:
            for start in range(0, len(b), _CHUNK):
                sl = slice(start, start + _CHUNK)
                out[sl] = np.linalg.inv(a[sl, None, None] * self.S
                                        - b[sl, None, None] * I)
            return out
        for k in range(len(b)):
            inv, info = _trtri(a[k] * self.S - b[k] * I)
            if info != 0:
                raise SingularityError("shifted matrix is singular",
                                       [complex(b[k] / a[k])])
            out[k] = np.triu(inv)
        return out

    def back(self, X):
        return X if self.Z is None else self.Z @ X @ self.Z.conj().T


@dataclass(frozen=True)
class ContourIntegral:
    """Quadrature of one dichotomy operator.

    ``error`` and ``tail`` bound the error of ``value``; ``p_error`` and
    ``p_tail`` the error of ``T0 @ value``.
    """

    value: np.ndarray
    error: float
    p_error: float
    tail: float
    p_tail: float
    nodes: int
    sign: int


def contour_L(T0, spec, sign, max_nodes=DEFAULT_POLICY.max_nodes):
    """Quadrature of ``L_+`` (``sign=+1``) or ``L_-`` (``sign=-1``).

    The line ``lam = sign*h + it`` is parametrised by ``t = h sinh(u)``,
    ``|t| <= t_max``; the integrand and its product with ``T0`` are refined
    jointly, so both ``L`` and ``P = T0 L`` meet ``spec.abs_tol``.

    Raises
    ------
    AccuracyError
        If the quadrature does not converge within the node budget.
    """
    if sign not in (1, -1):
        raise ParameterError("sign must be +1 or -1")
    T0 = np.asarray(T0, dtype=complex)
    work = ShiftedInverse(T0, schur=spec.resolvent == "schur")
    S = work.S
    c = spec.h
    U = np.arcsinh(spec.t_max / c)

    def f(u):
        u = np.asarray(u, dtype=float)
        lam = sign * spec.h + 1j * c * np.sinh(u)
        w = sign * c * np.cosh(u) / (2 * np.pi * lam)
        return work(1.0, lam) * w[:, None, None]

    def pair_norm(E):
        return max(frobenius(E), frobenius(S @ E))

    nrm = np.linalg.norm(T0, 2)
    q = integrate(f, -U, U, 0.9 * spec.abs_tol, rule=spec.rule,
                  norm=pair_norm, max_nodes=max_nodes)
    L_tail = tail_bound(0.0, spec.t_max)
    P_tail = tail_bound(nrm, spec.t_max)
    return ContourIntegral(value=work.back(q.value), error=q.error + L_tail,
                           p_error=q.error + P_tail, tail=L_tail,
                           p_tail=P_tail, nodes=q.nodes, sign=sign)


# -- projections --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DichotomyResult:
    Lplus: np.ndarray
    Lminus: np.ndarray
    Pplus: np.ndarray
    Pminus: np.ndarray
    basis_plus: np.ndarray
    basis_minus: np.ndarray
    tail_bound: float
    quadrature_error_estimate: float
    defects: dict = field(default_factory=dict)
    spec: ContourSpec = None
    nodes: int = 0

    @property
    def bound(self):
        """Tolerance for the algebraic identities of this result."""
        return max(1e-8, 10.0 * self.quadrature_error_estimate)


def range_basis(P, k):
    """Orthonormal basis of the ``k`` dominant left singular directions."""
    if k == 0:
        return np.zeros((P.shape[0], 0), dtype=complex)
    U, _, _ = np.linalg.svd(P)
    return U[:, :k]


def projection_defects(T0, Lplus, Lminus, Pplus, Pminus):
    N = T0.shape[0]
    I = np.eye(N)
    nT = max(1.0, np.linalg.norm(T0, 2))
    n2 = lambda M: float(np.linalg.norm(M, 2))
    return {
        "complement": n2(Pplus + Pminus - I),
        "idempotent_plus": n2(Pplus @ Pplus - Pplus),
        "idempotent_minus": n2(Pminus @ Pminus - Pminus),
        "LplusLminus": n2(Lplus @ Lminus),
        "LminusLplus": n2(Lminus @ Lplus),
        "sum_inverse": n2(Lplus + Lminus - np.linalg.inv(T0)),
        "invariance_minus": n2((I - Pminus) @ T0 @ Pminus) / nT,
        "invariance_plus": n2((I - Pplus) @ T0 @ Pplus) / nT,
    }


def projections(T0, Lplus, Lminus, error_estimate=0.0, tail=0.0, spec=None,
                nodes=0, check=True):
    """Form ``P_+- = T0 L_+-``, check their algebra and extract range bases.

    The range dimension is the rounded trace of ``P_-``.

    Raises
    ------
    AccuracyError
        If an identity is violated by more than ``max(1e-8, 10*estimate)``.
    """
    T0 = np.asarray(T0, dtype=complex)
    Lp = Lplus.value if isinstance(Lplus, ContourIntegral) else Lplus
    Lm = Lminus.value if isinstance(Lminus, ContourIntegral) else Lminus
    if isinstance(Lplus, ContourIntegral):
        error_estimate = max(Lplus.p_error, Lminus.p_error)
        tail = max(Lplus.p_tail, Lminus.p_tail)
        nodes = Lplus.nodes + Lminus.nodes
    Pp = T0 @ Lp
    Pm = T0 @ Lm
    N = T0.shape[0]
    k_minus = int(round(np.trace(Pm).real))
    k_minus = min(max(k_minus, 0), N)
    defects = projection_defects(T0, Lp, Lm, Pp, Pm)
    defects["trace_minus"] = abs(np.trace(Pm) - k_minus)
    result = DichotomyResult(
        Lplus=Lp, Lminus=Lm, Pplus=Pp, Pminus=Pm,
        basis_plus=range_basis(Pp, N - k_minus),
        basis_minus=range_basis(Pm, k_minus),
        tail_bound=tail, quadrature_error_estimate=error_estimate,
        defects=defects, spec=spec, nodes=nodes,
    )
    if check:
        bad = {k: v for k, v in defects.items() if not v <= result.bound}
        if bad:
            raise AccuracyError(
                "projection identities violated: "
                + ", ".join(f"{k}={v:.2e}" for k, v in bad.items()),
                achieved=max(bad.values()))
    return result


def compute_dichotomy(T0, spec=None, policy=DEFAULT_POLICY, check=True):
    """Strip selection, both contour integrals and the projections."""
    T0 = np.asarray(T0, dtype=complex)
    if spec is None:
        spec = choose_strip(T0, policy=policy)
    Lp = contour_L(T0, spec, +1, max_nodes=policy.max_nodes)
    Lm = contour_L(T0, spec, -1, max_nodes=policy.max_nodes)
    return projections(T0, Lp, Lm, spec=spec, check=check)


# -- oracle -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OracleProjections:
    Pplus_oracle: np.ndarray
    Pminus_oracle: np.ndarray
    eigen_gap: float
    eigvec_cond: float
    method: str  # "eigenvectors" or "schur"
    n_stable: int


def schur_stable_projection(T0):
    """Spectral projection onto the stable subspace via an ordered Schur form
    and one Sylvester equation for the coupling block."""
    T, Z, k = sla.schur(T0, output="complex", sort="lhp")
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    Y = sla.solve_sylvester(T11, -T22, T12)
    N = T0.shape[0]
    Pm = np.zeros((N, N), dtype=complex)
    Pm[:k, :k] = np.eye(k)
    Pm[:k, k:] = Y
    return Z @ Pm @ Z.conj().T, k


def oracle_projections(T0, policy=DEFAULT_POLICY, cond_limit=1e6):
    """Half-plane spectral projections from an eigendecomposition.

    Falls back to an ordered Schur form when the eigenvector matrix is
    ill-conditioned (``cond > cond_limit``).
    """
    T0 = np.asarray(T0, dtype=complex)
    N = T0.shape[0]
    ev, V = np.linalg.eig(T0)
    gap = float(np.min(np.abs(ev.real)))
    if gap <= policy.eigen_tol * max(1.0, np.linalg.norm(T0, 2)):
        axis = [complex(z) for z in ev
                if abs(z.real) <= policy.eigen_tol * max(1.0, np.linalg.norm(T0, 2))]
        raise NotDichotomousError("eigenvalues on the imaginary axis", axis)
    cond = float(np.linalg.cond(V))
    stable = ev.real < 0
    if cond <= cond_limit:
        Pm = (V * stable) @ np.linalg.inv(V)
        method = "eigenvectors"
    else:
        Pm, _ = schur_stable_projection(T0)
        method = "schur"
    return OracleProjections(
        Pplus_oracle=np.eye(N) - Pm, Pminus_oracle=Pm, eigen_gap=gap,
        eigvec_cond=cond, method=method, n_stable=int(stable.sum()))


# -- principal value identity -------------------------------------------------

@dataclass(frozen=True, eq=False)
class PrincipalValue:
    """``(1/(pi i)) PV int_{-i inf}^{i inf} (T0 - lam)^-1 dlam``.

    ``truncated`` is the symmetric integral over ``|t| <= t_max`` and
    ``tail`` the remainder over ``|t| > t_max``; ``value`` is their sum.
    ``tail_constant`` is ``t_max * ||tail||``, the ``C`` of the ``C/t_max``
    truncation error.
    """

    value: np.ndarray
    truncated: np.ndarray
    tail: np.ndarray
    tail_constant: float
    error: float
    t_max: float


def _symmetric_resolvent(work, a, t):
    """``2 (aM - it)^-1 M (aM + it)^-1``; for ``a = 1`` this is
    ``(M - it)^-1 + (M + it)^-1``."""
    return 2.0 * (work(a, 1j * t) @ work.S @ work(a, -1j * t))


def principal_value_difference(T0, t_max=1e3, abs_tol=1e-10,
                               rule="gauss_kronrod", reference=None,
                               policy=DEFAULT_POLICY):
    """Principal value integral of the resolvent along the imaginary axis.

    The truncated part uses ``t = c sinh(u)`` on ``[0, t_max]``; the tail is
    mapped to ``[0, 1]`` by ``t = t_max / u``, where the symmetric integrand
    ``2 t_max (u T0 - i t_max)^-1 T0 (u T0 + i t_max)^-1`` is smooth.

    If ``reference`` (``P_+ - P_-``) is given, the result is required to
    agree with it within the quadrature estimate plus the reference's own
    tolerance ``policy.quad_tol`` and ``1e-12 ||T0||`` rounding slack.

    Raises
    ------
    NotDichotomousError
        If ``T0`` has an eigenvalue on the axis.
    AccuracyError
        If ``reference`` disagrees.
    """
    T0 = np.asarray(T0, dtype=complex)
    ev = np.linalg.eigvals(T0)
    nrm = max(1.0, np.linalg.norm(T0, 2))
    thr = policy.eigen_tol * nrm
    axis = [complex(z) for z in ev if abs(z.real) <= thr]
    if axis:
        raise NotDichotomousError("eigenvalues on the imaginary axis", axis)
    c = float(np.min(np.abs(ev)))
    U = np.arcsinh(t_max / c)

    work = ShiftedInverse(T0, schur=policy.resolvent == "schur")

    def core(u):
        t = c * np.sinh(u)
        return (_symmetric_resolvent(work, 1.0, t)
                * (c * np.cosh(u) / np.pi)[:, None, None])

    def tail(u):
        # t = t_max / u; the 1/u^2 of dt cancels against the u^2 of the shifts
        u = np.asarray(u, dtype=float)
        return (_symmetric_resolvent(work, u, np.full(len(u), t_max))
                * (t_max / np.pi))

    q1 = integrate(core, 0.0, U, 0.5 * abs_tol, rule=rule,
                   max_nodes=policy.max_nodes)
    q2 = integrate(tail, 0.0, 1.0, 0.5 * abs_tol, rule=rule,
                   max_nodes=policy.max_nodes)
    truncated, tail_value = work.back(q1.value), work.back(q2.value)
    value = truncated + tail_value
    pv = PrincipalValue(value=value, truncated=truncated, tail=tail_value,
                        tail_constant=float(t_max * np.linalg.norm(tail_value, 2)),
                        error=q1.error + q2.error, t_max=t_max)
    if reference is not None:
        gap = np.linalg.norm(value - reference, 2)
        # the reference carries its own quadrature error of order quad_tol
        if gap > 10 * pv.error + policy.quad_tol + 1e-12 * nrm:
            raise AccuracyError(
                f"principal value differs from P+ - P- by {gap:.3e}", gap)
    return pv


# -- diagonal-part identity ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class SQReport:
    lhs: np.ndarray
    pv_part: np.ndarray
    K: np.ndarray
    defect: float
    defect_V0: float
    error_estimate: float
    rho: float

    @property
    def rhs(self):
        return self.pv_part + self.K


def sq_correction_check(H, rho=None, abs_tol=1e-8, rule="gauss_kronrod",
                        policy=DEFAULT_POLICY):
    """Both sides of ``Q0+ - Q0- = (1/(pi i)) PV int_{gamma_1} (S0 - lam)^-1 dlam + K``.

    ``gamma_1`` is the imaginary axis with ``|t| < rho`` removed and
    ``K = diag(K1, K2)`` collects the semicircle integrals

        K1 = (1/(pi i)) int_{rho e^{it}, |t| <= pi/2} (A - lam)^-1 dlam
        K2 = (1/(pi i)) int_{rho e^{-it}, pi/2 <= t <= 3pi/2} (-A^H - lam)^-1 dlam

    Raises
    ------
    ParameterError
        If ``A`` is not stable or ``rho`` reaches its spectrum.
    """
    A = H.system.A
    n = H.n
    evA = np.linalg.eigvals(A)
    if np.max(evA.real) >= 0:
        raise ParameterError("A must have its spectrum in the open left half-plane")
    dmin = float(np.min(np.abs(evA)))
    rho = 0.5 * dmin if rho is None else float(rho)
    if not 0 < rho < dmin:
        raise ParameterError(f"rho must lie in (0, {dmin:.6g})")
    I = np.eye(n)
    schur = policy.resolvent == "schur"
    w0 = ShiftedInverse(H.S0, schur)
    w1 = ShiftedInverse(A, schur)
    w2 = ShiftedInverse(-A.conj().T, schur)

    def axis_part(u):
        # t = rho / u maps |t| > rho onto (0, 1]
        u = np.asarray(u, dtype=float)
        return (_symmetric_resolvent(w0, u, np.full(len(u), rho))
                * (rho / np.pi))

    def arc_plus(theta):
        z = rho * np.exp(1j * np.asarray(theta, dtype=float))
        return w1(1.0, z) * (z / np.pi)[:, None, None]

    def arc_minus(theta):
        z = rho * np.exp(-1j * np.asarray(theta, dtype=float))
        return -w2(1.0, z) * (z / np.pi)[:, None, None]

    q0 = integrate(axis_part, 0.0, 1.0, abs_tol / 3, rule=rule,
                   max_nodes=policy.max_nodes)
    q1 = integrate(arc_plus, -np.pi / 2, np.pi / 2, abs_tol / 3, rule=rule,
                   max_nodes=policy.max_nodes)
    q2 = integrate(arc_minus, np.pi / 2, 3 * np.pi / 2, abs_tol / 3, rule=rule,
                   max_nodes=policy.max_nodes)
    K = sla.block_diag(w1.back(q1.value), w2.back(q2.value))
    pv_part = w0.back(q0.value)
    lhs = sla.block_diag(-I, I).astype(complex)
    diff = lhs - (pv_part + K)
    W = H.block_weight("V0")
    W_inv = H.block_weight(_negate(H.V0))
    return SQReport(
        lhs=lhs, pv_part=pv_part, K=K,
        defect=float(np.linalg.norm(diff, 2)),
        defect_V0=float(np.linalg.norm(W @ diff @ W_inv, 2)),
        error_estimate=q0.error + q1.error + q2.error, rho=rho)


# -- further diagnostics ------------------------------------------------------

def l_symmetry_defect(Lplus, Lminus, J):
    """``||J L+ + L-^H J||``: matrix form of ``<L+ v, w> = -<v, L- w>``."""
    return float(np.linalg.norm(J @ Lplus + Lminus.conj().T @ J, 2))


def range_angle(M1, M2, k):
    """Largest principal angle between the dominant ``k``-dim ranges."""
    if k == 0:
        return 0.0
    return float(np.max(sla.subspace_angles(range_basis(M1, k),
                                            range_basis(M2, k))))
