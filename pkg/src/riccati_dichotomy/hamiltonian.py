"""Hamiltonian block matrix, its split into diagonal part plus coupling, and
numerical checks of its spectral properties.

For a system ``(A, B, C)`` with unboundedness exponents ``(r, s)``

    T0 = [[A, -B B^H], [-C^H C, -A^H]] = S0 + R,   S0 = diag(A, -A^H).

The matrix is the same whether it is read as ``T0`` on
``V0 = H_-r x H_-s^(*)`` or as its part ``T`` on ``V = H x H``; only the
measuring norm differs, so norm-dependent operations take a selector.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
import scipy.linalg as sla

from .errors import DimensionError, NotQuasiSectorialError, ParameterError
from .hilbert_scale import (SpaceTag, build_scale, check_resolvent_point,
                            operator_scale_norm)


@dataclass(frozen=True, eq=False)
class SystemData:
    """The triple ``(A, B, C)`` with exponents ``r``, ``s`` (``r + s < 1``)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    r: float = 0.0
    s: float = 0.0
    label: str = ""

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        B = np.asarray(self.B, dtype=complex)
        C = np.asarray(self.C, dtype=complex)
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.ndim == 1:
            B = B.reshape(n, -1)
        if C.ndim == 1:
            C = C.reshape(-1, n)
        if B.shape[0] != n:
            raise DimensionError(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise DimensionError(f"C has {C.shape[1]} columns, expected {n}")
        if self.r < 0 or self.s < 0:
            raise ParameterError("exponents r, s must be nonnegative")
        if self.r + self.s >= 1:
            raise ParameterError(f"need r + s < 1, got r={self.r}, s={self.s}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class BlockWeights:
    """Exponents of the two factors of a product space ``H x H``."""

    first: SpaceTag
    second: SpaceTag


@dataclass(frozen=True, eq=False)
class HamiltonianMatrices:
    T0: np.ndarray
    S0: np.ndarray
    R: np.ndarray
    V0: BlockWeights
    V1: BlockWeights
    V: BlockWeights
    scale: object
    system: SystemData

    @property
    def n(self):
        return self.system.n

    def block_weight(self, space):
        """Block-diagonal matrix turning the ``space`` norm into Euclidean."""
        w = getattr(self, space) if isinstance(space, str) else space
        return sla.block_diag(self.scale.weight(w.first),
                              self.scale.weight(w.second))

    def norm(self, M, src="V0", dst="V0"):
        """Operator norm of a ``2n x 2n`` matrix between product spaces."""
        Wd = self.block_weight(dst)
        Ws_inv = self.block_weight(_negate(getattr(self, src) if isinstance(src, str) else src))
        return float(np.linalg.norm(Wd @ M @ Ws_inv, 2))


def _negate(w):
    return BlockWeights(SpaceTag(w.first.side, -w.first.exponent),
                        SpaceTag(w.second.side, -w.second.exponent))


@dataclass(frozen=True, eq=False)
class IndefiniteForm:
    J: np.ndarray
    Jtilde: np.ndarray


def indefinite_form(n):
    I = np.eye(n)
    Z = np.zeros((n, n))
    return IndefiniteForm(J=np.block([[Z, -1j * I], [1j * I, Z]]),
                          Jtilde=np.block([[Z, I], [I, Z]]).astype(complex))


def assemble(system):
    """Assemble ``T0``, ``S0``, ``R`` and the weight metadata of ``system``."""
    if system.r + system.s >= 1:
        raise ParameterError("need r + s < 1")
    A, B, C = system.A, system.B, system.C
    AH = A.conj().T
    Z = np.zeros_like(A)
    BB = B @ B.conj().T
    CC = C.conj().T @ C
    S0 = np.block([[A, Z], [Z, -AH]])
    R = np.block([[Z, -BB], [-CC, Z]])
    T0 = np.block([[A, -BB], [-CC, -AH]])
    r, s = system.r, system.s
    return HamiltonianMatrices(
        T0=T0, S0=S0, R=R,
        V0=BlockWeights(SpaceTag("plain", -r), SpaceTag("star", -s)),
        V1=BlockWeights(SpaceTag("star", s), SpaceTag("plain", r)),
        V=BlockWeights(SpaceTag("plain", 0.0), SpaceTag("star", 0.0)),
        scale=build_scale(A),
        system=system,
    )


# -- controllability / observability ----------------------------------------

def _distinct_eigenvalues(A, rel=1e-8):
    ev = np.linalg.eigvals(A)
    scale = max(1.0, np.abs(ev).max(initial=0.0))
    reps = []
    for lam in ev:
        if all(abs(lam - mu) > rel * scale for mu in reps):
            reps.append(lam)
    return reps


@dataclass(frozen=True)
class PBHReport:
    holds: bool
    margins: dict  # eigenvalue -> smallest singular value
    threshold: float

    def __bool__(self):
        return bool(self.holds)


def pbh_controllability(system, tol=1e-10):
    """Hautus test: ``rank [A - lam I, B] = n`` at every eigenvalue of ``A``."""
    A, B = system.A, system.B
    n = system.n
    thr = tol * (np.linalg.norm(A, 2) + np.linalg.norm(B, 2))
    margins = {}
    for lam in _distinct_eigenvalues(A):
        M = np.hstack([A - lam * np.eye(n), B])
        margins[complex(lam)] = float(np.linalg.svd(M, compute_uv=False)[n - 1])
    holds = bool(margins) and all(v > thr for v in margins.values())
    return PBHReport(bool(holds and np.linalg.norm(B) > 0), margins, thr)


def pbh_observability(system, tol=1e-10):
    """Dual Hautus test with ``[A - lam I; C]`` stacked."""
    A, C = system.A, system.C
    n = system.n
    thr = tol * (np.linalg.norm(A, 2) + np.linalg.norm(C, 2))
    margins = {}
    for lam in _distinct_eigenvalues(A):
        M = np.vstack([A - lam * np.eye(n), C])
        margins[complex(lam)] = float(np.linalg.svd(M, compute_uv=False)[n - 1])
    holds = bool(margins) and all(v > thr for v in margins.values())
    return PBHReport(bool(holds and np.linalg.norm(C) > 0), margins, thr)


# -- spectral checks ---------------------------------------------------------

def axis_eigenvalues(M, rel_tol=1e-9):
    """Eigenvalues of ``M`` with ``|Re| <= rel_tol * ||M||``."""
    ev = np.linalg.eigvals(M)
    thr = rel_tol * max(1.0, np.linalg.norm(M, 2))
    return [complex(z) for z in ev if abs(z.real) <= thr]


@dataclass(frozen=True)
class GapReport:
    condition_holds: bool
    axis_eigs_A: list
    obs_margins: dict
    ctrl_margins: dict
    axis_eigs_T0: list
    consistent: bool


def spectral_gap_check(system, rel_tol=1e-9, sv_tol=1e-10):
    """Check ``ker(A - it) & ker C = ker(A^H + it) & ker B^H = {0}`` at the
    imaginary eigenvalues of ``A`` and cross-check against ``sigma(T0)``."""
    A, B, C = system.A, system.B, system.C
    n = system.n
    AH = A.conj().T
    scale = max(1.0, np.linalg.norm(A, 2))
    obs, ctrl = {}, {}
    holds = True
    for lam in _distinct_eigenvalues(A):
        if abs(lam.real) > rel_tol * scale:
            continue
        it = 1j * lam.imag
        so = np.linalg.svd(np.vstack([A - it * np.eye(n), C]),
                           compute_uv=False)[n - 1]
        sc = np.linalg.svd(np.vstack([AH + it * np.eye(n), B.conj().T]),
                           compute_uv=False)[n - 1]
        obs[complex(it)] = float(so)
        ctrl[complex(it)] = float(sc)
        thr = sv_tol * (scale + np.linalg.norm(B, 2) + np.linalg.norm(C, 2))
        holds = holds and so > thr and sc > thr
    T0 = assemble(system).T0
    t0_axis = axis_eigenvalues(T0, rel_tol)
    return GapReport(
        condition_holds=bool(holds),
        axis_eigs_A=list(obs),
        obs_margins=obs,
        ctrl_margins=ctrl,
        axis_eigs_T0=t0_axis,
        consistent=bool(holds) == (len(t0_axis) == 0),
    )


@dataclass(frozen=True)
class SymmetryReport:
    j_defect: float
    max_re_jtilde: float
    samples: int

    def ok(self, norm_T0, tol=1e-12):
        return (self.j_defect <= tol * norm_T0
                and self.max_re_jtilde <= tol * norm_T0)


def j_symmetry_check(H, form=None, samples=32, rng=None):
    """Defects of ``J T0 + T0^H J = 0`` and ``Re <Jtilde T0 v, v> <= 0``.

    The second quantity is the largest value of
    ``Re(v^H Jtilde T0 v) / ||v||^2`` over random samples; it should be
    nonpositive up to rounding.
    """
    T0 = H.T0
    form = form or indefinite_form(H.n)
    rng = np.random.default_rng(rng)
    j_defect = float(np.linalg.norm(form.J @ T0 + T0.conj().T @ form.J, 2))
    worst = -np.inf
    N = 2 * H.n
    for _ in range(samples):
        v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        q = np.vdot(v, form.Jtilde @ (T0 @ v)).real / np.vdot(v, v).real
        worst = max(worst, q)
    return SymmetryReport(j_defect, float(worst), samples)


@dataclass(frozen=True)
class MatchingReport:
    max_distance: float
    threshold: float
    eigenvalues: np.ndarray

    @property
    def ok(self):
        return self.max_distance <= self.threshold


def match_spectra(first, second):
    """Largest distance in the optimal one-to-one matching of two spectra.

    The matching minimises the summed distances (Hungarian algorithm);
    unequal lengths give ``inf``.
    """
    first = np.asarray(first, dtype=complex).ravel()
    second = np.asarray(second, dtype=complex).ravel()
    if len(first) != len(second):
        return np.inf
    if len(first) == 0:
        return 0.0
    D = np.abs(first[:, None] - second[None, :])
    rows, cols = linear_sum_assignment(D)
    return float(D[rows, cols].max())


def spectrum_symmetry_check(H, rel_tol=1e-8):
    """Match ``sigma(T0)`` with its reflection ``-conj(sigma(T0))``."""
    ev = np.linalg.eigvals(H.T0)
    dist = match_spectra(ev, -ev.conj())
    thr = rel_tol * max(1.0, np.linalg.norm(H.T0, 2))
    return MatchingReport(dist, thr, ev)


def approximate_gap_inclusion(H, rel_tol=1e-9, match_tol=1e-8):
    """Every imaginary eigenvalue of ``T0`` is an eigenvalue of ``A``."""
    eA = np.linalg.eigvals(H.system.A)
    scale = max(1.0, np.linalg.norm(H.T0, 2))
    for z in axis_eigenvalues(H.T0, rel_tol):
        if np.min(np.abs(eA - z), initial=np.inf) > match_tol * scale:
            return False
    return True


# -- resolvent estimates -----------------------------------------------------

@dataclass(frozen=True)
class SectorEstimate:
    """Sample-based certificate for ``||(A - mu - lam)^-1|| <= M / |lam|``.

    The bound is established on ``certified_grid`` only; it is a
    measurement, not a proof.
    """

    theta: float
    M: float
    rho: float
    mu: float
    certified_grid: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)


def sector_grid(theta, rho, radius, density=32):
    """Points of ``Sigma_{pi/2+theta}`` with ``rho <= |lam| <= radius``:
    both boundary rays, interior rays, and the arc at radius ``rho``."""
    phi = np.pi / 2 + theta
    radii = np.geomspace(rho, max(radius, 2 * rho), density)
    angles = np.linspace(-phi, phi, 2 * (density // 4) + 1)
    pts = [r * np.exp(1j * a) for a in angles for r in radii]
    return np.array(pts)


def certify_quasi_sectorial(A, theta=np.pi / 4, mu=0.0, rho=None,
                            grid_density=32, tol=1e-9):
    """Measure the smallest ``M`` with ``||(A - mu - lam)^-1|| <= M/|lam|`` on
    a sampled sector.

    Raises
    ------
    NotQuasiSectorialError
        If eigenvalues of ``A - mu`` lie in the sampled sector.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    S = A - mu * np.eye(n)
    normS = max(1.0, np.linalg.norm(S, 2))
    if rho is None:
        rho = 1e-2 * normS
    radius = 10.0 * normS
    phi = np.pi / 2 + theta
    ev = np.linalg.eigvals(S)
    bad = [complex(z) for z in ev
           if abs(z) >= rho * (1 - tol) and abs(z) <= radius
           and abs(np.angle(z)) < phi + tol]
    if bad:
        raise NotQuasiSectorialError(
            f"{len(bad)} eigenvalue(s) of A - mu inside the sector", bad)
    grid = sector_grid(theta, rho, radius, grid_density)
    norms = np.empty(len(grid))
    for k, lam in enumerate(grid):
        check_resolvent_point(S, lam, tol)
        norms[k] = np.linalg.norm(np.linalg.inv(S - lam * np.eye(n)), 2)
    M = float(np.max(np.abs(grid) * norms))
    return SectorEstimate(theta, M, float(rho), float(mu), grid, norms)


_SCAN_SPACES = {
    "V0norm": ("V0", "V0"),
    "Vnorm": ("V", "V"),
    "V0_to_V1": ("V0", "V1"),
    "V0_to_V": ("V0", "V"),
}


def axis_resolvent_scan(H, which, t_values, difference=False, matrix=None):
    """Weighted norms of ``(T0 - it)^-1`` along the imaginary axis.

    Parameters
    ----------
    which
        One of ``"V0norm"``, ``"Vnorm"``, ``"V0_to_V1"``, ``"V0_to_V"``.
    difference
        Scan ``(T0 - it)^-1 - (S0 - it)^-1`` instead.
    matrix
        Replace ``T0`` (e.g. by ``S0``); the weights stay those of ``H``.

    Returns
    -------
    list of (t, norm) in grid order.
    """
    try:
        src, dst = _SCAN_SPACES[which]
    except KeyError:
        raise ParameterError(f"unknown scan space {which!r}") from None
    T = H.T0 if matrix is None else matrix
    N = T.shape[0]
    I = np.eye(N)
    Wd = H.block_weight(dst)
    Ws_inv = H.block_weight(_negate(getattr(H, src)))
    out = []
    for t in t_values:
        lam = 1j * float(t)
        check_resolvent_point(T, lam)
        Rz = np.linalg.solve(T - lam * I, I)
        if difference:
            Rz = Rz - np.linalg.solve(H.S0 - lam * I, I)
        out.append((float(t), float(np.linalg.norm(Wd @ Rz @ Ws_inv, 2))))
    return out


def perturbation_radius(H, t_values, bound=0.5):
    """Smallest grid value ``t`` beyond which
    ``||R (S0 - it)^-1||_{V0} <= bound`` at every sampled point.

    This is the radius from which the Neumann series for ``T0 = S0 + R``
    converges along the axis.  Returns ``inf`` if the bound fails at the
    last grid point.
    """
    t_values = np.sort(np.asarray(t_values, dtype=float))
    N = 2 * H.n
    I = np.eye(N)
    W = H.block_weight("V0")
    W_inv = H.block_weight(_negate(H.V0))
    ok = np.empty(len(t_values), dtype=bool)
    for k, t in enumerate(t_values):
        K = H.R @ np.linalg.solve(H.S0 - 1j * t * I, I)
        ok[k] = np.linalg.norm(W @ K @ W_inv, 2) <= bound
    if not ok[-1]:
        return np.inf
    bad = np.nonzero(~ok)[0]
    return float(t_values[0] if len(bad) == 0 else t_values[bad[-1] + 1])
