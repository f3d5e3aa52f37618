"""Finite-dimensional Hilbert scales built from a base matrix.

For a square matrix ``A`` the two scales are generated by

    Lambda   = (I + A A^H)^(1/2)     (plain side, spaces H_s)
    Lambda_* = (I + A^H A)^(1/2)     (star side, spaces H_s^(*))

with norms ``||x||_s = ||Lambda^s x||``.  All spaces share one coordinate
space; only the measuring norm changes with the exponent.
"""

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import DimensionError, ParameterError, SingularityError

Side = Literal["plain", "star"]


@dataclass(frozen=True)
class SpaceTag:
    """Identifies ``H_s`` (``side="plain"``) or ``H_s^(*)`` (``side="star"``)."""

    side: Side = "plain"
    exponent: float = 0.0

    def __post_init__(self):
        if self.side not in ("plain", "star"):
            raise ParameterError(f"unknown side {self.side!r}")
        if not -1.0 <= self.exponent <= 1.0:
            raise ParameterError(
                f"exponent {self.exponent} outside [-1, 1]")


def plain(s=0.0):
    return SpaceTag("plain", float(s))


def star(s=0.0):
    return SpaceTag("star", float(s))


class HermitianEig(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _gram_eig(G):
    d, U = np.linalg.eigh(G)
    if d.min() < 1.0 - 1e-12 * max(1.0, d.max()):
        # cannot happen for I + M M^H unless the input was not finite
        raise ParameterError("Gram matrix has an eigenvalue below one")
    return HermitianEig(np.maximum(d, 1.0), U)


@dataclass(frozen=True, eq=False)
class HilbertScale:
    """Cached eigendecompositions of ``I + A A^H`` and ``I + A^H A``."""

    base: np.ndarray
    eig_plus: HermitianEig
    eig_star: HermitianEig

    @property
    def n(self):
        return self.base.shape[0]

    def power(self, side, s):
        """``Lambda^s`` or ``Lambda_*^s`` for any real ``s`` (no range check)."""
        d, U = self.eig_plus if side == "plain" else self.eig_star
        return (U * d ** (0.5 * s)) @ U.conj().T

    def weight(self, tag):
        """The matrix turning the ``tag`` norm into the Euclidean norm."""
        if tag is None:
            return np.eye(self.n)
        return self.power(tag.side, tag.exponent)


def build_scale(A):
    """Build the pair of Hilbert scales generated by ``A``.

    Raises
    ------
    DimensionError
        If ``A`` is not a square 2-d array.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"base matrix must be square, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ParameterError("base matrix has non-finite entries")
    n = A.shape[0]
    I = np.eye(n)
    return HilbertScale(
        base=A,
        eig_plus=_gram_eig(I + A @ A.conj().T),
        eig_star=_gram_eig(I + A.conj().T @ A),
    )


def lambda_power(scale, tag):
    """Return ``Lambda^s`` (plain tag) or ``Lambda_*^s`` (star tag)."""
    return scale.power(tag.side, tag.exponent)


def _vector(x, n):
    x = np.asarray(x, dtype=complex)
    if x.shape != (n,):
        raise DimensionError(f"expected a vector of length {n}, got {x.shape}")
    return x


def scale_norm(scale, tag, x):
    """Norm of ``x`` in the space named by ``tag``."""
    x = _vector(x, scale.n)
    return float(np.linalg.norm(lambda_power(scale, tag) @ x))


def pairing(scale, tag, x, y):
    """Extended pivot pairing of ``x`` in ``H_s`` with ``y`` in ``H_-s``.

    In the finite model this is the ordinary inner product ``y^H x``; the
    weighted form ``<Lambda^s x, Lambda^-s y>`` is evaluated as well and the
    two are required to agree.
    """
    x = _vector(x, scale.n)
    y = _vector(y, scale.n)
    plain_value = np.vdot(y, x)
    weighted = np.vdot(scale.power(tag.side, -tag.exponent) @ y,
                       scale.power(tag.side, tag.exponent) @ x)
    slack = 1e-12 * max(1.0, scale_norm(scale, tag, x)
                        * np.linalg.norm(scale.power(tag.side, -tag.exponent) @ y))
    if abs(weighted - plain_value) > slack:
        raise AssertionError(
            f"pairing identity violated: {abs(weighted - plain_value):.3e}")
    return complex(plain_value)


def operator_scale_norm(scale, M, src, dst):
    """Operator norm of ``M`` viewed as a map ``src -> dst``.

    ``src``/``dst`` may be ``None`` for an unweighted Euclidean space (the
    input and output spaces ``U`` and ``Y``).  The value is the spectral
    norm of ``W_dst M W_src^-1``.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError("operator must be a matrix")
    if src is not None and M.shape[1] != scale.n:
        raise DimensionError(f"source dimension {M.shape[1]} != {scale.n}")
    if dst is not None and M.shape[0] != scale.n:
        raise DimensionError(f"target dimension {M.shape[0]} != {scale.n}")
    W = M
    if dst is not None:
        W = lambda_power(scale, dst) @ W
    if src is not None:
        W = W @ scale.power(src.side, -src.exponent)
    return float(np.linalg.norm(W, 2))


@dataclass(frozen=True)
class HeinzReport:
    lhs: float
    rhs: float
    holds: bool
    src: SpaceTag
    dst: SpaceTag


def heinz_check(scale, M, src1, dst1, src2, dst2, mix, slack=1e-10):
    """Check the interpolation (Heinz) inequality at an intermediate pair.

    With ``r = mix*r1 + (1-mix)*r2`` and ``s = mix*s1 + (1-mix)*s2`` this
    compares ``||M||_{r->s}`` with
    ``||M||_{r1->s1}^mix * ||M||_{r2->s2}^(1-mix)``.
    """
    if not 0.0 < mix < 1.0:
        raise ParameterError("mix must lie strictly between 0 and 1")
    if src1.side != src2.side or dst1.side != dst2.side:
        raise ParameterError("interpolated tags must be on the same side")
    if not (src1.exponent < src2.exponent and dst1.exponent < dst2.exponent):
        raise ParameterError("need src1 < src2 and dst1 < dst2")
    src = SpaceTag(src1.side, mix * src1.exponent + (1 - mix) * src2.exponent)
    dst = SpaceTag(dst1.side, mix * dst1.exponent + (1 - mix) * dst2.exponent)
    lhs = operator_scale_norm(scale, M, src, dst)
    rhs = (operator_scale_norm(scale, M, src1, dst1) ** mix
           * operator_scale_norm(scale, M, src2, dst2) ** (1 - mix))
    return HeinzReport(lhs, rhs, bool(lhs <= rhs + slack), src, dst)


def check_resolvent_point(M, lam, tol=1e-12):
    """Raise if ``M - lam`` is numerically singular."""
    n = M.shape[0]
    smin = np.linalg.svd(M - lam * np.eye(n), compute_uv=False)[-1]
    if smin <= tol * max(1.0, np.linalg.norm(M, 2)):
        raise SingularityError(
            f"lambda = {lam} lies in the spectrum (smallest singular value "
            f"{smin:.3e})", points=[lam])


def resolvent_scale_bound_scan(scale, src, dst, lambdas, A=None):
    """Scale norms of ``(A - lam)^-1`` as a map ``src -> dst``.

    ``A`` defaults to the base matrix of ``scale``.  Returns a list of
    ``(|lam|, norm)`` pairs in grid order.
    """
    A = scale.base if A is None else np.asarray(A, dtype=complex)
    n = A.shape[0]
    out = []
    for lam in lambdas:
        lam = complex(lam)
        check_resolvent_point(A, lam)
        R = np.linalg.solve(A - lam * np.eye(n), np.eye(n))
        out.append((abs(lam), operator_scale_norm(scale, R, src, dst)))
    return out
