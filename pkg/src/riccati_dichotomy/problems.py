"""Test systems: closed-form scalars, random stable and partly unstable
systems, a discretised 1-d heat equation with weighted point control and
observation, and a fixture with an imaginary eigenvalue of ``A``."""

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError, NotQuasiSectorialError, ParameterError
from .hamiltonian import (SystemData, certify_quasi_sectorial,
                          pbh_controllability, pbh_observability)
from .hilbert_scale import build_scale

KINDS = ("scalar", "random_stable", "random_shifted", "heat1d",
         "axis_eigen_detect")


@dataclass(frozen=True)
class ProblemSpec:
    """Recipe for one system; ``extras`` holds kind-specific parameters
    (``a, b, c`` for scalar; ``margin``; ``mu, k_unstable``;
    ``control_node, obs_node``; ``omega, observe``)."""

    kind: str
    n: int = 1
    m: int = 1
    p: int = 1
    r: float = 0.0
    s: float = 0.0
    seed: int = 0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown problem kind {self.kind!r}")
        if min(self.n, self.m, self.p) < 1:
            raise ParameterError("dimensions must be at least 1")
        if self.r < 0 or self.s < 0 or self.r + self.s >= 1:
            raise ParameterError("need r, s >= 0 and r + s < 1")


def generate(spec):
    """Build the :class:`SystemData` described by ``spec``."""
    x = dict(spec.extras)
    if spec.kind == "scalar":
        return gen_scalar(x.get("a", 1.0), x.get("b", 1.0), x.get("c", 1.0),
                          r=spec.r, s=spec.s)
    if spec.kind == "random_stable":
        return gen_random_stable(spec.n, spec.m, spec.p, spec.seed,
                                 margin=x.get("margin", 0.5), r=spec.r, s=spec.s)
    if spec.kind == "random_shifted":
        return gen_random_shifted(spec.n, spec.m, spec.p, spec.seed,
                                  mu=x.get("mu", 1.0),
                                  k_unstable=int(x.get("k_unstable", 1)),
                                  r=spec.r, s=spec.s)
    if spec.kind == "heat1d":
        return gen_heat1d(spec.n, spec.r, spec.s,
                          control_node=x.get("control_node", 0.1),
                          obs_node=x.get("obs_node", 0.9))
    return gen_axis_eigen_detect(spec.n, spec.r, spec.s,
                                 omega=x.get("omega", 1.0),
                                 observe=bool(x.get("observe", True)))


def gen_scalar(a, b, c, r=0.0, s=0.0):
    """One-dimensional system ``A = -a``, ``B = b``, ``C = c``."""
    return SystemData(A=[[-a]], B=[[b]], C=[[c]], r=r, s=s,
                      label=f"scalar(a={a}, b={b}, c={c})")


def _random_unitary(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def _normalised_io(rng, A, m, p, r, s):
    """Random ``B``, ``C`` with ``||B||_{U -> H_-r} = ||C||_{H_s^(*) -> Y} = 1``."""
    n = A.shape[0]
    scale = build_scale(A)
    B = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    C = rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))
    B = B / np.linalg.norm(scale.power("plain", -r) @ B, 2)
    C = C / np.linalg.norm(C @ scale.power("star", -s), 2)
    return B, C


def _stable_spectrum(rng, k, margin):
    re = -np.exp(rng.uniform(np.log(margin), np.log(10 * margin), k))
    im = rng.uniform(-5.0, 5.0, k)
    return re + 1j * im


def gen_random_stable(n, m, p, seed, margin=0.5, r=0.2, s=0.2, max_tries=20):
    """Random system with ``max Re sigma(A) <= -margin`` passing both PBH tests.

    ``A = Q (D - margin I) Q^H`` with a random unitary ``Q``.

    Raises
    ------
    GenerationError
        If no controllable and observable draw is found in ``max_tries``.
    """
    if margin <= 0:
        raise ParameterError("margin must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        D = _stable_spectrum(rng, n, margin)
        Q = _random_unitary(rng, n)
        A = (Q * (D - margin)) @ Q.conj().T
        B, C = _normalised_io(rng, A, m, p, r, s)
        sys = SystemData(A, B, C, r, s,
                         label=f"random_stable(n={n}, seed={seed})")
        if pbh_controllability(sys) and pbh_observability(sys):
            return sys
    raise GenerationError(f"no controllable/observable draw in {max_tries} tries")


def gen_random_shifted(n, m, p, seed, mu=1.0, k_unstable=1, r=0.2, s=0.2,
                       max_tries=20, keep_out=1e-3):
    """Random system with ``k_unstable`` eigenvalues in ``0 < Re < mu``.

    No eigenvalue has ``|Re| < keep_out``; ``A - mu`` is certified
    quasi-sectorial (radius beyond the spectrum of ``A - mu``).
    """
    if not 0 < k_unstable < n:
        raise ParameterError("need 0 < k_unstable < n")
    if mu <= 0:
        raise ParameterError("mu must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        re_u = rng.uniform(max(keep_out, 0.05 * mu), 0.95 * mu, k_unstable)
        im_u = rng.uniform(-5.0, 5.0, k_unstable)
        D = np.concatenate([re_u + 1j * im_u,
                            _stable_spectrum(rng, n - k_unstable, 0.5) - 0.5])
        Q = _random_unitary(rng, n)
        A = (Q * D) @ Q.conj().T
        B, C = _normalised_io(rng, A, m, p, r, s)
        sys = SystemData(A, B, C, r, s,
                         label=f"random_shifted(n={n}, seed={seed}, mu={mu})")
        if not (pbh_controllability(sys) and pbh_observability(sys)):
            continue
        radius = np.max(np.abs(np.linalg.eigvals(A - mu * np.eye(n))))
        try:
            certify_quasi_sectorial(A, mu=mu, rho=1.1 * radius + 1e-12)
        except NotQuasiSectorialError:
            continue
        return sys
    raise GenerationError(f"no admissible draw in {max_tries} tries")


def laplacian_1d(n):
    """Dirichlet Laplacian on ``n`` interior nodes of the unit interval."""
    h2 = (n + 1) ** 2
    return h2 * (np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1)
                 + np.diag(np.ones(n - 1), -1))


def _node(fraction, n):
    return int(min(max(round(fraction * n), 1), n)) - 1


def gen_heat1d(n, r=0.0, s=0.0, control_node=0.1, obs_node=0.9):
    """Heat equation with a point actuator and a point sensor.

    ``B = Lambda^r e_k`` and ``C = (Lambda^s e_j)^H``, so that the scale
    norms ``||B||_{U -> H_-r}`` and ``||C||_{H_s -> Y}`` are one for every
    ``n`` while the plain norms grow with ``n``.  The bump model is
    illustrative; it is not calibrated to any particular boundary control
    system.
    """
    if n < 3:
        raise ParameterError("heat1d needs n >= 3")
    if r < 0 or s < 0 or r + s >= 1:
        raise ParameterError("need r, s >= 0 and r + s < 1")
    A = laplacian_1d(n)
    scale = build_scale(A)
    e_c = np.zeros(n)
    e_c[_node(control_node, n)] = 1.0
    e_o = np.zeros(n)
    e_o[_node(obs_node, n)] = 1.0
    B = (scale.power("plain", r) @ e_c).reshape(n, 1)
    C = (scale.power("star", s) @ e_o).conj().reshape(1, n)
    return SystemData(A, B, C, r, s, label=f"heat1d(n={n}, r={r}, s={s})")


def gen_axis_eigen_detect(base_n, r=0.0, s=0.0, omega=1.0, observe=True):
    """``A = diag(i omega, -1, ..., -1)`` with full-support ``B`` and ``C``.

    With ``observe=False`` the first component of ``C`` is zeroed, so the
    imaginary mode is unobservable and ``i omega`` becomes an eigenvalue
    of the Hamiltonian.
    """
    if base_n < 2:
        raise ParameterError("base_n must be at least 2")
    n = base_n
    A = np.diag(np.concatenate([[1j * omega], -np.ones(n - 1)]))
    B = np.ones((n, 1)) / np.sqrt(n)
    C = np.ones((1, n)) / np.sqrt(n)
    if not observe:
        C[0, 0] = 0.0
    return SystemData(A, B, C, r, s,
                      label=f"axis_eigen_detect(n={n}, omega={omega}, "
                            f"observe={observe})")
