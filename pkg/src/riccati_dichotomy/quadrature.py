"""Adaptive quadrature for array-valued integrands on a finite interval.

Integrands are called with a 1-d array of nodes and must return an array
of shape ``(len(nodes), ...)``.  Panels are refined in batches so that one
call evaluates many nodes at once (each node is typically one linear
solve).  Accepted panels are summed in left-to-right order, which keeps the
result independent of the refinement order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error: float
    nodes: int
    panels: int


def frobenius(E):
    return float(np.sqrt(np.sum(np.abs(E) ** 2)))


def _simpson(fa, fm, fb, width):
    return (width / 6.0) * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a, b, tol, norm=frobenius, max_nodes=200_000,
                     min_panels=16):
    """Adaptive Simpson rule with Richardson-corrected panel sums.

    A panel ``[l, r]`` is accepted when ``|S_2 - S_1| / 15 <= tol * (r-l)/(b-a)``
    where ``S_1`` is the one-panel and ``S_2`` the two-panel Simpson value.

    Raises
    ------
    AccuracyError
        If the node budget is exhausted before every panel is accepted.
    """
    edges = np.linspace(a, b, min_panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    fe = f(edges)
    fm = f(mids)
    nodes = len(edges) + len(mids)
    # (left, right, f_left, f_mid, f_right)
    active = [(edges[k], edges[k + 1], fe[k], fm[k], fe[k + 1])
              for k in range(min_panels)]
    accepted = []
    total_err = 0.0
    length = b - a
    while active:
        if nodes + 2 * len(active) > max_nodes:
            raise AccuracyError(
                f"adaptive Simpson exceeded {max_nodes} nodes",
                achieved=total_err)
        q = np.empty(2 * len(active))
        for k, (l, r, *_) in enumerate(active):
            q[2 * k] = 0.75 * l + 0.25 * r
            q[2 * k + 1] = 0.25 * l + 0.75 * r
        fq = f(q)
        nodes += len(q)
        refined = []
        for k, (l, r, fl, fmid, fr) in enumerate(active):
            w = r - l
            s1 = _simpson(fl, fmid, fr, w)
            s2 = (_simpson(fl, fq[2 * k], fmid, 0.5 * w)
                  + _simpson(fmid, fq[2 * k + 1], fr, 0.5 * w))
            err = norm(s2 - s1) / 15.0
            if err <= tol * w / length or w < 1e-12 * length:
                accepted.append((l, s2 + (s2 - s1) / 15.0))
                total_err += err
            else:
                m = 0.5 * (l + r)
                refined.append((l, m, fl, fq[2 * k], fmid))
                refined.append((m, r, fmid, fq[2 * k + 1], fr))
        active = refined
    accepted.sort(key=lambda p: p[0])
    value = sum(v for _, v in accepted)
    return QuadResult(value, total_err, nodes, len(accepted))


def gauss_legendre_panels(f, a, b, tol, norm=frobenius, order=10,
                          max_nodes=200_000, min_panels=8):
    """Adaptive composite Gauss-Legendre rule.

    Each panel is compared with the sum over its two halves; a panel is
    accepted when the difference is below its share of ``tol``.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    length = b - a

    def rule(panels):
        l = np.array([p[0] for p in panels])
        r = np.array([p[1] for p in panels])
        half = 0.5 * (r - l)
        pts = (0.5 * (l + r))[:, None] + half[:, None] * x[None, :]
        vals = f(pts.ravel())
        vals = vals.reshape((len(panels), order) + vals.shape[1:])
        wts = (half[:, None] * w[None, :])
        return np.einsum("pk,pk...->p...", wts, vals)

    edges = np.linspace(a, b, min_panels + 1)
    active = [(edges[k], edges[k + 1]) for k in range(min_panels)]
    coarse = list(rule(active))
    nodes = order * len(active)
    accepted = []
    total_err = 0.0
    while active:
        if nodes + 2 * order * len(active) > max_nodes:
            raise AccuracyError(
                f"Gauss-Legendre panels exceeded {max_nodes} nodes",
                achieved=total_err)
        halves = []
        for l, r in active:
            m = 0.5 * (l + r)
            halves += [(l, m), (m, r)]
        fine = rule(halves)
        nodes += order * len(halves)
        next_active, next_coarse = [], []
        for k, (l, r) in enumerate(active):
            s2 = fine[2 * k] + fine[2 * k + 1]
            err = norm(s2 - coarse[k])
            if err <= tol * (r - l) / length or (r - l) < 1e-12 * length:
                accepted.append((l, s2))
                total_err += err
            else:
                next_active += [halves[2 * k], halves[2 * k + 1]]
                next_coarse += [fine[2 * k], fine[2 * k + 1]]
        active, coarse = next_active, next_coarse
    accepted.sort(key=lambda p: p[0])
    value = sum(v for _, v in accepted)
    return QuadResult(value, total_err, nodes, len(accepted))


# Gauss-Kronrod (7, 15) nodes and weights on [-1, 1]
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
GK_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
GK_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss weights sit on the odd-indexed Kronrod nodes (1, 3, ..., 13)
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


def gauss_kronrod(f, a, b, tol, norm=frobenius, max_nodes=200_000,
                  min_panels=8):
    """Globally adaptive Gauss-Kronrod (7, 15) quadrature.

    The error estimate of a panel is ``norm(K15 - G7)``.  While the summed
    estimate exceeds ``tol``, the panels carrying the largest errors (at
    least half of the total) are bisected; all new panels of one sweep are
    evaluated in a single call of ``f``.
    """

    def rule(panels):
        l = np.array([p[0] for p in panels])
        r = np.array([p[1] for p in panels])
        half = 0.5 * (r - l)
        pts = (0.5 * (l + r))[:, None] + half[:, None] * GK_NODES[None, :]
        vals = f(pts.ravel())
        vals = vals.reshape((len(panels), 15) + vals.shape[1:])
        kron = np.einsum("pk,pk...->p...", half[:, None] * GK_WEIGHTS, vals)
        gauss = np.einsum("pk,pk...->p...", half[:, None] * GAUSS_WEIGHTS, vals)
        return [(pl, pr, kron[k], norm(kron[k] - gauss[k]))
                for k, (pl, pr) in enumerate(panels)]

    edges = np.linspace(a, b, min_panels + 1)
    panels = rule([(edges[k], edges[k + 1]) for k in range(min_panels)])
    nodes = 15 * min_panels
    while True:
        total = sum(p[3] for p in panels)
        if total <= tol:
            break
        panels.sort(key=lambda p: -p[3])
        split, acc = 0, 0.0
        while split < len(panels) and (acc < 0.5 * total or
                                       panels[split][3] > tol / len(panels)):
            acc += panels[split][3]
            split += 1
        narrow = 1e-13 * (b - a)
        todo = [p for p in panels[:split] if p[1] - p[0] > narrow]
        keep = panels[split:] + [p for p in panels[:split]
                                 if p[1] - p[0] <= narrow]
        if not todo:
            break
        if nodes + 30 * len(todo) > max_nodes:
            raise AccuracyError(
                f"Gauss-Kronrod exceeded {max_nodes} nodes", achieved=total)
        halves = []
        for l, r, *_ in todo:
            m = 0.5 * (l + r)
            halves += [(l, m), (m, r)]
        panels = keep + rule(halves)
        nodes += 15 * len(halves)
    panels.sort(key=lambda p: p[0])
    value = sum(p[2] for p in panels)
    return QuadResult(value, float(sum(p[3] for p in panels)), nodes,
                      len(panels))


RULES = {
    "gauss_kronrod": gauss_kronrod,
    "adaptive_simpson": adaptive_simpson,
    "gauss_legendre_panels": gauss_legendre_panels,
}


def integrate(f, a, b, tol, rule="gauss_kronrod", **kwargs):
    try:
        method = RULES[rule]
    except KeyError:
        raise ValueError(f"unknown quadrature rule {rule!r}") from None
    return method(f, a, b, tol, **kwargs)
