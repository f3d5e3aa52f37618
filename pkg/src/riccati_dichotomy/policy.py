"""Numeric tolerances used across the package."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class NumericPolicy:
    """One record of tolerances, passed to every module that needs one.

    Attributes
    ----------
    rel_tol
        Default relative tolerance for algebraic identities.
    quad_tol
        Absolute tolerance for contour quadratures (measured on the
        projections, i.e. after multiplication by the Hamiltonian).
    eigen_tol
        Relative distance to the imaginary axis below which an eigenvalue
        is treated as lying on it.
    residual_tol
        Relative tolerance for Riccati residuals and solution properties.
    max_nodes
        Node budget per adaptive quadrature.
    resolvent
        ``"lu"`` inverts every shifted matrix directly; ``"schur"`` reduces
        once to triangular form (about 4x fewer flops, but the single
        reduction error is shared by all nodes, costing roughly two digits
        on stiff problems).
    """

    rel_tol: float = 1e-10
    quad_tol: float = 1e-10
    eigen_tol: float = 1e-9
    residual_tol: float = 1e-8
    max_nodes: int = 200_000
    resolvent: str = "lu"

    def __post_init__(self):
        for name in ("rel_tol", "quad_tol", "eigen_tol", "residual_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.resolvent not in ("lu", "schur"):
            raise ValueError("resolvent must be 'lu' or 'schur'")
        if self.max_nodes < 16:
            raise ValueError("max_nodes must be at least 16")

    def with_(self, **changes):
        return replace(self, **changes)


DEFAULT_POLICY = NumericPolicy()
