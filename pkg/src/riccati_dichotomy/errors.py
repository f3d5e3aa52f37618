"""Exception hierarchy shared by all modules."""


class RiccatiDichotomyError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(RiccatiDichotomyError, ValueError):
    """Operand shapes do not fit together."""


class ParameterError(RiccatiDichotomyError, ValueError):
    """A scalar parameter is outside its admissible range."""


class SingularityError(RiccatiDichotomyError):
    """A resolvent was requested at a point of the spectrum."""

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)


class NotDichotomousError(RiccatiDichotomyError):
    """The Hamiltonian has eigenvalues on (or numerically at) the imaginary axis."""

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = list(eigenvalues)


class NotQuasiSectorialError(RiccatiDichotomyError):
    """Eigenvalues were found inside the sector that should be resolvent set."""

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = list(eigenvalues)


class AccuracyError(RiccatiDichotomyError):
    """A quadrature or consistency check missed its tolerance."""

    def __init__(self, message, achieved=float("nan")):
        super().__init__(message)
        self.achieved = achieved


class NotAGraphError(RiccatiDichotomyError):
    """An invariant subspace is not the graph of an operator."""


class GenerationError(RiccatiDichotomyError):
    """A random problem could not be generated within the retry budget."""


class SimilarityError(RiccatiDichotomyError):
    """Closed-loop spectrum does not match the stable Hamiltonian spectrum."""
