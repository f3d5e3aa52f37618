"""Algebraic Riccati equations from dichotomy projections of the
Hamiltonian matrix, on Hilbert-scale weighted finite-dimensional models."""

__version__ = "0.1.0"

from .checks import Check
from .dichotomy import (ContourSpec, DichotomyResult, choose_strip,
                        compute_dichotomy, contour_L, oracle_projections,
                        principal_value_difference, projections,
                        sq_correction_check)
from .errors import (AccuracyError, DimensionError, GenerationError,
                     NotAGraphError, NotDichotomousError,
                     NotQuasiSectorialError, ParameterError,
                     RiccatiDichotomyError, SimilarityError, SingularityError)
from .hamiltonian import (HamiltonianMatrices, SystemData, assemble,
                          axis_resolvent_scan, certify_quasi_sectorial,
                          j_symmetry_check, pbh_controllability,
                          pbh_observability, spectral_gap_check,
                          spectrum_symmetry_check)
from .hilbert_scale import (HilbertScale, SpaceTag, build_scale, heinz_check,
                            operator_scale_norm, pairing, plain, scale_norm,
                            star)
from .policy import DEFAULT_POLICY, NumericPolicy
from .problems import (ProblemSpec, gen_axis_eigen_detect, gen_heat1d,
                       gen_random_shifted, gen_random_stable, gen_scalar,
                       generate)
from .riccati import (RiccatiSolution, angular_operator, closed_loop,
                      f1f2_diagnostics, graph_check, newton_kleinman,
                      riccati_residual, scalar_oracle, solve_riccati)

__all__ = [name for name in dir() if not name.startswith("_")]
