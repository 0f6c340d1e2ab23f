"""Loss-landscape analysis for one-hidden-layer ReLU networks on an interval.

Exact L2 risk, generalized gradients and Hessians against piecewise-
polynomial and benchmark targets; construction and certification of the
uncountable family of non-global local minima; finite enumeration of
width-1 critical realizations; reproducible gradient-descent and
gradient-flow experiments.
"""

from .errors import (AccuracyError, DegenerateEnumerationError, DomainError,
                     FinitenessError, IdenticallyZeroError, NonsmoothPointError,
                     NotCriticalError, WitnessError)
from .polyalg import PiecewisePolynomial, Polynomial, reparametrize, roots_in
from .target import (BenchmarkTarget, PolyTarget, Target, parse_target_json,
                     scale_target, target_eval, target_int, target_sq_int,
                     target_to_json, target_xint)
from .network import (Params, Realization, SmoothActivation, canonical,
                      l2_distance, params_from_json, params_to_json, realize,
                      realize_smooth, write_realization_csv)
from .landscape import (CritClass, GradientVector, HessianReport, classify,
                        closed_hessian_M, fd_gradient, grad, grad_smooth,
                        hessian_fd, risk, risk_smooth)
from .minima import (GapCertificate, MinimaSample, certify_gap, minima_risk,
                     sample_M, two_kink_witness, verify_zero_integrals)
from .enumeration import (CatalogEntry, CriticalCatalog, GridOracleReport,
                          KinkSolution, enum_affine, enum_constant,
                          enum_kink_decreasing, enum_kink_increasing,
                          enumerate_all, grid_oracle, oracle_check)
from .train import (Cluster, EnsembleReport, GFRun, TrainConfig, TrainRun,
                    ensemble, gd_run, gf_run, xavier_init)

__version__ = "0.1.0"
