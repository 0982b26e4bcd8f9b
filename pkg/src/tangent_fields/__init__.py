"""Gradient blowup of acoustic fields between two nearly touching balls.

Image-charge sequences, closed-form singular functions, a Nyström
boundary-element cross-check and the asymptotic estimates built on them.
"""

from .errors import (AccuracyError, ConfigError, ConvergenceError, DomainError,
                     NearSingularWarning, QuasiStaticWarning, SingularityError, SolverError,
                     TangentFieldsError, UndefinedCoefficientError)
from .geometry import EvalRegion, InclusionPair, check_quasi_static, make_pair, reflect
from .image_charges import (ChargeSequence, Regime, ScalingParams, build_sequence,
                            capacity_Q, closed_form_pn, moment_M, scaling_params,
                            supercritical_Q_band)
from .incident import (IncidentField, axial, combine, constant, linear_x1, plane_wave,
                       point_source, polynomial)
from .quadrature import SphereGrid, make_grid
from .singular_fields import (BoundaryConstants, FieldSample, boundary_constants, eval_g_omega,
                              eval_h0, eval_h_omega, flux_integral, sup_gradient_on_gap)
from .layer_potentials import (CapacitorSolution, DensityPair, OperatorSet,
                               TransmissionSolution, assemble_operators, make_grids,
                               series_term_K, series_term_S, single_layer_apply,
                               solve_capacitor, solve_transmission)
from .asymptotics import (BlowupRegime, BlowupReport, FitModel, LambdaDecomposition, RateFit,
                          classify_blowup, coefficient_A, fit_power_law, frequency_thresholds,
                          lambda_difference, static_part, theorem_estimate)

__version__ = "0.1.0"
