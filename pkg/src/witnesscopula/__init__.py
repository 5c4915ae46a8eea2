"""Geometric witness copulas for signed multivariate tail dependence.

Target signed tail coefficients are linear in a vector of witness weights,
one per signed active set.  This package builds that linear map, inverts it
on complete families, solves the feasibility / minimum-mass / l1-repair
linear programs for partial or inconsistent ones, turns weights into
ternary cell masses at a threshold ``p0`` and samples the resulting copula
exactly.
"""
from .exceptions import (IncompleteFamilyError, InadmissibleError, SolverError, SpecError,
                         WitnessError)
from .families import TailFamily, WeightSystem, complete_template, family_from_pairs
from .inversion import (RecoveryReport, complete_recovery_report, invert_complete,
                        invert_unsigned_upper, mobius_transform, p_max_for_mass,
                        tail_values_from_weights)
from .keys import (SIGNED, UPPER, IncidenceMatrix, TailKey, build_incidence_matrix,
                   enumerate_keys, extends, hasse_dot, make_key, mobius_matrix, mobius_value,
                   parse_key)
from .lp import LPModel, LPSolution, TargetSpec, build_model, feasibility_decision, solve, solve_spec
from .realization import (TernaryMassTable, admissible_p_max, cell_geometry_table, check_margins,
                          is_admissible, marginalize, q_from_weights, tail_total,
                          theoretical_lambda_at, vanishing_threshold_check, weights_from_q)
from .simplex import Status, solve_standard_form
from .simulation import (BenchmarkReport, DiagnosticsReport, SampleMatrix, benchmark_5d_family,
                         benchmark_expected_weights, empirical_lambda, make_rng,
                         run_benchmark_report, run_variable_p_diagnostics, sample_canonical,
                         sample_grid_states, signed_all_pairs_family, upper_all_pairs_family)
from .estimator import EmpiricalTailCoefficients, WitnessCopula

__version__ = "0.1.0"
