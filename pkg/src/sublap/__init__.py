"""Weighted extension problems with two-phase sublinear boundary flux.

Finite-difference solver for div(y^a grad u) = 0 on a half-plane strip
with a nonlinear conormal condition on y = 0, plus the analysis toolkit
around it: radial monitor functionals, angular eigenvalue profiles,
exact homogeneous reference solutions, and nodal-set classification of
boundary traces.
"""
from __future__ import annotations

from .angular import (AngularError, AngularProfile, OutOfRegimeError,
                      build_antisymmetric, build_symmetric, eigen_dirichlet,
                      eigen_mixed, eigencurve, find_Tstar, glue_jumps)
from .config import ConfigError, RunConfig, config_hash, load_config, parse_config
from .extension import (Field, Mesh, SolveReport, SolverError, assemble,
                        build_mesh, residual, solve_linear, solve_nonlinear,
                        two_phase, weighted_l2_error)
from .functionals import (DegenerateMassError, FunctionalCurve,
                          almgren_perturbed_constants, boundary_mass,
                          bulk_energy, check_monotonicity, curve, energy,
                          frequency, h1a_norm_sq, monneau, trace_potential,
                          weiss, weiss_column)
from .homogeneous import HomogeneousField, SymmetricPoly, extend, la_residual, sB_basis
from .io import load_field, save_curve_csv, save_field, save_json, save_trace_csv
from .nodal import (BlowupDiagnostics, NodalPoint, blowup_sequence, classify,
                    default_window, loglog_slope, tangent_map,
                    trace_nodal_points, vanishing_order)
from .params import (DerivedExponents, Parameters, critical_constant,
                     derive_exponents)
from .verify import CHECK_NAMES, CheckResult, run_check, run_checks

__version__ = "0.1.0"

__all__ = [
    "AngularError", "AngularProfile", "BlowupDiagnostics", "CHECK_NAMES",
    "CheckResult", "ConfigError", "DegenerateMassError", "DerivedExponents",
    "Field", "FunctionalCurve", "HomogeneousField", "Mesh", "NodalPoint",
    "OutOfRegimeError", "Parameters", "RunConfig", "SolveReport",
    "SolverError", "SymmetricPoly", "almgren_perturbed_constants", "assemble",
    "blowup_sequence", "boundary_mass", "build_antisymmetric", "build_mesh",
    "build_symmetric", "bulk_energy", "check_monotonicity", "classify",
    "config_hash", "critical_constant", "curve", "default_window",
    "derive_exponents", "eigen_dirichlet", "eigen_mixed", "eigencurve",
    "energy", "extend", "find_Tstar", "frequency", "glue_jumps",
    "h1a_norm_sq", "la_residual", "load_config", "load_field",
    "loglog_slope", "monneau", "parse_config", "residual", "run_check",
    "run_checks", "sB_basis", "save_curve_csv", "save_field", "save_json",
    "save_trace_csv", "solve_linear", "solve_nonlinear", "tangent_map",
    "trace_nodal_points", "trace_potential", "two_phase", "vanishing_order",
    "weighted_l2_error", "weiss", "weiss_column",
]
