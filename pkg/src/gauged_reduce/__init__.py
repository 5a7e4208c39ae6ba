"""Numerical singular cotangent-bundle reduction for compact group actions.

Lie algebras and coadjoint data (:mod:`lie`), equivariant configuration
manifolds (:mod:`geometry`), the mechanical connection and its curvature
(:mod:`connection`), the reduced bracket on Weinstein coordinates
(:mod:`weinstein`), symplectic slices and leaves (:mod:`leaves`), and the
built-in scenarios (:mod:`scenarios`).
"""
from .connection import (AnnBundleChart, connection_dual, connection_matrix,
                         curvature, curvature_pairing_matrix, db_form, db_form_orbit,
                         horizontal_lift, reduced_curvature_pairing, section_gauge)
from .errors import (CanonicalizationFailure, ClosureViolation, Degenerate, EvalError,
                     InvarianceViolation, OffManifold, OffTangent, ParseError, ReductionError,
                     RepresentativeAmbiguity, ScenarioSelfCheckFailure, SectionDegenerate,
                     StepOutOfDomain)
from .expr import ObservableExpr, parse_observable
from .geometry import EquivariantManifold, LinearAction
from .leaves import (kks_form, leaf_dimension, leaf_form, leaf_report, magnetic_form,
                     orbit_invariants, symplectic_slice)
from .lie import MatrixLieAlgebra, Subspace
from .scenarios import Scenario, builtin_scenarios, get_scenario
from .weinstein import (ExprObservable, Observable, Trajectory, WeinsteinPoint, WeinsteinTangent,
                        free_hamiltonian, from_cotangent, hamiltonian_field, integrate_flow,
                        oracle_bracket, oracle_field, reduced_bracket, to_cotangent)

__version__ = "0.1.0"
