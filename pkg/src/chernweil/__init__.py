"""Desk-scale workbench for Chern-Weil theory of singular connections.

Verified numerics on 2D/3D grid manifolds: characteristic forms and
their integrals, divisors of sections with declared singularities,
spherical potentials and power transgressions, smoothed fiber-supported
families on rank-2 plane bundles, and a rank-2 index-style identity via
spinor-half line bundles.  The `chernweil` CLI runs named scenarios to
CSV/JSON reports with matplotlib figures.
"""

from .bundles import (MODES, ApproximationMode, Bundle, BundleMap,
                      DeclaredSingularity, curvature, flat_bundle,
                      fubini_study_bundle, gauge_transform, get_mode,
                      oriented_round_sphere_bundle, pushforward_connection,
                      section_map, smoothed_beta)
from .currents import (characteristic_current_limit, current_boundary,
                       divisor_from_section, l1loc_current, pair_current,
                       section_sigma, smooth_form_current,
                       spherical_potential, transgression_family)
from .errors import (ChernWeilError, ConfigError, SpinStructureError,
                     UsageError)
from .fields import FieldForm, MatrixFieldForm, constant_field, scalar_field
from .invariants import (GradedForm, eval_ahat_inverse, eval_chern,
                         eval_chern_character, eval_pfaffian, eval_todd,
                         instanton_form, pfaffian_scalar,
                         residue_quotient_forms, thom_porteous)
from .meshes import Chart, Manifold, QuadratureRule, build_standard_manifold
from .scenarios import SCENARIOS, describe_scenarios
from .series import (GradedSeries, chern_variables, graded_constant,
                     graded_variable, parse_polynomial,
                     residue_quotient_series, todd_series)
from .spinor import (SpinorPair, build_spinor_pair, constant_vector_field,
                     grr_check, polar_vector_field)
from .thom import (build_total_space, fiber_mass_radial, tail_estimate,
                   thom_form_explicit, thom_form_from_mode, thom_limits,
                   zero_section_restriction)

__version__ = "0.1.0"

__all__ = [
    "MODES", "ApproximationMode", "Bundle", "BundleMap",
    "DeclaredSingularity", "curvature", "flat_bundle",
    "fubini_study_bundle", "gauge_transform", "get_mode",
    "oriented_round_sphere_bundle", "pushforward_connection", "section_map",
    "smoothed_beta",
    "characteristic_current_limit", "current_boundary",
    "divisor_from_section", "l1loc_current", "pair_current", "section_sigma",
    "smooth_form_current", "spherical_potential", "transgression_family",
    "ChernWeilError", "ConfigError", "SpinStructureError", "UsageError",
    "FieldForm", "MatrixFieldForm", "constant_field", "scalar_field",
    "GradedForm", "eval_ahat_inverse", "eval_chern", "eval_chern_character",
    "eval_pfaffian", "eval_todd", "instanton_form", "pfaffian_scalar",
    "residue_quotient_forms", "thom_porteous",
    "Chart", "Manifold", "QuadratureRule", "build_standard_manifold",
    "SCENARIOS", "describe_scenarios",
    "GradedSeries", "chern_variables", "graded_constant", "graded_variable",
    "parse_polynomial", "residue_quotient_series", "todd_series",
    "SpinorPair", "build_spinor_pair", "constant_vector_field", "grr_check",
    "polar_vector_field",
    "build_total_space", "fiber_mass_radial", "tail_estimate",
    "thom_form_explicit", "thom_form_from_mode", "thom_limits",
    "zero_section_restriction",
    "__version__",
]
