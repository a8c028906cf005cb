"""Numerical ranges, numerical radii and numerical indices of finite-dimensional normed spaces."""
from .claims import ClaimResult, RunConfig, emit_report, run_reproduce
from .constructions import build_space, direct_sum, polygon_polytope, random_symmetric_polygon
from .errors import InputError, NumlabError, ParseError, SemanticError, UnsupportedRepresentation
from .expr import parse_space_expr
from .numindex import (IndexEstimate, check_duality_equality_findim, check_sum_formula,
                       index_exact_polytope, index_oracle_2d, index_search_upper, known_index)
from .numrange import (AlphaSchedule, RadiusCertificate, check_radius_norm_equality,
                       numerical_radius, radius_exact_polytope, radius_hilbert,
                       radius_limit_formula, radius_lower_sampling)
from .operators import Operator, adjoint, op_norm, random_operator
from .polytope import ExactPolytope
from .spaces import DualPair, FieldTag, Space, dual_space, validate_space
from .verifiers import (KModel, MeasureModel, OpenSet, Sequence, Tail, almost_cl_test,
                        c_rich_criterion, c_rich_witness_search, extreme_pair_report,
                        lushness_test)

__version__ = "0.1.0"
