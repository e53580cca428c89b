"""Supports of local cohomology of complete intersections over F_p[x1..xn]."""

__version__ = "0.1.0"

from .cech import (
    CechContext,
    TruncCechComplex,
    build_truncated_cech,
    edge_kernel_K0,
    lc_root,
    lc_truncated_cohomology,
    oracle_total_vs_row,
    supp_E0,
    supp_E1,
    supp_E2,
    transition,
)
from .chains import ChainConfig
from .errors import FSupportError
from .fmodule import (
    FRoot,
    SupportIdeal,
    stable_kernel,
    supp_koszul_h0,
    supp_koszul_h1_pair,
    supp_koszul_top,
    torsion_part_root,
    validate_root,
)
from .groebner import Submodule, Subquotient, ideal
from .ring import PolyMatrix, Polynomial, RingSpec, bracket_power, frobenius_power, parse_poly
from .support import (
    ProblemSpec,
    SupportResult,
    compute_supports,
    same_support,
    supp_lc_ci,
    support_of,
    union_supports,
)
