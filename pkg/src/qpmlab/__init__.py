"""Quasi-pseudometric spaces, the Hausdorff quasi-distance, and startpoint /
endpoint / fixed-point iterations with brute-force oracles."""

from .config import paper_example, parse_config
from .gauge import Affine, Constant, GaugePair, RatioForm, Table
from .hausdorff import (
    ClosedFormMap,
    TableMap,
    f_end,
    f_fixed,
    f_start,
    hausdorff_H,
    hausdorff_Hs,
    point_to_set,
    set_to_point,
)
from .oracle import (
    brute_force_points,
    exhaustive_hypothesis_check,
    random_setmap,
    random_space,
)
from .solver import VariantSpec, decay_diagnostics, feasible_successors, select_successor, solve
from .spaces import (
    IntervalSpace,
    MatrixSpace,
    classify_cauchy,
    classify_convergence,
    conjugate,
    distance,
    metric_closure,
    symmetrize,
    verify_axioms,
)

__version__ = "0.1.0"
