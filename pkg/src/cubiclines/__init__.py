"""Exact counts, exponential sums, local and real densities, and arc tools for
rational lines on diagonal cubic hypersurfaces."""

from ._limits import BudgetExceeded, Limits, MemoryLimitExceeded, WorkLimitExceeded
from .arcs import (
    ArcClassification,
    PruningShell,
    RationalApprox,
    classify_M,
    classify_N,
    dirichlet_approx,
    in_shell,
    kernel_K,
    kernel_T,
    measure_M,
)
from .counting import (
    CountRecord,
    HashJoinPlan,
    count_hua_single,
    count_lines_bruteforce,
    count_lines_mitm,
    count_local,
    count_pv,
    fit_exponent,
)
from .expsums import (
    CompleteSumTable,
    complete_sum,
    complete_sum_table,
    local_average,
    local_identity_check,
    singular_series,
    weyl_sum_F,
)
from .forms import CoefficientVector, FormValues, RangeOverflow, SolutionPair, sigma, system_values, veronese
from .integral import DensityEstimate, singular_integral_mc, singular_integral_quad, u_eval, v_eval

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
