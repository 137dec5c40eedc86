"""stirling-sums: rapidly convergent Stirling-series evaluation of finite sums
sum_{k <= floor(x)} f(k) at real arguments, on exact-rational combinatorial
kernels and an adaptive factorial-series engine."""

__version__ = "0.1.0"

from .catalog import (  # noqa: F401
    EvalRequest,
    FormulaId,
    evaluate,
    faulhaber_inner_sum,
    list_formulas,
    log_family_inner_sum,
    numerator_polynomial,
)
from .combinatorics import (  # noqa: F401
    RationalPolynomial,
    StirlingTable,
    bernoulli_number,
    bernoulli_polynomial,
    double_factorial_odd,
    euler_number,
    euler_polynomial,
    generalized_binomial,
    pochhammer,
    stirling_first,
)
from .constants import ConstantRequest, get_constant, zeta_em  # noqa: F401
from .engine import (  # noqa: F401
    CoefficientSeries,
    FormulaResult,
    TruncationPolicy,
    adaptive_truncate,
    boole_finite,
    euler_maclaurin_finite,
    weniger_transform,
)
from .oracle import ConvergenceReport, brute_force, convergence_study  # noqa: F401
from .special import SlowSeriesRequest, cos_integral, evaluate_slow, fresnel_s  # noqa: F401
