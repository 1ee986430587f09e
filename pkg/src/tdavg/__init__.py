"""Time averaging for oscillatory systems driven by a decaying perturbation parameter."""
from .averaging import (
    AveragedSystem,
    QuadratureConfig,
    TruncatedSystem,
    build_averaged,
    build_truncated,
    period_average,
)
from .analysis import (
    ComparisonRun,
    GronwallBound,
    ScalingReport,
    averaging_scaling_experiment,
    compare,
    compare_at_H,
    estimate_lipschitz,
    fit_scaling_exponent,
    gronwall_check,
    scaling_experiment,
)
from .core import OscillatoryModel, SystemState, Trajectory, eval_full_rhs, l1_norm, sample_at
from .integrate import IntegratorConfig, integrate, locate_H_crossing
from .models import bianchi3, get_model, van_der_pol

__version__ = "0.1.0"
