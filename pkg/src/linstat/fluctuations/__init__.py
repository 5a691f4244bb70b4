"""Finite-n and limiting fluctuation statistics of linear eigenvalue statistics."""

from .counting import (classify, counting_covariance, gram_trace_covariance, gram_trace_variance,
                       gue_counting_variance, interval_variance)
from .laplace import clt_defect, cumulant_derivatives, laplace_cumulant, laplace_exact, logdet_dd
from .limitlaw import LimitLawQ2, limit_law_q2, two_band_r2
from .local import b_identity_check_q1, fredholm_sine_det, intermediate_variance, sine_kernel_variance
from .report import FluctuationReport
from .testfunctions import (TestFunction, gaussian_bump, indicator, linear, polynomial, scaled,
                            from_spec)
from .variance import (covariance_exact, variance_bound, variance_exact, variance_limit_q1,
                       variance_limit_q2_sym)

__all__ = [
    "TestFunction", "FluctuationReport", "LimitLawQ2",
    "linear", "polynomial", "gaussian_bump", "indicator", "scaled", "from_spec",
    "variance_exact", "covariance_exact", "variance_bound", "variance_limit_q1", "variance_limit_q2_sym",
    "limit_law_q2", "two_band_r2", "laplace_exact", "laplace_cumulant", "logdet_dd", "clt_defect",
    "cumulant_derivatives", "gue_counting_variance", "counting_covariance", "interval_variance",
    "gram_trace_variance", "gram_trace_covariance", "classify",
    "sine_kernel_variance", "intermediate_variance", "fredholm_sine_det", "b_identity_check_q1",
]
