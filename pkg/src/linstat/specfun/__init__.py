"""Special functions and numerical kernels."""

from .elliptic import complete_E, complete_K, jacobi_cn, jacobi_sn_cn_dn
from .extended import (ExtendedScalar, dd_add, dd_div, dd_dot, dd_mul, dd_mul_d, dd_sqrt,
                       dd_sub, dd_sum, quick_two_sum, two_prod, two_sum)
from .fourier import FourierSeries, fourier_analyze
from .quadrature import QuadratureRule, composite_gauss_legendre, gauss_legendre, merge_rules

__all__ = [
    "ExtendedScalar", "QuadratureRule", "FourierSeries",
    "complete_K", "complete_E", "jacobi_cn", "jacobi_sn_cn_dn",
    "gauss_legendre", "composite_gauss_legendre", "merge_rules", "fourier_analyze",
    "two_sum", "quick_two_sum", "two_prod", "dd_add", "dd_sub", "dd_mul", "dd_mul_d",
    "dd_div", "dd_sqrt", "dd_sum", "dd_dot",
]
