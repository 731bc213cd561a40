"""
Limit-law numerics: Tracy-Widom tables, finite-time kernels and their Airy limits
"""

from .airy import airy_ai, airy_ai_prime
from .quadrature import QuadratureRule, gauss_legendre, semi_infinite
from .fredholm import fredholm_det, nystrom_det
from .tracy_widom import DistributionTable, airy1_marginal, f_goe, f_gue, table_grid, tracy_widom_table
from .kernels import (
    KernelScaling,
    kernel_Q,
    kernel_S,
    kernel_Sbar,
    kernel_Sbar_epi,
    scaled_Q,
    scaled_S,
    scaled_Sbar,
    scaled_Sbar_epi,
)
from .airy21 import airy21_kernel, airy21_onepoint, airy21_table, limit_kernel
from .shock_law import goe_table, shock_limit_cdf, shock_limit_distribution

__all__ = [
    'airy_ai', 'airy_ai_prime',
    'QuadratureRule', 'gauss_legendre', 'semi_infinite',
    'fredholm_det', 'nystrom_det',
    'DistributionTable', 'airy1_marginal', 'f_goe', 'f_gue', 'table_grid', 'tracy_widom_table',
    'KernelScaling', 'kernel_Q', 'kernel_S', 'kernel_Sbar', 'kernel_Sbar_epi',
    'scaled_Q', 'scaled_S', 'scaled_Sbar', 'scaled_Sbar_epi',
    'airy21_kernel', 'airy21_onepoint', 'airy21_table', 'limit_kernel',
    'goe_table', 'shock_limit_cdf', 'shock_limit_distribution',
]
