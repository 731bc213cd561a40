"""
Limit law of the rescaled second-class particle in a shock

The two sides of the shock fluctuate as independent rescaled Airy1
processes with one-point laws chi^(2/3) 2^(1/3) G, G ~ F_GOE. The shock
position satisfies Z = (a G1 - b G2) / (2 (rho - lam)) with a, b built
from chi_- = lam (1 - lam) and chi_+ = rho (1 - rho).
"""

from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from src.dynamics.lattice import ShockParameters
from src.errors import PreconditionError
from src.limits.quadrature import DEFAULT_ORDER
from src.limits.tracy_widom import DistributionTable, table_grid, tracy_widom_table

MAX_ABS_S = 12.0


@lru_cache(maxsize=4)
def goe_table(order: int = DEFAULT_ORDER) -> DistributionTable:
    """F_GOE on the default grid, computed once per order"""
    return tracy_widom_table('goe', order=order)


def _scales(params: ShockParameters):
    a = params.chi_minus ** (2.0 / 3.0) * 2.0 ** (1.0 / 3.0)
    b = params.chi_plus ** (2.0 / 3.0) * 2.0 ** (1.0 / 3.0)
    return a, b


def shock_limit_cdf(
    s: float,
    lam: float,
    rho: float,
    tau: float = 0.0,
    table: Optional[DistributionTable] = None
) -> float:
    """
    P(H- - H+ >= 2 (rho - lam) s) at one time point

    The one-point marginals do not depend on tau. The convolution is a
    Stieltjes sum over the tabulated F_GOE with the inner CDF read at cell
    midpoints, so equal scales give exactly 1/2 at s = 0.

    Raises:
        ConfigError: unless 0 < lam < rho < 1
        PreconditionError: |s| > 12, where the tabulated grid underflows
    """
    params = ShockParameters(lam, rho)
    if abs(s) > MAX_ABS_S:
        raise PreconditionError(f"shock_limit_cdf supports |s| <= {MAX_ABS_S:g}, got {s}")
    table = table or goe_table()
    a, b = _scales(params)
    c = 2.0 * (params.rho - params.lam) * s

    F = table.cdf
    F = (F - F[0]) / (F[-1] - F[0])
    masses = np.diff(F)
    midpoints = 0.5 * (table.grid[1:] + table.grid[:-1])
    inner = np.interp((c + b * midpoints) / a, table.grid, F, left=0.0, right=1.0)
    return float(np.clip(np.sum(masses * (1.0 - inner)), 0.0, 1.0))


def shock_limit_distribution(
    lam: float,
    rho: float,
    grid: Optional[Sequence[float]] = None,
    table: Optional[DistributionTable] = None
) -> DistributionTable:
    """Distribution function 1 - shock_limit_cdf of the rescaled shock position"""
    grid = table_grid(-6.0, 6.0, 0.01) if grid is None else np.asarray(grid, dtype=float)
    table = table or goe_table()
    survival = np.array([shock_limit_cdf(s, lam, rho, table=table) for s in grid])
    return DistributionTable(grid, np.maximum.accumulate(1.0 - survival),
                             {'law': 'shock', 'lam': lam, 'rho': rho})
