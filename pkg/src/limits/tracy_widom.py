"""
Tracy-Widom GUE and GOE distribution functions and their tabulated form

F_GUE(s) = det(I - K_Airy) and F_GOE(s) = det(I - Ai((x + y) / 2) / 2),
both on L2((s, inf)). The Airy1 one-point marginal is P(A1 <= m) = F_GOE(2m).
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from src.errors import ConfigError
from src.limits.airy import airy_ai, airy_pair
from src.limits.fredholm import fredholm_det
from src.limits.quadrature import DEFAULT_ORDER, DEFAULT_SCALE, semi_infinite

TAIL_TOLERANCE = 1e-6
DEFAULT_GRID = (-8.0, 8.0, 0.01)


def airy_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y), with Ai'(x)^2 - x Ai(x)^2 on the diagonal"""
    x, y = np.broadcast_arrays(x, y)
    ai_x, aip_x = airy_pair(x)
    ai_y, aip_y = airy_pair(y)
    diff = x - y
    diagonal = np.abs(diff) < 1e-12
    safe = np.where(diagonal, 1.0, diff)
    off = (ai_x * aip_y - aip_x * ai_y) / safe
    return np.where(diagonal, aip_x ** 2 - x * ai_x ** 2, off)


def goe_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return 0.5 * airy_ai(0.5 * (x + y))


def f_gue(s: float, order: int = DEFAULT_ORDER, check: bool = True) -> float:
    """GUE Tracy-Widom distribution function"""
    return fredholm_det(airy_kernel, s, semi_infinite(order, s, DEFAULT_SCALE), check=check)


def f_goe(s: float, order: int = DEFAULT_ORDER, check: bool = True) -> float:
    """GOE Tracy-Widom distribution function"""
    return fredholm_det(goe_kernel, s, semi_infinite(order, s, DEFAULT_SCALE), check=check)


def airy1_marginal(m: float, order: int = DEFAULT_ORDER) -> float:
    """P(A1(u) <= m) for the Airy1 process at any fixed u"""
    return f_goe(2.0 * m, order)


LAWS: Dict[str, Callable[..., float]] = {
    'gue': f_gue,
    'goe': f_goe,
}


@dataclass(eq=False)
class DistributionTable:
    """Distribution function tabulated on an increasing grid"""

    grid: np.ndarray
    cdf: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.cdf = np.asarray(self.cdf, dtype=float)
        if self.grid.shape != self.cdf.shape or np.any(np.diff(self.grid) <= 0):
            raise ConfigError("table grid must be strictly increasing and match the CDF values")

    def __call__(self, s: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return self.interpolate(s)

    def interpolate(self, s: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Linear interpolation, 0 left of the grid and 1 right of it"""
        value = np.interp(s, self.grid, self.cdf, left=0.0, right=1.0)
        return float(value) if np.ndim(value) == 0 else value

    def is_valid(self, tail_tolerance: float = TAIL_TOLERANCE, slack: float = 1e-9) -> bool:
        """Nondecreasing, inside [0, 1], and close to 0 and 1 at the grid ends"""
        return bool(
            np.all(np.diff(self.cdf) >= -slack)
            and np.all(self.cdf >= -slack) and np.all(self.cdf <= 1 + slack)
            and self.cdf[0] <= tail_tolerance and self.cdf[-1] >= 1 - tail_tolerance
        )

    def moments(self) -> Tuple[float, float]:
        """(mean, variance) from tail integrals of the tabulated CDF"""
        s, F = self.grid, self.cdf
        right = s >= 0
        left = s <= 0
        mean = trapezoid(1.0 - F[right], s[right]) - trapezoid(F[left], s[left])
        second = trapezoid(2.0 * s[right] * (1.0 - F[right]), s[right]) \
            + trapezoid(2.0 * np.abs(s[left]) * F[left], s[left])
        return float(mean), float(second - mean ** 2)

    def density(self) -> np.ndarray:
        return np.gradient(self.cdf, self.grid)

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write `# key: value` metadata lines, a header row and %.12e values"""
        with open(path, 'w', newline='') as f:
            for key in sorted(self.metadata):
                f.write(f"# {key}: {self.metadata[key]}\n")
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['s', 'F'])
            for s, F in zip(self.grid, self.cdf):
                writer.writerow([f"{s:.12e}", f"{F:.12e}"])

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> 'DistributionTable':
        metadata: Dict[str, Any] = {}
        rows = []
        with open(path, newline='') as f:
            for line in f:
                if line.startswith('#'):
                    key, _, value = line[1:].strip().partition(': ')
                    metadata[key] = value
                elif line.strip() and not line.startswith('s,'):
                    rows.append([float(v) for v in line.strip().split(',')])
        data = np.array(rows)
        return cls(data[:, 0], data[:, 1], metadata)


def table_grid(start: float = DEFAULT_GRID[0], stop: float = DEFAULT_GRID[1], step: float = DEFAULT_GRID[2]) -> np.ndarray:
    n = int(round((stop - start) / step))
    return start + step * np.arange(n + 1)


def tabulate(
    law: Callable[[float], float],
    grid: Sequence[float],
    metadata: Dict[str, Any],
    workers: int = 1
) -> DistributionTable:
    """Evaluate `law` on every grid point, in a thread pool when workers > 1"""
    grid = np.asarray(grid, dtype=float)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            values = list(executor.map(law, grid))
    else:
        values = [law(s) for s in grid]
    cdf = np.clip(np.array(values), 0.0, 1.0)
    meta = dict(metadata)
    meta.setdefault('grid', f"{grid[0]:g}:{grid[-1]:g}:{len(grid)}")
    return DistributionTable(grid, cdf, meta)


def tracy_widom_table(
    law: str,
    grid: Optional[Sequence[float]] = None,
    order: int = DEFAULT_ORDER,
    workers: int = 1
) -> DistributionTable:
    """Tabulate F_GUE or F_GOE"""
    if law not in LAWS:
        raise ConfigError(f"unknown law {law!r}; expected one of {sorted(LAWS)}")
    fn = LAWS[law]
    grid = table_grid() if grid is None else grid
    return tabulate(lambda s: fn(s, order), grid, {'law': law, 'order': order}, workers)
