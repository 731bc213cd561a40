"""
Particle configurations, height functions and initial conditions

A Configuration is a dense uint8 occupation array over an inclusive window
[x_min, x_max], optionally carrying class labels (hole, first, second).
Heights live on the sites x_min .. x_max + 1 and obey
h(x+1) - h(x) = 1 - 2 eta(x).
"""

import re
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from fractions import Fraction
from math import floor, ceil
from typing import Iterable, Optional, Tuple

import numpy as np

from src.errors import ConfigError, PreconditionError, WindowError

_RLE_TOKEN = re.compile(r'(\d+)\*([.ofs])')


class SiteClass(IntEnum):
    """Multiclass labels"""
    HOLE = 0
    FIRST = 1
    SECOND = 2


@dataclass(frozen=True, eq=False)
class Configuration:
    """Occupation variables on a finite window"""

    x_min: int
    x_max: int
    occupation: np.ndarray
    classes: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.x_max < self.x_min:
            raise WindowError(f"empty window [{self.x_min}, {self.x_max}]")
        occ = np.ascontiguousarray(self.occupation, dtype=np.uint8)
        if occ.shape != (self.x_max - self.x_min + 1,):
            raise WindowError("occupation must cover the window exactly")
        if occ.size and occ.max() > 1:
            raise ConfigError("occupation values must be 0 or 1")
        object.__setattr__(self, 'occupation', occ)
        if self.classes is not None:
            labels = np.ascontiguousarray(self.classes, dtype=np.int8)
            if labels.shape != occ.shape:
                raise WindowError("class labels must cover the window exactly")
            if np.any((labels == SiteClass.HOLE) != (occ == 0)):
                raise ConfigError("class label must be hole exactly where the site is empty")
            object.__setattr__(self, 'classes', labels)

    @classmethod
    def empty(cls, window: Tuple[int, int]) -> 'Configuration':
        x_min, x_max = window
        return cls(x_min, x_max, np.zeros(x_max - x_min + 1, dtype=np.uint8))

    @classmethod
    def from_sites(cls, window: Tuple[int, int], sites: Iterable[int]) -> 'Configuration':
        """Configuration with particles exactly at `sites` (those inside the window)"""
        x_min, x_max = window
        occ = np.zeros(x_max - x_min + 1, dtype=np.uint8)
        for site in sites:
            if x_min <= site <= x_max:
                occ[site - x_min] = 1
        return cls(x_min, x_max, occ)

    @property
    def window(self) -> Tuple[int, int]:
        return self.x_min, self.x_max

    @property
    def size(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def is_multiclass(self) -> bool:
        return self.classes is not None

    def sites(self) -> np.ndarray:
        return np.arange(self.x_min, self.x_max + 1)

    def index(self, site: int) -> int:
        if not self.x_min <= site <= self.x_max:
            raise WindowError(f"site {site} outside window [{self.x_min}, {self.x_max}]")
        return site - self.x_min

    def __getitem__(self, site: int) -> int:
        return int(self.occupation[self.index(site)])

    def label(self, site: int) -> SiteClass:
        if self.classes is None:
            return SiteClass.FIRST if self[site] else SiteClass.HOLE
        return SiteClass(int(self.classes[self.index(site)]))

    def with_site(self, site: int, value: int) -> 'Configuration':
        """Copy with the occupation of one site replaced"""
        occ = self.occupation.copy()
        occ[self.index(site)] = value
        return Configuration(self.x_min, self.x_max, occ)

    def particle_count(self) -> int:
        return int(self.occupation.sum())

    def particle_sites(self) -> np.ndarray:
        return np.flatnonzero(self.occupation) + self.x_min

    def same_as(self, other: 'Configuration') -> bool:
        same_classes = (
            (self.classes is None and other.classes is None)
            or (self.classes is not None and other.classes is not None
                and np.array_equal(self.classes, other.classes))
        )
        return (self.window == other.window
                and np.array_equal(self.occupation, other.occupation)
                and same_classes)

    def dominated_by(self, other: 'Configuration') -> bool:
        """Coordinatewise eta <= other"""
        return self.window == other.window and bool(np.all(self.occupation <= other.occupation))

    def to_text(self) -> str:
        """Run-length encoded form `x_min:x_max|count*symbol ...`"""
        if self.classes is None:
            symbols = np.where(self.occupation == 1, 'o', '.')
        else:
            symbols = np.array(['.', 'f', 's'])[self.classes]
        runs = []
        start = 0
        for i in range(1, len(symbols) + 1):
            if i == len(symbols) or symbols[i] != symbols[start]:
                runs.append(f"{i - start}*{symbols[start]}")
                start = i
        return f"{self.x_min}:{self.x_max}|" + " ".join(runs)

    @classmethod
    def from_text(cls, text: str) -> 'Configuration':
        """Parse the run-length encoded form written by to_text"""
        try:
            head, body = text.strip().split('|', 1)
            x_min, x_max = (int(v) for v in head.split(':'))
        except ValueError as e:
            raise ConfigError(f"malformed configuration text: {text!r}") from e
        tokens = _RLE_TOKEN.findall(body)
        symbols = ''.join(sym * int(count) for count, sym in tokens)
        if len(symbols) != x_max - x_min + 1:
            raise ConfigError(f"run lengths cover {len(symbols)} sites, window has {x_max - x_min + 1}")
        occ = np.array([0 if s == '.' else 1 for s in symbols], dtype=np.uint8)
        classes = None
        if any(s in 'fs' for s in symbols):
            lookup = {'.': SiteClass.HOLE, 'f': SiteClass.FIRST, 'o': SiteClass.FIRST, 's': SiteClass.SECOND}
            classes = np.array([lookup[s] for s in symbols], dtype=np.int8)
        return cls(x_min, x_max, occ, classes)


@dataclass(frozen=True, eq=False)
class HeightFunction:
    """Integer interface on sites x_min .. x_max + 1"""

    x_min: int
    values: np.ndarray
    anchor_site: int = 0
    anchor_value: int = 0

    @property
    def x_max(self) -> int:
        return self.x_min + len(self.values) - 1

    def sites(self) -> np.ndarray:
        return np.arange(self.x_min, self.x_max + 1)

    def at(self, x: int) -> int:
        if not self.x_min <= x <= self.x_max:
            raise WindowError(f"height site {x} outside [{self.x_min}, {self.x_max}]")
        return int(self.values[x - self.x_min])

    def __getitem__(self, x: int) -> int:
        return self.at(x)

    def to_configuration(self) -> Configuration:
        """Invert h(x+1) - h(x) = 1 - 2 eta(x)"""
        occ = ((1 - np.diff(self.values)) // 2).astype(np.uint8)
        return Configuration(self.x_min, self.x_max - 1, occ)


def height_of(config: Configuration, anchor_value: int = 0, anchor_site: int = 0) -> HeightFunction:
    """
    Height function of a configuration, pinned at h(anchor_site) = anchor_value

    Args:
        config: Occupation on [x_min, x_max]
        anchor_value: Height at the anchor site
        anchor_site: Site in [x_min, x_max + 1] where the height is known

    Returns:
        HeightFunction on x_min .. x_max + 1
    """
    if not config.x_min <= anchor_site <= config.x_max + 1:
        raise WindowError(f"anchor site {anchor_site} outside height domain")
    steps = 1 - 2 * config.occupation.astype(np.int64)
    cumulative = np.concatenate([[0], np.cumsum(steps)])
    values = cumulative - cumulative[anchor_site - config.x_min] + int(anchor_value)
    values.setflags(write=False)
    return HeightFunction(config.x_min, values, anchor_site, int(anchor_value))


@dataclass(frozen=True)
class ShockParameters:
    """Densities of a two-sided shock and the derived macroscopic constants"""

    lam: float
    rho: float

    def __post_init__(self):
        if not 0.0 < self.lam < self.rho < 1.0:
            raise ConfigError(f"need 0 < lambda < rho < 1, got lambda={self.lam}, rho={self.rho}")

    @property
    def v_s(self) -> float:
        return 1.0 - self.lam - self.rho

    @property
    def mu_s(self) -> float:
        return 1.0 - self.lam - self.rho + 2.0 * self.lam * self.rho

    @property
    def chi_minus(self) -> float:
        return self.lam * (1.0 - self.lam)

    @property
    def chi_plus(self) -> float:
        return self.rho * (1.0 - self.rho)

    @property
    def delta(self) -> float:
        """Half the density gap, the endpoint-control margin"""
        return 0.5 * (self.rho - self.lam)


class ICVariant(str, Enum):
    STEP = 'step'
    SHOCK = 'shock'
    BERNOULLI = 'bernoulli'
    EXPLICIT = 'explicit'


@dataclass(frozen=True)
class InitialCondition:
    """Initial data family; build with the classmethod constructors"""

    variant: ICVariant
    y0: int = 0
    lam: Optional[float] = None
    rho: Optional[float] = None
    ic_seed: Optional[int] = None
    sites: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.variant in (ICVariant.SHOCK, ICVariant.BERNOULLI):
            if self.lam is None or self.rho is None:
                raise ConfigError("shock initial data needs both densities")
            ShockParameters(self.lam, self.rho)
        if self.variant == ICVariant.BERNOULLI and self.ic_seed is None:
            raise ConfigError("Bernoulli shock needs an ic_seed")

    @classmethod
    def step(cls, y0: int = 0) -> 'InitialCondition':
        return cls(ICVariant.STEP, y0=int(y0))

    @classmethod
    def shock(cls, lam: float, rho: float) -> 'InitialCondition':
        return cls(ICVariant.SHOCK, lam=float(lam), rho=float(rho))

    @classmethod
    def bernoulli(cls, lam: float, rho: float, ic_seed: int) -> 'InitialCondition':
        return cls(ICVariant.BERNOULLI, lam=float(lam), rho=float(rho), ic_seed=int(ic_seed))

    @classmethod
    def shock_family(cls, kind: str, lam: float, rho: float, seed: int) -> 'InitialCondition':
        """Deterministic or Bernoulli shock data for one seed; Bernoulli sites are drawn from `seed`"""
        if kind == ICVariant.SHOCK.value:
            return cls.shock(lam, rho)
        if kind == ICVariant.BERNOULLI.value:
            return cls.bernoulli(lam, rho, ic_seed=seed)
        raise ConfigError(f"shock initial data must be 'shock' or 'bernoulli', got {kind!r}")

    @classmethod
    def explicit(cls, sites: Iterable[int]) -> 'InitialCondition':
        return cls(ICVariant.EXPLICIT, sites=tuple(sorted(int(s) for s in sites)))

    @property
    def shock_parameters(self) -> ShockParameters:
        if self.lam is None or self.rho is None:
            raise ConfigError(f"{self.variant.value} initial data has no shock densities")
        return ShockParameters(self.lam, self.rho)

    def initial_anchor(self) -> int:
        """h(0, 0) under the convention h^step(x, 0) = |x - y0|"""
        return abs(self.y0) if self.variant == ICVariant.STEP else 0


def _shock_sites(lam: float, rho: float, window: Tuple[int, int]) -> Iterable[int]:
    # exact rationals keep floor(n / density) free of rounding at integers
    lam_q, rho_q = Fraction(repr(lam)), Fraction(repr(rho))
    x_min, x_max = window
    n = 1
    while True:
        site = -floor(n / lam_q)
        if site < x_min:
            break
        if site <= x_max:
            yield site
        n += 1
    m = 0
    while True:
        site = ceil(m / rho_q)
        if site > x_max:
            break
        if site >= x_min:
            yield site
        m += 1


def _bernoulli_occupation(lam: float, rho: float, ic_seed: int, window: Tuple[int, int]) -> np.ndarray:
    x_min, x_max = window
    occ = np.zeros(x_max - x_min + 1, dtype=np.uint8)
    for site in range(x_min, x_max + 1):
        if site == 0:
            occ[site - x_min] = 1
            continue
        # keyed per site and tagged so the disorder never reuses a clock stream
        key = [ic_seed & ((1 << 64) - 1), 2 * site if site >= 0 else -2 * site - 1, 0xB3]
        uniform = np.random.Generator(np.random.Philox(np.random.SeedSequence(key))).random()
        occ[site - x_min] = uniform < (lam if site < 0 else rho)
    return occ


def build_initial(ic: InitialCondition, window: Tuple[int, int]) -> Configuration:
    """
    Occupation of the initial condition on `window`

    Shock variants occupy site 0 (X0(0) = 0); use shock_pair for the
    coupled configurations differing at the origin.
    """
    x_min, x_max = int(window[0]), int(window[1])
    if x_max < x_min:
        raise WindowError(f"empty window [{x_min}, {x_max}]")

    if ic.variant == ICVariant.STEP:
        occ = (np.arange(x_min, x_max + 1) < ic.y0).astype(np.uint8)
        return Configuration(x_min, x_max, occ)
    if ic.variant == ICVariant.SHOCK:
        return Configuration.from_sites((x_min, x_max), _shock_sites(ic.lam, ic.rho, (x_min, x_max)))
    if ic.variant == ICVariant.BERNOULLI:
        return Configuration(x_min, x_max, _bernoulli_occupation(ic.lam, ic.rho, ic.ic_seed, (x_min, x_max)))
    return Configuration.from_sites((x_min, x_max), ic.sites)


def shock_pair(ic: InitialCondition, window: Tuple[int, int]) -> Tuple[Configuration, Configuration]:
    """(eta0, eta0~): the initial data with the origin emptied, and with it occupied"""
    base = build_initial(ic, window)
    return base.with_site(0, 0), base.with_site(0, 1)


def split_minus_plus(
    eta0: Configuration,
    eta0_tilde: Configuration
) -> Tuple[Configuration, Configuration, Configuration]:
    """
    Split a coupled pair at the origin

    Returns:
        (eta-, eta+, eta~+): eta- keeps eta0 left of 0 and is empty on x >= 0;
        eta+ and eta~+ keep eta0, eta0~ on x >= 0 and are full on x < 0
    """
    if eta0.window != eta0_tilde.window:
        raise PreconditionError("pair must share a window")
    diff = np.flatnonzero(eta0.occupation != eta0_tilde.occupation) + eta0.x_min
    if diff.tolist() != [0] or eta0[0] != 0 or eta0_tilde[0] != 1:
        raise PreconditionError("pair must differ exactly at site 0 with eta0(0)=0, eta0~(0)=1")

    left = eta0.sites() < 0
    minus = np.where(left, eta0.occupation, 0).astype(np.uint8)
    plus = np.where(left, 1, eta0.occupation).astype(np.uint8)
    plus_tilde = np.where(left, 1, eta0_tilde.occupation).astype(np.uint8)
    window = eta0.window
    return (
        Configuration(*window, minus),
        Configuration(*window, plus),
        Configuration(*window, plus_tilde),
    )
