"""
One-seed trajectories of the coupled shock and step systems

A ShockSample carries the five coupled configurations eta, eta~, eta-,
eta+, eta~+ on one stream, plus the multiclass state built from the split.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, TypeVar

from src.dynamics.clockwork import EventStream, generate_events
from src.dynamics.engine import CoupledSystem, MulticlassState, WindowPlan, plan_window, step_configuration
from src.dynamics.lattice import InitialCondition, ShockParameters, shock_pair, split_minus_plus

T = TypeVar('T')

SHOCK_MEMBERS = ('eta', 'eta_tilde', 'minus', 'plus', 'plus_tilde')


@dataclass
class ShockSample:
    """Coupled shock trajectory for a single clock seed"""

    seed: int
    ic: InitialCondition
    plan: WindowPlan
    stream: EventStream
    system: CoupledSystem
    multiclass: MulticlassState

    @property
    def params(self) -> ShockParameters:
        return self.ic.shock_parameters

    @property
    def time(self) -> float:
        return self.system.current_time

    def evolve(self, until: float) -> 'ShockSample':
        self.system.evolve(until)
        return self


def build_shock_sample(
    seed: int,
    ic: InitialCondition,
    horizon: float,
    plan: Optional[WindowPlan] = None,
    stream: Optional[EventStream] = None,
    record_log: bool = True
) -> ShockSample:
    """
    Build the coupled shock system at time 0

    Args:
        seed: Clock seed
        ic: Shock or Bernoulli-shock initial data
        horizon: Largest time the sample will be evolved to
        plan: Window and guard band (default: light cone around v_s * horizon)
        stream: Pre-drawn stream on plan.window, e.g. for stream-swap controls
        record_log: Keep executed bits for backwards paths
    """
    params = ic.shock_parameters
    if plan is None:
        plan = plan_window(horizon, center=params.v_s * horizon)
    if stream is None:
        stream = generate_events(seed, plan.window, horizon)

    eta0, eta0_tilde = shock_pair(ic, plan.window)
    minus, plus, plus_tilde = split_minus_plus(eta0, eta0_tilde)
    system = CoupledSystem(
        stream,
        [eta0, eta0_tilde, minus, plus, plus_tilde],
        labels=SHOCK_MEMBERS,
        track_pair=('eta', 'eta_tilde'),
        record_log=record_log,
    )
    return ShockSample(
        seed=seed,
        ic=ic,
        plan=plan,
        stream=stream,
        system=system,
        multiclass=MulticlassState.from_split(minus, plus_tilde),
    )


@dataclass
class StepSample:
    """Step-initial-data trajectory for a single clock seed"""

    seed: int
    y0: int
    plan: WindowPlan
    stream: EventStream
    system: CoupledSystem


def build_step_sample(
    seed: int,
    horizon: float,
    alpha: float = 0.0,
    y0: int = 0,
    plan: Optional[WindowPlan] = None,
    record_log: bool = True
) -> StepSample:
    """Step data h(x, 0) = |x - y0| with the window centred on alpha * horizon"""
    if plan is None:
        plan = plan_window(horizon, center=alpha * horizon)
    stream = generate_events(seed, plan.window, horizon)
    system = CoupledSystem(
        stream,
        [step_configuration(y0, plan.window)],
        anchors=[InitialCondition.step(y0).initial_anchor()],
        labels=('step',),
        record_log=record_log,
    )
    return StepSample(seed=seed, y0=y0, plan=plan, stream=stream, system=system)


def map_seeds(fn: Callable[[int], T], seeds: Iterable[int], workers: int = 1) -> List[T]:
    """Apply fn to every seed, in a thread pool when workers > 1; results keep seed order"""
    seeds = list(seeds)
    if workers <= 1:
        return [fn(seed) for seed in seeds]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, seeds))
