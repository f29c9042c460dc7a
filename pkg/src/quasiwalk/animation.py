"""Quasi-random animation driver.

A run starts from a copy of the start image, paints each agent's start pixel,
then performs ``t_max`` global steps. In every global step each agent moves
once, in ascending id order, so on a same-pixel collision the highest id
paints last.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .imaging import ImageBuffer, coverage
from .walk import (
    Agent,
    Direction,
    RotorSequence,
    census_dict,
    draw_directions,
    random_step_agent,
    step_agent,
)

RNG_ALGORITHM = "numpy PCG64, direction = top 2 bits of each raw 64-bit output"

# Upper bound on pre-drawn baseline directions held in memory at once.
_BASELINE_CHUNK = 1 << 20


class ConfigurationError(ValueError):
    pass


class RunAborted(RuntimeError):
    """The snapshot sink failed; ``report`` describes the state reached."""

    def __init__(self, report: RunReport, cause: BaseException):
        self.report = report
        super().__init__(f"run aborted at step {report.steps}: {cause}")


@dataclass
class AgentSpec:
    sequence: RotorSequence | str
    position: tuple[int, int]
    target: ImageBuffer | None = None
    id: int | None = None
    counters: np.ndarray | None = None


@dataclass(eq=False)
class AnimationState:
    canvas: ImageBuffer
    start: ImageBuffer
    agents: list[Agent]
    t_max: int
    t: int = 0
    painted: np.ndarray = None
    rng: np.random.Generator | None = None
    _stacked_targets: np.ndarray | None = field(default=None, repr=False)

    @property
    def baseline(self) -> bool:
        return self.rng is not None

    @property
    def shape(self) -> tuple[int, int]:
        return self.canvas.shape

    def coverage(self) -> float:
        return coverage(self.painted)

    def stacked_targets(self) -> np.ndarray:
        if self._stacked_targets is None:
            m, n = self.shape
            if self.agents:
                self._stacked_targets = np.stack([a.target.pixels for a in self.agents])
            else:
                self._stacked_targets = np.empty((0, m, n, 3), dtype=np.uint8)
        return self._stacked_targets


def init_animation(
    start: ImageBuffer,
    agent_specs: Sequence[AgentSpec],
    t_max: int = 0,
    *,
    seed: int | None = None,
) -> AnimationState:
    """Build the initial state; passing ``seed`` selects the random-walk baseline."""
    if t_max < 0:
        raise ConfigurationError(f"t_max must be non-negative, got {t_max}")
    agents = []
    seen = set()
    for i, spec in enumerate(agent_specs, start=1):
        agent_id = i if spec.id is None else int(spec.id)
        if agent_id in seen:
            raise ConfigurationError(f"duplicate agent id {agent_id}")
        seen.add(agent_id)
        if spec.target is None:
            raise ConfigurationError(f"agent {agent_id} has no target image")
        if spec.target.shape != start.shape:
            raise ConfigurationError(
                f"agent {agent_id}: target {spec.target.shape} does not match start {start.shape}"
            )
        seq = spec.sequence
        if isinstance(seq, str):
            seq = RotorSequence.parse(seq)
        try:
            agents.append(Agent(agent_id, spec.target, seq, spec.position, spec.counters))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
    agents.sort(key=lambda a: a.id)

    canvas = start.copy()
    painted = np.zeros(start.shape, dtype=bool)
    for a in agents:
        canvas.pixels[a.pos] = a.target.pixels[a.pos]
        painted[a.pos] = True
    rng = None if seed is None else np.random.Generator(np.random.PCG64(seed))
    return AnimationState(canvas, start.copy(), agents, t_max, 0, painted, rng)


def make_transition(
    start: ImageBuffer,
    target: ImageBuffer,
    agent_specs: Sequence[AgentSpec],
    t_max: int = 0,
    *,
    seed: int | None = None,
) -> AnimationState:
    """Every agent paints the same ``target``."""
    if target.shape != start.shape:
        raise ConfigurationError(f"target {target.shape} does not match start {start.shape}")
    specs = [
        AgentSpec(s.sequence, s.position, target, s.id, s.counters) for s in agent_specs
    ]
    return init_animation(start, specs, t_max, seed=seed)


def advance(state: AnimationState) -> bool:
    """One global step via the pure-Python steppers.

    Returns False (and changes nothing) once the budget is used up.
    """
    if state.t >= state.t_max:
        return False
    for a in state.agents:
        if state.rng is None:
            p = step_agent(a, state.canvas)
        else:
            p = random_step_agent(a, state.canvas, state.rng)
        state.painted[p] = True
    state.t += 1
    return True


def advance_many(state: AnimationState, steps: int) -> int:
    """Advance up to ``steps`` global steps with the compiled kernel.

    Produces the same canvas, counters and positions as calling
    :func:`advance` repeatedly. Returns the number of steps taken.
    """
    steps = max(0, min(int(steps), state.t_max - state.t))
    if steps == 0 or not state.agents:
        state.t += steps
        return steps
    agents = state.agents
    pos = np.array([a.pos for a in agents], dtype=np.int64)
    census = np.stack([a.census for a in agents])
    targets = state.stacked_targets()
    if state.rng is None:
        width = max(len(a.sequence) for a in agents)
        seqs = np.zeros((len(agents), width), dtype=np.int64)
        for i, a in enumerate(agents):
            seqs[i, : len(a.sequence)] = a.sequence.as_array()
        seq_lens = np.array([len(a.sequence) for a in agents], dtype=np.int64)
        counters = np.stack([a.counters for a in agents])
        _kernel.rotor_steps(
            steps, state.canvas.pixels, state.painted, targets, seqs, seq_lens, counters, pos, census
        )
        for i, a in enumerate(agents):
            a.counters[...] = counters[i]
    else:
        done = 0
        per_chunk = max(1, _BASELINE_CHUNK // len(agents))
        while done < steps:
            chunk = min(per_chunk, steps - done)
            dirs = _draw_directions(state.rng, chunk, len(agents))
            _kernel.forced_steps(dirs, state.canvas.pixels, state.painted, targets, pos, census)
            done += chunk
    for i, a in enumerate(agents):
        a.pos = (int(pos[i, 0]), int(pos[i, 1]))
        a.census[...] = census[i]
    state.t += steps
    return steps


def _draw_directions(rng, steps, k):
    # Row-major: same draw order as ``advance`` (one per agent per step).
    return draw_directions(rng, steps * k).reshape(steps, k)


@dataclass(frozen=True)
class SnapshotSchedule:
    """Either every ``every`` steps (from 0) or an explicit list of steps."""

    every: int | None = None
    steps: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.every is None) == (self.steps is None):
            raise ConfigurationError("give exactly one of every= or steps=")
        if self.every is not None and self.every < 1:
            raise ConfigurationError(f"snapshot interval must be >= 1, got {self.every}")
        if self.steps is not None:
            steps = tuple(int(s) for s in self.steps)
            if any(s < 0 for s in steps):
                raise ConfigurationError("snapshot steps must be non-negative")
            if any(b <= a for a, b in zip(steps, steps[1:])):
                raise ConfigurationError("snapshot steps must be strictly increasing")
            object.__setattr__(self, "steps", steps)

    def points(self, t_max: int) -> list[int]:
        if self.every is not None:
            return list(range(0, t_max + 1, self.every))
        bad = [s for s in self.steps if s > t_max]
        if bad:
            raise ConfigurationError(f"snapshot steps {bad} exceed t_max={t_max}")
        return list(self.steps)


@dataclass
class RunReport:
    steps: int
    t_max: int
    coverage: float
    census: dict[int, dict[Direction, int]]
    snapshots: int
    wall_time: float
    baseline: bool = False
    rng_algorithm: str | None = None

    def lines(self, include_wall_time: bool = True) -> list[str]:
        out = [
            f"steps: {self.steps}",
            f"t_max: {self.t_max}",
            f"coverage: {self.coverage:.6f}",
            f"snapshots: {self.snapshots}",
            f"walk: {'random' if self.baseline else 'rotor'}",
        ]
        if self.rng_algorithm:
            out.append(f"rng: {self.rng_algorithm}")
        for agent_id, counts in self.census.items():
            out.append(
                f"census.agent{agent_id}: "
                + " ".join(f"{d.letter}={c}" for d, c in counts.items())
            )
        if include_wall_time:
            out.append(f"wall_time_s: {self.wall_time:.3f}")
        return out

    def rows(self) -> list[dict]:
        return [
            {"agent": agent_id, **{d.name.lower(): c for d, c in counts.items()}}
            for agent_id, counts in self.census.items()
        ]


def _report(state, snapshots, started):
    return RunReport(
        steps=state.t,
        t_max=state.t_max,
        coverage=state.coverage(),
        census={a.id: census_dict(a.census) for a in state.agents},
        snapshots=snapshots,
        wall_time=time.perf_counter() - started,
        baseline=state.baseline,
        rng_algorithm=RNG_ALGORITHM if state.baseline else None,
    )


SnapshotSink = Callable[[int, ImageBuffer], None]


def run(
    state: AnimationState,
    schedule: SnapshotSchedule | None = None,
    sink: SnapshotSink | None = None,
) -> RunReport:
    """Advance to ``t_max``, handing a canvas copy to ``sink`` at each scheduled step.

    Snapshots are taken after all agents have moved in that global step.
    If the sink raises, :class:`RunAborted` carries the partial report.
    """
    started = time.perf_counter()
    points = [] if schedule is None else [p for p in schedule.points(state.t_max) if p >= state.t]
    emitted = 0
    for p in points:
        advance_many(state, p - state.t)
        if sink is not None:
            try:
                sink(state.t, state.canvas.copy())
            except Exception as exc:
                raise RunAborted(_report(state, emitted, started), exc) from exc
        emitted += 1
    advance_many(state, state.t_max - state.t)
    return _report(state, emitted, started)
