"""Rotor-router mechanics on an m x n torus.

Positions are ``(row, col)``; rows grow downward, so ``Down`` is ``row + 1``.
Each agent owns a counter grid whose entry at a pixel is the index of the
next exit direction in the agent's sequence.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .imaging import ImageBuffer


class Direction(enum.IntEnum):
    RIGHT = 0
    DOWN = 1
    LEFT = 2
    UP = 3

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]

    @property
    def inverse(self) -> Direction:
        return Direction((self + 2) % 4)

    @property
    def letter(self) -> str:
        return "RDLU"[self]


# (drow, dcol), indexed by Direction value
_DELTAS = ((0, 1), (1, 0), (0, -1), (-1, 0))


class SequenceParseError(ValueError):
    def __init__(self, text, index, message):
        self.text = text
        self.index = index
        super().__init__(message)


@dataclass(frozen=True)
class RotorSequence:
    entries: tuple[Direction, ...]

    def __post_init__(self):
        entries = tuple(Direction(d) for d in self.entries)
        if not entries:
            raise ValueError("a rotor sequence needs at least one direction")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, text: str) -> RotorSequence:
        """Parse letters R/D/L/U (any case, whitespace ignored).

        Errors carry the index of the offending character in ``text``.
        """
        entries = []
        for i, ch in enumerate(text):
            if ch.isspace():
                continue
            try:
                entries.append(Direction("RDLU".index(ch.upper())))
            except ValueError:
                raise SequenceParseError(
                    text, i, f"illegal direction {ch!r} at index {i} (expected R, D, L or U)"
                ) from None
        if not entries:
            raise SequenceParseError(text, 0, "empty direction sequence at index 0")
        return cls(tuple(entries))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i) -> Direction:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __str__(self):
        return "".join(d.letter for d in self.entries)

    def multiplicities(self) -> dict[Direction, int]:
        return direction_census(self.entries)

    @property
    def symmetric(self) -> bool:
        return len(set(self.multiplicities().values())) == 1

    def as_array(self) -> np.ndarray:
        return np.array([int(d) for d in self.entries], dtype=np.int8)


def parse_sequence(text: str) -> RotorSequence:
    return RotorSequence.parse(text)


@dataclass(frozen=True)
class GridDims:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.m}x{self.n}")

    def contains(self, pos) -> bool:
        return 0 <= pos[0] < self.m and 0 <= pos[1] < self.n


def neighbor(pos: tuple[int, int], direction: Direction, dims: GridDims) -> tuple[int, int]:
    dr, dc = _DELTAS[direction]
    return (pos[0] + dr) % dims.m, (pos[1] + dc) % dims.n


@dataclass(eq=False)
class Agent:
    """One painter: target image, rotor sequence, position and counters.

    ``census`` counts moves per direction (indexed by ``Direction``) and is
    updated by both the rotor and the random stepper.
    """

    id: int
    target: ImageBuffer
    sequence: RotorSequence
    pos: tuple[int, int]
    counters: np.ndarray = None
    census: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=np.int64))

    def __post_init__(self):
        dims = self.dims
        self.pos = (int(self.pos[0]), int(self.pos[1]))
        if not dims.contains(self.pos):
            raise ValueError(
                f"agent {self.id}: start position {self.pos} outside {dims.m}x{dims.n} grid"
            )
        if self.counters is None:
            self.counters = np.zeros((dims.m, dims.n), dtype=np.int32)
        else:
            self.counters = np.array(self.counters, dtype=np.int32)
            if self.counters.shape != (dims.m, dims.n):
                raise ValueError(
                    f"agent {self.id}: counter grid {self.counters.shape} does not match "
                    f"target {dims.m}x{dims.n}"
                )
            if self.counters.min() < 0 or self.counters.max() >= len(self.sequence):
                raise ValueError(f"agent {self.id}: counters must lie in [0, {len(self.sequence)})")

    @property
    def dims(self) -> GridDims:
        return GridDims(*self.target.shape)

    def next_direction(self) -> Direction:
        return self.sequence[self.counters[self.pos]]


def _paint_and_move(agent: Agent, canvas: ImageBuffer, d: Direction) -> tuple[int, int]:
    new = neighbor(agent.pos, d, agent.dims)
    canvas.pixels[new] = agent.target.pixels[new]
    agent.pos = new
    agent.census[d] += 1
    return new


def _check_canvas(agent, canvas):
    if canvas.shape != agent.target.shape:
        raise ValueError(
            f"agent {agent.id}: canvas {canvas.shape} does not match target {agent.target.shape}"
        )


def step_agent(agent: Agent, canvas: ImageBuffer) -> tuple[int, int]:
    """Move one rotor step, paint the pixel arrived at, advance the rotor."""
    _check_canvas(agent, canvas)
    here = agent.pos
    c = int(agent.counters[here])
    d = agent.sequence[c]
    new = _paint_and_move(agent, canvas, d)
    agent.counters[here] = (c + 1) % len(agent.sequence)
    return new


def draw_directions(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform directions from the top two bits of raw 64-bit generator outputs.

    Raw outputs are consumed one per direction, so drawing in bulk or one at a
    time yields the same stream.
    """
    raw = rng.bit_generator.random_raw(count)
    return (np.asarray(raw, dtype=np.uint64) >> np.uint64(62)).astype(np.int64)


def random_step_agent(agent: Agent, canvas: ImageBuffer, rng: np.random.Generator) -> tuple[int, int]:
    """Classical random-walk baseline: uniform direction, rotors untouched."""
    _check_canvas(agent, canvas)
    d = Direction(int(draw_directions(rng, 1)[0]))
    return _paint_and_move(agent, canvas, d)


def direction_census(trace: Iterable[Direction]) -> dict[Direction, int]:
    counts = dict.fromkeys(Direction, 0)
    for d in trace:
        counts[Direction(d)] += 1
    return counts


def census_dict(counts: Sequence[int]) -> dict[Direction, int]:
    """View a length-4 count array as a ``{Direction: count}`` mapping."""
    return {d: int(counts[d]) for d in Direction}
