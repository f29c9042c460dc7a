"""Named experiment configurations and the start-position grammar.

Positions are written as in the experiment descriptions, row term first:
``"m/4,n/4"``, ``"3m/4,3n/4"``, ``"m/2,n/2"`` or plain integers ``"10,20"``.
Fractions use integer division, ``k*size // d``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# Stand-ins for the four paintings used in the experiments:
# transition start/target, and the two animation images.
TRANSITION_START = "synthetic:warm"
TRANSITION_TARGET = "synthetic:cool"
ANIMATION_A = "synthetic:rings"
ANIMATION_B = "synthetic:bands"

# Hue rotations standing in for the blue, green and yellow recolorings.
RECOLOR_ROTATIONS = (90.0, 180.0, 270.0)

EXPERIMENT_SIZE = (400, 400)
EXPERIMENT_T_MAX = 5_000_000

CENTER = ("m/2,n/2",)
DIAGONAL = ("m/4,n/4", "3m/4,3n/4")
QUARTERS = ("m/4,n/4", "m/4,3n/4", "3m/4,n/4", "3m/4,3n/4")

SYM_1, SYM_2 = "RDLU", "ULDR"
ASYM_1, ASYM_2 = "RDLUR", "ULDRU"
LONG = "RDLU" * 4 + "RU"
REP_1, REP_2 = "URRR", "DRRR"


class UnknownPresetError(KeyError):
    def __str__(self):
        return f"unknown preset {self.args[0]!r}; known presets: {', '.join(PRESETS)}"


class PositionError(ValueError):
    pass


@dataclass(frozen=True)
class PresetAgent:
    sequence: str
    position: str
    target: str | None = None
    hue_shift: float | None = None


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    mode: str
    agents: tuple[PresetAgent, ...]
    start: str
    target: str | None = None
    size: tuple[int, int] = EXPERIMENT_SIZE
    t_max: int = EXPERIMENT_T_MAX

    def positions(self, m: int, n: int) -> list[tuple[int, int]]:
        return [resolve_position(a.position, m, n) for a in self.agents]


def _transition(name, sequences, positions):
    agents = tuple(PresetAgent(s, p) for s, p in zip(sequences, positions))
    return ExperimentPreset(name, "transition", agents, TRANSITION_START, TRANSITION_TARGET)


def _animation_2(name, s1, s2):
    agents = (PresetAgent(s1, DIAGONAL[0], ANIMATION_A), PresetAgent(s2, DIAGONAL[1], ANIMATION_B))
    return ExperimentPreset(name, "animation", agents, ANIMATION_A)


def _animation_4(name, s1, s2):
    # agent 1 paints the original; 2..4 paint its hue-rotated variants
    shifts = (None,) + RECOLOR_ROTATIONS
    seqs = (s1, s2, s1, s2)
    agents = tuple(
        PresetAgent(s, p, ANIMATION_A, h) for s, p, h in zip(seqs, QUARTERS, shifts)
    )
    return ExperimentPreset(name, "animation", agents, ANIMATION_B)


PRESETS: dict[str, ExperimentPreset] = {
    p.name: p
    for p in (
        _transition("transition-1-symmetric", [SYM_1], CENTER),
        _transition("transition-1-asymmetric", [ASYM_1], CENTER),
        _transition("transition-2-symmetric", [SYM_1, SYM_2], DIAGONAL),
        _transition("transition-2-asymmetric", [ASYM_1, ASYM_2], DIAGONAL),
        _animation_2("animation-2-symmetric", SYM_1, SYM_2),
        _animation_2("animation-2-asymmetric", ASYM_1, ASYM_2),
        _animation_4("animation-4-symmetric", SYM_1, SYM_2),
        _animation_4("animation-4-asymmetric", ASYM_1, ASYM_2),
        _animation_2("long-2", SYM_1, LONG),
        _animation_4("long-4", SYM_1, LONG),
        _animation_2("repetitive-2", REP_1, REP_2),
        _animation_4("repetitive-4", REP_1, REP_2),
    )
}


def preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPresetError(name) from None


_TERM = re.compile(r"^\s*(?:(\d+)\s*\*?\s*)?([mn])\s*(?:/\s*(\d+))?\s*$")


def _resolve_term(term: str, m: int, n: int) -> int:
    term = term.strip()
    if re.fullmatch(r"-?\d+", term):
        return int(term)
    match = _TERM.match(term)
    if not match:
        raise PositionError(f"cannot parse position term {term!r}")
    k, letter, d = match.groups()
    size = m if letter == "m" else n
    k = int(k) if k else 1
    d = int(d) if d else 1
    if d == 0:
        raise PositionError(f"division by zero in position term {term!r}")
    return k * size // d


def resolve_position(text, m: int, n: int) -> tuple[int, int]:
    """Resolve ``"row,col"`` (optionally parenthesised) to in-bounds integers."""
    if isinstance(text, (tuple, list)):
        parts = [str(p) for p in text]
    else:
        parts = str(text).strip().strip("()[]").split(",")
    if len(parts) != 2:
        raise PositionError(f"position {text!r} must have exactly two terms")
    row, col = (_resolve_term(p, m, n) for p in parts)
    if not (0 <= row < m and 0 <= col < n):
        raise PositionError(f"position {text!r} -> ({row}, {col}) is outside the {m}x{n} canvas")
    return row, col
