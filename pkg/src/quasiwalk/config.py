"""Run configuration: TOML parsing, validation and echo.

Example::

    preset = "animation-4-symmetric"   # optional; keys below override it
    mode = "animation"                 # or "transition"
    t_max = 5000000
    out = "runs/a4"

    [canvas]
    size = [400, 400]                  # optional when an image file fixes it
    start = "start.png"                # or "color:#FFFFFF", "synthetic:warm"
    target = "target.png"              # transition mode only

    [schedule]
    every = 100000                     # or: steps = [0, 1000, 5000]

    [[agents]]
    sequence = "RDLU"
    position = "m/4,n/4"
    target = "a.png"                   # or: recolor_of = "a.png", hue_shift = 90

Relative image paths resolve against the config file's directory. Giving
``[[agents]]`` replaces a preset's agents wholesale.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .animation import SnapshotSchedule
from .imaging import ImageBuffer, HueShiftSpec, load_png, parse_hex_color, recolor, synthetic
from .presets import PositionError, preset, resolve_position
from .walk import RotorSequence, SequenceParseError

MODES = ("transition", "animation")


class ConfigError(ValueError):
    def __init__(self, message, key=None, where=None):
        self.key = key
        self.where = where
        loc = ""
        if where:
            loc += f"{where}: "
        if key:
            loc += f"[{key}] "
        super().__init__(loc + message)


@dataclass
class AgentConfig:
    sequence: RotorSequence
    position: str
    target: str | None = None
    recolor_of: str | None = None
    hue_shift: float = 0.0


@dataclass
class RunConfig:
    mode: str
    start: str
    agents: list[AgentConfig]
    t_max: int
    size: tuple[int, int] | None = None
    target: str | None = None
    frames_every: int | None = None
    frames: list[int] | None = None
    out: str = "out"
    baseline: bool = False
    seed: int | None = None
    preset: str | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def schedule(self) -> SnapshotSchedule:
        if self.frames is not None:
            return SnapshotSchedule(steps=tuple(self.frames))
        if self.frames_every is not None:
            return SnapshotSchedule(every=self.frames_every)
        return SnapshotSchedule(steps=(0, self.t_max) if self.t_max else (0,))

    def to_toml(self) -> str:
        """Self-contained echo; image paths are made absolute."""
        q = json.dumps
        lines = []
        if self.preset:
            lines.append(f"preset = {q(self.preset)}")
        lines += [f"mode = {q(self.mode)}", f"t_max = {self.t_max}", f"out = {q(self.out)}"]
        if self.baseline:
            lines += ["baseline = true", f"seed = {self.seed}"]
        lines += ["", "[canvas]"]
        if self.size:
            lines.append(f"size = [{self.size[0]}, {self.size[1]}]")
        lines.append(f"start = {q(self._abs(self.start))}")
        if self.target:
            lines.append(f"target = {q(self._abs(self.target))}")
        lines += ["", "[schedule]"]
        if self.frames is not None:
            lines.append(f"steps = [{', '.join(map(str, self.frames))}]")
        elif self.frames_every is not None:
            lines.append(f"every = {self.frames_every}")
        for a in self.agents:
            lines += ["", "[[agents]]", f"sequence = {q(str(a.sequence))}",
                      f"position = {q(a.position)}"]
            if a.target:
                lines.append(f"target = {q(self._abs(a.target))}")
            if a.recolor_of:
                lines.append(f"recolor_of = {q(self._abs(a.recolor_of))}")
                lines.append(f"hue_shift = {a.hue_shift!r}")
        return "\n".join(lines) + "\n"

    def _abs(self, source: str) -> str:
        if ":" in source and source.split(":", 1)[0] in ("color", "synthetic"):
            return source
        return str((self.base_dir / source).resolve())

    def equivalent(self, other: RunConfig) -> bool:
        """Same run, ignoring where relative paths were written from."""
        return self.to_toml() == other.to_toml()


# --- loading -----------------------------------------------------------------

_TOP_KEYS = {"preset", "mode", "t_max", "out", "baseline", "seed", "canvas", "schedule", "agents"}
_CANVAS_KEYS = {"size", "start", "target"}
_SCHEDULE_KEYS = {"every", "steps"}
_AGENT_KEYS = {"sequence", "position", "target", "recolor_of", "hue_shift"}


def _reject_unknown(table, allowed, section, where):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(allowed))})",
                              f"{section}{key}", where)


def _typed(table, key, types, section, where, required=False):
    if key not in table:
        if required:
            raise ConfigError("missing required key", f"{section}{key}", where)
        return None
    value = table[key]
    # bool is an int subclass; never accept it where a number is wanted
    if isinstance(value, bool) and bool not in types:
        ok = False
    else:
        ok = isinstance(value, types)
    if not ok:
        names = " or ".join(t.__name__ for t in types)
        raise ConfigError(f"expected {names}, got {type(value).__name__}", f"{section}{key}", where)
    return value


def _int_list(value, key, where, length=None):
    if not isinstance(value, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError("expected a list of integers", key, where)
    if length is not None and len(value) != length:
        raise ConfigError(f"expected {length} integers", key, where)
    return value


def parse_config_text(text: str, base_dir=None, where: str = "<config>") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", where=where) from exc
    return config_from_dict(data, Path(base_dir) if base_dir else Path.cwd(), where)


def read_config_dict(path) -> dict:
    path = Path(path)
    try:
        return tomllib.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError("config file not found", where=str(path)) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", where=str(path)) from exc


def parse_config(path) -> RunConfig:
    """Load and fully validate a config file."""
    path = Path(path)
    cfg = config_from_dict(read_config_dict(path), path.parent.resolve(), str(path))
    validate(cfg, str(path))
    return cfg


def config_from_dict(data: dict, base_dir: Path, where: str = "<config>") -> RunConfig:
    _reject_unknown(data, _TOP_KEYS, "", where)
    preset_name = _typed(data, "preset", (str,), "", where)
    if preset_name is not None:
        try:
            cfg = from_preset(preset_name)
        except KeyError as exc:
            raise ConfigError(str(exc), "preset", where) from None
    else:
        cfg = None

    canvas = _typed(data, "canvas", (dict,), "", where) or {}
    _reject_unknown(canvas, _CANVAS_KEYS, "canvas.", where)
    schedule = _typed(data, "schedule", (dict,), "", where) or {}
    _reject_unknown(schedule, _SCHEDULE_KEYS, "schedule.", where)

    mode = _typed(data, "mode", (str,), "", where, required=cfg is None)
    if mode is not None and mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}", "mode", where)
    start = _typed(canvas, "start", (str,), "canvas.", where, required=cfg is None)
    t_max = _typed(data, "t_max", (int,), "", where, required=cfg is None)
    if t_max is not None and t_max < 0:
        raise ConfigError("must be non-negative", "t_max", where)

    agents = None
    if "agents" in data:
        raw = data["agents"]
        if not isinstance(raw, list) or not all(isinstance(a, dict) for a in raw):
            raise ConfigError("expected an array of tables ([[agents]])", "agents", where)
        agents = [_agent(a, i, where) for i, a in enumerate(raw)]
    elif cfg is None:
        raise ConfigError("missing required key", "agents", where)

    size = None
    if "size" in canvas:
        size = tuple(_int_list(canvas["size"], "canvas.size", where, length=2))
        if min(size) < 1:
            raise ConfigError("dimensions must be positive", "canvas.size", where)

    every = _typed(schedule, "every", (int,), "schedule.", where)
    steps = None
    if "steps" in schedule:
        steps = _int_list(schedule["steps"], "schedule.steps", where)
    if every is not None and steps is not None:
        raise ConfigError("give either every or steps, not both", "schedule", where)
    if every is not None and every < 1:
        raise ConfigError("must be >= 1", "schedule.every", where)

    seed = _typed(data, "seed", (int,), "", where)
    baseline = _typed(data, "baseline", (bool,), "", where)

    updates = {
        "mode": mode,
        "start": start,
        "target": _typed(canvas, "target", (str,), "canvas.", where),
        "agents": agents,
        "t_max": t_max,
        "size": size,
        "out": _typed(data, "out", (str,), "", where),
        "baseline": baseline,
        "seed": seed,
    }
    updates = {k: v for k, v in updates.items() if v is not None}
    if every is not None:
        updates.update(frames_every=every, frames=None)
    if steps is not None:
        updates.update(frames=list(steps), frames_every=None)
    if cfg is None:
        cfg = RunConfig(**updates)
    else:
        cfg = replace(cfg, **updates)
    cfg.base_dir = base_dir
    if cfg.baseline and cfg.seed is None:
        cfg.seed = 0
    return cfg


def _agent(table, index, where) -> AgentConfig:
    section = f"agents[{index}]."
    _reject_unknown(table, _AGENT_KEYS, section, where)
    text = _typed(table, "sequence", (str,), section, where, required=True)
    try:
        seq = RotorSequence.parse(text)
    except SequenceParseError as exc:
        raise ConfigError(str(exc), section + "sequence", where) from None
    position = table.get("position")
    if isinstance(position, list):
        position = ",".join(str(p) for p in _int_list(position, section + "position", where, 2))
    elif not isinstance(position, str):
        raise ConfigError("expected a string like \"m/4,n/4\" or [row, col]",
                          section + "position", where)
    target = _typed(table, "target", (str,), section, where)
    recolor_of = _typed(table, "recolor_of", (str,), section, where)
    hue = _typed(table, "hue_shift", (int, float), section, where)
    if target and recolor_of:
        raise ConfigError("give target or recolor_of, not both", section + "target", where)
    if hue is not None and not recolor_of:
        raise ConfigError("hue_shift needs recolor_of", section + "hue_shift", where)
    return AgentConfig(seq, position, target, recolor_of, float(hue or 0.0))


def from_preset(name: str) -> RunConfig:
    p = preset(name)
    agents = []
    for a in p.agents:
        if a.hue_shift is None:
            agents.append(AgentConfig(RotorSequence.parse(a.sequence), a.position, a.target))
        else:
            agents.append(AgentConfig(RotorSequence.parse(a.sequence), a.position,
                                      recolor_of=a.target, hue_shift=a.hue_shift))
    return RunConfig(mode=p.mode, start=p.start, target=p.target, agents=agents,
                     t_max=p.t_max, size=p.size, preset=p.name)


# --- validation & image resolution ---------------------------------------------

def _is_file_source(source: str) -> bool:
    return not source.startswith(("color:", "synthetic:"))


def _sources(cfg: RunConfig):
    yield "canvas.start", cfg.start
    if cfg.target:
        yield "canvas.target", cfg.target
    for i, a in enumerate(cfg.agents):
        if a.target:
            yield f"agents[{i}].target", a.target
        if a.recolor_of:
            yield f"agents[{i}].recolor_of", a.recolor_of


def canvas_size(cfg: RunConfig, where="<config>") -> tuple[int, int]:
    if cfg.size:
        return cfg.size
    for key, src in _sources(cfg):
        if _is_file_source(src):
            return load_png(cfg.base_dir / src).shape
    raise ConfigError("no image file fixes the canvas size; set canvas.size", "canvas.size", where)


def validate(cfg: RunConfig, where="<config>", dry_run=False) -> tuple[int, int]:
    """Check cross-field constraints; returns the resolved canvas size."""
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}", "mode", where)
    if not cfg.agents and not dry_run:
        raise ConfigError("at least one agent is required", "agents", where)
    for key, src in _sources(cfg):
        if src.startswith("color:"):
            try:
                parse_hex_color(src[len("color:"):])
            except ValueError as exc:
                raise ConfigError(str(exc), key, where) from None
        elif src.startswith("synthetic:"):
            continue
        elif not (cfg.base_dir / src).is_file():
            raise ConfigError(f"image not found: {cfg.base_dir / src}", key, where)
    if cfg.mode == "transition":
        if not cfg.target:
            raise ConfigError("transition mode needs canvas.target", "canvas.target", where)
        for i, a in enumerate(cfg.agents):
            if a.target or a.recolor_of:
                raise ConfigError("per-agent images are not used in transition mode",
                                  f"agents[{i}].target", where)
    else:
        if cfg.target:
            raise ConfigError("canvas.target is only used in transition mode",
                              "canvas.target", where)
        for i, a in enumerate(cfg.agents):
            if not (a.target or a.recolor_of):
                raise ConfigError("animation agents need target or recolor_of",
                                  f"agents[{i}].target", where)
    m, n = canvas_size(cfg, where)
    for i, a in enumerate(cfg.agents):
        try:
            resolve_position(a.position, m, n)
        except PositionError as exc:
            raise ConfigError(str(exc), f"agents[{i}].position", where) from None
    if cfg.frames is not None:
        try:
            SnapshotSchedule(steps=tuple(cfg.frames)).points(cfg.t_max)
        except ValueError as exc:
            raise ConfigError(str(exc), "schedule.steps", where) from None
    return m, n


def load_source(source: str, base_dir: Path, size: tuple[int, int]) -> ImageBuffer:
    m, n = size
    if source.startswith("color:"):
        return ImageBuffer.solid(m, n, parse_hex_color(source[len("color:"):]))
    if source.startswith("synthetic:"):
        return synthetic(source[len("synthetic:"):], m, n)
    img = load_png(base_dir / source)
    if img.shape != (m, n):
        raise ConfigError(f"image {source} is {img.shape[0]}x{img.shape[1]}, canvas is {m}x{n}")
    return img


def agent_target(a: AgentConfig, base_dir: Path, size, cache: dict) -> ImageBuffer:
    src = a.target or a.recolor_of
    if src not in cache:
        cache[src] = load_source(src, base_dir, size)
    img = cache[src]
    if a.recolor_of:
        return recolor(img, HueShiftSpec(a.hue_shift))
    return img
