"""Command-line driver.

    quasiwalk run CONFIG [--out DIR] [--frames-every N] [--t-max N]
                         [--preset NAME] [--size MxN] [--baseline --seed N]
                         [--validate-only]
    quasiwalk presets

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 internal
invariant violation. Failures print one ``error[CODE]: message`` line.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from ._atomic import atomic_write
from .animation import AgentSpec, ConfigurationError, RunAborted, init_animation, run
from .config import (
    ConfigError,
    RunConfig,
    agent_target,
    config_from_dict,
    load_source,
    parse_config_text,
    read_config_dict,
    validate,
)
from .features import FeatureRecord, write_csv
from .imaging import ImageError, save_png
from .presets import PRESETS, UnknownPresetError, resolve_position
from .walk import SequenceParseError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INVARIANT = 0, 2, 3, 4

REPORT_CONFIG_MARKER = "--- config ---"


class InvariantViolation(RuntimeError):
    pass


def frame_name(step: int) -> str:
    return f"frame_{step:09d}.png"


def build_state(cfg: RunConfig, size):
    start = load_source(cfg.start, cfg.base_dir, size)
    m, n = size
    cache = {}
    specs = []
    shared = load_source(cfg.target, cfg.base_dir, size) if cfg.mode == "transition" else None
    for a in cfg.agents:
        target = shared if shared is not None else agent_target(a, cfg.base_dir, size, cache)
        specs.append(AgentSpec(a.sequence, resolve_position(a.position, m, n), target))
    seed = cfg.seed if cfg.baseline else None
    return init_animation(start, specs, cfg.t_max, seed=seed)


def execute(cfg: RunConfig, *, log=print) -> int:
    """Run a validated config, writing frames, features.csv and report.txt."""
    m, n = validate(cfg)
    state = build_state(cfg, (m, n))
    out = Path(cfg.out)
    if not out.is_absolute():
        out = cfg.base_dir / out
    out.mkdir(parents=True, exist_ok=True)

    scored = []
    with ThreadPoolExecutor(max_workers=2) as pool:
        def sink(step, img):
            save_png(img, out / frame_name(step))
            scored.append(pool.submit(FeatureRecord.of, step, img))

        report = run(state, cfg.schedule, sink)
        records = [f.result() for f in scored]
    write_csv(records, out / "features.csv")

    check_invariants(cfg, state, report, records)
    lines = [
        f"engine: quasiwalk {__version__}",
        f"preset: {cfg.preset or '-'}",
        f"mode: {cfg.mode}",
        f"size: {m}x{n}",
        f"agents: {len(state.agents)}",
        *report.lines(),
        f"frames: {len(records)}",
        "features: features.csv",
        "",
        REPORT_CONFIG_MARKER,
        cfg.to_toml(),
    ]
    atomic_write(out / "report.txt", "\n".join(lines).encode())
    log(f"wrote {len(records)} frames, features.csv and report.txt to {out}")
    log(f"coverage {report.coverage:.6f} after {report.steps} steps ({report.wall_time:.2f}s)")
    return EXIT_OK


def check_invariants(cfg, state, report, records):
    if state.t != cfg.t_max:
        raise InvariantViolation(f"stopped at step {state.t}, expected {cfg.t_max}")
    for a in state.agents:
        if int(a.census.sum()) != cfg.t_max:
            raise InvariantViolation(f"agent {a.id} moved {a.census.sum()} times, not {cfg.t_max}")
    if not 0.0 <= report.coverage <= 1.0:
        raise InvariantViolation(f"coverage {report.coverage} outside [0, 1]")
    expected = cfg.schedule.points(cfg.t_max)
    if [r.step for r in records] != expected:
        raise InvariantViolation("snapshot steps do not match the schedule")
    if cfg.mode == "transition" and state.painted.all():
        if not np.array_equal(state.canvas.pixels, state.agents[0].target.pixels):
            raise InvariantViolation("fully covered transition canvas differs from target")


def config_from_report(path) -> RunConfig:
    """Re-parse the config echoed at the end of a ``report.txt``."""
    text = Path(path).read_text()
    _, _, echo = text.partition(REPORT_CONFIG_MARKER + "\n")
    return parse_config_text(echo, Path(path).parent, str(path))


def _load_config(args) -> RunConfig:
    if args.config:
        path = Path(args.config)
        data = read_config_dict(path)
        if args.preset:
            data["preset"] = args.preset
        cfg = config_from_dict(data, path.parent.resolve(), str(path))
    elif args.preset:
        cfg = config_from_dict({"preset": args.preset}, Path.cwd(), "--preset")
    else:
        raise ConfigError("give a config file or --preset")
    overrides = {}
    if args.out is not None:
        overrides["out"] = args.out
    if args.t_max is not None:
        overrides["t_max"] = args.t_max
    if args.frames_every is not None:
        overrides.update(frames_every=args.frames_every, frames=None)
    if args.size is not None:
        overrides["size"] = args.size
    if args.baseline:
        overrides.update(baseline=True, seed=args.seed if args.seed is not None else 0)
    elif args.seed is not None:
        overrides["seed"] = args.seed
    return replace(cfg, **overrides)


def _size(text):
    try:
        m, n = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MxN, got {text!r}") from None
    if m < 1 or n < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return m, n


def _non_negative(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasiwalk", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"quasiwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a simulation config")
    p.add_argument("config", nargs="?", help="TOML run config")
    p.add_argument("--out", help="output directory")
    p.add_argument("--frames-every", type=_positive, metavar="N")
    p.add_argument("--t-max", type=_non_negative, metavar="N")
    p.add_argument("--preset", metavar="NAME")
    p.add_argument("--size", type=_size, metavar="MxN", help="canvas size override")
    p.add_argument("--baseline", action="store_true", help="classical random walk instead of rotors")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--validate-only", action="store_true")

    sub.add_parser("presets", help="list built-in experiment presets")
    return parser


def _fail(code, tag, message):
    print(f"error[{tag}]: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "presets":
        for name, p in PRESETS.items():
            seqs = " ".join(a.sequence for a in p.agents)
            print(f"{name:26s} {p.mode:10s} agents={len(p.agents)}  {seqs}")
        return EXIT_OK
    try:
        cfg = _load_config(args)
        if args.validate_only:
            m, n = validate(cfg, dry_run=True)
            print(f"ok: {cfg.mode}, {len(cfg.agents)} agents, {m}x{n}, t_max={cfg.t_max}")
            return EXIT_OK
        return execute(cfg)
    except (ConfigError, ConfigurationError, SequenceParseError, UnknownPresetError) as exc:
        return _fail(EXIT_CONFIG, "E_CONFIG", _one_line(exc))
    except RunAborted as exc:
        cause = exc.__cause__
        if isinstance(cause, (ImageError, OSError)):
            return _fail(EXIT_IO, "E_IO", _one_line(exc))
        return _fail(EXIT_INVARIANT, "E_INTERNAL", _one_line(exc))
    except (ImageError, OSError) as exc:
        return _fail(EXIT_IO, "E_IO", _one_line(exc))
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, "E_INVARIANT", _one_line(exc))


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
