import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_image
from oracles import naive_animation
from quasiwalk.animation import (
    AgentSpec,
    ConfigurationError,
    RunAborted,
    SnapshotSchedule,
    advance,
    advance_many,
    init_animation,
    make_transition,
    run,
)
from quasiwalk.imaging import ImageBuffer, changed_pixels
from quasiwalk.walk import Direction


def white(m, n):
    return ImageBuffer.solid(m, n, (255, 255, 255))


def test_init_single_agent_center():
    start, target = white(400, 400), ImageBuffer.solid(400, 400, (0, 0, 0))
    state = make_transition(start, target, [AgentSpec("RDLU", (200, 200))])
    assert changed_pixels(state.canvas, start) == 1
    assert state.canvas[200, 200] == (0, 0, 0)
    assert state.t == 0 and not state.agents[0].counters.any()


def test_init_two_agents_quarters():
    start, target = white(400, 400), random_image(400, 400, 0)
    state = make_transition(start, target, [AgentSpec("RDLU", (100, 100)), AgentSpec("ULDR", (300, 300))])
    assert changed_pixels(state.canvas, start) <= 2
    assert state.painted.sum() == 2


def test_init_no_agents():
    start = random_image(6, 6, 1)
    state = init_animation(start, [])
    assert state.canvas == start and state.coverage() == 0.0


def test_init_errors():
    start = white(4, 4)
    with pytest.raises(ConfigurationError):
        init_animation(start, [AgentSpec("R", (0, 0), white(4, 5))])
    with pytest.raises(ConfigurationError):
        init_animation(start, [AgentSpec("R", (0, 0), white(4, 4), id=3),
                               AgentSpec("R", (1, 1), white(4, 4), id=3)])
    with pytest.raises(ConfigurationError):
        init_animation(start, [AgentSpec("R", (4, 0), white(4, 4))])
    with pytest.raises(ConfigurationError):
        init_animation(start, [AgentSpec("R", (0, 0))])
    with pytest.raises(ConfigurationError):
        make_transition(start, white(5, 5), [AgentSpec("R", (0, 0))])


def test_agents_sorted_by_id():
    t = white(4, 4)
    state = init_animation(t, [AgentSpec("R", (0, 0), t, id=5), AgentSpec("D", (1, 1), t, id=2)])
    assert [a.id for a in state.agents] == [2, 5]


def test_collision_highest_id_paints_last():
    # both agents step onto (0, 1) in the same global step
    m, n = 3, 3
    start = white(m, n)
    red, blue = ImageBuffer.solid(m, n, (255, 0, 0)), ImageBuffer.solid(m, n, (0, 0, 255))
    specs = [AgentSpec("R", (0, 0), blue, id=2), AgentSpec("L", (0, 2), red, id=1)]
    state = init_animation(start, specs, 1)
    assert advance(state)
    assert state.agents[0].pos == state.agents[1].pos == (0, 1)
    assert state.canvas[0, 1] == (0, 0, 255)


def test_advance_single_agent():
    start, target = white(5, 5), ImageBuffer.solid(5, 5, (0, 0, 0))
    state = make_transition(start, target, [AgentSpec("RDLU", (2, 2))], 10)
    before = state.canvas.copy()
    assert advance(state) and state.t == 1
    assert changed_pixels(before, state.canvas) == 1


def test_advance_budget_exhausted_is_noop():
    state = make_transition(white(3, 3), random_image(3, 3, 0), [AgentSpec("RDLU", (1, 1))], 2)
    assert advance(state) and advance(state)
    snapshot = state.canvas.copy(), state.agents[0].counters.copy()
    assert not advance(state)
    assert state.t == 2
    assert state.canvas == snapshot[0] and np.array_equal(state.agents[0].counters, snapshot[1])
    assert advance_many(state, 10) == 0


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.text(alphabet="RDLU", min_size=1, max_size=8), min_size=1, max_size=4),
    st.integers(1, 9), st.integers(1, 9), st.integers(0, 400), st.integers(0, 2**31),
)
def test_per_step_delta_bound(seqs, m, n, steps, seed):
    rng = np.random.default_rng(seed)
    specs = [AgentSpec(s, (int(rng.integers(m)), int(rng.integers(n))), random_image(m, n, seed + i))
             for i, s in enumerate(seqs)]
    state = init_animation(random_image(m, n, seed), specs, steps)
    prev_painted = state.painted.copy()
    prev = state.canvas.copy()
    while advance(state):
        assert changed_pixels(prev, state.canvas) <= len(seqs)
        assert np.all(state.painted >= prev_painted)
        prev, prev_painted = state.canvas.copy(), state.painted.copy()


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.text(alphabet="RDLU", min_size=1, max_size=8), min_size=1, max_size=4),
    st.integers(1, 10), st.integers(1, 10), st.integers(0, 500), st.integers(0, 2**31),
    st.booleans(),
)
def test_kernel_matches_python_stepper(seqs, m, n, steps, seed, baseline):
    def build():
        rng = np.random.default_rng(seed)
        specs = [AgentSpec(s, (int(rng.integers(m)), int(rng.integers(n))), random_image(m, n, seed + i))
                 for i, s in enumerate(seqs)]
        return init_animation(random_image(m, n, seed), specs, steps,
                              seed=seed if baseline else None)

    slow, fast = build(), build()
    while advance(slow):
        pass
    advance_many(fast, steps // 3)
    advance_many(fast, steps)
    assert fast.t == slow.t == steps
    assert fast.canvas == slow.canvas
    assert np.array_equal(fast.painted, slow.painted)
    for a, b in zip(slow.agents, fast.agents):
        assert a.pos == b.pos
        assert np.array_equal(a.counters, b.counters)
        assert np.array_equal(a.census, b.census)


def test_engine_matches_naive_reference():
    m, n, steps = 9, 11, 3000
    start = random_image(m, n, 0)
    targets = [random_image(m, n, 1), random_image(m, n, 2), random_image(m, n, 3)]
    seqs, pos = ["RDLU", "RDLUR", "URRR"], [(0, 0), (4, 5), (8, 10)]
    state = init_animation(start, [AgentSpec(s, p, t) for s, p, t in zip(seqs, pos, targets)], steps)
    run(state)
    to_lists = lambda img: [[tuple(px) for px in row] for row in img.pixels.tolist()]
    X, C, P = naive_animation(to_lists(start), [to_lists(t) for t in targets], seqs, pos, steps)
    assert to_lists(state.canvas) == X
    assert [a.counters.tolist() for a in state.agents] == C
    assert [list(a.pos) for a in state.agents] == P


def test_agent_trajectories_are_independent():
    m, n = 12, 10
    start = white(m, n)
    seqs, pos = ["RDLUR", "ULDRU", "URRR"], [(3, 2), (9, 7), (0, 0)]
    multi = init_animation(start, [AgentSpec(s, p, random_image(m, n, i))
                                   for i, (s, p) in enumerate(zip(seqs, pos))], 5000)
    run(multi)
    for i, (s, p) in enumerate(zip(seqs, pos)):
        solo = init_animation(start, [AgentSpec(s, p, white(m, n))], 5000)
        run(solo)
        assert solo.agents[0].pos == multi.agents[i].pos
        assert np.array_equal(solo.agents[0].counters, multi.agents[i].counters)


def test_canvas_only_holds_start_or_target_values():
    m, n = 8, 8
    start = ImageBuffer.solid(m, n, (1, 1, 1))
    targets = [ImageBuffer.solid(m, n, (2, 2, 2)), ImageBuffer.solid(m, n, (3, 3, 3))]
    state = init_animation(start, [AgentSpec("RDLUR", (0, 0), targets[0]),
                                   AgentSpec("ULDRU", (4, 4), targets[1])], 500)
    run(state)
    assert set(np.unique(state.canvas.pixels)) <= {1, 2, 3}
    assert np.array_equal(state.canvas.pixels[..., 0] != 1, state.painted)


def test_run_exact_step_count_at_full_scale():
    start, target = white(400, 400), random_image(400, 400, 9)
    state = make_transition(start, target, [AgentSpec("RDLU", (200, 200))], 5_000_000)
    report = run(state)
    assert report.steps == state.t == 5_000_000
    assert sum(report.census[1].values()) == 5_000_000


def test_run_schedule_zero_only():
    state = make_transition(white(6, 6), random_image(6, 6, 0), [AgentSpec("RDLU", (3, 3))], 50)
    init = state.canvas.copy()
    seen = []
    report = run(state, SnapshotSchedule(steps=(0,)), lambda t, img: seen.append((t, img)))
    assert [t for t, _ in seen] == [0] and seen[0][1] == init
    assert report.snapshots == 1 and report.steps == 50


def test_run_zero_budget():
    state = make_transition(white(6, 6), random_image(6, 6, 0), [AgentSpec("RDLU", (3, 3)),
                                                                  AgentSpec("ULDR", (0, 0))], 0)
    report = run(state, SnapshotSchedule(every=1), lambda t, img: None)
    assert report.steps == 0 and report.snapshots == 1
    assert report.coverage == 2 / 36


def test_snapshots_are_copies_taken_after_full_step():
    state = make_transition(white(8, 8), random_image(8, 8, 0),
                            [AgentSpec("RDLU", (0, 0)), AgentSpec("ULDR", (4, 4))], 30)
    ref = make_transition(white(8, 8), random_image(8, 8, 0),
                          [AgentSpec("RDLU", (0, 0)), AgentSpec("ULDR", (4, 4))], 30)
    shots = {}
    run(state, SnapshotSchedule(every=10), lambda t, img: shots.__setitem__(t, img))
    assert sorted(shots) == [0, 10, 20, 30]
    for t in range(31):
        if t in shots:
            assert shots[t] == ref.canvas
        advance(ref)


def test_replay_identical():
    def once():
        state = init_animation(random_image(16, 16, 0),
                               [AgentSpec("RDLUR", (4, 4), random_image(16, 16, 1)),
                                AgentSpec("ULDRU", (12, 12), random_image(16, 16, 2))], 4000)
        frames = []
        report = run(state, SnapshotSchedule(every=500), lambda t, img: frames.append((t, img.tobytes())))
        return frames, report.lines(include_wall_time=False)

    assert once() == once()


def test_baseline_seed_behaviour():
    def final(seed):
        state = make_transition(white(32, 32), random_image(32, 32, 0),
                                [AgentSpec("RDLU", (16, 16))], 20_000, seed=seed)
        report = run(state)
        assert report.baseline and "PCG64" in report.rng_algorithm
        return state.canvas.tobytes(), state.agents[0].pos, tuple(state.agents[0].census)

    assert final(5) == final(5)
    assert final(5) != final(6)


def test_transition_full_cover_and_fixpoint():
    m = n = 32
    start, target = random_image(m, n, 0), random_image(m, n, 1)
    state = make_transition(start, target, [AgentSpec("RDLU", (16, 16))], 200_000)
    while not state.painted.all():
        advance(state)
    assert state.canvas == target
    shots = []
    run(state, SnapshotSchedule(every=1000), lambda t, img: shots.append(img))
    assert shots and all(img == target for img in shots)


def test_two_agent_transition_grows_two_patches():
    m = n = 32
    start, target = white(m, n), ImageBuffer.solid(m, n, (0, 0, 0))
    state = make_transition(start, target, [AgentSpec("RDLU", (8, 8)), AgentSpec("ULDR", (24, 24))],
                            100_000)
    advance_many(state, 10)
    painted = np.argwhere(state.painted)
    near = [min(abs(r - 8) + abs(c - 8), abs(r - 24) + abs(c - 24)) for r, c in painted]
    assert max(near) <= 11
    run(state)
    assert state.canvas == target


def test_transition_target_equals_start_never_changes():
    img = random_image(10, 10, 4)
    state = make_transition(img, img.copy(), [AgentSpec("RDLUR", (5, 5))], 2000)
    shots = []
    run(state, SnapshotSchedule(every=100), lambda t, shot: shots.append(shot))
    assert len(shots) == 21 and all(shot == img for shot in shots)


def test_sink_failure_aborts_with_partial_report():
    state = make_transition(white(8, 8), random_image(8, 8, 0), [AgentSpec("RDLU", (0, 0))], 100)

    def sink(t, img):
        if t == 30:
            raise OSError("disk full")

    with pytest.raises(RunAborted) as info:
        run(state, SnapshotSchedule(every=10), sink)
    assert info.value.report.steps == 30
    assert info.value.report.snapshots == 3
    assert isinstance(info.value.__cause__, OSError)


def test_schedule_validation():
    assert SnapshotSchedule(every=100_000).points(5_000_000)[:2] == [0, 100_000]
    assert len(SnapshotSchedule(every=100_000).points(5_000_000)) == 51
    assert SnapshotSchedule(every=3).points(10) == [0, 3, 6, 9]
    with pytest.raises(ConfigurationError):
        SnapshotSchedule(steps=(5, 5))
    with pytest.raises(ConfigurationError):
        SnapshotSchedule(steps=(1, 20)).points(10)
    with pytest.raises(ConfigurationError):
        SnapshotSchedule(every=0)
    with pytest.raises(ConfigurationError):
        SnapshotSchedule()


def test_report_lines_and_rows():
    state = make_transition(white(4, 4), random_image(4, 4, 0), [AgentSpec("RDLUR", (0, 0))], 10)
    report = run(state)
    lines = report.lines()
    assert "steps: 10" in lines and "coverage: " + f"{report.coverage:.6f}" in lines
    assert any(line.startswith("census.agent1: R=") for line in lines)
    assert lines[-1].startswith("wall_time_s: ")
    assert not any(l.startswith("wall_time") for l in report.lines(include_wall_time=False))
    row = report.rows()[0]
    assert row["agent"] == 1 and sum(row[d.name.lower()] for d in Direction) == 10
