"""Multi-agent rotor-router walks that repaint images, plus frame metrics."""

__version__ = "0.1.0"

from .animation import (
    AgentSpec,
    AnimationState,
    RunReport,
    SnapshotSchedule,
    advance,
    advance_many,
    init_animation,
    make_transition,
    run,
)
from .features import (
    FeatureRecord,
    benford_feature,
    colorfulness,
    feature_series,
    global_contrast_factor,
    mean_hue,
)
from .imaging import HueShiftSpec, ImageBuffer, load_png, recolor, save_png
from .presets import preset
from .walk import (
    Agent,
    Direction,
    GridDims,
    RotorSequence,
    direction_census,
    neighbor,
    parse_sequence,
    random_step_agent,
    step_agent,
)
