"""Deterministic headless choreography engine for spatiotemporal avatar
clones: spawning, static/synchronous/replayed modes, mirroring, scaling,
grouping, duplication, undo, control switching, and record/replay composition
into reusable automators."""

from .engine import Clone, Engine, Replayed, Static, Synchronous
from .geometry import Pose, Quat, RigidTransform, Vec3
from .world import BodyFrame, World, WorldConfig

__all__ = [
    "BodyFrame",
    "Clone",
    "Engine",
    "Pose",
    "Quat",
    "Replayed",
    "RigidTransform",
    "Static",
    "Synchronous",
    "Vec3",
    "World",
    "WorldConfig",
]

__version__ = "0.1.0"
