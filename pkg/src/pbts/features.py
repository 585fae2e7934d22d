"""Object features (surfaces and edges) and reference poses.

A feature fixes which pose components touch can recover in its contact frame
(the *predictable* components) and which leave the contact unchanged (the
*invariant* components, used as exploration steps in the reference).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .pose import COMPONENTS, Pose

DEPTH_RANGE = (-5.0, -1.0)
MAX_STEP = 2.0


class FeatureKind(enum.Enum):
    SURFACE = "surface"
    EDGE = "edge"


@dataclass(frozen=True)
class FeatureClass:
    kind: FeatureKind
    predictable_mask: tuple[bool, ...]

    @property
    def invariant_mask(self) -> tuple[bool, ...]:
        return tuple(not m for m in self.predictable_mask)

    @property
    def predictable(self) -> tuple[str, ...]:
        return tuple(c for c, m in zip(COMPONENTS, self.predictable_mask) if m)

    @property
    def invariant(self) -> tuple[str, ...]:
        return tuple(c for c, m in zip(COMPONENTS, self.predictable_mask) if not m)

    @property
    def name(self) -> str:
        return self.kind.value


SURFACE = FeatureClass(FeatureKind.SURFACE, (False, False, True, True, True, False))
EDGE = FeatureClass(FeatureKind.EDGE, (True, False, True, True, True, True))


def feature_from_name(name: str) -> FeatureClass:
    try:
        return {"surface": SURFACE, "edge": EDGE}[name.lower()]
    except KeyError:
        raise ValueError(f"unknown feature {name!r}; expected 'surface' or 'edge'") from None


@dataclass(frozen=True)
class ReferenceSpec:
    pose: Pose
    feature: FeatureClass


def project_predictable(feature: FeatureClass, pose: Pose) -> Pose:
    """Zero the components that touch cannot observe for this feature."""
    return Pose(*(v if m else 0.0 for v, m in zip(pose.as_tuple(), feature.predictable_mask)))


def surface_step(phi_deg: float, step: float = 1.0) -> tuple[float, float]:
    """Exploration step of length ``step`` in direction ``phi_deg`` on a surface."""
    phi = math.radians(phi_deg)
    return (step * math.cos(phi), step * math.sin(phi))


def default_reference(
    feature: FeatureClass, step: float | Sequence[float] = 1.0, depth: float = -3.0
) -> ReferenceSpec:
    """Reference holding the sensor normal to the feature at ``depth``.

    Surfaces take a 2D step (or a scalar step along x); edges take a scalar
    step along the edge.
    """
    if not DEPTH_RANGE[0] <= depth <= DEPTH_RANGE[1]:
        raise ValueError(f"depth {depth} mm outside trained range {list(DEPTH_RANGE)}")
    if feature.kind is FeatureKind.SURFACE:
        sx, sy = (float(step), 0.0) if isinstance(step, (int, float)) else map(float, step)
        if math.hypot(sx, sy) > MAX_STEP:
            raise ValueError(f"exploration step {math.hypot(sx, sy):.3g} mm exceeds {MAX_STEP} mm")
        return ReferenceSpec(Pose(sx, sy, depth), feature)
    if not isinstance(step, (int, float)):
        raise ValueError("edge exploration step must be a scalar (along the edge)")
    if abs(step) > MAX_STEP:
        raise ValueError(f"exploration step {step} mm exceeds {MAX_STEP} mm")
    return ReferenceSpec(Pose(0.0, float(step), depth), feature)


def validate_reference(spec: ReferenceSpec, ranges: Mapping[str, tuple[float, float]]) -> list[str]:
    """List the predictable reference components outside the perception ranges.

    An empty list means the reference is valid. ``ranges`` maps component
    names to closed intervals (a ``PoseRanges`` works).
    """
    problems = []
    values = dict(zip(COMPONENTS, spec.pose.as_tuple()))
    for name in spec.feature.predictable:
        lo, hi = ranges[name]
        v = values[name]
        if not lo <= v <= hi:
            problems.append(f"{name}={v:g} outside [{lo:g}, {hi:g}]")
    return problems
