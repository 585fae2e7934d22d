"""Discrete-time PI servoing of the sensor pose towards a reference.

Each step: locate the contact frame on the object, read the (simulated)
perceived sensor pose in it, form the SE(3) pose error to the reference,
run a PI law with a clamped integral, and move the sensor by the resulting
correction expressed in its own frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .features import FeatureClass, FeatureKind, ReferenceSpec
from .geometry import ContactFrame, GeometryError, true_relative_pose
from .perception import PerceptionConfig, predict_pose
from .pose import Pose, apply_update, pose_error
from .record import RecordBuilder, TrajectoryRecord


def _vec6(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (6,):
        raise ValueError(f"{name} needs 6 components, got {a.shape[0]}")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite and non-negative: {a.tolist()}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GainConfig:
    """Diagonal PI gains and integral bounds (mm, mm, mm; deg, deg, deg)."""

    kp: np.ndarray
    ki: np.ndarray
    bounds: np.ndarray

    def __post_init__(self):
        for name in ("kp", "ki", "bounds"):
            object.__setattr__(self, name, _vec6(getattr(self, name), name))

    @classmethod
    def for_feature(cls, feature: FeatureClass) -> "GainConfig":
        if feature.kind is FeatureKind.SURFACE:
            return cls((1, 1, 0.5, 0.5, 0.5, 1), (0, 0, 0.3, 0.1, 0.1, 0), (0, 0, 5, 15, 15, 0))
        return cls((0.5, 1, 0.5, 0.5, 0.5, 0.5), (0.3, 0, 0.3, 0.1, 0.1, 0.1), (5, 0, 5, 15, 15, 45))

    def to_dict(self) -> dict:
        return {"kp": self.kp.tolist(), "ki": self.ki.tolist(), "bounds": self.bounds.tolist()}

    def __eq__(self, other):
        if not isinstance(other, GainConfig):
            return NotImplemented
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in ("kp", "ki", "bounds"))

    __hash__ = None


@dataclass(frozen=True)
class ControllerState:
    integral: tuple[float, ...] = (0.0,) * 6
    step_count: int = 0


def pi_step(state: ControllerState, error: Pose, gains: GainConfig) -> tuple[Pose, ControllerState]:
    """One PI update; the summed error is clamped componentwise to ``gains.bounds``."""
    e = np.array(error.as_tuple())
    integral = np.clip(np.array(state.integral) + e, -gains.bounds, gains.bounds)
    u = gains.kp * e + gains.ki * integral
    return Pose(*u), ControllerState(tuple(integral.tolist()), state.step_count + 1)


class StopReason(str, enum.Enum):
    MAX_STEPS = "max_steps"
    CLOSURE = "closure"
    CONTACT_LOSS = "contact_loss"
    WORKSPACE_EXIT = "workspace_exit"

    @property
    def success(self) -> bool:
        return self in (StopReason.MAX_STEPS, StopReason.CLOSURE)


@dataclass(frozen=True)
class StopCriteria:
    max_steps: int = 400
    closure_radius: float = 2.0
    min_steps_before_closure: int = 20
    contact_band: tuple[float, float] = (0.1, 8.0)
    workspace_radius: float = 500.0

    def to_dict(self) -> dict:
        return {"max_steps": self.max_steps, "closure_radius": self.closure_radius,
                "min_steps_before_closure": self.min_steps_before_closure,
                "contact_band": list(self.contact_band), "workspace_radius": self.workspace_radius}


def run_servo(
    world,
    feature: FeatureClass,
    reference: ReferenceSpec,
    perception: PerceptionConfig,
    gains: GainConfig,
    init_pose: Pose,
    stop: StopCriteria = StopCriteria(),
    rng: Optional[np.random.Generator] = None,
    header: Optional[dict] = None,
) -> TrajectoryRecord:
    """Servo the sensor over ``world`` until a stop criterion fires.

    ``world`` is any object with ``contact_frame(sensor_pose) -> ContactFrame``
    (an implicit surface for surface features, an edge curve for edges).
    Row ``t`` of the record is the state at step ``t``; the last row is the
    pose at which the run stopped, with its control computed but not applied.
    """
    if reference.feature != feature:
        raise ValueError("reference was built for a different feature")
    if rng is None:
        rng = np.random.default_rng(perception.seed)
    start = init_pose.position
    frame = world.contact_frame(init_pose)
    t0 = true_relative_pose(frame, init_pose, feature)
    bad = [n for n in feature.predictable
           if not perception.clip[n][0] <= getattr(t0, n) <= perception.clip[n][1]]
    if bad:
        raise ValueError(f"initial contact out of range on {', '.join(bad)}: {t0}")

    builder = RecordBuilder()
    state = ControllerState()
    base = init_pose
    reason, detail = StopReason.MAX_STEPS, ""
    lo, hi = stop.contact_band
    for t in range(stop.max_steps + 1):
        if t > 0:
            try:
                frame: ContactFrame = world.contact_frame(base)
            except GeometryError as exc:
                reason, detail = StopReason.CONTACT_LOSS, str(exc)
                break
        true = true_relative_pose(frame, base, feature)
        pred = predict_pose(true, feature, perception, rng, base).pose
        err = pose_error(pred, reference.pose)
        control, new_state = pi_step(state, err, gains)
        builder.add(t, base=base, frame=frame.pose, true=true, predicted=pred,
                    error=err, control=control, integral=new_state.integral)

        depth = abs(true.z)
        dist = float(np.linalg.norm(base.position - start))
        if not lo <= depth <= hi:
            reason, detail = StopReason.CONTACT_LOSS, f"contact depth {depth:.4g} mm outside [{lo}, {hi}]"
            break
        if dist > stop.workspace_radius:
            reason, detail = StopReason.WORKSPACE_EXIT, f"{dist:.4g} mm from start"
            break
        if t >= stop.min_steps_before_closure and dist <= stop.closure_radius:
            reason, detail = StopReason.CLOSURE, f"{dist:.4g} mm from start at step {t}"
            break
        if t == stop.max_steps:
            break
        state = new_state
        base = apply_update(base, control)

    hdr = dict(header or {})
    hdr.setdefault("seed", perception.seed)
    hdr["stop_reason"] = reason.value
    return builder.build(stop_reason=reason.value, detail=detail, header=hdr)


def reference_contact_pose(world, feature: FeatureClass, reference: ReferenceSpec, at=None) -> Pose:
    """A sensor pose in reference contact (predictable components only) at a start point.

    For surfaces ``at`` is a point near the surface (default: the top of the
    object); for edges it is the curve parameter (default 0).
    """
    contact = Pose(*(v if m else 0.0 for v, m in zip(reference.pose.as_tuple(), feature.predictable_mask)))
    if feature.kind is FeatureKind.SURFACE:
        if at is None:
            at = _surface_top(world)
        probe = Pose(*np.asarray(at, dtype=float))
        frame = world.contact_frame(probe)
    else:
        theta = world.start_param() if at is None else float(at)
        c = world._eval(theta)[0]
        # the sensor travels along +tangent; seed its y-axis accordingly
        from .pose import pose_from_axes

        t = world.tangent_at(theta)
        z = world.rim_normal_at(theta)
        probe = pose_from_axes(c, np.cross(t, z), t, z)
        frame = world.contact_frame(probe)
    return apply_update(frame.pose, contact)


def _surface_top(world) -> np.ndarray:
    if hasattr(world, "center") and hasattr(world, "radius"):
        return np.asarray(world.center) + np.array((0.0, 0.0, world.radius))
    try:
        return np.array((0.0, 0.0, float(world.height(0.0, 0.0)[0])))
    except GeometryError:
        return np.zeros(3)


__all__ = [
    "GainConfig", "ControllerState", "pi_step", "StopReason", "StopCriteria", "run_servo",
    "reference_contact_pose",
]
