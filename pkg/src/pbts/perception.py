"""Stochastic stand-in for a trained tactile pose regressor.

Predictions are the true contact-frame pose plus independent zero-mean
Gaussian noise on each observable component, scaled so the mean absolute
error matches the regressor's measured accuracy, then clipped to the pose
ranges the regressor was trained on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, NamedTuple, Optional

import numpy as np

from .features import FeatureClass, FeatureKind
from .pose import COMPONENTS, Pose

# measured MAE per component (mm, mm, mm; deg, deg, deg); unobservable ones are 0
SURFACE_MAE = (0.0, 0.0, 0.1, 0.4, 0.5, 0.0)
EDGE_MAE = (0.3, 0.0, 0.2, 1.2, 2.4, 4.1)


@dataclass(frozen=True)
class PoseRanges:
    """Closed intervals of the training data, per observable component."""

    x: tuple[float, float] = (-5.0, 5.0)
    z: tuple[float, float] = (-5.0, -1.0)
    alpha: tuple[float, float] = (-15.0, 15.0)
    beta: tuple[float, float] = (-15.0, 15.0)
    gamma: tuple[float, float] = (-45.0, 45.0)

    def __post_init__(self):
        for name in ("x", "z", "alpha", "beta", "gamma"):
            lo, hi = getattr(self, name)
            object.__setattr__(self, name, (float(lo), float(hi)))
            if not lo < hi:
                raise ValueError(f"range for {name} must have lower < upper, got {(lo, hi)}")

    def __getitem__(self, name: str) -> tuple[float, float]:
        if name not in ("x", "z", "alpha", "beta", "gamma"):
            raise KeyError(name)
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {n: list(getattr(self, n)) for n in ("x", "z", "alpha", "beta", "gamma")}


def default_mae(feature: FeatureClass) -> tuple[float, ...]:
    return SURFACE_MAE if feature.kind is FeatureKind.SURFACE else EDGE_MAE


@dataclass(frozen=True)
class PerceptionConfig:
    mae: tuple[float, ...] = SURFACE_MAE
    seed: int = 0
    clip: PoseRanges = field(default_factory=PoseRanges)
    bias: Optional[Callable[[Pose], np.ndarray]] = None

    def __post_init__(self):
        mae = tuple(float(m) for m in self.mae)
        if len(mae) != 6:
            raise ValueError("mae needs one entry per pose component")
        if any(not math.isfinite(m) or m < 0 for m in mae):
            raise ValueError(f"mae must be finite and non-negative, got {mae}")
        object.__setattr__(self, "mae", mae)

    @classmethod
    def for_feature(cls, feature: FeatureClass, **kw) -> "PerceptionConfig":
        return cls(mae=default_mae(feature), **kw)

    def noiseless(self) -> "PerceptionConfig":
        return replace(self, mae=(0.0,) * 6)

    def sigma(self) -> np.ndarray:
        return np.array([mae_to_sigma(m) for m in self.mae])


class Prediction(NamedTuple):
    pose: Pose
    # observable components whose true value lies outside the training ranges
    out_of_distribution: tuple[str, ...]


def mae_to_sigma(mae: float) -> float:
    """Standard deviation of the zero-mean Gaussian whose MAE is ``mae``."""
    if mae < 0:
        raise ValueError("mae must be non-negative")
    return mae * math.sqrt(math.pi / 2.0)


def predict_pose(
    true_pose: Pose,
    feature: FeatureClass,
    config: PerceptionConfig,
    rng: np.random.Generator,
    sensor_pose: Optional[Pose] = None,
) -> Prediction:
    """Noisy, range-clipped estimate of the contact-frame pose.

    ``sensor_pose`` (base frame) is only consulted by an orientation bias hook.
    Unobservable components of the result are exactly zero.
    """
    true = true_pose.as_tuple()
    sigma = config.sigma()
    bias = np.zeros(6)
    if config.bias is not None:
        if sensor_pose is None:
            raise ValueError("a bias hook needs the sensor pose")
        bias = np.asarray(config.bias(sensor_pose), dtype=float).reshape(6)
    idx = [i for i, m in enumerate(feature.predictable_mask) if m]
    noise = rng.standard_normal(len(idx))
    out = [0.0] * 6
    ood = []
    for k, i in enumerate(idx):
        name = COMPONENTS[i]
        lo, hi = config.clip[name]
        if not lo <= true[i] <= hi:
            ood.append(name)
        v = true[i] + bias[i] + sigma[i] * noise[k]
        out[i] = min(max(v, lo), hi)
    return Prediction(Pose(*out), tuple(ood))


def gravity_bias(strength: float, sensor_orientation: Pose, z_scale: float = 0.1) -> np.ndarray:
    """Orientation-dependent sag of a soft sensor tip under gravity.

    Let ``h`` be the horizontal part (sensor x, y) of the downward vertical
    expressed in the sensor frame; ``|h|`` is the sine of the sensor's tilt.
    The bias tilts the apparent normal towards ``h``: ``(alpha, beta) =
    strength * (-h_y, h_x)`` in degrees, and shifts depth by ``z_scale *
    strength * |h|`` mm. This form is a modelling choice, not a measurement.
    """
    if strength < 0:
        raise ValueError("gravity bias strength must be non-negative")
    down = sensor_orientation.rotation.T @ np.array((0.0, 0.0, -1.0))
    hx, hy = down[0], down[1]
    tilt = math.hypot(hx, hy)
    return np.array((0.0, 0.0, z_scale * strength * tilt, -strength * hy, strength * hx, 0.0))


@dataclass(frozen=True)
class GravityBias:
    """Picklable bias hook wrapping :func:`gravity_bias`."""

    strength: float
    z_scale: float = 0.1

    def __call__(self, sensor_pose: Pose) -> np.ndarray:
        return gravity_bias(self.strength, sensor_pose, self.z_scale)


def out_of_distribution(true_pose: Pose, feature: FeatureClass, ranges: Mapping) -> tuple[str, ...]:
    vals = dict(zip(COMPONENTS, true_pose.as_tuple()))
    return tuple(n for n in feature.predictable if not ranges[n][0] <= vals[n] <= ranges[n][1])


__all__ = [
    "SURFACE_MAE", "EDGE_MAE", "PoseRanges", "PerceptionConfig", "Prediction", "mae_to_sigma",
    "predict_pose", "gravity_bias", "GravityBias", "default_mae", "out_of_distribution",
]
