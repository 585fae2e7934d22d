"""Deviation statistics of servo trajectories from the true object feature."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .features import FeatureClass, ReferenceSpec
from .geometry import true_relative_pose
from .pose import Pose
from .record import TrajectoryRecord

ANGLES = ("alpha", "beta", "gamma")


def _ordered(feature: FeatureClass) -> tuple[str, ...]:
    # surfaces report (z, alpha, beta); edges add x and gamma
    order = ("x", "z", "alpha", "beta", "gamma")
    return tuple(c for c in order if c in feature.predictable)


@dataclass(frozen=True)
class DeviationSeries:
    """Per-step deviation of the true pose from the reference, per observable component."""

    components: tuple[str, ...]
    values: np.ndarray  # (n_steps, n_components)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[:, self.components.index(name)]


@dataclass(frozen=True)
class DeviationSummary:
    components: tuple[str, ...]
    mean: np.ndarray
    sd: np.ndarray
    max_abs: np.ndarray
    transient_skip: int

    def to_dict(self) -> dict:
        return {c: {"mean": float(m), "sd": float(s), "max": float(x)}
                for c, m, s, x in zip(self.components, self.mean, self.sd, self.max_abs)}

    def __getitem__(self, name: str) -> dict:
        return self.to_dict()[name]


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


def deviation_from(true: Pose, reference: Pose, components: Iterable[str]) -> list[float]:
    out = []
    for c in components:
        d = getattr(true, c) - getattr(reference, c)
        out.append(K.wrap_deg(d) if c in ANGLES else d)
    return out


def deviations(record: TrajectoryRecord, world, feature: FeatureClass,
               reference: ReferenceSpec) -> DeviationSeries:
    """Recompute per-step deviations from the logged base poses and the true geometry."""
    comps = _ordered(feature)
    rows = []
    for b in record.base:
        base = Pose(*b)
        true = true_relative_pose(world.contact_frame(base), base, feature)
        rows.append(deviation_from(true, reference.pose, comps))
    return DeviationSeries(comps, np.array(rows, dtype=float).reshape(-1, len(comps)))


def deviations_from_log(record: TrajectoryRecord, feature: FeatureClass,
                        reference: ReferenceSpec) -> DeviationSeries:
    """Same as :func:`deviations` but reading the logged true poses."""
    comps = _ordered(feature)
    rows = [deviation_from(Pose(*t), reference.pose, comps) for t in record.true]
    return DeviationSeries(comps, np.array(rows, dtype=float).reshape(-1, len(comps)))


def summarize(series: DeviationSeries, transient_skip: int = 10) -> DeviationSummary:
    """Mean, population s.d. and max |deviation| after dropping the transient."""
    if len(series) <= transient_skip:
        raise ValueError(f"series of length {len(series)} too short for transient skip {transient_skip}")
    v = series.values[transient_skip:]
    return DeviationSummary(series.components, v.mean(axis=0), v.std(axis=0),
                            np.abs(v).max(axis=0), transient_skip)


def closure_error(record: TrajectoryRecord) -> float:
    """Distance between the first and last sensor positions (mm)."""
    return float(np.linalg.norm(record.base[-1, :3] - record.base[0, :3]))


def linearity_fit(pairs: Sequence[tuple[float, float]]) -> LinearFit:
    """Ordinary least-squares line through ``(reference value, mean deviation)`` pairs."""
    xy = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if len(xy) < 2:
        raise ValueError("linearity fit needs at least two pairs")
    x, y = xy[:, 0], xy[:, 1]
    sxx = np.sum((x - x.mean()) ** 2)
    if sxx <= 1e-12 * max(1.0, np.sum(x**2)):
        raise ValueError("degenerate fit: reference values do not vary")
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return LinearFit(slope, intercept, r2)


__all__ = [
    "DeviationSeries", "DeviationSummary", "LinearFit", "deviations", "deviations_from_log",
    "summarize", "closure_error", "linearity_fit",
]
