"""Contact frames on object features and ground-truth sensor poses in them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import FeatureClass, project_predictable
from ..pose import Pose, pose_error, pose_from_axes
from .surfaces import GeometryError, ImplicitSurface

DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class ContactFrame:
    """Pose of a contact frame F in the base frame.

    z is the outward feature normal; for edges y runs along the edge in the
    direction of travel and x = y cross z.
    """

    pose: Pose

    @property
    def origin(self) -> np.ndarray:
        return self.pose.position

    @property
    def rotation(self) -> np.ndarray:
        return self.pose.rotation


def _unit(v):
    return v / np.linalg.norm(v)


def contact_frame_surface(surface: ImplicitSurface, sensor_pose: Pose) -> ContactFrame:
    """Frame at the surface point nearest the sensor origin.

    The tangential rotation is fixed by projecting the sensor x-axis onto the
    tangent plane, so the sensor yaw in this frame is zero.
    """
    q = surface.nearest_point(sensor_pose.position)
    z = surface.surface_normal(q)
    rs = sensor_pose.rotation
    xs = rs[:, 0]
    x = xs - (xs @ z) * z
    nx = np.linalg.norm(x)
    if nx < DEGENERATE_TOL:
        ys = rs[:, 1]
        y = ys - (ys @ z) * z
        ny = np.linalg.norm(y)
        if ny < DEGENERATE_TOL:
            raise GeometryError("sensor axes are degenerate with respect to the surface normal")
        y = y / ny
        x = np.cross(y, z)
    else:
        x = x / nx
        y = np.cross(z, x)
    return ContactFrame(pose_from_axes(q, x, y, z))


def contact_frame_edge(curve, sensor_pose: Pose) -> ContactFrame:
    """Frame at the curve point nearest the sensor origin.

    The tangent is signed to agree with the sensor y-axis, i.e. with the
    direction of travel.
    """
    p = sensor_pose.position
    theta = curve.nearest_param(p)
    c = curve._eval(theta)[0]
    dist = float(np.linalg.norm(c - p))
    if dist > curve.max_distance:
        raise GeometryError(f"sensor is {dist:.3g} mm from the edge (limit {curve.max_distance} mm)")
    t = curve.tangent_at(theta)
    if t @ sensor_pose.rotation[:, 1] < 0:
        t = -t
    n = curve.rim_normal_at(theta)
    z = _unit(n - (n @ t) * t)
    x = np.cross(t, z)
    return ContactFrame(pose_from_axes(c, x, t, z))


def true_relative_pose(frame: ContactFrame, sensor_pose: Pose, feature: FeatureClass) -> Pose:
    """Ground-truth sensor pose in the contact frame, restricted to what touch can observe."""
    return project_predictable(feature, pose_error(frame.pose, sensor_pose))
