"""SE(3) poses as (x, y, z; alpha, beta, gamma).

Translations are in mm and angles in degrees. The rotation convention is
extrinsic xyz: rotate about the fixed x axis by alpha, then fixed y by beta,
then fixed z by gamma, i.e. ``R = Rz(gamma) @ Ry(beta) @ Rx(alpha)``.

Composition follows the usual frame-chaining rule, so for poses of frame B in
A and C in B, ``compose(a_P_b, b_P_c)`` is the pose of C in A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K

COMPONENTS = ("x", "y", "z", "alpha", "beta", "gamma")

ORTHO_TOL = 1e-9


class InvalidTransformError(ValueError):
    """Raised for rotations that are not proper orthonormal matrices."""


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        vals = (self.x, self.y, self.z, self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"pose components must be finite: {vals}")
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, K.wrap_deg(float(getattr(self, name))))

    @classmethod
    def from_seq(cls, values: Iterable[float]) -> "Pose":
        vals = tuple(values)
        if len(vals) != 6:
            raise ValueError(f"a pose needs 6 components, got {len(vals)}")
        return cls(*vals)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.x, self.y, self.z, self.alpha, self.beta, self.gamma)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())

    @property
    def position(self) -> np.ndarray:
        return np.array((self.x, self.y, self.z))

    @property
    def rotation(self) -> np.ndarray:
        return np.array(K.euler_to_rot(self.alpha, self.beta, self.gamma)).reshape(3, 3)

    def __getitem__(self, i):
        return self.as_tuple()[i]

    def __iter__(self):
        return iter(self.as_tuple())

    def __matmul__(self, other: "Pose") -> "Pose":
        return compose(self, other)

    def inverse(self) -> "Pose":
        return inverse(self)

    def to_transform(self) -> "RigidTransform":
        return to_transform(self)

    def isclose(self, other: "Pose", tol: float = 1e-6) -> bool:
        """Compare as rigid transforms, so wrapped or gimbal-equivalent angles match."""
        ta, tb = to_transform(self), to_transform(other)
        return bool(
            np.allclose(ta.rotation, tb.rotation, atol=tol, rtol=0)
            and np.allclose(ta.translation, tb.translation, atol=tol, rtol=0)
        )


IDENTITY = Pose()


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))

    def check(self, tol: float = ORTHO_TOL) -> None:
        r = self.rotation
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(self.translation)):
            raise InvalidTransformError("transform has non-finite entries")
        err = np.abs(r.T @ r - np.eye(3)).max()
        if err > tol:
            raise InvalidTransformError(f"rotation not orthonormal (max |R^T R - I| = {err:.3g})")
        det = np.linalg.det(r)
        if abs(det - 1.0) > tol:
            raise InvalidTransformError(f"rotation is not proper (det = {det:.12g})")

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "RigidTransform":
        m = np.asarray(m, dtype=float)
        return cls(m[:3, :3], m[:3, 3])


def to_transform(p: Pose) -> RigidTransform:
    return RigidTransform(p.rotation, p.position)


def from_transform(t: RigidTransform) -> Pose:
    """Recover the pose of a rigid transform.

    At gimbal lock (|beta| = 90 deg) alpha is set to 0 and the remaining
    rotation is carried by gamma.
    """
    t.check()
    a, b, g = K.rot_to_euler(t.rotation.ravel().tolist())
    x, y, z = t.translation.tolist()
    return Pose(x, y, z, a, b, g)


def pose_from_axes(origin: Sequence[float], x_axis, y_axis, z_axis) -> Pose:
    """Pose of a frame given its origin and unit axes in the parent frame."""
    r = np.column_stack((x_axis, y_axis, z_axis))
    return from_transform(RigidTransform(r, origin))


def compose(a: Pose, b: Pose) -> Pose:
    return Pose(*K.compose(a.as_tuple(), b.as_tuple()))


def inverse(p: Pose) -> Pose:
    return Pose(*K.inverse(p.as_tuple()))


def pose_error(sensor: Pose, reference: Pose) -> Pose:
    """Transformation moving ``sensor`` onto ``reference``, in the sensor frame.

    Both poses must be expressed in the same frame. This is a group product,
    not a componentwise difference.
    """
    return Pose(*K.relative(sensor.as_tuple(), reference.as_tuple()))


def apply_update(base_pose: Pose, control: Pose) -> Pose:
    """Move the sensor by a correction expressed in its own frame."""
    return compose(base_pose, control)
