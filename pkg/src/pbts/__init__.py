"""Pose-based tactile servo control over analytic objects.

The servo loop perceives the sensor pose in a contact frame on an edge or
surface feature, forms the SE(3) error to a reference pose and moves the
sensor with a PI law. Perception is a calibrated stochastic surrogate.
"""

from ._kernels import BACKEND
from .analysis import closure_error, deviations, linearity_fit, summarize
from .control import GainConfig, StopCriteria, StopReason, pi_step, reference_contact_pose, run_servo
from .features import EDGE, SURFACE, FeatureClass, ReferenceSpec, default_reference, project_predictable
from .perception import PerceptionConfig, PoseRanges, mae_to_sigma, predict_pose
from .pose import IDENTITY, Pose, apply_update, compose, from_transform, inverse, pose_error, to_transform

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "closure_error", "deviations", "linearity_fit", "summarize", "GainConfig",
    "StopCriteria", "StopReason", "pi_step", "reference_contact_pose", "run_servo", "EDGE",
    "SURFACE", "FeatureClass", "ReferenceSpec", "default_reference", "project_predictable",
    "PerceptionConfig", "PoseRanges", "mae_to_sigma", "predict_pose", "IDENTITY", "Pose",
    "apply_update", "compose", "from_transform", "inverse", "pose_error", "to_transform",
]
