"""Analytic test objects and ground-truth contact frames."""

from .curves import (
    PRESETS,
    AmbiguousContactError,
    Circle,
    ConstantProfile,
    CurveOnSurface,
    EdgeCurve,
    FourierProfile,
    PlanarContour,
    TableProfile,
    clover,
    spiral,
    teardrop,
    volute,
)
from .frames import ContactFrame, contact_frame_edge, contact_frame_surface, true_relative_pose
from .surfaces import (
    GeometryError,
    HeightField,
    ImplicitSurface,
    Plane,
    ProjectionError,
    Saddle,
    Sphere,
    Wave,
    nearest_surface_point,
    signed_distance,
)

__all__ = [
    "PRESETS", "AmbiguousContactError", "Circle", "ConstantProfile", "CurveOnSurface",
    "EdgeCurve", "FourierProfile", "PlanarContour", "TableProfile", "clover", "spiral",
    "teardrop", "volute", "ContactFrame", "contact_frame_edge", "contact_frame_surface",
    "true_relative_pose", "GeometryError", "HeightField", "ImplicitSurface", "Plane",
    "ProjectionError", "Saddle", "Sphere", "Wave", "nearest_surface_point", "signed_distance",
]
