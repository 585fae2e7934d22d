"""Implicit test surfaces with exact signed distance and outward normals.

All surfaces bound a solid lying on the side opposite the outward normal, so
the signed distance is negative inside the object. Saddle and wave surfaces
are graphs ``z = f(x, y)`` with the solid below; their distance is computed
exactly by projecting onto the graph, which makes the gradient of the
distance the unit normal at the foot point.
"""

from __future__ import annotations

import math

import numpy as np

from .. import _kernels as K


class GeometryError(RuntimeError):
    """A geometric query has no well-defined answer."""


class ProjectionError(GeometryError):
    """Closest-point projection failed to converge."""


def _vec3(p) -> np.ndarray:
    v = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"point must be finite: {v}")
    return v


class ImplicitSurface:
    kind = "surface"

    def signed_distance(self, point) -> float:
        raise NotImplementedError

    def nearest_point(self, point) -> np.ndarray:
        raise NotImplementedError

    def surface_normal(self, q) -> np.ndarray:
        """Unit outward normal at a point ``q`` on the surface."""
        raise NotImplementedError

    def normal(self, point) -> np.ndarray:
        """Unit outward normal of the distance field at ``point``."""
        return self.surface_normal(self.nearest_point(point))

    def height(self, x, y):
        """``(f, fx, fy, fxx, fxy, fyy)`` for surfaces expressible as a graph."""
        raise GeometryError(f"{type(self).__name__} is not a height field")

    def contact_frame(self, sensor_pose):
        from .frames import contact_frame_surface

        return contact_frame_surface(self, sensor_pose)

    def to_dict(self) -> dict:
        raise NotImplementedError


class Plane(ImplicitSurface):
    """Half-space ``n . p <= offset``."""

    kind = "plane"

    def __init__(self, normal=(0.0, 0.0, 1.0), offset: float = 0.0):
        n = _vec3(normal)
        self.n = n / np.linalg.norm(n)
        self.offset = float(offset)

    def signed_distance(self, point) -> float:
        return float(self.n @ _vec3(point) - self.offset)

    def nearest_point(self, point) -> np.ndarray:
        p = _vec3(point)
        return p - (self.n @ p - self.offset) * self.n

    def surface_normal(self, q) -> np.ndarray:
        return self.n.copy()

    def normal(self, point) -> np.ndarray:
        return self.n.copy()

    def height(self, x, y):
        nx, ny, nz = self.n
        if abs(nz) < 1e-12:
            raise GeometryError("vertical plane is not a height field")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        zero = np.zeros_like(x + y)
        f = (self.offset - nx * x - ny * y) / nz
        return f, zero - nx / nz, zero - ny / nz, zero, zero, zero

    def to_dict(self) -> dict:
        return {"kind": "plane", "normal": self.n.tolist(), "offset": self.offset}


class Sphere(ImplicitSurface):
    kind = "sphere"

    def __init__(self, radius: float = 60.0, center=(0.0, 0.0, 0.0)):
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        self.radius = float(radius)
        self.center = _vec3(center)

    def signed_distance(self, point) -> float:
        return float(np.linalg.norm(_vec3(point) - self.center) - self.radius)

    def nearest_point(self, point) -> np.ndarray:
        d = _vec3(point) - self.center
        r = np.linalg.norm(d)
        if r < 1e-12:
            raise GeometryError("nearest point on a sphere is undefined at its center")
        return self.center + self.radius * d / r

    def surface_normal(self, q) -> np.ndarray:
        d = _vec3(q) - self.center
        return d / np.linalg.norm(d)

    def normal(self, point) -> np.ndarray:
        return self.surface_normal(point)

    def height(self, x, y):
        """Upper cap ``z = cz + sqrt(r^2 - dx^2 - dy^2)``."""
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        s2 = self.radius**2 - dx * dx - dy * dy
        if np.any(s2 <= 0):
            raise GeometryError("point outside the sphere's footprint")
        s = np.sqrt(s2)
        f = self.center[2] + s
        fx, fy = -dx / s, -dy / s
        fxx = -(s2 + dx * dx) / s**3
        fyy = -(s2 + dy * dy) / s**3
        fxy = -dx * dy / s**3
        return f, fx, fy, fxx, fxy, fyy

    def to_dict(self) -> dict:
        return {"kind": "sphere", "radius": self.radius, "center": self.center.tolist()}


class HeightField(ImplicitSurface):
    """Graph ``z = f(x, y)`` bounding the solid below it."""

    _kernel_kind: int
    grid = 9
    tol = 1e-13
    max_iter = 100

    def _params(self) -> tuple[float, float]:
        raise NotImplementedError

    def nearest_point(self, point) -> np.ndarray:
        p = _vec3(point)
        c0, c1 = self._params()
        u, v, it = K.project_heightfield(
            self._kernel_kind, c0, c1, p[0], p[1], p[2], self.grid, self.tol, self.max_iter
        )
        if it < 0:
            # denser seeding for points far from or folded over the surface
            u, v, it = K.project_heightfield(
                self._kernel_kind, c0, c1, p[0], p[1], p[2], 61, self.tol, 4 * self.max_iter
            )
            if it < 0:
                raise ProjectionError(f"projection onto {self.kind} did not converge from {p}")
        return np.array((u, v, K.height(self._kernel_kind, c0, c1, u, v)[0]))

    def signed_distance(self, point) -> float:
        p = _vec3(point)
        q = self.nearest_point(p)
        f0 = float(self.height(p[0], p[1])[0])
        dist = float(np.linalg.norm(p - q))
        return dist if p[2] >= f0 else -dist

    def surface_normal(self, q) -> np.ndarray:
        _, fx, fy, *_ = self.height(q[0], q[1])
        n = np.array((-float(fx), -float(fy), 1.0))
        return n / np.linalg.norm(n)


class Saddle(HeightField):
    """``z = (x^2 - y^2) / scale``."""

    kind = "saddle"
    _kernel_kind = K.SADDLE

    def __init__(self, scale: float = 120.0):
        if scale <= 0:
            raise ValueError("saddle scale must be positive")
        self.scale = float(scale)

    def _params(self):
        return self.scale, 0.0

    def height(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        s = self.scale
        zero = np.zeros_like(x + y)
        return (x * x - y * y) / s, 2 * x / s, -2 * y / s, zero + 2 / s, zero, zero - 2 / s

    def to_dict(self) -> dict:
        return {"kind": "saddle", "scale": self.scale}


class Wave(HeightField):
    """``z = amplitude * sin(2 pi x / wavelength)``."""

    kind = "wave"
    _kernel_kind = K.WAVE

    def __init__(self, amplitude: float = 10.0, wavelength: float = 80.0):
        if wavelength <= 0:
            raise ValueError("wavelength must be positive")
        self.amplitude = float(amplitude)
        self.wavelength = float(wavelength)

    def _params(self):
        return self.amplitude, self.wavelength

    def height(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        k = 2 * math.pi / self.wavelength
        a = self.amplitude
        zero = np.zeros_like(x + y)
        s, c = np.sin(k * x) + zero, np.cos(k * x) + zero
        return a * s, a * k * c, zero, -a * k * k * s, zero, zero

    def to_dict(self) -> dict:
        return {"kind": "wave", "amplitude": self.amplitude, "wavelength": self.wavelength}


def signed_distance(surface: ImplicitSurface, point) -> float:
    return surface.signed_distance(point)


def nearest_surface_point(surface: ImplicitSurface, point) -> np.ndarray:
    return surface.nearest_point(point)
