"""Closed edge curves with tangent and rim-normal fields.

Every curve is star-shaped about a center and described by a polar radius
profile ``r(theta)``; planar curves sit at a fixed height, lifted curves ride
on a height-field surface (the rim of a saddle- or wave-topped object).
Internally curves are parameterised by ``theta`` in [0, 2 pi); the public
point/tangent/normal accessors take arclength ``s`` in mm.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .surfaces import GeometryError, ImplicitSurface, _vec3

TWO_PI = 2.0 * math.pi

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


class AmbiguousContactError(GeometryError):
    """Two or more curve points are equally near the query point."""


class RadiusProfile:
    """Periodic radius ``r(theta)`` with derivatives up to second order."""

    def __call__(self, theta, nu: int = 0):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class ConstantProfile(RadiusProfile):
    def __init__(self, radius: float):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    def __call__(self, theta, nu=0):
        theta = np.asarray(theta, dtype=float)
        return np.full_like(theta, self.radius if nu == 0 else 0.0)

    def to_dict(self):
        return {"profile": "constant", "radius": self.radius}


class FourierProfile(RadiusProfile):
    """``r = a0 + sum_k a_k cos(k theta) + b_k sin(k theta)``."""

    def __init__(self, a0: float, a: Sequence[float] = (), b: Sequence[float] = (), name: str = "fourier"):
        self.a0 = float(a0)
        n = max(len(a), len(b))
        self.a = np.zeros(n)
        self.b = np.zeros(n)
        self.a[: len(a)] = a
        self.b[: len(b)] = b
        self.k = np.arange(1, n + 1, dtype=float)
        self.name = name
        if np.min(self(np.linspace(0, TWO_PI, 2048))) <= 0:
            raise ValueError("polar radius must stay positive")

    @classmethod
    def fit(cls, samples: np.ndarray, harmonics: int, name: str = "fourier") -> "FourierProfile":
        """Fit uniformly spaced samples on [0, 2 pi), Lanczos-smoothed."""
        samples = np.asarray(samples, dtype=float)
        m = len(samples)
        coef = np.fft.rfft(samples) / m
        k = np.arange(1, harmonics + 1)
        sigma = np.sinc(k / (harmonics + 1))
        a = 2 * coef[1 : harmonics + 1].real * sigma
        b = -2 * coef[1 : harmonics + 1].imag * sigma
        return cls(coef[0].real, a, b, name=name)

    def __call__(self, theta, nu=0):
        theta = np.asarray(theta, dtype=float)
        kt = np.multiply.outer(theta, self.k)
        c, s = np.cos(kt), np.sin(kt)
        if nu == 0:
            return self.a0 + c @ self.a + s @ self.b
        if nu == 1:
            return -s @ (self.k * self.a) + c @ (self.k * self.b)
        return -(c @ (self.k**2 * self.a) + s @ (self.k**2 * self.b))

    def to_dict(self):
        return {"profile": "fourier", "a0": self.a0, "a": self.a.tolist(), "b": self.b.tolist()}


class TableProfile(RadiusProfile):
    """Periodic cubic spline through ``(theta_deg, r)`` samples."""

    def __init__(self, theta_deg: Sequence[float], radius: Sequence[float]):
        th = np.asarray(theta_deg, dtype=float)
        r = np.asarray(radius, dtype=float)
        if th.ndim != 1 or th.shape != r.shape or len(th) < 4:
            raise ValueError("polar table needs >= 4 matching (theta, r) samples")
        if np.any(np.diff(th) <= 0):
            raise ValueError("polar table theta must be strictly increasing")
        if th[0] < 0 or th[-1] >= th[0] + 360.0:
            raise ValueError("polar table theta must lie in [0, 360) degrees")
        if np.any(r <= 0):
            raise ValueError("polar radius must stay positive")
        self.theta_deg = th
        self.radius = r
        x = np.radians(np.append(th, th[0] + 360.0))
        self._spline = CubicSpline(x, np.append(r, r[0]), bc_type="periodic")
        self._t0 = x[0]

    def __call__(self, theta, nu=0):
        theta = np.asarray(theta, dtype=float)
        t = self._t0 + np.mod(theta - self._t0, TWO_PI)
        return self._spline(t, nu)

    def to_dict(self):
        return {"profile": "table", "theta_deg": self.theta_deg.tolist(), "r": self.radius.tolist()}


def clover(radius: float = 40.0, amplitude: float = 0.2, lobes: int = 3) -> FourierProfile:
    a = np.zeros(lobes)
    a[lobes - 1] = radius * amplitude
    return FourierProfile(radius, a, name="clover")


def teardrop(radius: float = 35.0, amplitude: float = 0.5, harmonics: int = 24) -> FourierProfile:
    th = np.linspace(0, TWO_PI, 1024, endpoint=False)
    return FourierProfile.fit(radius * (1 + amplitude * np.cos(th / 2) ** 16), harmonics, "teardrop")


def _sawtooth(th, ret_deg):
    w = math.radians(ret_deg)
    rise = TWO_PI - w
    return np.where(th < rise, th / rise, (TWO_PI - th) / w)


def volute(radius: float = 35.0, amplitude: float = 0.4, harmonics: int = 24) -> FourierProfile:
    th = np.linspace(0, TWO_PI, 1024, endpoint=False)
    return FourierProfile.fit(radius * (1 + amplitude * _sawtooth(th, 40.0)), harmonics, "volute")


def spiral(radius: float = 25.0, amplitude: float = 0.9, harmonics: int = 24) -> FourierProfile:
    th = np.linspace(0, TWO_PI, 1024, endpoint=False)
    return FourierProfile.fit(radius * (1 + amplitude * _sawtooth(th, 20.0)), harmonics, "spiral")


PRESETS = {"clover": clover, "teardrop": teardrop, "volute": volute, "spiral": spiral}


class EdgeCurve:
    """Closed curve ``c(theta)`` around ``center`` with a rim-normal field."""

    kind = "curve"
    samples = 2048
    ambiguity_tol = 1e-6
    max_distance = 10.0

    def __init__(self, profile: RadiusProfile, center=(0.0, 0.0)):
        self.profile = profile
        self.center = np.asarray(center, dtype=float).reshape(2)
        self._theta = np.linspace(0.0, TWO_PI, self.samples, endpoint=False)
        self._pts = self._eval(self._theta)[0]
        self._build_arclength()

    # -- parameterisation ---------------------------------------------------

    def _planar(self, theta):
        theta = np.asarray(theta, dtype=float)
        r, r1, r2 = self.profile(theta, 0), self.profile(theta, 1), self.profile(theta, 2)
        c, s = np.cos(theta), np.sin(theta)
        x = self.center[0] + r * c
        y = self.center[1] + r * s
        x1 = r1 * c - r * s
        y1 = r1 * s + r * c
        x2 = r2 * c - 2 * r1 * s - r * c
        y2 = r2 * s + 2 * r1 * c - r * s
        return x, y, x1, y1, x2, y2

    def _eval(self, theta):
        """Point, first and second theta-derivatives, each shaped (..., 3)."""
        raise NotImplementedError

    def rim_normal_at(self, theta) -> np.ndarray:
        raise NotImplementedError

    def _speed(self, theta):
        return np.linalg.norm(self._eval(theta)[1], axis=-1)

    def _build_arclength(self):
        a = np.append(self._theta, TWO_PI)
        lo, hi = a[:-1], a[1:]
        half = 0.5 * (hi - lo)
        nodes = (lo + hi)[:, None] * 0.5 + half[:, None] * _GL_X[None, :]
        seg = (self._speed(nodes) * _GL_W[None, :]).sum(axis=1) * half
        self._cum = np.concatenate(([0.0], np.cumsum(seg)))
        self.length = float(self._cum[-1])

    def arclength_at(self, theta: float) -> float:
        theta = float(theta) % TWO_PI
        i = min(int(theta / TWO_PI * self.samples), self.samples - 1)
        lo = self._theta[i]
        if theta == lo:
            return float(self._cum[i])
        half = 0.5 * (theta - lo)
        nodes = 0.5 * (theta + lo) + half * _GL_X
        return float(self._cum[i] + (self._speed(nodes) * _GL_W).sum() * half)

    def theta_at(self, s: float) -> float:
        """Invert the arclength map; ``s`` is taken modulo the curve length."""
        s = float(s)
        if s == self.length:
            return TWO_PI
        s = s % self.length
        i = int(np.searchsorted(self._cum, s, side="right")) - 1
        i = min(max(i, 0), self.samples - 1)
        frac = (s - self._cum[i]) / (self._cum[i + 1] - self._cum[i])
        theta = self._theta[i] + frac * (TWO_PI / self.samples)
        for _ in range(20):
            ds = self.arclength_at(theta) - s
            theta -= ds / float(self._speed(theta))
            if abs(ds) < 1e-12:
                break
        return theta

    def point(self, s: float) -> np.ndarray:
        return self._eval(self.theta_at(s))[0]

    def tangent(self, s: float) -> np.ndarray:
        return self.tangent_at(self.theta_at(s))

    def normal(self, s: float) -> np.ndarray:
        return self.rim_normal_at(self.theta_at(s))

    def tangent_at(self, theta) -> np.ndarray:
        d = self._eval(theta)[1]
        return d / np.linalg.norm(d)

    # -- queries --------------------------------------------------------------

    def _refine(self, p, theta):
        # Newton on (c - p) . c' = 0
        for _ in range(50):
            c, c1, c2 = self._eval(theta)
            g = (c - p) @ c1
            h = c1 @ c1 + (c - p) @ c2
            if h <= 0:
                h = c1 @ c1
            step = g / h
            step = max(-0.05, min(0.05, step))
            theta -= step
            if abs(step) < 1e-14:
                break
        return theta % TWO_PI

    def nearest_param(self, point) -> float:
        """Parameter of the curve point nearest ``point``.

        Raises ``AmbiguousContactError`` when distinct curve points tie.
        """
        p = _vec3(point)
        d2 = np.sum((self._pts - p) ** 2, axis=1)
        is_min = (d2 <= np.roll(d2, 1)) & (d2 <= np.roll(d2, -1))
        idx = np.flatnonzero(is_min)
        dmin = math.sqrt(d2.min())
        # candidates whose sampled distance is within a sampling-resolution margin
        spacing = self.length / self.samples
        keep = idx[np.sqrt(d2[idx]) <= dmin + spacing]
        if len(keep) > 64:
            raise AmbiguousContactError(
                f"nearest curve point is ambiguous: {len(keep)} equidistant candidates near {p}"
            )
        cands = []
        for i in keep:
            th = self._refine(p, self._theta[i])
            c = self._eval(th)[0]
            cands.append((float(np.linalg.norm(c - p)), th, c))
        cands.sort(key=lambda t: t[0])
        best = cands[0]
        for dist, th, c in cands[1:]:
            if dist - best[0] > self.ambiguity_tol:
                break
            if np.linalg.norm(c - best[2]) > 1e-3:
                raise AmbiguousContactError(
                    f"nearest curve point is ambiguous: points {best[2]} and {c} are both "
                    f"{best[0]:.6g} mm from {p}"
                )
        return best[1]

    def nearest_point(self, point) -> np.ndarray:
        return self._eval(self.nearest_param(point))[0]

    def distance(self, point) -> float:
        return float(np.linalg.norm(self.nearest_point(point) - _vec3(point)))

    def contact_frame(self, sensor_pose):
        from .frames import contact_frame_edge

        return contact_frame_edge(self, sensor_pose)

    def start_param(self) -> float:
        return 0.0


class PlanarContour(EdgeCurve):
    """Contour at constant height; rim normal is the face normal (0, 0, 1)."""

    kind = "planar"

    def __init__(self, profile: RadiusProfile, center=(0.0, 0.0), height: float = 0.0):
        self.z0 = float(height)
        super().__init__(profile, center)

    def _eval(self, theta):
        x, y, x1, y1, x2, y2 = self._planar(theta)
        z = np.full_like(np.asarray(x, dtype=float), self.z0)
        zero = np.zeros_like(z)
        return np.stack((x, y, z), -1), np.stack((x1, y1, zero), -1), np.stack((x2, y2, zero), -1)

    def rim_normal_at(self, theta) -> np.ndarray:
        return np.array((0.0, 0.0, 1.0))

    def to_dict(self):
        return {"kind": "planar", "center": self.center.tolist(), "height": self.z0, **self.profile.to_dict()}


class Circle(PlanarContour):
    kind = "circle"

    def __init__(self, radius: float = 50.0, center=(0.0, 0.0), height: float = 0.0):
        super().__init__(ConstantProfile(radius), center, height)
        self.radius = float(radius)

    def to_dict(self):
        return {"kind": "circle", "radius": self.radius, "center": self.center.tolist(), "height": self.z0}


class CurveOnSurface(EdgeCurve):
    """Planar contour lifted vertically onto a height-field surface."""

    kind = "lifted"

    def __init__(self, profile: RadiusProfile, surface: ImplicitSurface, center=(0.0, 0.0)):
        self.surface = surface
        super().__init__(profile, center)

    def _eval(self, theta):
        x, y, x1, y1, x2, y2 = self._planar(theta)
        f, fx, fy, fxx, fxy, fyy = self.surface.height(x, y)
        z1 = fx * x1 + fy * y1
        z2 = fxx * x1 * x1 + 2 * fxy * x1 * y1 + fyy * y1 * y1 + fx * x2 + fy * y2
        return np.stack((x, y, f), -1), np.stack((x1, y1, z1), -1), np.stack((x2, y2, z2), -1)

    def rim_normal_at(self, theta) -> np.ndarray:
        c = self._eval(theta)[0]
        n = self.surface.surface_normal(c)
        t = self.tangent_at(theta)
        n = n - (n @ t) * t
        return n / np.linalg.norm(n)

    def to_dict(self):
        return {"kind": "lifted", "center": self.center.tolist(), "surface": self.surface.to_dict(),
                **self.profile.to_dict()}
