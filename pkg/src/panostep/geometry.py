"""Spherical geometry for equirectangular panoramas under observer displacement.

Conventions (fixed for the whole package):

* Pixel centers: column ``x`` covers longitude ``2*pi*(x + 0.5)/width`` and
  row ``y`` covers polar angle ``pi*(y + 0.5)/height`` (polar 0 = zenith).
* Azimuth increases with increasing ``x``; the sphere center of the current
  panorama is the origin, and a displacement of ``(step, direction)`` moves
  the observer to ``step * (cos(direction), sin(direction), 0)``.
* A direction ``(azimuth, polar)`` corresponds to the unit vector
  ``(sin(polar)*cos(azimuth), sin(polar)*sin(azimuth), cos(polar))``.

All functions are pure and operate on immutable values; they are safe to
call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InvalidDisplacementError

TWO_PI = 2.0 * math.pi

# arccos/arcsin arguments within this distance outside [-1, 1] are treated
# as floating-point noise and clamped; anything larger is a domain error.
ARC_ARG_SLACK = 1e-9


@dataclass(frozen=True)
class ImageDims:
    """Dimensions of an equirectangular raster (width must be 2 * height)."""

    width: int
    height: int

    def __post_init__(self):
        if not (isinstance(self.width, int) and isinstance(self.height, int)):
            raise ValueError("image dimensions must be integers")
        if self.width < 2 or self.height < 1:
            raise ValueError(f"image dimensions too small: {self.width}x{self.height}")
        if self.width != 2 * self.height:
            raise ValueError(
                f"equirectangular images are 2:1, got {self.width}x{self.height}"
            )


@dataclass(frozen=True)
class PixelCoord:
    """Continuous pixel coordinate; integer values sit on pixel centers."""

    x: float
    y: float


@dataclass(frozen=True)
class SphereDir:
    """Direction on the unit sphere: azimuth in [0, 2*pi), polar in [0, pi]."""

    azimuth: float
    polar: float

    def __post_init__(self):
        if not (math.isfinite(self.azimuth) and math.isfinite(self.polar)):
            raise ValueError("sphere direction must be finite")
        az = self.azimuth % TWO_PI
        if az >= TWO_PI:  # fp: tiny negatives can wrap onto 2*pi exactly
            az -= TWO_PI
        object.__setattr__(self, "azimuth", az)
        object.__setattr__(self, "polar", min(max(self.polar, 0.0), math.pi))


@dataclass(frozen=True)
class UnitVec3:
    """Unit-length 3-vector; construction normalizes."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if not math.isfinite(n2) or n2 == 0.0:
            raise ValueError("cannot normalize a zero or non-finite vector")
        n = math.sqrt(n2)
        if n != 1.0:
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)


@dataclass(frozen=True)
class Displacement:
    """Observer translation: step in [0, 1) of the radius, direction in degrees."""

    step: float
    direction: float

    def __post_init__(self):
        if not (math.isfinite(self.step) and 0.0 <= self.step < 1.0):
            raise InvalidDisplacementError(
                f"step must lie in [0, 1), got {self.step!r}"
            )
        if not math.isfinite(self.direction):
            raise InvalidDisplacementError("direction must be finite")
        d = self.direction % 360.0
        if d >= 360.0:
            d -= 360.0
        object.__setattr__(self, "direction", d)

    @property
    def direction_rad(self) -> float:
        return math.radians(self.direction)


def pixel_to_dir(p: PixelCoord, dims: ImageDims) -> SphereDir:
    """Direction covered by the pixel-space point ``p`` (pixel-center rule)."""
    return SphereDir(
        TWO_PI * (p.x + 0.5) / dims.width,
        math.pi * (p.y + 0.5) / dims.height,
    )


def dir_to_pixel(d: SphereDir, dims: ImageDims) -> PixelCoord:
    """Inverse of :func:`pixel_to_dir`; x wraps modulo width, y clamps."""
    x = (d.azimuth / TWO_PI) * dims.width - 0.5
    x %= dims.width
    if x >= dims.width:  # fp: -1e-18 % width rounds to width
        x -= dims.width
    y = (d.polar / math.pi) * dims.height - 0.5
    return PixelCoord(x, max(y, 0.0))


def dir_to_vec(d: SphereDir) -> UnitVec3:
    sp = math.sin(d.polar)
    return UnitVec3(sp * math.cos(d.azimuth), sp * math.sin(d.azimuth), math.cos(d.polar))


def vec_to_dir(v: UnitVec3) -> SphereDir:
    # atan2(hypot, z) stays accurate near the poles where acos(z) does not.
    return SphereDir(math.atan2(v.y, v.x), math.atan2(math.hypot(v.x, v.y), v.z))


def displace_intersect(v: UnitVec3, disp: Displacement) -> UnitVec3:
    """Intersection with the old unit sphere of the ray ``l + t*v``, ``t > 0``.

    ``l`` is the displaced observer position. Because the observer is strictly
    inside the sphere, the quadratic always has one positive root
    ``t = -(l.v) + sqrt((l.v)^2 + 1 - step^2)``.
    """
    if disp.step >= 1.0:
        raise InvalidDisplacementError("observer must remain inside the sphere")
    dr = disp.direction_rad
    lx = disp.step * math.cos(dr)
    ly = disp.step * math.sin(dr)
    p = lx * v.x + ly * v.y
    t = math.sqrt(p * p + (1.0 - disp.step * disp.step)) - p
    return UnitVec3(lx + t * v.x, ly + t * v.y, t * v.z)


def map_dir(d_new: SphereDir, disp: Displacement) -> SphereDir:
    """Direction in the old panorama seen at ``d_new`` from the displaced observer.

    This 3D construction is the normative mapping; the closed forms below are
    diagnostic approximations measured against it.
    """
    return vec_to_dir(displace_intersect(dir_to_vec(d_new), disp))


def rotate_azimuth(d: SphereDir, delta: float) -> SphereDir:
    """Rotate a direction about the vertical axis by ``delta`` radians."""
    return SphereDir(d.azimuth + delta, d.polar)


def horizontal_map_closed(theta_rel: float, step: float) -> float:
    """Closed-form horizontal map: relative azimuth in the old panorama.

    For a point seen at relative azimuth ``theta_rel`` (measured from the
    displacement direction) the old panorama shows it at
    ``theta_rel - arcsin(step * sin(theta_rel))``. Exact on the equator;
    approximate elsewhere.
    """
    if not (math.isfinite(step) and 0.0 <= step < 1.0):
        raise DomainError(f"step must lie in [0, 1), got {step!r}")
    return theta_rel - math.asin(step * math.sin(theta_rel))


def _clamped_acos(arg: float) -> float:
    if arg > 1.0:
        if arg > 1.0 + ARC_ARG_SLACK:
            raise DomainError(f"arccos argument {arg!r} outside [-1, 1]")
        arg = 1.0
    elif arg < -1.0:
        if arg < -1.0 - ARC_ARG_SLACK:
            raise DomainError(f"arccos argument {arg!r} outside [-1, 1]")
        arg = -1.0
    return math.acos(arg)


def vertical_map_closed(elev: float, a: float, crossed_pole: bool = False) -> float:
    """Closed-form vertical map (diagnostic only; the 3D map is normative).

    ``elev`` is the angle from the equator (positive toward the nadir) and
    ``a`` the effective in-plane displacement. The two branches cover a ray
    that stayed in its hemisphere (``crossed_pole=False``) or crossed the
    pole facing it (``crossed_pole=True``); with this parameterization they
    agree to floating-point noise.
    """
    if not (math.isfinite(a) and a >= 0.0):
        raise DomainError(f"effective displacement must be >= 0, got {a!r}")
    if not math.isfinite(elev):
        raise DomainError("elevation must be finite")
    c = math.cos(elev)
    d2 = a * a - 2.0 * a * c + 1.0
    if d2 <= 0.0:
        raise DomainError("degenerate geometry: observer on the sphere surface")
    denom = math.sqrt(d2)
    sign = (elev > 0.0) - (elev < 0.0)
    if crossed_pole:
        return sign * (math.pi - _clamped_acos((a - c) / denom))
    return sign * _clamped_acos(-(a - c) / denom)
