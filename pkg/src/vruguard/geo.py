"""WGS84 geodesy, local ENU projection, and circular geofencing.

All distances are great-circle distances on a sphere of radius
``EARTH_RADIUS_M``; the local planar frame is an equirectangular
east/north projection, which is sub-centimeter accurate for the
few-kilometer extents this system operates over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0

# Equirectangular projection is only used for small offsets.
MAX_PROJECTION_DELTA_DEG = 1.0


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 position in decimal degrees."""

    lat_deg: float
    lon_deg: float

    def __post_init__(self) -> None:
        _require_finite("lat_deg", self.lat_deg)
        _require_finite("lon_deg", self.lon_deg)
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"lat_deg out of range [-90, 90]: {self.lat_deg}")
        if not -180.0 <= self.lon_deg < 180.0:
            raise ValueError(f"lon_deg out of range [-180, 180): {self.lon_deg}")


@dataclass(frozen=True)
class EnuVector:
    """A displacement (or velocity) in the local east/north plane, meters."""

    east_m: float
    north_m: float

    def __post_init__(self) -> None:
        _require_finite("east_m", self.east_m)
        _require_finite("north_m", self.north_m)

    def __add__(self, other: "EnuVector") -> "EnuVector":
        return EnuVector(self.east_m + other.east_m, self.north_m + other.north_m)

    def __sub__(self, other: "EnuVector") -> "EnuVector":
        return EnuVector(self.east_m - other.east_m, self.north_m - other.north_m)

    def scaled(self, k: float) -> "EnuVector":
        return EnuVector(self.east_m * k, self.north_m * k)

    def dot(self, other: "EnuVector") -> float:
        return self.east_m * other.east_m + self.north_m * other.north_m

    def norm(self) -> float:
        return math.hypot(self.east_m, self.north_m)


@dataclass(frozen=True)
class Geofence:
    """A closed circular disk on the sphere."""

    center: GeoPoint
    radius_m: float

    def __post_init__(self) -> None:
        _require_finite("radius_m", self.radius_m)
        if self.radius_m <= 0.0:
            raise ValueError(f"radius_m must be > 0: {self.radius_m}")


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points, meters."""
    phi1 = math.radians(a.lat_deg)
    phi2 = math.radians(b.lat_deg)
    dphi = math.radians(b.lat_deg - a.lat_deg)
    dlmb = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _wrapped_dlon_deg(origin: GeoPoint, p: GeoPoint) -> float:
    return (p.lon_deg - origin.lon_deg + 180.0) % 360.0 - 180.0


def enu_project(origin: GeoPoint, p: GeoPoint) -> EnuVector:
    """Project ``p`` into the east/north plane tangent at ``origin``.

    Valid only for offsets below ``MAX_PROJECTION_DELTA_DEG`` on each axis.
    """
    dlat = p.lat_deg - origin.lat_deg
    dlon = _wrapped_dlon_deg(origin, p)
    if abs(dlat) >= MAX_PROJECTION_DELTA_DEG or abs(dlon) >= MAX_PROJECTION_DELTA_DEG:
        raise ValueError(
            f"point too far from projection origin: dlat={dlat:.4f}deg dlon={dlon:.4f}deg"
        )
    east = EARTH_RADIUS_M * math.radians(dlon) * math.cos(math.radians(origin.lat_deg))
    north = EARTH_RADIUS_M * math.radians(dlat)
    return EnuVector(east, north)


def enu_unproject(origin: GeoPoint, v: EnuVector) -> GeoPoint:
    """Inverse of :func:`enu_project` about the same origin."""
    dlat = math.degrees(v.north_m / EARTH_RADIUS_M)
    dlon = math.degrees(v.east_m / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat_deg))))
    if abs(dlat) >= MAX_PROJECTION_DELTA_DEG or abs(dlon) >= MAX_PROJECTION_DELTA_DEG:
        raise ValueError(f"offset too large for local projection: {v}")
    lon = (origin.lon_deg + dlon + 180.0) % 360.0 - 180.0
    return GeoPoint(origin.lat_deg + dlat, lon)


def geofence_contains(f: Geofence, p: GeoPoint) -> bool:
    """Closed-disk membership: a point exactly at the radius is inside."""
    return haversine_distance(f.center, p) <= f.radius_m
