"""Stopping model and time-to-collision under constant-velocity extrapolation.

The stopping model is the classic two-phase one: a reaction ("thinking")
phase at constant speed followed by constant-deceleration braking. The
default deceleration reproduces a 2.52 s braking phase at 64 km/h; the
UK-highway-code style 6.57 m/s^2 is accepted through the same parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .geo import EnuVector

#: Deceleration giving a 2.52 s braking phase from 64 km/h.
DEFAULT_DECEL_MPS2 = 7.0547


@dataclass(frozen=True)
class KinematicsParams:
    t_think_s: float = 0.66
    decel_mps2: float = DEFAULT_DECEL_MPS2
    collision_radius_m: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_think_s) and self.t_think_s >= 0.0):
            raise ValueError(f"t_think_s must be >= 0: {self.t_think_s}")
        if not (math.isfinite(self.decel_mps2) and self.decel_mps2 > 0.0):
            raise ValueError(f"decel_mps2 must be > 0: {self.decel_mps2}")
        if not (math.isfinite(self.collision_radius_m) and self.collision_radius_m >= 0.0):
            raise ValueError(f"collision_radius_m must be >= 0: {self.collision_radius_m}")


@dataclass(frozen=True)
class BodyState:
    """Planar position and velocity of one road user."""

    position: EnuVector
    velocity_mps: EnuVector


def stopping_profile(speed_mps: float, k: KinematicsParams) -> tuple[float, float]:
    """Return (stop_time_s, stop_distance_m) for a vehicle at ``speed_mps``."""
    if speed_mps < 0.0 or not math.isfinite(speed_mps):
        raise ValueError(f"speed_mps must be >= 0: {speed_mps}")
    stop_time = k.t_think_s + speed_mps / k.decel_mps2
    stop_distance = speed_mps * k.t_think_s + speed_mps**2 / (2.0 * k.decel_mps2)
    return stop_time, stop_distance


def ttc_cpa(vehicle: BodyState, vru: BodyState, k: KinematicsParams) -> Optional[float]:
    """Smallest t >= 0 at which the separation is within the collision radius.

    Both bodies are extrapolated at constant velocity. Returns None when the
    separation never reaches the radius, or when the closest approach already
    lies in the past.
    """
    r = vru.position - vehicle.position
    u = vru.velocity_mps - vehicle.velocity_mps
    radius = k.collision_radius_m

    c = r.dot(r) - radius * radius
    if c <= 0.0:
        return 0.0  # already in contact

    a = u.dot(u)
    b = 2.0 * r.dot(u)
    if a == 0.0:
        return None  # no relative motion, never closes
    disc = b * b - 4.0 * a * c
    if abs(disc) < 1e-12 * b * b:
        # Exact head-on closure makes disc mathematically zero; rounding
        # noise on either side of zero is a grazing contact at -b / (2a).
        disc = 0.0
    if disc < 0.0:
        return None  # closest approach misses the radius
    sqrt_disc = math.sqrt(disc)
    t_first = (-b - sqrt_disc) / (2.0 * a)
    if t_first >= 0.0:
        return t_first
    return None  # contact interval entirely in the past


def alert_deadline_met(ttc_s: float, speed_mps: float, k: KinematicsParams) -> bool:
    """True iff an alert at ``ttc_s`` leaves the vehicle enough time to stop."""
    if ttc_s < 0.0:
        raise ValueError(f"ttc_s must be >= 0: {ttc_s}")
    stop_time, _ = stopping_profile(speed_mps, k)
    return ttc_s >= stop_time
