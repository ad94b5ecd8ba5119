"""Vehicle-side receiver: VRU track table, threat assessment, HMI alerts.

Tracks are keyed by station id, latest-wins by minute-wrapped sec_mark,
and expire after five silent seconds (five maximum trigger intervals).
Assessment dead-reckons the tracked VRU forward from its last update and
grades the predicted encounter into NONE / INFORM / WARN / BRAKE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from .geo import GeoPoint, EnuVector, enu_project
from .kinematics import BodyState, KinematicsParams, stopping_profile, ttc_cpa
from .messages import (
    DENM_TYPE,
    PSM_TYPE,
    DecodeError,
    decode_denm,
    decode_psm,
)

TRACK_EXPIRY_MS = 5000
WARN_HEADROOM_S = 2.0
SEC_MARK_WRAP = 60000


class AlertLevel(IntEnum):
    NONE = 0
    INFORM = 1
    WARN = 2
    BRAKE = 3


@dataclass
class VruTrack:
    station_id: int
    last_update_ms: int
    position: GeoPoint
    speed_mps: float
    heading_deg: float
    source: str  # "PSM" or "DENM"
    sec_mark_ms: int


@dataclass(frozen=True)
class AlertAssessment:
    station_id: int
    level: AlertLevel
    ttc_s: Optional[float]
    distance_m: float


def velocity_from_heading(speed_mps: float, heading_deg: float) -> EnuVector:
    """Compass heading (0 = north, 90 = east) to an ENU velocity."""
    h = math.radians(heading_deg)
    return EnuVector(speed_mps * math.sin(h), speed_mps * math.cos(h))


def _sec_mark_newer(new_mark: int, old_mark: int) -> bool:
    if new_mark >= 61000 or old_mark >= 61000:
        return True  # unavailable marks cannot be ordered; accept
    diff = (new_mark - old_mark) % SEC_MARK_WRAP
    return 0 < diff < SEC_MARK_WRAP // 2


class Obu:
    """One on-board unit; single-threaded, independent of other OBUs."""

    def __init__(self, obu_id: str, kinematics: KinematicsParams, ch_range_m: float = 130.0):
        self.obu_id = obu_id
        self.kinematics = kinematics
        self.ch_range_m = ch_range_m
        self.tracks: dict[int, VruTrack] = {}
        self.decode_errors = 0

    def ingest(self, frame: bytes, now_ms: int) -> Optional[VruTrack]:
        """Decode a received frame and update the track table (latest wins)."""
        try:
            if frame and frame[0] == DENM_TYPE:
                m = decode_denm(frame)
                source = "DENM"
            else:
                m = decode_psm(frame)
                source = "PSM"
        except DecodeError:
            self.decode_errors += 1
            return None
        existing = self.tracks.get(m.station_id)
        if existing is not None and not _sec_mark_newer(m.sec_mark_ms, existing.sec_mark_ms):
            return None
        track = VruTrack(
            station_id=m.station_id,
            last_update_ms=now_ms,
            position=GeoPoint(m.lat_e7 / 1e7, m.lon_e7 / 1e7),
            speed_mps=m.speed_cmps / 100.0 if m.speed_cmps != 65535 else 0.0,
            heading_deg=m.heading_cdeg / 100.0 if m.heading_cdeg != 65535 else 0.0,
            source=source,
            sec_mark_ms=m.sec_mark_ms,
        )
        self.tracks[m.station_id] = track
        return track

    def assess(
        self,
        track: VruTrack,
        self_position: GeoPoint,
        self_velocity: EnuVector,
        speed_mps: float,
        now_ms: int,
    ) -> AlertAssessment:
        """Grade one track against the vehicle's own state."""
        k = self.kinematics
        age_s = max(0.0, (now_ms - track.last_update_ms) / 1000.0)
        vru_vel = velocity_from_heading(track.speed_mps, track.heading_deg)
        # Dead-reckon the track forward by its age before extrapolating.
        vru_pos = enu_project(self_position, track.position) + vru_vel.scaled(age_s)
        vehicle = BodyState(EnuVector(0.0, 0.0), self_velocity)
        vru = BodyState(vru_pos, vru_vel)
        ttc = ttc_cpa(vehicle, vru, k)
        distance = vru_pos.norm()
        stop_time, _ = stopping_profile(speed_mps, k)
        if ttc is not None and ttc <= stop_time:
            level = AlertLevel.BRAKE
        elif ttc is not None and ttc <= stop_time + WARN_HEADROOM_S:
            level = AlertLevel.WARN
        else:
            rel_vel = vru.velocity_mps - vehicle.velocity_mps
            closing = (vru_pos - vehicle.position).dot(rel_vel) < 0.0
            if distance <= self.ch_range_m and closing:
                level = AlertLevel.INFORM
            else:
                level = AlertLevel.NONE
        return AlertAssessment(track.station_id, level, ttc, distance)

    def assess_all(
        self,
        self_position: GeoPoint,
        self_velocity: EnuVector,
        speed_mps: float,
        now_ms: int,
    ) -> list[AlertAssessment]:
        return [
            self.assess(t, self_position, self_velocity, speed_mps, now_ms)
            for t in sorted(self.tracks.values(), key=lambda t: t.station_id)
        ]

    def expire_tracks(self, now_ms: int) -> list[int]:
        """Drop tracks silent for longer than the expiry; returns removed ids."""
        removed = [
            sid for sid, t in self.tracks.items()
            if now_ms - t.last_update_ms > TRACK_EXPIRY_MS
        ]
        for sid in removed:
            del self.tracks[sid]
        return sorted(removed)
