"""VRU-side beaconing logic: smoothing, outlier rejection, publication
triggering, geofencing, and the vulnerability state machine.

Raw position fixes arrive as :class:`PotiSample`; the agent rejects
implausible jumps (the network-fallback failure mode of phone location
services), averages the remaining fixes over a short rolling window,
decides whether the user is currently vulnerable, and applies
awareness-message style trigger rules before publishing a report.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .geo import GeoPoint, Geofence, enu_project, enu_unproject, geofence_contains, haversine_distance
from .messages import PotiReport, VALID_ACTIVITIES


@dataclass(frozen=True)
class PotiSample:
    """One raw position-and-time fix from the location provider."""

    ts_ms: int
    position: GeoPoint
    speed_mps: float
    heading_deg: float
    accuracy_m: float
    activity: str

    def __post_init__(self) -> None:
        if self.speed_mps < 0.0:
            raise ValueError(f"speed_mps must be >= 0: {self.speed_mps}")
        if not 0.0 <= self.heading_deg < 360.0:
            raise ValueError(f"heading_deg must be in [0, 360): {self.heading_deg}")
        if self.accuracy_m < 0.0:
            raise ValueError(f"accuracy_m must be >= 0: {self.accuracy_m}")
        if self.activity not in VALID_ACTIVITIES:
            raise ValueError(f"unknown activity: {self.activity!r}")


@dataclass(frozen=True)
class TriggerParams:
    """Awareness-message style generation rules (defaults follow ETSI CAM)."""

    d_pos_m: float = 4.0
    d_speed_mps: float = 0.5
    d_heading_deg: float = 4.0
    t_max_ms: int = 1000
    t_min_ms: int = 100

    def __post_init__(self) -> None:
        if self.t_min_ms >= self.t_max_ms:
            raise ValueError("t_min_ms must be < t_max_ms")
        if min(self.d_pos_m, self.d_speed_mps, self.d_heading_deg, self.t_min_ms) <= 0:
            raise ValueError("all trigger thresholds must be > 0")


@dataclass(frozen=True)
class SmootherParams:
    window: int = 5
    max_speed_mps: float = 10.0

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.max_speed_mps <= 0.0:
            raise ValueError("max_speed_mps must be > 0")


class VulnerabilityState(Enum):
    ACTIVE = "ACTIVE"
    PAUSED_IN_VEHICLE = "PAUSED_IN_VEHICLE"
    OUT_OF_FENCE = "OUT_OF_FENCE"


def _plausible(anchor_pos: GeoPoint, anchor_ts: int, sample: PotiSample, s: SmootherParams) -> bool:
    dt_s = (sample.ts_ms - anchor_ts) / 1000.0
    jump_m = haversine_distance(anchor_pos, sample.position)
    if dt_s <= 0:
        return jump_m == 0.0
    return jump_m <= s.max_speed_mps * dt_s


def _accepted_positions(history: Sequence[PotiSample], s: SmootherParams) -> list[GeoPoint]:
    positions: list[GeoPoint] = []
    anchor_pos: Optional[GeoPoint] = None
    anchor_ts = 0
    for sample in history:
        # Implied speed is measured from the last genuinely accepted fix, so
        # a rejected jump widens the allowance until a fix is plausible again.
        if anchor_pos is None or _plausible(anchor_pos, anchor_ts, sample, s):
            anchor_pos = sample.position
            anchor_ts = sample.ts_ms
            positions.append(sample.position)
        else:
            # Hold the last accepted position: keeps the window full.
            positions.append(anchor_pos)
    return positions


def _mean_position(positions: Sequence[GeoPoint]) -> GeoPoint:
    origin = positions[-1]
    east = north = 0.0
    for p in positions:
        v = enu_project(origin, p)
        east += v.east_m
        north += v.north_m
    n = len(positions)
    from .geo import EnuVector

    return enu_unproject(origin, EnuVector(east / n, north / n))


def smooth(history: Sequence[PotiSample], s: SmootherParams) -> PotiSample:
    """Outlier-rejected rolling average of the last ``window`` positions.

    A sample whose implied speed from the previously accepted position
    exceeds ``max_speed_mps`` is replaced by that previous position; the
    output carries the newest sample's time, speed, heading, and activity.
    """
    if not history:
        raise ValueError("history must be non-empty")
    accepted = _accepted_positions(history, s)
    window = accepted[-s.window:]
    newest = history[-1]
    return PotiSample(
        ts_ms=newest.ts_ms,
        position=_mean_position(window),
        speed_mps=newest.speed_mps,
        heading_deg=newest.heading_deg,
        accuracy_m=newest.accuracy_m,
        activity=newest.activity,
    )


def circular_heading_delta(a_deg: float, b_deg: float) -> float:
    d = abs(a_deg - b_deg) % 360.0
    return min(d, 360.0 - d)


def should_trigger(last_sent: PotiSample, current: PotiSample, p: TriggerParams) -> bool:
    """CAM-style trigger: dynamics thresholds gated by min/max intervals."""
    elapsed = current.ts_ms - last_sent.ts_ms
    if elapsed < 0:
        raise ValueError("current sample older than last sent")
    if elapsed < p.t_min_ms:
        return False
    if elapsed >= p.t_max_ms:
        return True
    if haversine_distance(last_sent.position, current.position) > p.d_pos_m:
        return True
    if abs(current.speed_mps - last_sent.speed_mps) > p.d_speed_mps:
        return True
    return circular_heading_delta(current.heading_deg, last_sent.heading_deg) > p.d_heading_deg


def vulnerability_step(state: VulnerabilityState, sample: PotiSample, fence: Geofence) -> VulnerabilityState:
    """Next vulnerability state; `unknown` activity stays vulnerable (fail-safe)."""
    if not geofence_contains(fence, sample.position):
        return VulnerabilityState.OUT_OF_FENCE
    if sample.activity == "in_vehicle":
        return VulnerabilityState.PAUSED_IN_VEHICLE
    return VulnerabilityState.ACTIVE


class OutOfOrderSample(ValueError):
    pass


class VruAgent:
    """The per-user pipeline: smooth -> vulnerability -> trigger -> publish.

    Single-threaded; distinct agents are independent. Smoothing state is kept
    incrementally but is exactly equivalent to calling :func:`smooth` on the
    full sample history.
    """

    def __init__(
        self,
        agent_id: str,
        fence: Geofence,
        trigger: TriggerParams = TriggerParams(),
        smoother: SmootherParams = SmootherParams(),
        smoothing_enabled: bool = True,
    ):
        self.agent_id = agent_id
        self.fence = fence
        self.trigger = trigger
        self.smoother = smoother
        self.smoothing_enabled = smoothing_enabled
        self.state = VulnerabilityState.ACTIVE
        self.last_sent: Optional[PotiSample] = None
        self._last_ts: Optional[int] = None
        self._anchor_pos: Optional[GeoPoint] = None
        self._anchor_ts = 0
        self._window: deque[GeoPoint] = deque(maxlen=smoother.window)

    def _smooth_incremental(self, raw: PotiSample) -> PotiSample:
        if self._anchor_pos is None or _plausible(self._anchor_pos, self._anchor_ts, raw, self.smoother):
            self._anchor_pos = raw.position
            self._anchor_ts = raw.ts_ms
            position = raw.position
        else:
            position = self._anchor_pos
        self._window.append(position)
        return PotiSample(
            ts_ms=raw.ts_ms,
            position=_mean_position(list(self._window)),
            speed_mps=raw.speed_mps,
            heading_deg=raw.heading_deg,
            accuracy_m=raw.accuracy_m,
            activity=raw.activity,
        )

    def step(self, raw: PotiSample) -> Optional[PotiReport]:
        """Feed one raw fix; returns a report when the agent publishes."""
        if self._last_ts is not None and raw.ts_ms <= self._last_ts:
            raise OutOfOrderSample(
                f"sample at {raw.ts_ms} not newer than {self._last_ts}"
            )
        smoothed = self._smooth_incremental(raw) if self.smoothing_enabled else raw
        self._last_ts = raw.ts_ms
        self.state = vulnerability_step(self.state, smoothed, self.fence)
        if self.state is not VulnerabilityState.ACTIVE:
            return None
        if self.last_sent is not None and not should_trigger(self.last_sent, smoothed, self.trigger):
            return None
        self.last_sent = smoothed
        return PotiReport(
            id=self.agent_id,
            ts_ms=smoothed.ts_ms,
            lat_deg=smoothed.position.lat_deg,
            lon_deg=smoothed.position.lon_deg,
            speed_mps=smoothed.speed_mps,
            heading_deg=smoothed.heading_deg,
            accuracy_m=smoothed.accuracy_m,
            activity=smoothed.activity,
        )


def agent_step(agent: VruAgent, raw_sample: PotiSample) -> Optional[PotiReport]:
    """Functional alias for :meth:`VruAgent.step`."""
    return agent.step(raw_sample)
