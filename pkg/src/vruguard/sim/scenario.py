"""Declarative scenario description and its JSON file format.

The JSON schema mirrors the dataclass field names one-to-one; validation
errors name the offending field so CLI diagnostics stay actionable.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional, Union

from ..geo import GeoPoint, Geofence
from ..kinematics import KinematicsParams
from ..dsrc import ChannelParams
from ..middleware import RsuRegistration
from ..vru_agent import SmootherParams, TriggerParams
from ..messages import VALID_ACTIVITIES

LATENCY_CAP_MS = 1000.0


class SpecError(ValueError):
    """Scenario validation failure; message names the offending field."""


@dataclass(frozen=True)
class LatencyDist:
    """One per-stage delay distribution: fixed, uniform, or lognormal."""

    kind: str  # "fixed" | "uniform" | "lognormal"
    ms: float = 0.0            # fixed
    lo_ms: float = 0.0         # uniform
    hi_ms: float = 0.0         # uniform
    median_ms: float = 60.0    # lognormal
    sigma: float = 0.5         # lognormal

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "uniform", "lognormal"):
            raise SpecError(f"latency kind must be fixed|uniform|lognormal: {self.kind!r}")
        if self.kind == "fixed" and self.ms < 0:
            raise SpecError(f"latency ms must be >= 0: {self.ms}")
        if self.kind == "uniform" and not 0 <= self.lo_ms <= self.hi_ms:
            raise SpecError(f"latency uniform bounds invalid: [{self.lo_ms}, {self.hi_ms}]")
        if self.kind == "lognormal" and (self.median_ms <= 0 or self.sigma < 0):
            raise SpecError("latency lognormal needs median_ms > 0 and sigma >= 0")

    def sample(self, rng: random.Random) -> float:
        if self.kind == "fixed":
            return max(0.0, self.ms)
        if self.kind == "uniform":
            return rng.uniform(self.lo_ms, self.hi_ms)
        # Only the lognormal has an unbounded tail worth capping.
        v = rng.lognormvariate(math.log(self.median_ms), self.sigma)
        return min(LATENCY_CAP_MS, v)

    @staticmethod
    def fixed(ms: float) -> "LatencyDist":
        return LatencyDist(kind="fixed", ms=ms)

    @staticmethod
    def lognormal(median_ms: float = 60.0, sigma: float = 0.5) -> "LatencyDist":
        return LatencyDist(kind="lognormal", median_ms=median_ms, sigma=sigma)


def _default_stage() -> LatencyDist:
    return LatencyDist.lognormal()


@dataclass(frozen=True)
class LatencyParams:
    """Cellular-path delays: VRU uplink, broker, and middleware stages."""

    uplink_ms: LatencyDist = field(default_factory=_default_stage)
    broker_ms: LatencyDist = field(default_factory=_default_stage)
    middleware_ms: LatencyDist = field(default_factory=_default_stage)

    def sample_total(self, rng: random.Random) -> float:
        return (
            self.uplink_ms.sample(rng)
            + self.broker_ms.sample(rng)
            + self.middleware_ms.sample(rng)
        )


@dataclass(frozen=True)
class NoiseParams:
    """GNSS error model: per-axis Gaussian plus rare network-fallback jumps."""

    sigma_m: float = 3.0
    outlier_prob: float = 0.0
    outlier_mag_m: float = 72.28

    def __post_init__(self) -> None:
        if self.sigma_m < 0:
            raise SpecError(f"noise sigma_m must be >= 0: {self.sigma_m}")
        if not 0 <= self.outlier_prob <= 1:
            raise SpecError(f"noise outlier_prob must be in [0, 1]: {self.outlier_prob}")
        if self.outlier_mag_m < 0:
            raise SpecError(f"noise outlier_mag_m must be >= 0: {self.outlier_mag_m}")


@dataclass(frozen=True)
class EntitySpec:
    """One scripted road user following waypoints at constant speed."""

    id: str
    kind: str  # "pedestrian" | "vehicle"
    speed_mps: float
    waypoints: tuple[GeoPoint, ...]
    activity: str = "walking"       # pedestrians only
    obu: bool = False               # vehicles only
    forced_outlier_ms: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("pedestrian", "vehicle"):
            raise SpecError(f"entity {self.id}: kind must be pedestrian|vehicle: {self.kind!r}")
        if self.speed_mps < 0:
            raise SpecError(f"entity {self.id}: speed_mps must be >= 0")
        if len(self.waypoints) < 1:
            raise SpecError(f"entity {self.id}: waypoints must contain at least one point")
        if self.activity not in VALID_ACTIVITIES:
            raise SpecError(f"entity {self.id}: unknown activity {self.activity!r}")


@dataclass(frozen=True)
class Occluder:
    """Axis-aligned rectangle in ENU meters about the geofence center (HMI only)."""

    east_min_m: float
    east_max_m: float
    north_min_m: float
    north_max_m: float


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    seed: int
    duration_ms: int
    geofence: Geofence
    rsus: tuple[RsuRegistration, ...]
    entities: tuple[EntitySpec, ...]
    step_ms: int = 100
    channel: ChannelParams = ChannelParams()
    latency: LatencyParams = field(default_factory=LatencyParams)
    noise: NoiseParams = NoiseParams()
    trigger: TriggerParams = TriggerParams()
    smoother: SmootherParams = SmootherParams()
    smoothing_enabled: bool = True
    kinematics: KinematicsParams = KinematicsParams()
    visual_detection_m: float = 20.0
    message_mode: str = "psm"
    occluders: tuple[Occluder, ...] = ()

    def __post_init__(self) -> None:
        if self.step_ms <= 0:
            raise SpecError(f"step_ms must be > 0: {self.step_ms}")
        if self.duration_ms < 0:
            raise SpecError(f"duration_ms must be >= 0: {self.duration_ms}")
        if self.message_mode not in ("psm", "denm"):
            raise SpecError(f"message_mode must be psm|denm: {self.message_mode!r}")
        if self.visual_detection_m < 0:
            raise SpecError("visual_detection_m must be >= 0")
        ids = [e.id for e in self.entities]
        if len(set(ids)) != len(ids):
            raise SpecError("entities: duplicate ids")


# --- JSON (de)serialization -------------------------------------------------

def _geopoint_to_dict(p: GeoPoint) -> dict:
    return {"lat_deg": p.lat_deg, "lon_deg": p.lon_deg}


def _geopoint_from(obj: dict, where: str) -> GeoPoint:
    try:
        return GeoPoint(float(obj["lat_deg"]), float(obj["lon_deg"]))
    except (KeyError, TypeError, ValueError) as e:
        raise SpecError(f"{where}: invalid GeoPoint: {e}") from e


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    d = asdict(spec)
    return d


def scenario_from_dict(obj: dict) -> ScenarioSpec:
    if not isinstance(obj, dict):
        raise SpecError("scenario root must be a JSON object")

    def need(key: str):
        if key not in obj:
            raise SpecError(f"missing field: {key}")
        return obj[key]

    try:
        fence_obj = need("geofence")
        fence = Geofence(
            _geopoint_from(fence_obj["center"], "geofence.center"),
            float(fence_obj["radius_m"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, SpecError):
            raise
        raise SpecError(f"geofence: {e}") from e

    def latency_dist(sub: dict, where: str) -> LatencyDist:
        try:
            return LatencyDist(**sub)
        except TypeError as e:
            raise SpecError(f"{where}: {e}") from e

    lat_obj = obj.get("latency", {})
    latency = LatencyParams(
        uplink_ms=latency_dist(lat_obj["uplink_ms"], "latency.uplink_ms") if "uplink_ms" in lat_obj else _default_stage(),
        broker_ms=latency_dist(lat_obj["broker_ms"], "latency.broker_ms") if "broker_ms" in lat_obj else _default_stage(),
        middleware_ms=latency_dist(lat_obj["middleware_ms"], "latency.middleware_ms") if "middleware_ms" in lat_obj else _default_stage(),
    )

    def build(cls, key: str, **extra):
        sub = obj.get(key)
        if sub is None:
            return cls(**extra)
        try:
            return cls(**{**extra, **sub})
        except (TypeError, ValueError) as e:
            raise SpecError(f"{key}: {e}") from e

    rsus = []
    for i, r in enumerate(obj.get("rsus", [])):
        try:
            rsus.append(RsuRegistration(
                rsu_id=str(r["rsu_id"]),
                position=_geopoint_from(r["position"], f"rsus[{i}].position"),
                relevance_radius_m=float(r["relevance_radius_m"]),
            ))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, SpecError):
                raise
            raise SpecError(f"rsus[{i}]: {e}") from e

    entities = []
    for i, e in enumerate(obj.get("entities", [])):
        try:
            entities.append(EntitySpec(
                id=str(e["id"]),
                kind=str(e["kind"]),
                speed_mps=float(e["speed_mps"]),
                waypoints=tuple(
                    _geopoint_from(w, f"entities[{i}].waypoints") for w in e["waypoints"]
                ),
                activity=str(e.get("activity", "walking")),
                obu=bool(e.get("obu", False)),
                forced_outlier_ms=tuple(int(t) for t in e.get("forced_outlier_ms", [])),
            ))
        except (KeyError, TypeError, ValueError) as err:
            if isinstance(err, SpecError):
                raise
            raise SpecError(f"entities[{i}]: {err}") from err

    occluders = tuple(
        Occluder(**o) for o in obj.get("occluders", [])
    )

    try:
        return ScenarioSpec(
            name=str(need("name")),
            seed=int(need("seed")),
            duration_ms=int(need("duration_ms")),
            geofence=fence,
            rsus=tuple(rsus),
            entities=tuple(entities),
            step_ms=int(obj.get("step_ms", 100)),
            channel=build(ChannelParams, "channel"),
            latency=latency,
            noise=build(NoiseParams, "noise"),
            trigger=build(TriggerParams, "trigger"),
            smoother=build(SmootherParams, "smoother"),
            smoothing_enabled=bool(obj.get("smoothing_enabled", True)),
            kinematics=build(KinematicsParams, "kinematics"),
            visual_detection_m=float(obj.get("visual_detection_m", 20.0)),
            message_mode=str(obj.get("message_mode", "psm")),
            occluders=occluders,
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, SpecError):
            raise
        raise SpecError(str(e)) from e


def load_scenario(path: Union[str, Path]) -> ScenarioSpec:
    p = Path(path)
    try:
        obj = json.loads(p.read_text())
    except FileNotFoundError:
        raise SpecError(f"scenario file not found: {p}")
    except json.JSONDecodeError as e:
        raise SpecError(f"scenario file is not valid JSON: {e}") from e
    return scenario_from_dict(obj)


def save_scenario(spec: ScenarioSpec, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(spec), indent=2, sort_keys=True))
