"""The three built-in reference scenarios.

All geometry is laid out in a local east/north frame about a proving-ground
center point and converted to WGS84 waypoints. `urban-coverage` exercises
radio coverage only, `track-occlusion` is the core occluded-crossing
encounter, and `bridge-outlier` recreates the network-fallback position
jump that motivates the smoothing pipeline.
"""

from __future__ import annotations

from ..geo import EnuVector, GeoPoint, Geofence, enu_unproject
from ..kinematics import KinematicsParams
from ..dsrc import ChannelParams
from ..middleware import RsuRegistration
from .scenario import EntitySpec, NoiseParams, Occluder, ScenarioSpec

#: Proving-ground reference point (Sandhult area).
GROUNDS_CENTER = GeoPoint(57.7775, 12.5740)

SPEED_64_KMH = 64.0 / 3.6


def _pt(east_m: float, north_m: float, center: GeoPoint = GROUNDS_CENTER) -> GeoPoint:
    return enu_unproject(center, EnuVector(east_m, north_m))


def urban_coverage(seed: int = 1) -> ScenarioSpec:
    """Drive-by past an RSU: reception only inside the 130 m disk."""
    return ScenarioSpec(
        name="urban-coverage",
        seed=seed,
        duration_ms=42_000,
        geofence=Geofence(GROUNDS_CENTER, 2000.0),
        rsus=(RsuRegistration("rsu-1", _pt(0.0, 0.0), 500.0),),
        entities=(
            EntitySpec(
                id="car-1", kind="vehicle", speed_mps=15.0, obu=True,
                waypoints=(_pt(-300.0, -10.0), _pt(300.0, -10.0)),
            ),
            EntitySpec(
                id="ped-1", kind="pedestrian", speed_mps=0.0, activity="standing",
                waypoints=(_pt(10.0, 5.0),),
            ),
        ),
        channel=ChannelParams(range_m=130.0, loss_prob=0.0, per_hop_delay_ms=2.0),
    )


def track_occlusion(seed: int = 42) -> ScenarioSpec:
    """Vehicle at 64 km/h meets a pedestrian emerging from behind a truck."""
    return ScenarioSpec(
        name="track-occlusion",
        seed=seed,
        duration_ms=18_000,
        geofence=Geofence(GROUNDS_CENTER, 2000.0),
        rsus=(RsuRegistration("rsu-1", _pt(0.0, 15.0), 500.0),),
        entities=(
            EntitySpec(
                id="car-1", kind="vehicle", speed_mps=SPEED_64_KMH, obu=True,
                waypoints=(_pt(-280.0, 0.0), _pt(150.0, 0.0)),
            ),
            EntitySpec(
                id="ped-1", kind="pedestrian", speed_mps=1.4, activity="walking",
                waypoints=(_pt(0.0, -22.0), _pt(0.0, 30.0)),
            ),
        ),
        channel=ChannelParams(range_m=130.0, loss_prob=0.0, per_hop_delay_ms=2.0),
        # Contact allowance wide enough that smoothed GNSS error cannot hide
        # a genuine crossing from the TTC check.
        kinematics=KinematicsParams(collision_radius_m=4.0),
        visual_detection_m=20.0,
        occluders=(Occluder(-9.0, -2.0, -8.0, -2.0),),
    )


def bridge_outlier(seed: int = 42) -> ScenarioSpec:
    """Steady walk with one full-magnitude network-fallback jump at t=30 s."""
    return ScenarioSpec(
        name="bridge-outlier",
        seed=seed,
        duration_ms=60_000,
        geofence=Geofence(GROUNDS_CENTER, 2000.0),
        rsus=(RsuRegistration("rsu-1", _pt(0.0, 20.0), 500.0),),
        entities=(
            EntitySpec(
                id="ped-1", kind="pedestrian", speed_mps=1.0, activity="walking",
                waypoints=(_pt(0.0, 0.0), _pt(40.0, 0.0)),
                forced_outlier_ms=(30_000,),
            ),
        ),
        noise=NoiseParams(sigma_m=3.0, outlier_prob=0.0, outlier_mag_m=70.0),
    )


def reference_scenarios() -> dict[str, ScenarioSpec]:
    return {
        "urban-coverage": urban_coverage(),
        "track-occlusion": track_occlusion(),
        "bridge-outlier": bridge_outlier(),
    }
