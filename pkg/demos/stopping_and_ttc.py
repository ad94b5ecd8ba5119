"""Walkthrough of the stopping model and time-to-collision estimate.

A warning is useful only if it arrives while the driver can still stop.
This script prints the stop time/distance over a range of speeds and then
walks a simple crossing encounter, showing how the TTC estimate shrinks
and where the alert bands (WARN, BRAKE) kick in.
"""

from vruguard.geo import EnuVector
from vruguard.kinematics import (
    BodyState,
    KinematicsParams,
    stopping_profile,
    ttc_cpa,
)

k = KinematicsParams()  # 0.66 s reaction, 7.0547 m/s^2 braking

print("speed     stop time   stop distance")
for kmh in (20, 32, 48, 64, 80):
    v = kmh / 3.6
    stop_time, stop_dist = stopping_profile(v, k)
    print(f"{kmh:3d} km/h   {stop_time:6.2f} s   {stop_dist:8.2f} m")

print()
print("A car at 64 km/h closes on a pedestrian standing 120 m ahead.")
print("WARN fires when ttc <= stop_time + 2 s, BRAKE when ttc <= stop_time.")
print()

v = 64.0 / 3.6
stop_time, _ = stopping_profile(v, k)
pedestrian = BodyState(EnuVector(120.0, 0.0), EnuVector(0.0, 0.0))

print("  t      gap      ttc    band")
for tenths in range(0, 70, 5):
    t = tenths / 10.0
    car = BodyState(EnuVector(v * t, 0.0), EnuVector(v, 0.0))
    ttc = ttc_cpa(car, pedestrian, k)
    if ttc is None:
        band = "clear"
    elif ttc <= stop_time:
        band = "BRAKE"
    elif ttc <= stop_time + 2.0:
        band = "WARN"
    else:
        band = "inform"
    gap = 120.0 - v * t
    print(f"{t:5.1f}s {gap:7.1f}m {ttc:7.2f}s  {band}")
