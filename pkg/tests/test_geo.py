import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vruguard.geo import (
    EARTH_RADIUS_M,
    EnuVector,
    Geofence,
    GeoPoint,
    enu_project,
    enu_unproject,
    geofence_contains,
    haversine_distance,
)

DEG_M = EARTH_RADIUS_M * math.pi / 180.0  # meters per degree of latitude


def test_same_point_distance_zero():
    p = GeoPoint(0.0, 0.0)
    assert haversine_distance(p, p) == 0.0


def test_one_degree_longitude_at_equator():
    d = haversine_distance(GeoPoint(0, 0), GeoPoint(0, 1))
    assert d == pytest.approx(DEG_M, abs=0.01)
    assert d == pytest.approx(111_194.93, abs=0.01)


def test_half_circumference():
    d = haversine_distance(GeoPoint(0, 0), GeoPoint(0, -180))
    assert d == pytest.approx(math.pi * EARTH_RADIUS_M, abs=0.1)
    assert d == pytest.approx(20_015_086.8, abs=0.1)


def test_geopoint_validation():
    with pytest.raises(ValueError):
        GeoPoint(91.0, 0.0)
    with pytest.raises(ValueError):
        GeoPoint(0.0, 180.0)
    with pytest.raises(ValueError):
        GeoPoint(float("nan"), 0.0)


def test_enu_identity():
    o = GeoPoint(57.7, 12.5)
    v = enu_project(o, o)
    assert v.east_m == 0.0 and v.north_m == 0.0


def test_enu_north_offset():
    v = enu_project(GeoPoint(0, 0), GeoPoint(0.001, 0))
    assert v.north_m == pytest.approx(111.19, abs=0.01)
    assert v.east_m == 0.0


def test_enu_cosine_scaling_at_60_north():
    v = enu_project(GeoPoint(60, 0), GeoPoint(60, 0.001))
    assert v.east_m == pytest.approx(55.60, abs=0.05)


def test_enu_rejects_large_offsets():
    with pytest.raises(ValueError):
        enu_project(GeoPoint(0, 0), GeoPoint(1.5, 0))


def test_geofence_center_and_boundary_inside():
    center = GeoPoint(57.7, 12.5)
    edge = enu_unproject(center, EnuVector(0.0, 1000.0))
    # radius set to the exact haversine distance: point sits on the boundary
    f = Geofence(center, haversine_distance(center, edge))
    assert f.radius_m == pytest.approx(1000.0, abs=1e-6)
    assert geofence_contains(f, f.center)
    assert geofence_contains(f, edge)


def test_geofence_just_outside():
    f = Geofence(GeoPoint(57.7, 12.5), 1000.0)
    p = enu_unproject(f.center, EnuVector(0.0, 1000.5))
    assert not geofence_contains(f, p)


geo_points = st.builds(
    GeoPoint,
    st.floats(min_value=-89.0, max_value=89.0),
    st.floats(min_value=-180.0, max_value=179.999),
)


@given(geo_points, geo_points)
def test_distance_symmetry(a, b):
    assert haversine_distance(a, b) == haversine_distance(b, a)


@given(geo_points, geo_points, geo_points)
@settings(max_examples=200)
def test_triangle_inequality(a, b, c):
    ab = haversine_distance(a, b)
    bc = haversine_distance(b, c)
    ac = haversine_distance(a, c)
    assert ac <= ab + bc + 1e-6 * max(1.0, ac)


@given(
    st.floats(min_value=-69.0, max_value=69.0),
    st.floats(min_value=-180.0, max_value=179.0),
    st.floats(min_value=-5000.0, max_value=5000.0),
    st.floats(min_value=-5000.0, max_value=5000.0),
)
@settings(max_examples=200)
def test_enu_round_trip(lat, lon, east, north):
    origin = GeoPoint(lat, lon)
    p = enu_unproject(origin, EnuVector(east, north))
    v = enu_project(origin, p)
    assert abs(v.east_m - east) < 0.01
    assert abs(v.north_m - north) < 0.01


@given(
    geo_points,
    st.floats(min_value=1.0, max_value=100_000.0),
    st.floats(min_value=0.01, max_value=1.0),
    geo_points,
)
def test_geofence_monotone_in_radius(center, radius, shrink, p):
    big = Geofence(center, radius)
    small = Geofence(center, radius * shrink)
    if geofence_contains(small, p):
        assert geofence_contains(big, p)
