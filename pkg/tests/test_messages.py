import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vruguard.messages import (
    CAUSE_HUMAN_PRESENCE,
    BasicType,
    DecodeError,
    DenmMessage,
    EncodeError,
    FieldRangeError,
    PotiReport,
    PsmMessage,
    TruncatedFrame,
    WrongMessageType,
    WrongVersion,
    decode_denm,
    decode_psm,
    encode_denm,
    encode_psm,
    poti_to_psm,
)


def sample_psm(**overrides) -> PsmMessage:
    fields = dict(
        basic_type=1, msg_cnt=0, station_id=1, sec_mark_ms=0,
        lat_e7=0, lon_e7=0, accuracy_cm=100, speed_cmps=150, heading_cdeg=9000,
    )
    fields.update(overrides)
    return PsmMessage(**fields)


def random_psm(rng: random.Random) -> PsmMessage:
    return PsmMessage(
        basic_type=rng.randint(0, 3),
        msg_cnt=rng.randint(0, 127),
        station_id=rng.randint(0, 2**32 - 1),
        sec_mark_ms=rng.choice([rng.randint(0, 60999), 65535]),
        lat_e7=rng.randint(-900_000_000, 900_000_000),
        lon_e7=rng.randint(-1_800_000_000, 1_799_999_999),
        accuracy_cm=rng.randint(0, 65535),
        speed_cmps=rng.randint(0, 65535),
        heading_cdeg=rng.choice([rng.randint(0, 35999), 65535]),
    )


def random_denm(rng: random.Random) -> DenmMessage:
    p = random_psm(rng)
    return DenmMessage(
        **p.__dict__,
        cause_code=rng.randint(0, 255),
        sub_cause=rng.randint(0, 255),
        sequence_number=rng.randint(0, 65535),
        dest_center_lat_e7=rng.randint(-900_000_000, 900_000_000),
        dest_center_lon_e7=rng.randint(-1_800_000_000, 1_799_999_999),
        dest_radius_m=rng.randint(1, 65535),
        hop_limit=rng.randint(0, 255),
    )


def test_documented_psm_example_bytes():
    frame = encode_psm(sample_psm())
    assert frame.hex() == "20010100" "00000001" "0000" "00000000" "00000000" "0064" "0096" "2328"
    assert len(frame) == 24


def test_psm_round_trip_and_canonical():
    rng = random.Random(1)
    for _ in range(500):
        m = random_psm(rng)
        frame = encode_psm(m)
        assert decode_psm(frame) == m
        assert encode_psm(decode_psm(frame)) == frame


def test_denm_round_trip():
    rng = random.Random(2)
    for _ in range(1000):
        m = random_denm(rng)
        frame = encode_denm(m)
        assert len(frame) == 39
        assert decode_denm(frame) == m


def test_denm_cause_code_offset():
    m = random_denm(random.Random(3))
    m = DenmMessage(**{**m.__dict__, "cause_code": CAUSE_HUMAN_PRESENCE})
    assert encode_denm(m)[24] == 12


def test_denm_hop_limit_zero_boundary():
    m = random_denm(random.Random(4))
    m = DenmMessage(**{**m.__dict__, "hop_limit": 0})
    assert decode_denm(encode_denm(m)).hop_limit == 0


def test_encode_rejects_out_of_range_lat():
    with pytest.raises(EncodeError, match="lat_e7"):
        encode_psm(sample_psm(lat_e7=900_000_001))


def test_encode_rejects_bad_heading():
    with pytest.raises(EncodeError, match="heading_cdeg"):
        encode_psm(sample_psm(heading_cdeg=36000))


def test_decode_all_zero_with_header():
    frame = bytes([0x20, 0x01]) + bytes(22)
    m = decode_psm(frame)
    assert m.station_id == 0 and m.lat_e7 == 0 and m.speed_cmps == 0


def test_decode_errors_are_distinguishable():
    good = encode_psm(sample_psm())
    with pytest.raises(TruncatedFrame):
        decode_psm(good[:23])
    with pytest.raises(WrongMessageType):
        decode_psm(bytes([0x21]) + good[1:])
    with pytest.raises(WrongVersion):
        decode_psm(bytes([0x20, 0x02]) + good[2:])
    bad = bytearray(good)
    bad[22:24] = (36005).to_bytes(2, "big")  # invalid heading
    with pytest.raises(FieldRangeError):
        decode_psm(bytes(bad))


def _report(**overrides) -> PotiReport:
    fields = dict(
        id="ped-1", ts_ms=1000, lat_deg=57.7089, lon_deg=12.574,
        speed_mps=1.5, heading_deg=90.0, accuracy_m=1.0, activity="walking",
    )
    fields.update(overrides)
    return PotiReport(**fields)


def test_poti_to_psm_exact_decimal():
    psm = poti_to_psm(_report(lat_deg=57.7089000), 0, 1, 0)
    assert psm.lat_e7 == 577_089_000


def test_poti_to_psm_speed_saturates():
    psm = poti_to_psm(_report(speed_mps=700.0), 0, 1, 0)
    assert psm.speed_cmps == 65534


def test_poti_to_psm_sec_mark_wraps():
    psm = poti_to_psm(_report(), 0, 1, 61_000)
    assert psm.sec_mark_ms == 1000


def test_poti_to_psm_is_pedestrian():
    assert poti_to_psm(_report(), 5, 42, 0).basic_type == BasicType.PEDESTRIAN


@given(
    st.floats(min_value=-89.9, max_value=89.9),
    st.floats(min_value=-179.9, max_value=179.9),
    st.floats(min_value=0.0, max_value=600.0),
)
@settings(max_examples=300)
def test_quantization_error_bounds(lat, lon, speed):
    r = _report(lat_deg=lat, lon_deg=lon, speed_mps=speed)
    psm = poti_to_psm(r, 0, 1, 0)
    # 1e-7 deg is about 1.1 cm of latitude; both axes must stay under 2 cm
    assert abs(psm.lat_e7 / 1e7 - lat) * 111_194.93 < 0.02
    assert abs(psm.lon_e7 / 1e7 - lon) * 111_194.93 < 0.02
    if speed < 655.0:
        assert abs(psm.speed_cmps / 100.0 - speed) < 0.005


def test_poti_report_json_round_trip():
    r = _report()
    assert PotiReport.from_json(r.to_json()) == r


def test_poti_report_rejects_malformed():
    with pytest.raises(DecodeError):
        PotiReport.from_json(b"not json")
    with pytest.raises(DecodeError):
        PotiReport.from_json(b'{"id": "x"}')
    with pytest.raises(DecodeError):
        PotiReport.from_json(_report(activity="walking").to_json().replace(b"walking", b"flying"))
