"""Bit-exact safety-message codecs and the bus-side POTI payload schema.

Wire format is a fixed-width big-endian layout (a verifiable stand-in for
ASN.1 UPER). Offsets are normative:

PSM (24 bytes):
    [0]      0x20 message type
    [1]      0x01 wire version
    [2]      basic_type
    [3]      msg_cnt
    [4..8)   station_id        u32
    [8..10)  sec_mark_ms       u16   (0..60999, 65535 = unavailable)
    [10..14) lat_e7            i32
    [14..18) lon_e7            i32
    [18..20) accuracy_cm       u16   (65535 = unavailable)
    [20..22) speed_cmps        u16   (65535 = unavailable)
    [22..24) heading_cdeg      u16   (0..35999, 65535 = unavailable)

DENM (39 bytes): the PSM layout with [0] = 0x21, followed by
    [24]     cause_code        u8
    [25]     sub_cause         u8
    [26..28) sequence_number   u16
    [28..32) dest_center_lat_e7 i32
    [32..36) dest_center_lon_e7 i32
    [36..38) dest_radius_m     u16
    [38]     hop_limit         u8
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, asdict
from enum import IntEnum

PSM_TYPE = 0x20
DENM_TYPE = 0x21
WIRE_VERSION = 0x01

PSM_SIZE = 24
DENM_SIZE = 39

UNAVAILABLE_U16 = 65535
SEC_MARK_MAX = 60999
HEADING_CDEG_MAX = 35999
LAT_E7_MAX = 900_000_000
LON_E7_MIN = -1_800_000_000
LON_E7_MAX = 1_799_999_999

#: ETSI convention for "human presence on the road".
CAUSE_HUMAN_PRESENCE = 12

_PSM_STRUCT = struct.Struct(">BBBBIHiiHHH")
_DENM_TAIL_STRUCT = struct.Struct(">BBHiiHB")

VALID_ACTIVITIES = frozenset({"walking", "standing", "in_vehicle", "unknown"})


class BasicType(IntEnum):
    UNAVAILABLE = 0
    PEDESTRIAN = 1
    CYCLIST = 2
    PUBLIC_SAFETY = 3


class MessageError(ValueError):
    """Base for codec failures."""


class EncodeError(MessageError):
    pass


class DecodeError(MessageError):
    pass


class TruncatedFrame(DecodeError):
    pass


class WrongMessageType(DecodeError):
    pass


class WrongVersion(DecodeError):
    pass


class FieldRangeError(DecodeError):
    pass


@dataclass(frozen=True)
class PsmMessage:
    basic_type: int
    msg_cnt: int
    station_id: int
    sec_mark_ms: int
    lat_e7: int
    lon_e7: int
    accuracy_cm: int
    speed_cmps: int
    heading_cdeg: int


@dataclass(frozen=True)
class DenmMessage:
    basic_type: int
    msg_cnt: int
    station_id: int
    sec_mark_ms: int
    lat_e7: int
    lon_e7: int
    accuracy_cm: int
    speed_cmps: int
    heading_cdeg: int
    cause_code: int
    sub_cause: int
    sequence_number: int
    dest_center_lat_e7: int
    dest_center_lon_e7: int
    dest_radius_m: int
    hop_limit: int


def _check(ok: bool, field: str, value: int, exc: type[MessageError]) -> None:
    if not ok:
        raise exc(f"{field} out of range: {value}")


def _validate_common(m, exc: type[MessageError]) -> None:
    _check(0 <= m.basic_type <= 3, "basic_type", m.basic_type, exc)
    _check(0 <= m.msg_cnt <= 127, "msg_cnt", m.msg_cnt, exc)
    _check(0 <= m.station_id <= 0xFFFFFFFF, "station_id", m.station_id, exc)
    _check(
        0 <= m.sec_mark_ms <= SEC_MARK_MAX or m.sec_mark_ms == UNAVAILABLE_U16,
        "sec_mark_ms", m.sec_mark_ms, exc,
    )
    _check(-LAT_E7_MAX <= m.lat_e7 <= LAT_E7_MAX, "lat_e7", m.lat_e7, exc)
    _check(LON_E7_MIN <= m.lon_e7 <= LON_E7_MAX, "lon_e7", m.lon_e7, exc)
    _check(0 <= m.accuracy_cm <= UNAVAILABLE_U16, "accuracy_cm", m.accuracy_cm, exc)
    _check(0 <= m.speed_cmps <= UNAVAILABLE_U16, "speed_cmps", m.speed_cmps, exc)
    _check(
        0 <= m.heading_cdeg <= HEADING_CDEG_MAX or m.heading_cdeg == UNAVAILABLE_U16,
        "heading_cdeg", m.heading_cdeg, exc,
    )


def _validate_denm_tail(m: DenmMessage, exc: type[MessageError]) -> None:
    _check(0 <= m.cause_code <= 0xFF, "cause_code", m.cause_code, exc)
    _check(0 <= m.sub_cause <= 0xFF, "sub_cause", m.sub_cause, exc)
    _check(0 <= m.sequence_number <= 0xFFFF, "sequence_number", m.sequence_number, exc)
    _check(-LAT_E7_MAX <= m.dest_center_lat_e7 <= LAT_E7_MAX,
           "dest_center_lat_e7", m.dest_center_lat_e7, exc)
    _check(LON_E7_MIN <= m.dest_center_lon_e7 <= LON_E7_MAX,
           "dest_center_lon_e7", m.dest_center_lon_e7, exc)
    _check(0 < m.dest_radius_m <= 0xFFFF, "dest_radius_m", m.dest_radius_m, exc)
    _check(0 <= m.hop_limit <= 0xFF, "hop_limit", m.hop_limit, exc)


def encode_psm(m: PsmMessage) -> bytes:
    _validate_common(m, EncodeError)
    return _PSM_STRUCT.pack(
        PSM_TYPE, WIRE_VERSION, m.basic_type, m.msg_cnt, m.station_id,
        m.sec_mark_ms, m.lat_e7, m.lon_e7, m.accuracy_cm, m.speed_cmps,
        m.heading_cdeg,
    )


def _check_header(data: bytes, expected_type: int, size: int) -> None:
    if len(data) < size:
        raise TruncatedFrame(f"frame truncated: {len(data)} bytes, need {size}")
    if data[0] != expected_type:
        raise WrongMessageType(f"wrong message type byte: {data[0]:#04x}")
    if data[1] != WIRE_VERSION:
        raise WrongVersion(f"unsupported wire version: {data[1]}")


def decode_psm(data: bytes) -> PsmMessage:
    _check_header(data, PSM_TYPE, PSM_SIZE)
    fields = _PSM_STRUCT.unpack(data[:PSM_SIZE])
    m = PsmMessage(*fields[2:])
    _validate_common(m, FieldRangeError)
    return m


def encode_denm(m: DenmMessage) -> bytes:
    _validate_common(m, EncodeError)
    _validate_denm_tail(m, EncodeError)
    head = _PSM_STRUCT.pack(
        DENM_TYPE, WIRE_VERSION, m.basic_type, m.msg_cnt, m.station_id,
        m.sec_mark_ms, m.lat_e7, m.lon_e7, m.accuracy_cm, m.speed_cmps,
        m.heading_cdeg,
    )
    tail = _DENM_TAIL_STRUCT.pack(
        m.cause_code, m.sub_cause, m.sequence_number,
        m.dest_center_lat_e7, m.dest_center_lon_e7, m.dest_radius_m,
        m.hop_limit,
    )
    return head + tail


def decode_denm(data: bytes) -> DenmMessage:
    _check_header(data, DENM_TYPE, DENM_SIZE)
    head = _PSM_STRUCT.unpack(data[:PSM_SIZE])
    tail = _DENM_TAIL_STRUCT.unpack(data[PSM_SIZE:DENM_SIZE])
    m = DenmMessage(*head[2:], *tail)
    _validate_common(m, FieldRangeError)
    _validate_denm_tail(m, FieldRangeError)
    return m


@dataclass(frozen=True)
class PotiReport:
    """The JSON payload a VRU publishes on the bus (field names are the wire form)."""

    id: str
    ts_ms: int
    lat_deg: float
    lon_deg: float
    speed_mps: float
    heading_deg: float
    accuracy_m: float
    activity: str

    def to_json(self) -> bytes:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def from_json(cls, payload: bytes) -> "PotiReport":
        try:
            obj = json.loads(payload.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise DecodeError(f"malformed POTI payload: {e}") from e
        if not isinstance(obj, dict):
            raise DecodeError("malformed POTI payload: not an object")
        try:
            r = cls(
                id=str(obj["id"]),
                ts_ms=int(obj["ts_ms"]),
                lat_deg=float(obj["lat_deg"]),
                lon_deg=float(obj["lon_deg"]),
                speed_mps=float(obj["speed_mps"]),
                heading_deg=float(obj["heading_deg"]),
                accuracy_m=float(obj["accuracy_m"]),
                activity=str(obj["activity"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DecodeError(f"malformed POTI payload: {e}") from e
        if r.activity not in VALID_ACTIVITIES:
            raise DecodeError(f"malformed POTI payload: unknown activity {r.activity!r}")
        if not (-90.0 <= r.lat_deg <= 90.0 and -180.0 <= r.lon_deg < 180.0):
            raise DecodeError("malformed POTI payload: position out of range")
        return r


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def _saturate_u16(x: float) -> int:
    # 65535 is reserved as the unavailable sentinel.
    return min(65534, max(0, _round_half_away(x)))


def poti_to_psm(r: PotiReport, msg_cnt: int, station_id: int, now_ms: int) -> PsmMessage:
    """Quantize a POTI report into PSM units (saturating, never failing)."""
    heading = _round_half_away(r.heading_deg * 100.0) % 36000
    return PsmMessage(
        basic_type=BasicType.PEDESTRIAN,
        msg_cnt=msg_cnt,
        station_id=station_id,
        sec_mark_ms=now_ms % 60_000,
        lat_e7=_round_half_away(r.lat_deg * 1e7),
        lon_e7=_round_half_away(r.lon_deg * 1e7),
        accuracy_cm=_saturate_u16(r.accuracy_m * 100.0),
        speed_cmps=_saturate_u16(r.speed_mps * 100.0),
        heading_cdeg=heading,
    )
