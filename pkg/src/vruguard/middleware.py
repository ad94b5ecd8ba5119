"""Broker-to-VANET bridge: relevance routing, dedup, and PSM/DENM crafting.

Consumes POTI reports from the bus (topic ``vru/+/poti``), decides which
RSUs should broadcast for the report's location, and produces the message
each RSU must send. A config switch swaps the output from PSMs to DENMs
with cause "human presence on the road" and the RSU relevance disk as the
destination area.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Iterable, Union

from .geo import GeoPoint, Geofence, geofence_contains
from .messages import (
    CAUSE_HUMAN_PRESENCE,
    DecodeError,
    DenmMessage,
    PotiReport,
    PsmMessage,
    poti_to_psm,
)

POTI_TOPIC_PATTERN = "vru/+/poti"
DEDUP_WINDOW_MS = 2000


def poti_topic(station_id: str) -> str:
    return f"vru/{station_id}/poti"


@dataclass(frozen=True)
class RsuRegistration:
    rsu_id: str
    position: GeoPoint
    relevance_radius_m: float

    def __post_init__(self) -> None:
        if self.relevance_radius_m <= 0.0:
            raise ValueError("relevance_radius_m must be > 0")


def station_numeric_id(station_id: str) -> int:
    """Stable 32-bit id for a station string; numeric strings map to themselves."""
    if station_id.isdigit():
        n = int(station_id)
        if n <= 0xFFFFFFFF:
            return n
    return zlib.crc32(station_id.encode("utf-8"))


def route_report(r: PotiReport, rsus: Iterable[RsuRegistration]) -> set[str]:
    """The RSUs whose relevance disk contains the report position."""
    p = GeoPoint(r.lat_deg, r.lon_deg)
    return {
        rsu.rsu_id
        for rsu in rsus
        if geofence_contains(Geofence(rsu.position, rsu.relevance_radius_m), p)
    }


class Middleware:
    """Single logical bus consumer; counters are per-process, not persisted."""

    def __init__(
        self,
        rsus: Iterable[RsuRegistration],
        mode: str = "psm",
        hop_limit: int = 3,
        dedup_window_ms: int = DEDUP_WINDOW_MS,
    ):
        if mode not in ("psm", "denm"):
            raise ValueError(f"mode must be 'psm' or 'denm': {mode!r}")
        self.rsus = {rsu.rsu_id: rsu for rsu in rsus}
        self.mode = mode
        self.hop_limit = hop_limit
        self.dedup_window_ms = dedup_window_ms
        self.malformed_count = 0
        self.duplicate_count = 0
        self._msg_cnt: dict[int, int] = {}
        self._denm_seq: dict[int, int] = {}
        self._seen: dict[tuple[str, int], int] = {}

    def _is_duplicate(self, r: PotiReport, now_ms: int) -> bool:
        key = (r.id, r.ts_ms)
        # Prune expired dedup entries.
        self._seen = {k: t for k, t in self._seen.items() if now_ms - t < self.dedup_window_ms}
        if key in self._seen:
            return True
        self._seen[key] = now_ms
        return False

    def on_payload(self, payload: bytes, now_ms: int) -> list[tuple[str, Union[PsmMessage, DenmMessage]]]:
        """Bus-facing entry: parse, then :meth:`on_report`. Never raises."""
        try:
            report = PotiReport.from_json(payload)
        except DecodeError:
            self.malformed_count += 1
            return []
        return self.on_report(report, now_ms)

    def on_report(self, r: PotiReport, now_ms: int) -> list[tuple[str, Union[PsmMessage, DenmMessage]]]:
        """One send command per RSU covering the report; duplicates dropped."""
        if self._is_duplicate(r, now_ms):
            self.duplicate_count += 1
            return []
        targets = route_report(r, self.rsus.values())
        if not targets:
            return []
        sid = station_numeric_id(r.id)
        msg_cnt = self._msg_cnt.get(sid, 0)
        self._msg_cnt[sid] = (msg_cnt + 1) % 128
        psm = poti_to_psm(r, msg_cnt, sid, now_ms)
        commands: list[tuple[str, Union[PsmMessage, DenmMessage]]] = []
        for rsu_id in sorted(targets):
            if self.mode == "psm":
                commands.append((rsu_id, psm))
            else:
                seq = self._denm_seq.get(sid, 0)
                self._denm_seq[sid] = (seq + 1) % 65536
                rsu = self.rsus[rsu_id]
                commands.append((rsu_id, DenmMessage(
                    basic_type=psm.basic_type,
                    msg_cnt=psm.msg_cnt,
                    station_id=psm.station_id,
                    sec_mark_ms=psm.sec_mark_ms,
                    lat_e7=psm.lat_e7,
                    lon_e7=psm.lon_e7,
                    accuracy_cm=psm.accuracy_cm,
                    speed_cmps=psm.speed_cmps,
                    heading_cdeg=psm.heading_cdeg,
                    cause_code=CAUSE_HUMAN_PRESENCE,
                    sub_cause=0,
                    sequence_number=seq,
                    dest_center_lat_e7=round(rsu.position.lat_deg * 1e7),
                    dest_center_lon_e7=round(rsu.position.lon_deg * 1e7),
                    dest_radius_m=min(65535, round(rsu.relevance_radius_m)),
                    hop_limit=self.hop_limit,
                )))
        return commands
