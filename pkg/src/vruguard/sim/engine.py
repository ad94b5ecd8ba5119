"""Fixed-step deterministic engine wiring the whole pipeline together.

Per step it advances the scripted entities, draws noisy GNSS fixes for the
pedestrians, feeds them through agent -> bus (cellular-path latency) ->
middleware -> DSRC broadcast -> OBU, and logs every hop and alert
transition. Everything is a pure function of (scenario, seed): randomness
comes from named sub-streams of the scenario seed, and all message delays
snap to the step that contains them.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from typing import Optional

from ..geo import EnuVector, GeoPoint, enu_project, enu_unproject, haversine_distance
from ..kinematics import BodyState, alert_deadline_met, ttc_cpa
from ..bus import InProcessBus, BusMessage
from ..dsrc import NodeRole, RadioNode, broadcast
from ..messages import encode_denm, encode_psm, DenmMessage, PotiReport
from ..middleware import Middleware, poti_topic, station_numeric_id
from ..obu import AlertLevel, Obu, velocity_from_heading
from ..vru_agent import PotiSample, VruAgent, VulnerabilityState
from .scenario import EntitySpec, ScenarioSpec, SpecError


class CommandError(ValueError):
    pass


def stream_rng(seed: int, name: str) -> random.Random:
    """Independent deterministic RNG stream derived from (seed, name)."""
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass
class _Event:
    t_ms: int
    kind: str
    actor: str
    detail: dict

    def to_dict(self) -> dict:
        return {"t_ms": self.t_ms, "kind": self.kind, "actor": self.actor, "detail": self.detail}


class _Entity:
    """Runtime motion state of one scripted entity."""

    def __init__(self, spec: EntitySpec, origin: GeoPoint):
        self.spec = spec
        self.speed_mps = spec.speed_mps
        path = [enu_project(origin, w) for w in spec.waypoints]
        self.pos = path[0]
        self.targets = path[1:]
        self.heading_deg = self._initial_heading()
        self.moving = bool(self.targets)
        self.fallback_on = False
        self._outliers_pending = sorted(spec.forced_outlier_ms)

    def _initial_heading(self) -> float:
        if not self.targets:
            return 0.0
        d = self.targets[0] - self.pos
        return math.degrees(math.atan2(d.east_m, d.north_m)) % 360.0

    def advance(self, dt_s: float) -> None:
        remaining = self.speed_mps * dt_s
        while remaining > 0.0 and self.targets:
            leg = self.targets[0] - self.pos
            leg_len = leg.norm()
            if leg_len <= 1e-9:
                self.targets.pop(0)
                continue
            self.heading_deg = math.degrees(math.atan2(leg.east_m, leg.north_m)) % 360.0
            if remaining >= leg_len:
                self.pos = self.targets.pop(0)
                remaining -= leg_len
            else:
                self.pos = self.pos + leg.scaled(remaining / leg_len)
                remaining = 0.0
        self.moving = bool(self.targets)

    @property
    def current_speed(self) -> float:
        return self.speed_mps if self.moving else 0.0

    def velocity(self) -> EnuVector:
        return velocity_from_heading(self.current_speed, self.heading_deg)

    def take_forced_outlier(self, t_ms: int) -> bool:
        if self._outliers_pending and t_ms >= self._outliers_pending[0]:
            self._outliers_pending.pop(0)
            return True
        return False


class Engine:
    """Single-threaded scenario engine; one call to :meth:`step` per step_ms."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.origin = spec.geofence.center
        self.now_ms = 0
        self.paused = False
        self.events: list[_Event] = []

        self._rng_latency = stream_rng(spec.seed, "latency")
        self._rng_channel = stream_rng(spec.seed, "channel")
        self._rng_noise: dict[str, random.Random] = {}

        self.entities: dict[str, _Entity] = {}
        self.pedestrians: list[str] = []
        self.vehicles: list[str] = []
        for e in spec.entities:
            self.entities[e.id] = _Entity(e, self.origin)
            if e.kind == "pedestrian":
                self.pedestrians.append(e.id)
                self._rng_noise[e.id] = stream_rng(spec.seed, f"noise:{e.id}")
            else:
                self.vehicles.append(e.id)

        self.agents = {
            pid: VruAgent(
                pid, spec.geofence,
                trigger=spec.trigger, smoother=spec.smoother,
                smoothing_enabled=spec.smoothing_enabled,
            )
            for pid in self.pedestrians
        }
        self.obus = {
            vid: Obu(vid, spec.kinematics, spec.channel.range_m)
            for vid in self.vehicles
            if self.entities[vid].spec.obu
        }

        self._current_latency_ms = 0.0
        self.bus = InProcessBus(latency_sampler=lambda now: self._current_latency_ms)
        self.middleware = Middleware(spec.rsus, mode=spec.message_mode)
        self.bus.subscribe("vru/+/poti", self._on_bus_delivery)
        self._emit_ms_by_seq: dict[int, int] = {}
        # (deliver_at_ms, order, obu_id, frame, emit_ms)
        self._radio_queue: list[tuple[int, int, str, bytes, int]] = []
        self._radio_order = 0
        self._alert_levels: dict[tuple[str, int], AlertLevel] = {}
        self._station_to_ped = {station_numeric_id(pid): pid for pid in self.pedestrians}

        self.encounters = [
            f"{vid}:{pid}" for vid in sorted(self.obus) for pid in sorted(self.pedestrians)
        ]
        if spec.duration_ms >= spec.step_ms:
            self._log(0, "run_start", "engine", {
                "scenario": spec.name,
                "seed": spec.seed,
                "step_ms": spec.step_ms,
                "duration_ms": spec.duration_ms,
                "visual_detection_m": spec.visual_detection_m,
                "encounters": list(self.encounters),
            })

    # --- logging -------------------------------------------------------

    def _log(self, t_ms: int, kind: str, actor: str, detail: dict) -> None:
        self.events.append(_Event(t_ms, kind, actor, detail))

    # --- commands ------------------------------------------------------

    def apply_command(self, cmd: dict) -> None:
        """Apply one control command at the current tick; raises CommandError."""
        name = cmd.get("cmd")
        if name == "pause":
            self.paused = True
        elif name == "resume":
            self.paused = False
        elif name == "set_vehicle_speed":
            ent = self._command_entity(cmd, kinds=("vehicle",))
            mps = float(cmd.get("mps", -1.0))
            if mps < 0.0:
                raise CommandError(f"speed must be >= 0: {mps}")
            ent.speed_mps = mps
        elif name == "set_entity_target":
            ent = self._command_entity(cmd, kinds=("vehicle", "pedestrian"))
            target = GeoPoint(float(cmd["lat_deg"]), float(cmd["lon_deg"]))
            ent.targets = [enu_project(self.origin, target)]
            ent.moving = True
        elif name == "toggle_gnss_fallback":
            ent = self._command_entity(cmd, kinds=("pedestrian",))
            ent.fallback_on = bool(cmd.get("on", False))
        else:
            raise CommandError(f"unknown command: {name!r}")
        self._log(self.now_ms, "command", "gateway", dict(cmd))

    def _command_entity(self, cmd: dict, kinds: tuple[str, ...]) -> _Entity:
        ent_id = cmd.get("id")
        ent = self.entities.get(ent_id)
        if ent is None or ent.spec.kind not in kinds:
            raise CommandError(f"unknown entity id: {ent_id!r}")
        return ent

    # --- pipeline pieces -------------------------------------------------

    def _snap_up(self, t_ms: float) -> int:
        step = self.spec.step_ms
        return int(math.ceil(t_ms / step)) * step

    def _truth_geo(self, ent: _Entity) -> GeoPoint:
        return enu_unproject(self.origin, ent.pos)

    def _noisy_fix(self, pid: str, ent: _Entity) -> tuple[EnuVector, bool]:
        rng = self._rng_noise[pid]
        noise = self.spec.noise
        east = ent.pos.east_m + rng.gauss(0.0, noise.sigma_m)
        north = ent.pos.north_m + rng.gauss(0.0, noise.sigma_m)
        outlier = False
        forced = ent.take_forced_outlier(self.now_ms) or ent.fallback_on
        if forced or (noise.outlier_prob > 0.0 and rng.random() < noise.outlier_prob):
            angle = rng.uniform(0.0, 2.0 * math.pi)
            # Forced fallback jumps use the full magnitude; random ones draw it.
            mag = noise.outlier_mag_m if forced else rng.uniform(0.0, noise.outlier_mag_m)
            east += mag * math.sin(angle)
            north += mag * math.cos(angle)
            outlier = True
        return EnuVector(east, north), outlier

    def _on_bus_delivery(self, msg: BusMessage) -> None:
        emit_ms = self._emit_ms_by_seq.pop(msg.seq, msg.publish_ts_ms)
        commands = self.middleware.on_payload(msg.payload, self.now_ms)
        station = msg.topic.split("/")[1]
        self._log(self.now_ms, "deliver", "middleware", {
            "station": station,
            "emit_ms": emit_ms,
            "bus_latency_ms": self.now_ms - msg.publish_ts_ms,
            "commands": len(commands),
        })
        rsu_nodes = {
            r.rsu_id: RadioNode(r.rsu_id, r.position, NodeRole.RSU)
            for r in self.spec.rsus
        }
        obu_nodes = [
            RadioNode(vid, self._truth_geo(self.entities[vid]), NodeRole.OBU)
            for vid in sorted(self.obus)
        ]
        for rsu_id, message in commands:
            frame = encode_denm(message) if isinstance(message, DenmMessage) else encode_psm(message)
            sender = rsu_nodes[rsu_id]
            nodes = [sender] + obu_nodes
            deliveries = broadcast(sender, frame, nodes, self.spec.channel, self._rng_channel)
            delivered_ids = {d[0] for d in deliveries}
            in_range = [
                n.node_id for n in obu_nodes
                if haversine_distance(sender.position, n.position) <= self.spec.channel.range_m
            ]
            for receiver_id, delay_ms in deliveries:
                deliver_at = self._snap_up(self.now_ms + delay_ms)
                self._radio_queue.append(
                    (deliver_at, self._radio_order, receiver_id, frame, emit_ms)
                )
                self._radio_order += 1
            self._log(self.now_ms, "broadcast", rsu_id, {
                "station_id": message.station_id,
                "msg_cnt": message.msg_cnt,
                "frame_kind": "denm" if isinstance(message, DenmMessage) else "psm",
                "emit_ms": emit_ms,
                "in_range": in_range,
                "delivered": sorted(delivered_ids),
            })

    def _pump_radio(self) -> None:
        due = [item for item in self._radio_queue if item[0] <= self.now_ms]
        self._radio_queue = [item for item in self._radio_queue if item[0] > self.now_ms]
        for deliver_at, _order, obu_id, frame, emit_ms in sorted(due):
            obu = self.obus[obu_id]
            before_errors = obu.decode_errors
            track = obu.ingest(frame, self.now_ms)
            self._log(self.now_ms, "ingest", obu_id, {
                "accepted": track is not None,
                "decode_error": obu.decode_errors > before_errors,
                "station_id": track.station_id if track else None,
                "emit_ms": emit_ms,
                "e2e_ms": self.now_ms - emit_ms,
            })

    def _step_pedestrian(self, pid: str) -> None:
        ent = self.entities[pid]
        fix_pos, outlier = self._noisy_fix(pid, ent)
        sample = PotiSample(
            ts_ms=self.now_ms,
            position=enu_unproject(self.origin, fix_pos),
            speed_mps=ent.current_speed,
            heading_deg=ent.heading_deg,
            accuracy_m=max(self.spec.noise.sigma_m, 0.5),
            activity=ent.spec.activity,
        )
        agent = self.agents[pid]
        report = agent.step(sample)
        if report is None:
            return
        truth = self._truth_geo(ent)
        self._current_latency_ms = self.spec.latency.sample_total(self._rng_latency)
        msg = self.bus.publish(poti_topic(pid), report.to_json(), self.now_ms)
        self._emit_ms_by_seq[msg.seq] = self.now_ms
        self._log(self.now_ms, "emit", pid, {
            "ts_ms": report.ts_ms,
            "lat_deg": report.lat_deg,
            "lon_deg": report.lon_deg,
            "speed_mps": report.speed_mps,
            "heading_deg": report.heading_deg,
            "truth_lat_deg": truth.lat_deg,
            "truth_lon_deg": truth.lon_deg,
            "reported_error_m": haversine_distance(
                truth, GeoPoint(report.lat_deg, report.lon_deg)
            ),
            "outlier_fix": outlier,
            "sampled_latency_ms": self._current_latency_ms,
            "state": agent.state.value,
        })

    def _assess_alerts(self) -> None:
        for vid in sorted(self.obus):
            obu = self.obus[vid]
            vehicle = self.entities[vid]
            removed = obu.expire_tracks(self.now_ms)
            for sid in removed:
                self._log(self.now_ms, "track_expire", vid, {"station_id": sid})
                self._alert_levels.pop((vid, sid), None)
            self_pos = self._truth_geo(vehicle)
            self_vel = vehicle.velocity()
            for assessment in obu.assess_all(self_pos, self_vel, vehicle.current_speed, self.now_ms):
                key = (vid, assessment.station_id)
                prev = self._alert_levels.get(key, AlertLevel.NONE)
                if assessment.level == prev:
                    continue
                self._alert_levels[key] = assessment.level
                detail = {
                    "station_id": assessment.station_id,
                    "level": assessment.level.name,
                    "prev_level": prev.name,
                    "ttc_est_s": assessment.ttc_s,
                    "distance_est_m": assessment.distance_m,
                }
                pid = self._station_to_ped.get(assessment.station_id)
                if pid is not None:
                    ped = self.entities[pid]
                    gt_ttc = ttc_cpa(
                        BodyState(vehicle.pos, vehicle.velocity()),
                        BodyState(ped.pos, ped.velocity()),
                        self.spec.kinematics,
                    )
                    gt_distance = (ped.pos - vehicle.pos).norm()
                    detail.update({
                        "encounter": f"{vid}:{pid}",
                        "gt_ttc_s": gt_ttc,
                        "gt_distance_m": gt_distance,
                        "vehicle_speed_mps": vehicle.current_speed,
                        "deadline_ok": (
                            gt_ttc is not None
                            and alert_deadline_met(gt_ttc, vehicle.current_speed, self.spec.kinematics)
                        ),
                    })
                self._log(self.now_ms, "alert", vid, detail)

    # --- main loop -------------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.now_ms + self.spec.step_ms > self.spec.duration_ms

    def step(self) -> None:
        """Advance one fixed step. Order: move, radio-in, bus, fixes, alerts."""
        if self.finished:
            return
        self.now_ms += self.spec.step_ms
        dt_s = self.spec.step_ms / 1000.0
        for ent_id in sorted(self.entities):
            self.entities[ent_id].advance(dt_s)
        self._pump_radio()
        self.bus.pump(self.now_ms)
        for pid in sorted(self.pedestrians):
            self._step_pedestrian(pid)
        self._assess_alerts()

    def run_to_end(self) -> None:
        while not self.finished:
            self.step()

    def event_dicts(self) -> list[dict]:
        return [e.to_dict() for e in self.events]

    # --- live state for the HMI gateway ----------------------------------

    def state_frame(self) -> dict:
        entities = []
        for ent_id in sorted(self.entities):
            ent = self.entities[ent_id]
            geo = self._truth_geo(ent)
            entities.append({
                "id": ent_id,
                "role": ent.spec.kind,
                "lat_deg": geo.lat_deg,
                "lon_deg": geo.lon_deg,
                "east_m": ent.pos.east_m,
                "north_m": ent.pos.north_m,
                "heading_deg": ent.heading_deg,
                "speed_mps": ent.current_speed,
            })
        for r in self.spec.rsus:
            v = enu_project(self.origin, r.position)
            entities.append({
                "id": r.rsu_id, "role": "rsu",
                "lat_deg": r.position.lat_deg, "lon_deg": r.position.lon_deg,
                "east_m": v.east_m, "north_m": v.north_m,
                "heading_deg": 0.0, "speed_mps": 0.0,
            })
        tracks = []
        alerts = []
        for vid in sorted(self.obus):
            obu = self.obus[vid]
            for track in sorted(obu.tracks.values(), key=lambda t: t.station_id):
                v = enu_project(self.origin, track.position)
                tracks.append({
                    "obu_id": vid,
                    "station_id": track.station_id,
                    "lat_deg": track.position.lat_deg,
                    "lon_deg": track.position.lon_deg,
                    "east_m": v.east_m,
                    "north_m": v.north_m,
                    "speed_mps": track.speed_mps,
                    "heading_deg": track.heading_deg,
                    "source": track.source,
                    "age_ms": self.now_ms - track.last_update_ms,
                })
            vehicle = self.entities[vid]
            for a in obu.assess_all(
                self._truth_geo(vehicle), vehicle.velocity(), vehicle.current_speed, self.now_ms
            ):
                alerts.append({
                    "obu_id": vid,
                    "station_id": a.station_id,
                    "level": a.level.name,
                    "ttc_s": a.ttc_s,
                    "distance_m": a.distance_m,
                })
        occluders = [
            {
                "east_min_m": o.east_min_m, "east_max_m": o.east_max_m,
                "north_min_m": o.north_min_m, "north_max_m": o.north_max_m,
            }
            for o in self.spec.occluders
        ]
        return {
            "t_ms": self.now_ms,
            "paused": self.paused,
            "finished": self.finished,
            "entities": entities,
            "tracks": tracks,
            "alerts": alerts,
            "occluders": occluders,
            "metrics": {
                "events": len(self.events),
                "malformed": self.middleware.malformed_count,
                "duplicates": self.middleware.duplicate_count,
            },
        }


def run(spec: ScenarioSpec):
    """Run a scenario to completion; returns (event dicts, RunMetrics)."""
    from .metrics import metrics_report

    if spec.duration_ms < spec.step_ms:
        from .metrics import RunMetrics
        return [], RunMetrics(
            scenario=spec.name, seed=spec.seed, encounters=(),
            p50_ms=0.0, p95_ms=0.0, p99_ms=0.0, delivery_ratio=0.0,
        )
    engine = Engine(spec)
    engine.run_to_end()
    events = engine.event_dicts()
    return events, metrics_report(events)
