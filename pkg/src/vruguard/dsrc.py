"""Unit-disk single-hop broadcast channel plus hop-limited DENM rebroadcast.

The channel delivers to every node within ``range_m`` (the empirical urban
coverage figure is 130 m) with probability ``1 - loss_prob`` and a fixed
per-hop delay; the sender never receives its own frame. Rebroadcast of
DENMs is immediate and duplicate-suppressed, limited by the hop counter
and the message's destination disk.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional

from .geo import GeoPoint, Geofence, geofence_contains, haversine_distance
from .messages import DenmMessage


class NodeRole(Enum):
    RSU = "RSU"
    OBU = "OBU"
    VRU_DEVICE = "VRU_DEVICE"


@dataclass(frozen=True)
class ChannelParams:
    range_m: float = 130.0
    loss_prob: float = 0.0
    per_hop_delay_ms: float = 2.0

    def __post_init__(self) -> None:
        if self.range_m <= 0.0:
            raise ValueError("range_m must be > 0")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must be in [0, 1]")


@dataclass(frozen=True)
class RadioNode:
    node_id: str
    position: GeoPoint
    role: NodeRole


def broadcast(
    sender: RadioNode,
    frame: bytes,
    nodes: Iterable[RadioNode],
    ch: ChannelParams,
    rng: random.Random,
) -> list[tuple[str, float]]:
    """Deliveries as (receiver_id, delay_ms); deterministic for a given rng state.

    Receivers are visited in node-id order so loss draws are reproducible.
    """
    deliveries: list[tuple[str, float]] = []
    for node in sorted(nodes, key=lambda n: n.node_id):
        if node.node_id == sender.node_id:
            continue
        if haversine_distance(sender.position, node.position) > ch.range_m:
            continue
        if rng.random() >= ch.loss_prob:
            deliveries.append((node.node_id, ch.per_hop_delay_ms))
    return deliveries


def denm_destination(d: DenmMessage) -> Geofence:
    return Geofence(
        GeoPoint(d.dest_center_lat_e7 / 1e7, d.dest_center_lon_e7 / 1e7),
        float(d.dest_radius_m),
    )


def forward_denm(
    node: RadioNode,
    d: DenmMessage,
    seen: set[tuple[int, int]],
) -> Optional[DenmMessage]:
    """Rebroadcast copy with the hop counter decremented, or None.

    Forwards only when hops remain, the node lies inside the destination
    disk, and this (station, sequence) pair was not forwarded before; the
    pair is recorded in ``seen`` either way.
    """
    key = (d.station_id, d.sequence_number)
    duplicate = key in seen
    seen.add(key)
    if duplicate or d.hop_limit <= 0:
        return None
    if not geofence_contains(denm_destination(d), node.position):
        return None
    return replace(d, hop_limit=d.hop_limit - 1)


def flood_denm(
    origin: RadioNode,
    d: DenmMessage,
    nodes: Iterable[RadioNode],
    ch: ChannelParams,
    rng: random.Random,
) -> dict[str, int]:
    """Drive broadcast + forward_denm to completion; node_id -> hop count.

    The origin transmission is hop 1; each rebroadcast adds one hop.
    """
    node_list = sorted(nodes, key=lambda n: n.node_id)
    by_id = {n.node_id: n for n in node_list}
    received: dict[str, int] = {}
    seen: dict[str, set[tuple[int, int]]] = {n.node_id: set() for n in node_list}
    # The origin never re-forwards its own message.
    seen[origin.node_id].add((d.station_id, d.sequence_number))
    queue: list[tuple[str, DenmMessage, int]] = [(origin.node_id, d, 1)]
    while queue:
        sender_id, msg, hop = queue.pop(0)
        for receiver_id, _delay in broadcast(by_id[sender_id], b"", node_list, ch, rng):
            if receiver_id == origin.node_id:
                continue  # echo back to the source is not a reception
            if receiver_id not in received or received[receiver_id] > hop:
                received[receiver_id] = hop
            copy = forward_denm(by_id[receiver_id], msg, seen[receiver_id])
            if copy is not None:
                queue.append((receiver_id, copy, hop + 1))
    return received
