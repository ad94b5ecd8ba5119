"""In-process topic pub/sub standing in for the cellular-path broker.

Topic semantics follow the MQTT family: slash-separated segments, `+` as a
single-level wildcard, `#` as a trailing multi-level wildcard, wildcards
allowed only in subscription patterns. Delivery is at-most-once with no
retained messages; the delay of each delivery comes from an injectable
latency sampler so the scenario engine can model the cellular path.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional


class TopicError(ValueError):
    pass


def _split(topic: str) -> list[str]:
    if not topic:
        raise TopicError("empty topic")
    segments = topic.split("/")
    if any(seg == "" for seg in segments):
        raise TopicError(f"empty segment in topic {topic!r}")
    return segments


def validate_topic(topic: str) -> list[str]:
    """Validate a concrete (publishable) topic; wildcards are rejected."""
    segments = _split(topic)
    for seg in segments:
        if "#" in seg or "+" in seg:
            raise TopicError(f"wildcard in concrete topic {topic!r}")
    return segments


def validate_pattern(pattern: str) -> list[str]:
    """Validate a subscription pattern."""
    segments = _split(pattern)
    for i, seg in enumerate(segments):
        if seg == "#":
            if i != len(segments) - 1:
                raise TopicError(f"'#' must be the final segment: {pattern!r}")
        elif "#" in seg:
            raise TopicError(f"'#' must be a whole segment: {pattern!r}")
        elif seg != "+" and "+" in seg:
            raise TopicError(f"'+' must be a whole segment: {pattern!r}")
    return segments


def topic_matches(pattern: str, topic: str) -> bool:
    """MQTT-style match of a concrete topic against a subscription pattern."""
    pseg = validate_pattern(pattern)
    tseg = validate_topic(topic)
    for i, p in enumerate(pseg):
        if p == "#":
            return True  # matches the parent level and any deeper levels
        if i >= len(tseg):
            return False
        if p != "+" and p != tseg[i]:
            return False
    return len(pseg) == len(tseg)


@dataclass(frozen=True)
class BusMessage:
    topic: str
    payload: bytes
    publish_ts_ms: int
    seq: int


@dataclass
class Subscription:
    pattern: str
    callback: Callable[[BusMessage], None]
    sub_id: int
    active: bool = True


@dataclass(order=True)
class _Pending:
    deliver_at_ms: int
    seq: int
    sub_id: int
    sub: Subscription = field(compare=False)
    message: BusMessage = field(compare=False)


class InProcessBus:
    """Deterministic broker with clock-driven delivery.

    ``latency_sampler(now_ms) -> delay_ms`` decides the per-delivery delay;
    the default is immediate delivery on the next :meth:`pump`. Thread-safe
    for publish/subscribe; delivery happens only inside :meth:`pump`, which
    the simulation drives from a single thread.
    """

    def __init__(self, latency_sampler: Optional[Callable[[int], float]] = None):
        self._latency_sampler = latency_sampler or (lambda now_ms: 0.0)
        self._subs: list[Subscription] = []
        self._pending: list[_Pending] = []
        self._seq = 0
        self._next_sub_id = 0
        self._lock = threading.Lock()

    def subscribe(self, pattern: str, callback: Callable[[BusMessage], None]) -> Subscription:
        validate_pattern(pattern)
        with self._lock:
            sub = Subscription(pattern, callback, self._next_sub_id)
            self._next_sub_id += 1
            self._subs.append(sub)
            return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            sub.active = False
            self._subs = [s for s in self._subs if s is not sub]

    def publish(self, topic: str, payload: bytes, now_ms: int) -> BusMessage:
        validate_topic(topic)
        with self._lock:
            msg = BusMessage(topic, bytes(payload), now_ms, self._seq)
            self._seq += 1
            for sub in self._subs:
                if topic_matches(sub.pattern, topic):
                    delay = max(0.0, float(self._latency_sampler(now_ms)))
                    heapq.heappush(
                        self._pending,
                        _Pending(now_ms + int(delay), msg.seq, sub.sub_id, sub, msg),
                    )
            return msg

    def pump(self, now_ms: int) -> int:
        """Deliver everything due at or before ``now_ms``; returns the count."""
        delivered = 0
        while True:
            with self._lock:
                if not self._pending or self._pending[0].deliver_at_ms > now_ms:
                    return delivered
                item = heapq.heappop(self._pending)
            if item.sub.active:
                item.sub.callback(item.message)
                delivered += 1

    def pending_count(self) -> int:
        with self._lock:
            return len(self._pending)
