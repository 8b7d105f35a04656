"""Fixed 184-byte distress message and trust-filtered forwarding.

Wire layout (big-endian, no padding)::

    off  size  field
      0     1  version (0x01)
      1    16  msg_id
     17     8  origin node id
     25     1  msg_type (0 alert, 1 emergency)
     26     1  severity
     27     1  hop_count
     28     1  max_hops
     29     4  ttl_s
     33     8  created_at (s)
     41     1  trust_filter (bit0 Friend, bit1 Acquaintance, bit2 Stranger, bit3 Service)
     42     1  service_mask (bit0 Medical, bit1 Security, bit2 Rescue, bit3 Vigil)
     43     4  location id
     47   137  payload, UTF-8, zero padded
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .trust import ServiceTag, TrustClass, TrustFilter, TrustMatrix

VERSION = 0x01
MESSAGE_BYTES = 184
HEADER = struct.Struct(">B16sQBBBBIQBBI")
PAYLOAD_BYTES = MESSAGE_BYTES - HEADER.size

FILTER_FRIEND = 1 << 0
FILTER_ACQUAINTANCE = 1 << 1
FILTER_STRANGER = 1 << 2
FILTER_SERVICE = 1 << 3

_CLASS_BITS = {
    TrustClass.FRIEND: FILTER_FRIEND,
    TrustClass.ACQUAINTANCE: FILTER_ACQUAINTANCE,
    TrustClass.STRANGER: FILTER_STRANGER,
}
ALL_SERVICES = 0x0F


class WireFormatError(ValueError):
    pass


class MsgType(enum.IntEnum):
    ALERT = 0
    EMERGENCY = 1


class Receipt(enum.Enum):
    ACCEPT_NEW = "accept-new"
    DUPLICATE_DROP = "duplicate-drop"
    EXPIRED_DROP = "expired-drop"


def service_bit(tag: ServiceTag) -> int:
    return 0 if tag is ServiceTag.NONE else 1 << (tag.value - 1)


def classes_from_bits(bits: int) -> frozenset:
    return frozenset(c for c, b in _CLASS_BITS.items() if bits & b)


def services_from_bits(bits: int) -> frozenset:
    return frozenset(t for t in ServiceTag if t is not ServiceTag.NONE and bits & service_bit(t))


def filter_bits(classes: Iterable[TrustClass] = (), service: bool = False) -> int:
    bits = 0
    for c in classes:
        bits |= _CLASS_BITS[c]
    return bits | (FILTER_SERVICE if service else 0)


def mask_bits(tags: Iterable[ServiceTag]) -> int:
    bits = 0
    for t in tags:
        bits |= service_bit(t)
    return bits


@dataclass(frozen=True)
class DistressMessage:
    msg_id: bytes
    origin: int
    msg_type: int
    severity: int
    hop_count: int
    max_hops: int
    ttl_s: int
    created_at: int
    trust_filter: int
    service_mask: int
    location: int
    payload: str = ""
    version: int = VERSION

    @property
    def expires_at(self) -> int:
        return self.created_at + self.ttl_s

    def as_filter(self) -> TrustFilter:
        """Classes and services this message may be relayed to."""
        services = services_from_bits(self.service_mask) if self.trust_filter & FILTER_SERVICE else ()
        return TrustFilter.of(classes_from_bits(self.trust_filter), services)

    def validate(self) -> None:
        def check(name, value, bits):
            if not isinstance(value, (int, np.integer)) or not 0 <= value < (1 << bits):
                raise WireFormatError(f"{name}={value!r} does not fit in {bits} unsigned bits")

        if self.version != VERSION:
            raise WireFormatError(f"unsupported version {self.version}")
        if not isinstance(self.msg_id, bytes) or len(self.msg_id) != 16:
            raise WireFormatError("msg_id must be 16 bytes")
        if self.msg_type not in (MsgType.ALERT, MsgType.EMERGENCY):
            raise WireFormatError(f"invalid msg_type {self.msg_type}")
        for name, bits in (
            ("origin", 64), ("severity", 8), ("hop_count", 8), ("max_hops", 8),
            ("ttl_s", 32), ("created_at", 64), ("location", 32),
        ):
            check(name, getattr(self, name), bits)
        check("trust_filter", self.trust_filter, 4)
        check("service_mask", self.service_mask, 4)
        if self.hop_count > self.max_hops:
            raise WireFormatError(f"hop_count {self.hop_count} exceeds max_hops {self.max_hops}")
        raw = self.payload.encode("utf-8")
        if len(raw) > PAYLOAD_BYTES:
            raise WireFormatError(f"payload is {len(raw)} bytes, limit {PAYLOAD_BYTES}")
        if raw.endswith(b"\x00"):
            raise WireFormatError("payload may not end with NUL (it is the padding byte)")


def encode(msg: DistressMessage) -> bytes:
    msg.validate()
    head = HEADER.pack(
        msg.version, msg.msg_id, msg.origin, msg.msg_type, msg.severity, msg.hop_count,
        msg.max_hops, msg.ttl_s, msg.created_at, msg.trust_filter, msg.service_mask, msg.location,
    )
    return head + msg.payload.encode("utf-8").ljust(PAYLOAD_BYTES, b"\x00")


def decode(data: bytes) -> DistressMessage:
    if len(data) != MESSAGE_BYTES:
        raise WireFormatError(f"expected {MESSAGE_BYTES} bytes, got {len(data)}")
    fields = HEADER.unpack_from(data)
    if fields[0] != VERSION:
        raise WireFormatError(f"unsupported version {fields[0]}")
    try:
        payload = data[HEADER.size:].rstrip(b"\x00").decode("utf-8")
    except UnicodeDecodeError as exc:
        raise WireFormatError(f"payload is not UTF-8: {exc}") from None
    version, msg_id, origin, msg_type, severity, hop, max_hops, ttl, created, tf, sm, loc = fields
    msg = DistressMessage(msg_id, origin, msg_type, severity, hop, max_hops, ttl, created, tf, sm, loc, payload, version)
    msg.validate()
    return msg


def default_filter(msg_type: int) -> tuple[int, int]:
    """(trust_filter, service_mask): emergencies reach friends, acquaintances and services."""
    if msg_type == MsgType.EMERGENCY:
        return FILTER_FRIEND | FILTER_ACQUAINTANCE | FILTER_SERVICE, ALL_SERVICES
    return FILTER_FRIEND, 0


def hops_for_severity(severity: int) -> int:
    return 1 + severity // 64


def ttl_for_severity(severity: int) -> int:
    return 300 + 10 * severity


def create_distress(
    origin: int,
    msg_type: int,
    severity: int,
    location: int,
    payload: str,
    clock: float,
    rng: np.random.Generator,
    trust_filter: int | None = None,
    service_mask: int | None = None,
) -> DistressMessage:
    if not 0 <= severity <= 255:
        raise ValueError(f"severity {severity} outside 0-255")
    default_tf, default_sm = default_filter(msg_type)
    msg = DistressMessage(
        msg_id=rng.bytes(16),
        origin=origin,
        msg_type=int(msg_type),
        severity=severity,
        hop_count=0,
        max_hops=hops_for_severity(severity),
        ttl_s=ttl_for_severity(severity),
        created_at=int(clock),
        trust_filter=default_tf if trust_filter is None else trust_filter,
        service_mask=default_sm if service_mask is None else service_mask,
        location=location,
        payload=payload,
    )
    msg.validate()
    return msg


class SeenSet:
    """Message ids each node has already accepted."""

    def __init__(self):
        self._seen: dict[int, set[bytes]] = {}

    def has(self, node: int, msg_id: bytes) -> bool:
        return msg_id in self._seen.get(node, ())

    def add(self, node: int, msg_id: bytes) -> None:
        self._seen.setdefault(node, set()).add(msg_id)

    def of(self, node: int) -> frozenset:
        return frozenset(self._seen.get(node, ()))


def is_expired(msg: DistressMessage, now: float) -> bool:
    return now > msg.expires_at


def permitted(msg: DistressMessage, relay: int, candidate: int, tm: TrustMatrix) -> bool:
    """Filter check only: the relay's class for the candidate, or a masked service tag."""
    if _CLASS_BITS[tm.trust_class(relay, candidate)] & msg.trust_filter:
        return True
    return bool(msg.trust_filter & FILTER_SERVICE and service_bit(tm.service_tag(candidate)) & msg.service_mask)


def should_forward(
    msg: DistressMessage, relay: int, candidate: int, tm: TrustMatrix, now: float, seen: SeenSet
) -> bool:
    if candidate == relay or is_expired(msg, now):
        return False
    if msg.hop_count >= msg.max_hops:
        return False
    if seen.has(candidate, msg.msg_id):
        return False
    return permitted(msg, relay, candidate, tm)


def on_receive(node: int, msg: DistressMessage, seen: SeenSet, now: float):
    """Apply receipt rules; returns ``(Receipt, stored_copy_or_None)``.

    The stored copy carries ``hop_count + 1`` since the transfer was one hop.
    """
    if seen.has(node, msg.msg_id):
        return Receipt.DUPLICATE_DROP, None
    if is_expired(msg, now):
        return Receipt.EXPIRED_DROP, None
    seen.add(node, msg.msg_id)
    return Receipt.ACCEPT_NEW, replace(msg, hop_count=msg.hop_count + 1)
