import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shield import dissemination as dm
from shield.encounter_core import DurationMatrix, EncounterMatrix
from shield.trust import ServiceTag, TrustMatrix

CANONICAL = dm.DistressMessage(
    msg_id=bytes(range(16)), origin=0x0102030405060708, msg_type=1, severity=200, hop_count=1,
    max_hops=4, ttl_s=2300, created_at=1_700_000_000, trust_filter=0b1011, service_mask=0x0F,
    location=12, payload="HELP at garage 7",
)


def read_hexdump(path):
    out = bytearray()
    for line in path.read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        out += bytes.fromhex(line.split(":", 1)[1])
    return bytes(out)


def test_golden_hex_dump(data_dir):
    golden = read_hexdump(data_dir / "golden_message.hex")
    assert len(golden) == 184
    assert dm.encode(CANONICAL) == golden
    assert dm.decode(golden) == CANONICAL


def test_layout_arithmetic():
    assert dm.HEADER.size == 1 + 16 + 8 + 1 + 1 + 1 + 1 + 4 + 8 + 1 + 1 + 4 == 47
    assert dm.PAYLOAD_BYTES == 184 - 47 == 137


def test_payload_limits():
    ok = dataclasses.replace(CANONICAL, payload="x" * 137)
    assert len(dm.encode(ok)) == 184
    with pytest.raises(dm.WireFormatError):
        dm.encode(dataclasses.replace(CANONICAL, payload="x" * 138))
    # multi-byte characters count in bytes
    with pytest.raises(dm.WireFormatError):
        dm.encode(dataclasses.replace(CANONICAL, payload="é" * 69))


@pytest.mark.parametrize("change", [
    dict(msg_type=2), dict(hop_count=5), dict(severity=256), dict(msg_id=b"short"),
    dict(trust_filter=0x10), dict(ttl_s=2**32), dict(payload="trailing\x00"),
])
def test_encode_rejects_invalid(change):
    with pytest.raises(dm.WireFormatError):
        dm.encode(dataclasses.replace(CANONICAL, **change))


def test_decode_errors():
    wire = dm.encode(CANONICAL)
    with pytest.raises(dm.WireFormatError, match="184"):
        dm.decode(wire[:183])
    with pytest.raises(dm.WireFormatError, match="version"):
        dm.decode(b"\x02" + wire[1:])
    bad_hops = bytearray(wire)
    bad_hops[27] = 9  # hop_count above max_hops (4)
    with pytest.raises(dm.WireFormatError, match="hop_count"):
        dm.decode(bytes(bad_hops))
    bad_utf8 = bytearray(wire)
    bad_utf8[47] = 0xFF
    with pytest.raises(dm.WireFormatError):
        dm.decode(bytes(bad_utf8))


payload_st = st.text(max_size=60).filter(lambda s: not s.endswith("\x00") and len(s.encode()) <= 137)


@st.composite
def messages(draw):
    max_hops = draw(st.integers(0, 255))
    return dm.DistressMessage(
        msg_id=draw(st.binary(min_size=16, max_size=16)),
        origin=draw(st.integers(0, 2**64 - 1)),
        msg_type=draw(st.sampled_from([0, 1])),
        severity=draw(st.integers(0, 255)),
        hop_count=draw(st.integers(0, max_hops)),
        max_hops=max_hops,
        ttl_s=draw(st.integers(0, 2**32 - 1)),
        created_at=draw(st.integers(0, 2**64 - 1)),
        trust_filter=draw(st.integers(0, 15)),
        service_mask=draw(st.integers(0, 15)),
        location=draw(st.integers(0, 2**32 - 1)),
        payload=draw(payload_st),
    )


@given(messages())
def test_roundtrip(msg):
    wire = dm.encode(msg)
    assert len(wire) == 184
    assert dm.decode(wire) == msg
    assert dm.encode(dm.decode(wire)) == wire


def test_create_distress_formulas():
    rng = np.random.default_rng(1)
    low = dm.create_distress(1, dm.MsgType.ALERT, 0, 3, "x", 10.7, rng)
    assert (low.max_hops, low.ttl_s, low.hop_count, low.created_at) == (1, 300, 0, 10)
    high = dm.create_distress(1, dm.MsgType.EMERGENCY, 255, 3, "x", 0, rng)
    assert high.max_hops == 1 + 255 // 64 == 4
    assert high.ttl_s == 300 + 2550 == 2850
    assert [dm.hops_for_severity(s) for s in (63, 64, 127, 128, 192)] == [1, 2, 2, 3, 4]
    with pytest.raises(ValueError):
        dm.create_distress(1, 1, 256, 3, "x", 0, rng)
    with pytest.raises(dm.WireFormatError):
        dm.create_distress(1, 1, 10, 3, "x" * 200, 0, rng)


def test_default_filters():
    rng = np.random.default_rng(1)
    em = dm.create_distress(1, dm.MsgType.EMERGENCY, 100, 3, "", 0, rng)
    assert em.trust_filter & dm.FILTER_SERVICE
    assert em.trust_filter & dm.FILTER_FRIEND and em.trust_filter & dm.FILTER_ACQUAINTANCE
    assert not em.trust_filter & dm.FILTER_STRANGER
    assert em.service_mask == 0x0F
    alert = dm.create_distress(1, dm.MsgType.ALERT, 100, 3, "", 0, rng)
    assert (alert.trust_filter, alert.service_mask) == (dm.FILTER_FRIEND, 0)


def test_msg_ids_follow_seed():
    a = dm.create_distress(1, 1, 5, 0, "", 0, np.random.default_rng(7))
    b = dm.create_distress(1, 1, 5, 0, "", 0, np.random.default_rng(7))
    assert a.msg_id == b.msg_id and len(a.msg_id) == 16


@pytest.fixture
def tm():
    # node 0 : 1 friend, 2 acquaintance, 3 stranger; 4 is a Security-tagged stranger
    M, D = EncounterMatrix(), DurationMatrix()
    for peer, c, d in ((1, 10, 1000), (2, 3, 250), (3, 1, 10)):
        M.add(0, peer, c)
        D.add(0, peer, d)
    return TrustMatrix.build(M, D, service_tags={4: ServiceTag.SECURITY}, nodes=range(6))


def msg_with(**kw):
    base = dict(msg_id=b"\x01" * 16, origin=0, msg_type=1, severity=100, hop_count=0, max_hops=2,
                ttl_s=300, created_at=0, trust_filter=dm.FILTER_FRIEND, service_mask=0, location=0)
    base.update(kw)
    return dm.DistressMessage(**base)


def test_should_forward_filter(tm):
    seen = dm.SeenSet()
    friend_only = msg_with()
    assert dm.should_forward(friend_only, 0, 1, tm, 10, seen)
    assert not dm.should_forward(friend_only, 0, 3, tm, 10, seen)
    assert not dm.should_forward(friend_only, 0, 4, tm, 10, seen)


def test_should_forward_hops_ttl_seen(tm):
    seen = dm.SeenSet()
    assert not dm.should_forward(msg_with(hop_count=2), 0, 1, tm, 10, seen)
    assert dm.should_forward(msg_with(), 0, 1, tm, 300, seen)
    assert not dm.should_forward(msg_with(), 0, 1, tm, 300.001, seen)
    seen.add(1, b"\x01" * 16)
    assert not dm.should_forward(msg_with(), 0, 1, tm, 10, seen)
    assert not dm.should_forward(msg_with(), 0, 0, tm, 10, seen)


def test_service_stranger_under_emergency_defaults(tm):
    em = dm.create_distress(0, dm.MsgType.EMERGENCY, 100, 0, "", 0, np.random.default_rng(0))
    seen = dm.SeenSet()
    assert dm.should_forward(em, 0, 4, tm, 1, seen)
    assert not dm.should_forward(em, 0, 3, tm, 1, seen)
    # service bit off: tag alone is not enough
    no_service = dataclasses.replace(em, trust_filter=em.trust_filter & ~dm.FILTER_SERVICE)
    assert not dm.should_forward(no_service, 0, 4, tm, 1, seen)


def test_on_receive_sequence():
    seen = dm.SeenSet()
    m = msg_with()
    status, copy = dm.on_receive(5, m, seen, 1)
    assert status is dm.Receipt.ACCEPT_NEW
    assert copy.hop_count == 1
    assert seen.has(5, m.msg_id)
    assert dm.on_receive(5, m, seen, 2) == (dm.Receipt.DUPLICATE_DROP, None)
    assert dm.on_receive(6, m, seen, 301) == (dm.Receipt.EXPIRED_DROP, None)
    assert not seen.has(6, m.msg_id)


def test_as_filter_roundtrip():
    flt = CANONICAL.as_filter()
    assert {c.name for c in flt.classes} == {"FRIEND", "ACQUAINTANCE"}
    assert {s.name for s in flt.services} == {"MEDICAL", "SECURITY", "RESCUE", "VIGIL"}
    assert dm.filter_bits(flt.classes, service=True) == CANONICAL.trust_filter
    assert dm.mask_bits(flt.services) == CANONICAL.service_mask
