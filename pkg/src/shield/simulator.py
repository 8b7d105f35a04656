"""Deterministic discrete-event simulation of trust-filtered distress alerting.

Time is kept in integer milliseconds. Events at the same instant are ordered
by kind (moves, incidents, transfer completions, scans, expiries), then node
id, then insertion order, so a fixed config and seed always replays exactly.
"""
from __future__ import annotations

import bisect
import csv
import heapq
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from . import dissemination as dm
from .advisory import CautionPolicy, RiskProfile, build_risk_profile, is_cautionary, risk_score
from .encounter_core import DurationMatrix, EncounterMatrix, build_matrices
from .protocol import (
    EnergyLedger,
    EnergyParams,
    LinkParams,
    ScanPolicy,
    charge,
    scan_interval,
    scan_latency,
    transfer_time,
)
from .trace_io import (
    HOURS,
    SLOT_S,
    CrimeRecord,
    EncounterEvent,
    Incident,
    SyntheticWorldConfig,
    generate_synthetic_world,
    incident_from_dict,
    parse_crime_log,
    parse_encounter_trace,
)
from .trust import ServiceTag, TrustMatrix, TrustParams

log = logging.getLogger(__name__)

DEFAULT_DEADLINE_S = 120.0

# event kinds, in same-instant dispatch order
NODE_MOVE, INCIDENT_START, TRANSFER_COMPLETE, SCAN_DUE, MESSAGE_EXPIRE = range(5)
KIND_NAMES = ("move", "incident", "transfer", "scan", "expire")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- worlds


class StaticWorld:
    """Nodes pinned at planar coordinates (metres) inside fixed location zones."""

    slot_s = None

    def __init__(self, positions: dict[int, tuple[float, float]], locations: dict[int, int],
                 history: Iterable[tuple[int, int, int, float]] = (), crimes: list[CrimeRecord] | None = None):
        self.nodes = sorted(positions)
        self._index = {n: k for k, n in enumerate(self.nodes)}
        self._xy = np.array([positions[n] for n in self.nodes], dtype=float).reshape(-1, 2)
        self._tree = cKDTree(self._xy)
        self._loc = {n: locations.get(n, 0) for n in self.nodes}
        self.history = list(history)
        self.crimes = crimes or []

    def matrices(self) -> tuple[EncounterMatrix, DurationMatrix]:
        M, D = EncounterMatrix(), DurationMatrix()
        for a, b, count, duration in self.history:
            M.add(a, b, count)
            D.add(a, b, duration)
        return M, D

    def location(self, node: int, t_s: float) -> int:
        return self._loc[node]

    def distance(self, a: int, b: int) -> float:
        pa, pb = self._xy[self._index[a]], self._xy[self._index[b]]
        return float(math.hypot(*(pa - pb)))

    def peers(self, node: int, t_s: float, rng, range_m: float):
        me = self._index[node]
        close = sorted(self._tree.query_ball_point(self._xy[me], range_m))
        return [(self.nodes[k], self.distance(node, self.nodes[k])) for k in close if k != me]

    def in_contact(self, a: int, b: int, t_s: float, range_m: float) -> bool:
        return self.distance(a, b) <= range_m


class SyntheticWorldView:
    """Replays the 60 s location timeline of a generated world.

    Co-located nodes are at an unknown spot inside the same AP zone, so each
    scan draws their distance uniformly over the radio range.
    """

    slot_s = SLOT_S

    def __init__(self, world):
        self.world = world
        self.nodes = list(range(world.timeline.shape[0]))
        self.crimes = world.crimes
        self.history = world.encounters

    def matrices(self):
        return build_matrices(self.history)

    def _slot(self, t_s: float) -> int:
        return min(int(t_s // SLOT_S), self.world.timeline.shape[1] - 1)

    def location(self, node: int, t_s: float) -> int:
        return int(self.world.timeline[node, self._slot(t_s)])

    def peers(self, node: int, t_s: float, rng, range_m: float):
        column = self.world.timeline[:, self._slot(t_s)]
        loc = column[node]
        if loc < 0:
            return []
        out = []
        for peer in np.flatnonzero(column == loc):
            if peer != node:
                out.append((int(peer), float(rng.uniform(0.0, range_m))))
        return out

    def in_contact(self, a: int, b: int, t_s: float, range_m: float) -> bool:
        column = self.world.timeline[:, self._slot(t_s)]
        return column[a] >= 0 and column[a] == column[b]


class TraceWorld:
    """Nodes are in contact exactly while a recorded encounter is running."""

    slot_s = None

    def __init__(self, events: list[EncounterEvent], crimes: list[CrimeRecord] | None = None,
                 nodes: Iterable[int] = ()):
        self.history = events
        self.crimes = crimes or []
        by_node: dict[int, list] = {}
        for e in events:
            end = e.start + e.duration
            by_node.setdefault(e.node_a, []).append((e.start, end, e.node_b, e.location))
            by_node.setdefault(e.node_b, []).append((e.start, end, e.node_a, e.location))
        self._intervals = {n: sorted(v) for n, v in by_node.items()}
        self._starts = {n: [iv[0] for iv in v] for n, v in self._intervals.items()}
        self._longest = {n: max(iv[1] - iv[0] for iv in v) for n, v in self._intervals.items()}
        self.nodes = sorted(set(by_node) | set(nodes))

    def matrices(self):
        return build_matrices(self.history)

    def _active(self, node: int, t_s: float):
        ivs = self._intervals.get(node)
        if not ivs:
            return []
        starts = self._starts[node]
        lo = bisect.bisect_left(starts, t_s - self._longest[node])
        hi = bisect.bisect_right(starts, t_s)
        return [iv for iv in ivs[lo:hi] if iv[0] <= t_s < iv[1]]

    def location(self, node: int, t_s: float) -> int:
        active = self._active(node, t_s)
        return active[0][3] if active else -1

    def peers(self, node: int, t_s: float, rng, range_m: float):
        peers = sorted({iv[2] for iv in self._active(node, t_s)})
        return [(p, float(rng.uniform(0.0, range_m))) for p in peers]

    def in_contact(self, a: int, b: int, t_s: float, range_m: float) -> bool:
        return any(iv[2] == b for iv in self._active(a, t_s))


# ---------------------------------------------------------------- config


def _section(data: dict, key: str, names: dict) -> dict:
    raw = data.get(key, {}) or {}
    unknown = set(raw) - set(names)
    if unknown:
        raise ConfigError(f"unknown keys in {key!r}: {sorted(unknown)}")
    return {names[k]: v for k, v in raw.items()}


@dataclass
class SimConfig:
    world: object
    scan: ScanPolicy = field(default_factory=ScanPolicy)
    link: LinkParams = field(default_factory=LinkParams)
    trust: TrustParams = field(default_factory=TrustParams)
    caution: CautionPolicy = field(default_factory=CautionPolicy)
    energy: EnergyParams = field(default_factory=EnergyParams)
    incidents: list = field(default_factory=list)
    service_tags: dict = field(default_factory=dict)
    seed: int = 0
    duration_s: float = 3600.0
    start_s: float = 0.0
    availability_deadline_s: float = DEFAULT_DEADLINE_S

    def validate(self):
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be > 0")
        if self.start_s < 0:
            raise ConfigError("start_s must be >= 0")
        if self.availability_deadline_s < 0:
            raise ConfigError("availability_deadline_s must be >= 0")
        end = self.start_s + self.duration_s
        for inc in self.incidents:
            if not self.start_s <= inc.time_s < end:
                raise ConfigError(f"incident at {inc.time_s}s outside run window [{self.start_s}, {end})")

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "SimConfig":
        base_dir = Path(base_dir)
        known = {"world", "scan", "link", "trust", "caution", "energy", "incidents", "service_tags",
                 "seed", "duration_s", "start_s", "availability_deadline_s"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            world = _world_from_dict(data.get("world") or {"type": "synthetic"}, base_dir)
            cfg = cls(
                world=world,
                scan=ScanPolicy(**_section(data, "scan", {
                    "i_min_s": "i_min_s", "i_max_s": "i_max_s", "emergency_s": "emergency_interval_s"})),
                link=LinkParams(**_section(data, "link", {
                    "range_m": "range_m", "scan_min_s": "scan_lat_min_s", "scan_max_s": "scan_lat_max_s",
                    "c0_s": "c0_s", "c1_s_per_m": "c1_s_per_m"})),
                trust=TrustParams(**_section(data, "trust", {
                    "alpha": "alpha", "theta_friend": "theta_friend", "theta_acq": "theta_acq"})),
                caution=CautionPolicy(**_section(data, "caution", {"threshold": "threshold"})),
                energy=EnergyParams(**_section(data, "energy", {"e_scan": "e_scan", "e_byte": "e_byte"})),
                incidents=[incident_from_dict(i) for i in data.get("incidents", [])],
                service_tags={int(k): ServiceTag.parse(v) for k, v in (data.get("service_tags") or {}).items()},
                seed=int(data.get("seed", 0)),
                duration_s=float(data.get("duration_s", 3600.0)),
                start_s=float(data.get("start_s", 0.0)),
                availability_deadline_s=float(data.get("availability_deadline_s", DEFAULT_DEADLINE_S)),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid simulation config: {exc}") from None
        if not cfg.incidents and isinstance(world, SyntheticWorldConfig):
            cfg.incidents = [incident_from_dict(i) for i in world.incident_schedule]
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "SimConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from None
        return cls.from_dict(data, base_dir=path.parent)


def _world_from_dict(section: dict, base_dir: Path):
    section = dict(section)
    kind = section.pop("type", "synthetic")
    if kind == "synthetic":
        return SyntheticWorldConfig.from_dict(section)
    crimes = parse_crime_log(base_dir / section.pop("crime")) if section.get("crime") else []
    section.pop("crime", None)
    if kind == "trace":
        path = base_dir / section.pop("encounters")
        if section:
            raise ConfigError(f"unknown trace world keys: {sorted(section)}")
        return TraceWorld(parse_encounter_trace(path), crimes)
    if kind == "static":
        nodes = section.pop("nodes")
        history = [tuple(h) for h in section.pop("history", [])]
        if section:
            raise ConfigError(f"unknown static world keys: {sorted(section)}")
        positions = {int(n["id"]): (float(n["x"]), float(n["y"])) for n in nodes}
        locations = {int(n["id"]): int(n.get("location", 0)) for n in nodes}
        return StaticWorld(positions, locations, history, crimes)
    raise ConfigError(f"unknown world type {kind!r}")


def materialize_world(world):
    if isinstance(world, SyntheticWorldConfig):
        return SyntheticWorldView(generate_synthetic_world(world))
    return world


# ---------------------------------------------------------------- metrics


@dataclass
class IncidentOutcome:
    incident: int
    time_s: float
    location: int
    victim: int | None
    msg_id: str | None
    response_time_s: float | None = None
    available: bool = False


@dataclass
class MetricsReport:
    incidents: list
    response_times_s: list
    availability: float | None
    mean_response_time_s: float | None
    delivery_count: int
    duplicate_count: int
    expired_drop_count: int
    failed_transfer_count: int
    messages_transmitted: int
    scans: int
    caution_signals: int
    energy_per_node: dict
    total_energy: float
    privacy_violations: int

    def to_dict(self) -> dict:
        out = asdict(self)
        out["energy_per_node"] = {str(k): v for k, v in sorted(self.energy_per_node.items())}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _summarise(outcomes: list[IncidentOutcome], counts: dict, energy: dict[int, float]) -> MetricsReport:
    times = [o.response_time_s for o in outcomes if o.response_time_s is not None]
    return MetricsReport(
        incidents=[asdict(o) for o in outcomes],
        response_times_s=times,
        availability=(sum(o.available for o in outcomes) / len(outcomes)) if outcomes else None,
        mean_response_time_s=(sum(times) / len(times)) if times else None,
        delivery_count=counts["deliver"],
        duplicate_count=counts["duplicate"],
        expired_drop_count=counts["expired_drop"],
        failed_transfer_count=counts["transfer_fail"],
        messages_transmitted=counts["deliver"] + counts["duplicate"] + counts["expired_drop"] + counts["transfer_fail"],
        scans=counts["scan"],
        caution_signals=counts["caution"],
        energy_per_node=dict(sorted(energy.items())),
        total_energy=sum(v for _, v in sorted(energy.items())),
        privacy_violations=counts["violation"],
    )


def _detail(**kv) -> str:
    return ";".join(f"{k}={v}" for k, v in kv.items())


def _parse_detail(text: str) -> dict:
    return dict(part.split("=", 1) for part in text.split(";") if part)


LOG_HEADER = ["t_ms", "event", "node", "detail"]


def compute_metrics(
    event_log: Iterable[tuple[int, str, int, str]],
    nodes: Iterable[int],
    deadline_s: float = DEFAULT_DEADLINE_S,
    energy: EnergyParams = EnergyParams(),
) -> MetricsReport:
    """Rebuild a MetricsReport from the event log alone."""
    counts = dict.fromkeys(["scan", "deliver", "duplicate", "expired_drop", "transfer_fail", "violation", "caution"], 0)
    scans: dict[int, int] = {n: 0 for n in nodes}
    sent: dict[int, int] = {n: 0 for n in nodes}
    outcomes: list[IncidentOutcome] = []
    by_msg: dict[str, tuple[IncidentOutcome, set[int]]] = {}
    for t_ms, event, node, detail in event_log:
        t_ms, node = int(t_ms), int(node)
        d = _parse_detail(detail)
        if event == "incident":
            victim = None if node < 0 else node
            out = IncidentOutcome(int(d["id"]), int(d["time_ms"]) / 1000.0, int(d["location"]), victim,
                                  d.get("msg") or None)
            outcomes.append(out)
            if out.msg_id:
                qualifying = {int(x) for x in d.get("qualifying", "").split("|") if x}
                by_msg[out.msg_id] = (out, qualifying)
        elif event == "scan":
            counts["scan"] += 1
            scans[node] = scans.get(node, 0) + 1
        elif event == "caution":
            counts["caution"] += 1
        elif event in ("deliver", "duplicate", "expired_drop", "transfer_fail"):
            counts[event] += 1
            relay = int(d["from"])
            sent[relay] = sent.get(relay, 0) + int(d["bytes"])
            if d.get("permitted") == "0":
                counts["violation"] += 1
            if event == "deliver" and d["msg"] in by_msg:
                out, qualifying = by_msg[d["msg"]]
                if out.response_time_s is None and node in qualifying:
                    out.response_time_s = t_ms / 1000.0 - out.time_s
                    out.available = out.response_time_s <= deadline_s
    e = {n: energy.e_scan * scans.get(n, 0) + energy.e_byte * sent.get(n, 0) for n in set(scans) | set(sent)}
    return _summarise(outcomes, counts, e)


def read_event_log(path) -> list[tuple[int, str, int, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != LOG_HEADER:
            raise ValueError(f"{path}: expected header {','.join(LOG_HEADER)}")
        return [(int(r[0]), r[1], int(r[2]), r[3]) for r in reader if r]


def write_event_log(path, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        writer.writerows(rows)


# ---------------------------------------------------------------- engine


def node_rng(seed: int, node: int) -> np.random.Generator:
    """Independent stream per node, so adding nodes leaves the others' draws intact."""
    return np.random.default_rng(np.random.SeedSequence([seed, 0, node]))


def incident_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 1, index]))


def _ms(seconds: float) -> int:
    return int(round(seconds * 1000.0))


@dataclass
class NodeState:
    node: int
    rng: np.random.Generator
    service_tag: ServiceTag = ServiceTag.NONE
    next_scan_ms: int = 0
    scan_token: int = 0
    held: dict = field(default_factory=dict)
    in_flight: set = field(default_factory=set)
    last_caution: tuple | None = None


@dataclass
class SimResult:
    report: MetricsReport
    event_log: list
    nodes: list
    dispatched: list = field(default_factory=list)


class Simulation:
    def __init__(self, cfg: SimConfig, world=None, trust: TrustMatrix | None = None,
                 profile: RiskProfile | None = None, record_dispatch: bool = False):
        cfg.validate()
        self.cfg = cfg
        self.world = world if world is not None else materialize_world(cfg.world)
        for inc in cfg.incidents:
            if inc.victim is not None and inc.victim not in self.world.nodes:
                raise ConfigError(f"incident victim {inc.victim} is not a node of this world")
        if trust is None:
            M, D = self.world.matrices()
            trust = TrustMatrix.build(M, D, cfg.trust, cfg.service_tags, nodes=self.world.nodes)
        self.trust = trust
        self.profile = profile if profile is not None else build_risk_profile(self.world.crimes)
        self.ledger = EnergyLedger(cfg.energy)
        self.seen = dm.SeenSet()
        self.states = {
            n: NodeState(n, node_rng(cfg.seed, n), cfg.service_tags.get(n, ServiceTag.NONE))
            for n in self.world.nodes
        }
        self.queue: list = []
        self._seq = 0
        self.now_ms = _ms(cfg.start_s)
        self.end_ms = _ms(cfg.start_s + cfg.duration_s)
        self.rows: list = []
        self.counts = dict.fromkeys(
            ["scan", "deliver", "duplicate", "expired_drop", "transfer_fail", "violation", "caution"], 0)
        self.outcomes: list[IncidentOutcome] = []
        self._by_msg: dict[bytes, tuple[IncidentOutcome, set[int]]] = {}
        self._allowed_cache: dict = {}
        self.record_dispatch = record_dispatch
        self.dispatched: list = []

    # -- queue

    def schedule(self, t_ms: int, kind: int, node: int, payload=None) -> None:
        if t_ms < self.now_ms:
            raise RuntimeError("attempt to schedule an event in the past")
        self._seq += 1
        heapq.heappush(self.queue, (t_ms, kind, node, self._seq, payload))

    def emit(self, event: str, node: int, detail: str = "") -> None:
        self.rows.append((self.now_ms, event, node, detail))

    def schedule_scan(self, node: int, t_ms: int) -> None:
        st = self.states[node]
        st.scan_token += 1
        st.next_scan_ms = t_ms
        self.schedule(t_ms, SCAN_DUE, node, st.scan_token)

    # -- helpers

    def _risk(self, node: int, t_s: float) -> tuple[int, float]:
        loc = self.world.location(node, t_s)
        if loc < 0:
            return loc, 0.0
        return loc, risk_score(self.profile, loc, int(t_s // 3600) % HOURS)

    def _live(self, st: NodeState, t_s: float):
        return [m for _, m in sorted(st.held.items()) if not dm.is_expired(m, t_s) and m.hop_count < m.max_hops]

    def _allowed(self, relay: int, msg: dm.DistressMessage) -> set[int]:
        key = (relay, msg.trust_filter, msg.service_mask)
        if key not in self._allowed_cache:
            self._allowed_cache[key] = self.trust.trusted_set(relay, msg.as_filter())
        return self._allowed_cache[key]

    # -- handlers

    def on_incident(self, index: int) -> None:
        inc: Incident = self.cfg.incidents[index]
        t_s = self.now_ms / 1000.0
        victim = inc.victim
        if victim is None:
            here = [n for n in self.world.nodes if self.world.location(n, t_s) == inc.location]
            victim = here[0] if here else None
        out = IncidentOutcome(index, t_s, inc.location, victim, None)
        self.outcomes.append(out)
        if victim is None:
            self.emit("incident", -1, _detail(id=index, time_ms=self.now_ms, location=inc.location))
            log.info("incident %d at location %d has no node present", index, inc.location)
            return
        msg = dm.create_distress(
            victim, inc.msg_type, inc.severity, inc.location, inc.payload, t_s,
            incident_rng(self.cfg.seed, index), inc.trust_filter, inc.service_mask,
        )
        out.msg_id = msg.msg_id.hex()
        qualifying = self.trust.trusted_set(victim, msg.as_filter())
        self._by_msg[msg.msg_id] = (out, qualifying)
        self.emit("incident", victim, _detail(
            id=index, time_ms=self.now_ms, location=inc.location, msg=out.msg_id,
            qualifying="|".join(map(str, sorted(qualifying)))))
        self.seen.add(victim, msg.msg_id)
        self.states[victim].held[msg.msg_id] = msg
        expire_ms = max(_ms(msg.expires_at) + 1, self.now_ms)
        self.schedule(expire_ms, MESSAGE_EXPIRE, -1, msg.msg_id)
        # the victim scans right away, then at the emergency rate
        self.schedule_scan(victim, self.now_ms)

    def on_scan(self, node: int, token: int) -> None:
        st = self.states[node]
        if token != st.scan_token:
            return
        t_s = self.now_ms / 1000.0
        charge(self.ledger, node, "scan")
        self.counts["scan"] += 1
        self.emit("scan", node)
        loc, risk = self._risk(node, t_s)
        if loc >= 0:
            hour = int(t_s // 3600)
            if is_cautionary(self.profile, self.cfg.caution, loc, hour % HOURS) and st.last_caution != (loc, hour):
                st.last_caution = (loc, hour)
                self.counts["caution"] += 1
                self.emit("caution", node, _detail(location=loc, risk=f"{risk:.6f}"))

        live = self._live(st, t_s)
        if live:
            link = self.cfg.link
            found = []
            for peer, dist in self.world.peers(node, t_s, st.rng, link.range_m):
                latency = scan_latency(dist, st.rng, link)
                if latency is not None:
                    found.append((peer, dist, latency))
            for msg in live:
                wire = None
                for peer, dist, latency in found:
                    key = (msg.msg_id, peer)
                    if key in st.in_flight:
                        continue
                    if not dm.should_forward(msg, node, peer, self.trust, t_s, self.seen):
                        continue
                    wire = wire or dm.encode(msg)
                    st.in_flight.add(key)
                    done_ms = self.now_ms + _ms(latency + transfer_time(dist, len(wire), link))
                    self.emit("transfer_start", node, _detail(
                        to=peer, msg=msg.msg_id.hex(), d=f"{dist:.6f}", latency=f"{latency:.6f}", done_ms=done_ms))
                    self.schedule(done_ms, TRANSFER_COMPLETE, peer, (node, wire))

        interval = scan_interval(self.cfg.scan, risk, emergency_active=bool(self._live(st, t_s)))
        self.schedule_scan(node, self.now_ms + max(1, _ms(interval)))

    def on_transfer(self, receiver: int, relay: int, wire: bytes) -> None:
        t_s = self.now_ms / 1000.0
        msg = dm.decode(wire)
        self.states[relay].in_flight.discard((msg.msg_id, receiver))
        charge(self.ledger, relay, "transfer", len(wire))
        base = dict(msg=msg.msg_id.hex(), hop=msg.hop_count + 1, bytes=len(wire))
        if not self.world.in_contact(relay, receiver, t_s, self.cfg.link.range_m):
            self.counts["transfer_fail"] += 1
            self.emit("transfer_fail", receiver, _detail(**{"from": relay}, **base))
            return
        permitted = receiver in self._allowed(relay, msg)
        if not permitted:
            self.counts["violation"] += 1
            log.error("privacy violation: %d -> %d for %s", relay, receiver, msg.msg_id.hex())
        receipt, copy = dm.on_receive(receiver, msg, self.seen, t_s)
        event = {dm.Receipt.ACCEPT_NEW: "deliver", dm.Receipt.DUPLICATE_DROP: "duplicate",
                 dm.Receipt.EXPIRED_DROP: "expired_drop"}[receipt]
        self.counts[event] += 1
        self.emit(event, receiver, _detail(**{"from": relay}, **base, permitted=int(permitted)))
        if receipt is not dm.Receipt.ACCEPT_NEW:
            return
        st = self.states[receiver]
        st.held[copy.msg_id] = copy
        tracked = self._by_msg.get(copy.msg_id)
        if tracked:
            out, qualifying = tracked
            if out.response_time_s is None and receiver in qualifying:
                out.response_time_s = t_s - out.time_s
                out.available = out.response_time_s <= self.cfg.availability_deadline_s
        if copy.hop_count < copy.max_hops:
            soon = self.now_ms + max(1, _ms(self.cfg.scan.emergency_interval_s))
            if soon < st.next_scan_ms:
                self.schedule_scan(receiver, soon)

    def on_expire(self, msg_id: bytes) -> None:
        for st in self.states.values():
            st.held.pop(msg_id, None)
        self.emit("expire", -1, _detail(msg=msg_id.hex()))

    # -- main loop

    def run(self) -> SimResult:
        start_ms = self.now_ms
        for node in self.world.nodes:
            st = self.states[node]
            loc, risk = self._risk(node, start_ms / 1000.0)
            first = st.rng.uniform(0.0, scan_interval(self.cfg.scan, risk))
            self.schedule_scan(node, start_ms + _ms(first))
        for index, inc in enumerate(self.cfg.incidents):
            self.schedule(_ms(inc.time_s), INCIDENT_START, -1, index)
        if self.world.slot_s:
            step = self.world.slot_s * 1000
            for t in range((start_ms // step + 1) * step, self.end_ms, step):
                self.schedule(t, NODE_MOVE, -1, None)

        while self.queue and self.queue[0][0] < self.end_ms:
            t_ms, kind, node, _, payload = heapq.heappop(self.queue)
            if t_ms < self.now_ms:
                raise RuntimeError("event queue went backwards")
            self.now_ms = t_ms
            if self.record_dispatch:
                self.dispatched.append((t_ms, kind, node))
            if kind == NODE_MOVE:
                continue
            if kind == INCIDENT_START:
                self.on_incident(payload)
            elif kind == SCAN_DUE:
                self.on_scan(node, payload)
            elif kind == TRANSFER_COMPLETE:
                self.on_transfer(node, *payload)
            elif kind == MESSAGE_EXPIRE:
                self.on_expire(payload)

        energy = {n: self.ledger.energy(n) for n in self.world.nodes}
        report = _summarise(self.outcomes, self.counts, energy)
        return SimResult(report, self.rows, list(self.world.nodes), self.dispatched)


def run(cfg: SimConfig, **kwargs) -> MetricsReport:
    return Simulation(cfg, **kwargs).run().report
