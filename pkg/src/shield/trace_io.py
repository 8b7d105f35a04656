"""CSV trace formats and a seeded synthetic campus generator.

Three input formats are supported, all UTF-8 with a mandatory header row:

    encounters.csv   node_a,node_b,start,duration,location
    crime.csv        timestamp,location,crime_type,severity
    density.csv      hour,count

The generator writes those three plus ``communities.csv`` (``node,community``).
"""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import norm

SLOT_S = 60
HOURS = 24
DAY_S = 86400

ENCOUNTER_HEADER = ["node_a", "node_b", "start", "duration", "location"]
CRIME_HEADER = ["timestamp", "location", "crime_type", "severity"]
DENSITY_HEADER = ["hour", "count"]
COMMUNITY_HEADER = ["node", "community"]

CRIME_TYPES = ("THEFT", "BURGLARY", "ASSAULT", "VANDALISM", "ROBBERY")

# Crime hour-of-day mixture: uniform plus a wrapped normal centred on midnight.
CRIME_UNIFORM_WEIGHT = 0.5
CRIME_MIDNIGHT_SIGMA_H = 2.0


class TraceFormatError(ValueError):
    """A trace file violates its declared CSV schema."""

    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class EncounterEvent:
    node_a: int
    node_b: int
    start: float
    duration: float
    location: int

    def __post_init__(self):
        if self.node_a == self.node_b:
            raise ValueError(f"self-encounter for node {self.node_a}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if self.node_a > self.node_b:
            a, b = self.node_b, self.node_a
            object.__setattr__(self, "node_a", a)
            object.__setattr__(self, "node_b", b)

    @property
    def pair(self) -> tuple[int, int]:
        return self.node_a, self.node_b

    def sort_key(self):
        return (self.start, self.node_a, self.node_b, self.duration, self.location)


@dataclass(frozen=True, order=True)
class CrimeRecord:
    timestamp: float
    location: int
    crime_type: str
    severity: int

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError(f"timestamp must be >= 0, got {self.timestamp}")
        if not 0 <= self.severity <= 255:
            raise ValueError(f"severity {self.severity} outside 0-255")

    @property
    def hour(self) -> int:
        return int(self.timestamp // 3600) % HOURS


@dataclass(frozen=True)
class DensitySample:
    hour_bin: int
    count: int

    def __post_init__(self):
        if not 0 <= self.hour_bin < HOURS:
            raise ValueError(f"hour {self.hour_bin} outside 0-23")
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")


# ---------------------------------------------------------------- parsing


def _number(text: str) -> int | float:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {text!r}")
        return value


def _read_rows(path, header: Sequence[str]):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such trace file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != list(header):
            raise TraceFormatError(path, 1, f"expected header {','.join(header)!r}")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise TraceFormatError(
                    path, reader.line_num, f"expected {len(header)} fields, got {len(row)}"
                )
            yield reader.line_num, row


def parse_encounter_trace(path) -> list[EncounterEvent]:
    """Read an encounter CSV; pairs come back canonicalised (a < b), sorted by start."""
    events = []
    for line, row in _read_rows(path, ENCOUNTER_HEADER):
        try:
            a, b = int(row[0]), int(row[1])
            start, duration = _number(row[2]), _number(row[3])
            location = int(row[4])
            if min(a, b, location) < 0:
                raise ValueError("node and location ids must be unsigned")
            if start < 0:
                raise ValueError("start must be >= 0")
            events.append(EncounterEvent(a, b, start, duration, location))
        except ValueError as exc:
            raise TraceFormatError(path, line, str(exc)) from None
    events.sort(key=EncounterEvent.sort_key)
    return events


def parse_crime_log(path) -> list[CrimeRecord]:
    records = []
    for line, row in _read_rows(path, CRIME_HEADER):
        try:
            location = int(row[1])
            if location < 0:
                raise ValueError("location ids must be unsigned")
            crime_type = row[2].strip()
            if not crime_type:
                raise ValueError("empty crime_type")
            records.append(CrimeRecord(_number(row[0]), location, crime_type, int(row[3])))
        except ValueError as exc:
            raise TraceFormatError(path, line, str(exc)) from None
    records.sort()
    return records


def parse_density_series(path) -> list[DensitySample]:
    """Read ``hour,count`` rows into exactly 24 samples; absent hours get count 0."""
    counts: dict[int, int] = {}
    for line, row in _read_rows(path, DENSITY_HEADER):
        try:
            sample = DensitySample(int(row[0]), int(row[1]))
        except ValueError as exc:
            raise TraceFormatError(path, line, str(exc)) from None
        if sample.hour_bin in counts:
            raise TraceFormatError(path, line, f"duplicate hour {sample.hour_bin}")
        counts[sample.hour_bin] = sample.count
    return [DensitySample(h, counts.get(h, 0)) for h in range(HOURS)]


def parse_communities(path) -> dict[int, int]:
    out = {}
    for line, row in _read_rows(path, COMMUNITY_HEADER):
        try:
            out[int(row[0])] = int(row[1])
        except ValueError as exc:
            raise TraceFormatError(path, line, str(exc)) from None
    return out


# ---------------------------------------------------------------- writing


def _write_rows(path, header, rows: Iterable[Sequence]):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_encounter_trace(path, events: Iterable[EncounterEvent]):
    _write_rows(
        path,
        ENCOUNTER_HEADER,
        ((e.node_a, e.node_b, e.start, e.duration, e.location) for e in events),
    )


def write_crime_log(path, records: Iterable[CrimeRecord]):
    _write_rows(
        path,
        CRIME_HEADER,
        ((r.timestamp, r.location, r.crime_type, r.severity) for r in records),
    )


def write_density_series(path, samples: Iterable[DensitySample]):
    _write_rows(path, DENSITY_HEADER, ((s.hour_bin, s.count) for s in samples))


def write_communities(path, communities: dict[int, int]):
    _write_rows(path, COMMUNITY_HEADER, sorted(communities.items()))


# ---------------------------------------------------------------- synthetic world


def crime_hour_distribution(
    uniform_weight: float = CRIME_UNIFORM_WEIGHT, sigma_h: float = CRIME_MIDNIGHT_SIGMA_H
) -> np.ndarray:
    """Probability mass of each hour bin under the midnight-peaked crime mixture."""
    edges = np.arange(HOURS + 1, dtype=float)
    mass = np.zeros(HOURS)
    for wrap in range(-4, 5):
        cdf = norm.cdf(edges + HOURS * wrap, loc=0.0, scale=sigma_h)
        mass += np.diff(cdf)
    return uniform_weight / HOURS + (1.0 - uniform_weight) * mass


def daytime_shape() -> np.ndarray:
    h = np.arange(HOURS) + 0.5
    return 0.5 * (1.0 + np.cos(2.0 * np.pi * (h - 14.0) / HOURS))


def activity_profile(coupling: float, peak_activity: float = 0.9) -> np.ndarray:
    """Per-hour probability that a node is active.

    ``coupling`` blends a daytime campus rhythm (0.0) toward the crime hour
    shape (1.0); it is the knob that sets the crime/density correlation.
    """
    crime = crime_hour_distribution()
    blend = (1.0 - coupling) * daytime_shape() + coupling * crime / crime.max()
    return peak_activity * blend / blend.max()


@functools.lru_cache(maxsize=64)
def coupling_for_correlation(target_r: float, tol: float = 1e-9) -> float:
    """Bisect the coupling whose *expected* hourly profiles correlate at ``target_r``."""
    crime = crime_hour_distribution()

    def r(k):
        return float(np.corrcoef(crime, activity_profile(k))[0, 1])

    lo, hi = 0.0, 1.0
    if not r(lo) <= target_r <= r(hi):
        raise ValueError(f"target r={target_r} not reachable in [{r(lo):.3f}, {r(hi):.3f}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if r(mid) < target_r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class SyntheticWorldConfig:
    n_nodes: int = 40
    n_communities: int = 4
    n_locations: int = 20
    sim_duration_s: int = 7 * DAY_S
    p_home: float = 0.8
    incident_schedule: list = field(default_factory=list)
    rng_seed: int = 42
    mean_dwell_s: int = 1800
    n_crime_records: int = 2000
    crime_span_days: int = 3650
    target_correlation: float = 0.55
    # None derives the coupling from target_correlation
    density_coupling: float | None = None
    peak_activity: float = 0.9

    @property
    def coupling(self) -> float:
        if self.density_coupling is not None:
            return self.density_coupling
        return coupling_for_correlation(self.target_correlation)

    def validate(self):
        if self.n_nodes < 2:
            raise ValueError("n_nodes must be >= 2")
        if not 1 <= self.n_communities <= self.n_nodes:
            raise ValueError("need 1 <= n_communities <= n_nodes")
        if self.n_locations < self.n_communities:
            raise ValueError("need n_locations >= n_communities (disjoint home locations)")
        if self.sim_duration_s <= 0:
            raise ValueError("sim_duration_s must be > 0")
        if not 0.0 <= self.p_home <= 1.0:
            raise ValueError("p_home must lie in [0, 1]")
        if self.mean_dwell_s < SLOT_S:
            raise ValueError(f"mean_dwell_s must be >= {SLOT_S}")
        if self.n_crime_records < 0 or self.crime_span_days < 1:
            raise ValueError("invalid crime sampling parameters")
        if self.density_coupling is not None and not 0.0 <= self.density_coupling <= 1.0:
            raise ValueError("density_coupling must lie in [0, 1]")
        if self.density_coupling is None and not -1.0 <= self.target_correlation <= 1.0:
            raise ValueError("target_correlation must lie in [-1, 1]")
        if not 0.0 < self.peak_activity <= 1.0:
            raise ValueError("peak_activity must lie in (0, 1]")
        for item in self.incident_schedule:
            try:
                incident_from_dict(item)
            except (KeyError, TypeError) as exc:
                raise ValueError(f"invalid incident {item!r}: {exc}") from None

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticWorldConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown world config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class Incident:
    time_s: float
    location: int
    crime_type: str = "ASSAULT"
    severity: int = 200
    victim: int | None = None
    msg_type: int = 1
    payload: str = "HELP"
    # wire-level bit masks; None keeps the message type's default
    trust_filter: int | None = None
    service_mask: int | None = None

    def to_crime_record(self) -> CrimeRecord:
        return CrimeRecord(self.time_s, self.location, self.crime_type, self.severity)


_FILTER_NAMES = {"friend": 1, "acquaintance": 2, "stranger": 4, "service": 8}
_SERVICE_NAMES = {"medical": 1, "security": 2, "rescue": 4, "vigil": 8}


def _mask(value, names: dict) -> int | None:
    if value is None or isinstance(value, int):
        return value
    bits = 0
    for name in value:
        bits |= names[name.strip().lower()]
    return bits


def incident_from_dict(item) -> Incident:
    """Build an Incident from a dict or a ``(time, location, type, severity)`` tuple.

    ``trust_filter`` / ``service_mask`` accept either integer bit masks or
    lists of names such as ``["Friend", "Service"]`` and ``["Security"]``.
    """
    if isinstance(item, Incident):
        return item
    if isinstance(item, (list, tuple)):
        time_s, location, crime_type, severity = item
        item = dict(time_s=time_s, location=location, crime_type=crime_type, severity=severity)
    item = dict(item)
    if isinstance(item.get("msg_type"), str):
        item["msg_type"] = {"alert": 0, "emergency": 1}[item["msg_type"].lower()]
    item["trust_filter"] = _mask(item.get("trust_filter"), _FILTER_NAMES)
    item["service_mask"] = _mask(item.get("service_mask"), _SERVICE_NAMES)
    inc = Incident(**item)
    if inc.time_s < 0 or not 0 <= inc.severity <= 255 or inc.msg_type not in (0, 1):
        raise ValueError(f"invalid incident {item!r}")
    return inc


@dataclass
class SyntheticWorld:
    config: SyntheticWorldConfig
    encounters: list[EncounterEvent]
    crimes: list[CrimeRecord]
    density: list[DensitySample]
    communities: dict[int, int]
    # location id per (node, 60 s slot); -1 while the node is inactive
    timeline: np.ndarray

    def location_at(self, node: int, t_s: float) -> int:
        slot = min(int(t_s // SLOT_S), self.timeline.shape[1] - 1)
        return int(self.timeline[node, slot])

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [out_dir / n for n in ("encounters.csv", "crime.csv", "density.csv", "communities.csv")]
        write_encounter_trace(paths[0], self.encounters)
        write_crime_log(paths[1], self.crimes)
        write_density_series(paths[2], self.density)
        write_communities(paths[3], self.communities)
        return paths


def community_of(node: int, cfg: SyntheticWorldConfig) -> int:
    return node * cfg.n_communities // cfg.n_nodes


def home_locations(community: int, cfg: SyntheticWorldConfig) -> np.ndarray:
    return np.arange(community, cfg.n_locations, cfg.n_communities)


def _sample_timeline(cfg: SyntheticWorldConfig, rng: np.random.Generator) -> np.ndarray:
    n_slots = math.ceil(cfg.sim_duration_s / SLOT_S)
    slots = np.arange(n_slots)
    all_locs = np.arange(cfg.n_locations)
    timeline = np.empty((cfg.n_nodes, n_slots), dtype=np.int64)

    p_move = SLOT_S / cfg.mean_dwell_s
    for node in range(cfg.n_nodes):
        home = home_locations(community_of(node, cfg), cfg)
        away = np.setdiff1d(all_locs, home)
        moves = rng.random(n_slots) < p_move
        moves[0] = True
        at_home = rng.random(n_slots) < cfg.p_home
        if away.size == 0:
            at_home[:] = True
        dest = np.where(
            at_home,
            home[rng.integers(0, home.size, n_slots)],
            away[rng.integers(0, max(away.size, 1), n_slots)] if away.size else 0,
        )
        last_move = np.maximum.accumulate(np.where(moves, slots, 0))
        timeline[node] = dest[last_move]

    n_hours = math.ceil(n_slots / 60)
    p_active = activity_profile(cfg.coupling, cfg.peak_activity)
    active_hours = rng.random((cfg.n_nodes, n_hours)) < p_active[np.arange(n_hours) % HOURS]
    active = np.repeat(active_hours, 60, axis=1)[:, :n_slots]
    timeline[~active] = -1
    return timeline


def encounters_from_timeline(timeline: np.ndarray, slot_s: int = SLOT_S) -> list[EncounterEvent]:
    """One encounter per maximal run of slots in which two nodes share a location."""
    n_nodes = timeline.shape[0]
    events = []
    for a in range(n_nodes):
        la = timeline[a]
        for b in range(a + 1, n_nodes):
            key = np.where((la == timeline[b]) & (la >= 0), la, -1)
            if not (key >= 0).any():
                continue
            padded = np.concatenate(([-1], key, [-1]))
            change = np.flatnonzero(np.diff(padded)) + 1
            # run i covers padded[change[i]:change[i+1]]
            for s, e in zip(change[:-1], change[1:]):
                loc = padded[s]
                if loc >= 0:
                    events.append(
                        EncounterEvent(a, b, int((s - 1) * slot_s), int((e - s) * slot_s), int(loc))
                    )
    events.sort(key=EncounterEvent.sort_key)
    return events


def _sample_crimes(cfg: SyntheticWorldConfig, rng: np.random.Generator) -> list[CrimeRecord]:
    n = cfg.n_crime_records
    weights = 1.0 / (1.0 + rng.permutation(cfg.n_locations))
    weights /= weights.sum()
    locations = rng.choice(cfg.n_locations, size=n, p=weights)
    uniform = rng.random(n) < CRIME_UNIFORM_WEIGHT
    hours = np.where(
        uniform,
        rng.uniform(0.0, HOURS, n),
        np.mod(rng.normal(0.0, CRIME_MIDNIGHT_SIGMA_H, n), HOURS),
    )
    days = rng.integers(0, cfg.crime_span_days, n)
    stamps = np.floor(days * DAY_S + hours * 3600.0).astype(np.int64)
    types = rng.integers(0, len(CRIME_TYPES), n)
    severities = rng.integers(0, 256, n)
    records = [
        CrimeRecord(int(t), int(l), CRIME_TYPES[k], int(s))
        for t, l, k, s in zip(stamps, locations, types, severities)
    ]
    records.extend(incident_from_dict(i).to_crime_record() for i in cfg.incident_schedule)
    records.sort()
    return records


def _density_from_timeline(timeline: np.ndarray) -> list[DensitySample]:
    n_slots = timeline.shape[1]
    n_hours = math.ceil(n_slots / 60)
    counts = np.zeros(HOURS, dtype=np.int64)
    for hour in range(n_hours):
        # nodes active at the top of the hour
        counts[hour % HOURS] += int((timeline[:, hour * 60] >= 0).sum())
    return [DensitySample(h, int(c)) for h, c in enumerate(counts)]


def generate_synthetic_world(cfg: SyntheticWorldConfig) -> SyntheticWorld:
    cfg.validate()
    root = np.random.SeedSequence(cfg.rng_seed)
    mob_seq, crime_seq = root.spawn(2)
    timeline = _sample_timeline(cfg, np.random.default_rng(mob_seq))
    return SyntheticWorld(
        config=cfg,
        encounters=encounters_from_timeline(timeline),
        crimes=_sample_crimes(cfg, np.random.default_rng(crime_seq)),
        density=_density_from_timeline(timeline),
        communities={n: community_of(n, cfg) for n in range(cfg.n_nodes)},
        timeline=timeline,
    )
