"""Location x hour-of-day crime risk built from historical crime logs."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .trace_io import HOURS, CrimeRecord

DEFAULT_CAUTION = 0.5


def severity_weight(severity: int) -> float:
    return 1.0 + severity / 255.0


@dataclass(frozen=True)
class CautionPolicy:
    threshold: float = DEFAULT_CAUTION

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"caution threshold must lie in [0, 1], got {self.threshold}")


@dataclass
class RiskProfile:
    # location -> 24 normalised risks
    risk: dict[int, np.ndarray] = field(default_factory=dict)
    window: tuple[float, float] | None = None

    def locations(self) -> list[int]:
        return sorted(self.risk)

    def to_json(self) -> str:
        data = {
            "window": list(self.window) if self.window else None,
            "risk": {str(loc): [float(v) for v in self.risk[loc]] for loc in self.locations()},
        }
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RiskProfile":
        data = json.loads(text)
        risk = {int(k): np.asarray(v, dtype=float) for k, v in data["risk"].items()}
        for loc, row in risk.items():
            if row.shape != (HOURS,):
                raise ValueError(f"location {loc}: expected 24 hourly risks")
        window = tuple(data["window"]) if data.get("window") else None
        return cls(risk, window)


def raw_weights(records: Iterable[CrimeRecord]) -> dict[int, np.ndarray]:
    raw: dict[int, np.ndarray] = {}
    for rec in records:
        row = raw.setdefault(rec.location, np.zeros(HOURS))
        row[rec.hour] += severity_weight(rec.severity)
    return raw


def build_risk_profile(records: Iterable[CrimeRecord]) -> RiskProfile:
    """Severity-weighted crime counts per (location, hour), scaled so the worst cell is 1."""
    records = list(records)
    if not records:
        return RiskProfile()
    raw = raw_weights(records)
    peak = max(row.max() for row in raw.values())
    risk = {loc: row / peak for loc, row in raw.items()}
    stamps = [r.timestamp for r in records]
    return RiskProfile(risk, (min(stamps), max(stamps)))


def _check_hour(hour: int) -> None:
    if not 0 <= hour < HOURS:
        raise ValueError(f"hour {hour} outside 0-23")


def risk_score(profile: RiskProfile, location: int, hour: int) -> float:
    _check_hour(hour)
    row = profile.risk.get(location)
    return 0.0 if row is None else float(row[hour])


def rank_locations(profile: RiskProfile, hour: int | None = None) -> list[tuple[int, float]]:
    """Locations by mean risk over ``hour`` (or all 24 hours), riskiest first."""
    if hour is not None:
        _check_hour(hour)
    scored = []
    for loc in profile.locations():
        row = profile.risk[loc]
        scored.append((loc, float(row[hour]) if hour is not None else float(row.mean())))
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return scored


def is_cautionary(profile: RiskProfile, policy: CautionPolicy, location: int, hour: int) -> bool:
    return risk_score(profile, location, hour) >= policy.threshold
