"""Directional trust scores and trust classes derived from encounter history."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from .encounter_core import DurationMatrix, EncounterMatrix

DEFAULT_ALPHA = 0.5
DEFAULT_THETA_FRIEND = 0.6
DEFAULT_THETA_ACQ = 0.2


class TrustClass(enum.IntEnum):
    STRANGER = 0
    ACQUAINTANCE = 1
    FRIEND = 2

    @property
    def label(self) -> str:
        return self.name.title()

    @classmethod
    def parse(cls, text: str) -> "TrustClass":
        return cls[text.strip().upper()]


class ServiceTag(enum.IntEnum):
    NONE = 0
    MEDICAL = 1
    SECURITY = 2
    RESCUE = 3
    VIGIL = 4

    @property
    def label(self) -> str:
        return self.name.title()

    @classmethod
    def parse(cls, text: str) -> "ServiceTag":
        return cls[text.strip().upper()]


def trust_score(M: EncounterMatrix, D: DurationMatrix, i: int, j: int, alpha: float = DEFAULT_ALPHA) -> float:
    """Blend of i's count and duration with j, each normalised by i's busiest peer.

    A node with no encounters trusts no one (score 0 everywhere).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if i == j:
        return 0.0
    max_count, max_dur = M.row_max(i), D.row_max(i)
    if max_count == 0:
        return 0.0
    count_part = M.get(i, j) / max_count
    dur_part = D.get(i, j) / max_dur if max_dur > 0 else 0.0
    # same value as alpha*c + (1-alpha)*d, but exact when c == d
    score = dur_part + alpha * (count_part - dur_part)
    return min(1.0, max(0.0, score))


def _check_thresholds(theta_friend: float, theta_acq: float) -> None:
    if not 0.0 <= theta_acq < theta_friend <= 1.0:
        raise ValueError(f"need 0 <= theta_acq < theta_friend <= 1, got {theta_acq}, {theta_friend}")


def classify(score: float, theta_friend: float = DEFAULT_THETA_FRIEND, theta_acq: float = DEFAULT_THETA_ACQ) -> TrustClass:
    _check_thresholds(theta_friend, theta_acq)
    if score >= theta_friend:
        return TrustClass.FRIEND
    if score >= theta_acq:
        return TrustClass.ACQUAINTANCE
    return TrustClass.STRANGER


@dataclass(frozen=True)
class TrustParams:
    alpha: float = DEFAULT_ALPHA
    theta_friend: float = DEFAULT_THETA_FRIEND
    theta_acq: float = DEFAULT_THETA_ACQ

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        _check_thresholds(self.theta_friend, self.theta_acq)


@dataclass(frozen=True)
class TrustFilter:
    classes: frozenset = frozenset()
    services: frozenset = frozenset()

    @classmethod
    def of(cls, classes: Iterable[TrustClass] = (), services: Iterable[ServiceTag] = ()) -> "TrustFilter":
        return cls(frozenset(classes), frozenset(s for s in services if s is not ServiceTag.NONE))


@dataclass
class TrustMatrix:
    """Scores for every met pair, computed once; unmet pairs are implicit Strangers."""

    params: TrustParams
    nodes: frozenset
    scores: dict = field(default_factory=dict)
    service_tags: dict = field(default_factory=dict)
    _rows: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def build(
        cls,
        M: EncounterMatrix,
        D: DurationMatrix,
        params: TrustParams = TrustParams(),
        service_tags: dict[int, ServiceTag] | None = None,
        nodes: Iterable[int] = (),
    ) -> "TrustMatrix":
        service_tags = {n: t for n, t in (service_tags or {}).items() if t is not ServiceTag.NONE}
        universe = frozenset(nodes) | M.nodes() | frozenset(service_tags)
        scores = {}
        for i in M.nodes():
            for j in M.row(i):
                scores[(i, j)] = trust_score(M, D, i, j, params.alpha)
        return cls(params, universe, scores, service_tags)

    def score(self, i: int, j: int) -> float:
        return self.scores.get((i, j), 0.0)

    def trust_class(self, i: int, j: int) -> TrustClass:
        return classify(self.score(i, j), self.params.theta_friend, self.params.theta_acq)

    def service_tag(self, j: int) -> ServiceTag:
        return self.service_tags.get(j, ServiceTag.NONE)

    def peers_of(self, i: int) -> list[int]:
        """Nodes ``i`` has a score for, i.e. has met."""
        if not self._rows and self.scores:
            for a, b in self.scores:
                self._rows.setdefault(a, []).append(b)
        return self._rows.get(i, [])

    def trusted_set(self, i: int, flt: TrustFilter) -> set[int]:
        out = {j for j, tag in self.service_tags.items() if tag in flt.services and j != i}
        # unmet nodes are Strangers, so only a Stranger filter needs the full sweep
        candidates = self.nodes if TrustClass.STRANGER in flt.classes else self.peers_of(i)
        for j in candidates:
            if j != i and self.trust_class(i, j) in flt.classes:
                out.add(j)
        return out

    def report(self, i: int) -> list[tuple[int, float, TrustClass, ServiceTag]]:
        """Rows ``(peer, score, class, service_tag)`` for every other known node, best first."""
        rows = [(j, self.score(i, j), self.trust_class(i, j), self.service_tag(j)) for j in self.nodes if j != i]
        rows.sort(key=lambda r: (-r[1], r[0]))
        return rows


def trusted_set(tm: TrustMatrix, i: int, flt: TrustFilter) -> set[int]:
    return tm.trusted_set(i, flt)
