"""Pairwise encounter-count and encounter-duration matrices.

Both matrices are sparse and symmetric: a single entry is stored per
unordered pair and looked up with either orientation.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from typing import Iterable

from .trace_io import EncounterEvent


def _key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


class PairMatrix:
    """Sparse symmetric map (i, j) -> value with a zero diagonal."""

    def __init__(self):
        self._values: dict[tuple[int, int], float] = {}
        self._peers: dict[int, set[int]] = defaultdict(set)

    def add(self, i: int, j: int, amount) -> None:
        if i == j:
            raise ValueError("diagonal entries are not stored")
        key = _key(i, j)
        self._values[key] = self._values.get(key, 0) + amount
        self._peers[i].add(j)
        self._peers[j].add(i)

    def get(self, i: int, j: int):
        if i == j:
            return 0
        return self._values.get(_key(i, j), 0)

    def __getitem__(self, ij: tuple[int, int]):
        return self.get(*ij)

    def row(self, i: int) -> dict[int, float]:
        return {j: self._values[_key(i, j)] for j in self._peers.get(i, ())}

    def row_max(self, i: int):
        return max(self.row(i).values(), default=0)

    def nodes(self) -> set[int]:
        return {n for n, peers in self._peers.items() if peers}

    def items(self):
        return sorted(self._values.items())

    def total(self):
        return sum(self._values.values())

    def __len__(self):
        return len(self._values)

    def __eq__(self, other):
        return isinstance(other, PairMatrix) and self._values == other._values


class EncounterMatrix(PairMatrix):
    """Number of encounters per pair."""


class DurationMatrix(PairMatrix):
    """Cumulative encounter seconds per pair."""


def update(M: EncounterMatrix, D: DurationMatrix, event: EncounterEvent) -> None:
    M.add(event.node_a, event.node_b, 1)
    D.add(event.node_a, event.node_b, event.duration)


def build_matrices(events: Iterable[EncounterEvent]) -> tuple[EncounterMatrix, DurationMatrix]:
    M, D = EncounterMatrix(), DurationMatrix()
    for event in events:
        update(M, D, event)
    return M, D


def pair_stats(M: EncounterMatrix, D: DurationMatrix, i: int, j: int):
    """(count, total_duration_s) for a pair; (0, 0) if they never met."""
    return M.get(i, j), D.get(i, j)


def rank_distribution(matrix: PairMatrix, i: int) -> list[tuple[int, float]]:
    """Peers of ``i`` by descending value, ties by ascending peer id."""
    return sorted(matrix.row(i).items(), key=lambda kv: (-kv[1], kv[0]))


def write_matrices_csv(path, M: EncounterMatrix, D: DurationMatrix) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_a", "node_b", "count", "duration_s"])
        for (a, b), count in M.items():
            writer.writerow([a, b, count, D.get(a, b)])
