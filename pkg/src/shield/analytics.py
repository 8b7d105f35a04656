"""Hourly crime/density histograms and their correlation."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .trace_io import HOURS, CrimeRecord, DensitySample

CLAMP_EPS = 1e-12


class UndefinedCorrelationError(ValueError):
    pass


def hourly_histogram(items: Iterable[CrimeRecord | DensitySample]) -> list[float]:
    """Crime records are counted per hour; density samples are summed per hour."""
    bins = [0.0] * HOURS
    for item in items:
        if isinstance(item, DensitySample):
            bins[item.hour_bin] += item.count
        else:
            bins[item.hour] += 1
    return bins


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("pearson needs two equal-length 1-d series of length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    if abs(r) > 1.0 + CLAMP_EPS:
        raise ArithmeticError(f"|r| = {abs(r)} exceeds 1")
    return max(-1.0, min(1.0, r))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    return pearson(rankdata(x), rankdata(y))


@dataclass
class CorrelationReport:
    pearson_r: float
    n_bins: int
    peak_crime_hour: int
    peak_density_hour: int
    crime_histogram: list
    density_histogram: list

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def correlation_report(
    crimes: Iterable[CrimeRecord], density: Iterable[DensitySample], method: str = "pearson"
) -> CorrelationReport:
    crime_h = hourly_histogram(crimes)
    dens_h = hourly_histogram(density)
    if not any(crime_h) or not any(dens_h):
        raise UndefinedCorrelationError("crime log and density series must both be non-empty")
    corr = {"pearson": pearson, "spearman": spearman}[method]
    return CorrelationReport(
        pearson_r=corr(crime_h, dens_h),
        n_bins=HOURS,
        peak_crime_hour=int(np.argmax(crime_h)),
        peak_density_hour=int(np.argmax(dens_h)),
        crime_histogram=crime_h,
        density_histogram=dens_h,
    )
