import json
import math
import random

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from shield.analytics import (
    UndefinedCorrelationError,
    correlation_report,
    hourly_histogram,
    pearson,
    spearman,
)
from shield.trace_io import CrimeRecord, DensitySample


def brute_pearson(x, y):
    """Definitional formula with plain Python loops."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sx = math.sqrt(sum((a - mx) ** 2 for a in x))
    sy = math.sqrt(sum((b - my) ** 2 for b in y))
    return cov / (sx * sy)


def test_histogram_empty_and_crime():
    assert hourly_histogram([]) == [0.0] * 24
    recs = [CrimeRecord(23 * 3600 + k, 1, "T", 0) for k in range(3)]
    assert hourly_histogram(recs)[23] == 3
    assert hourly_histogram([CrimeRecord(86340, 1, "T", 0)])[23] == 1


def test_histogram_density_sums():
    hist = hourly_histogram([DensitySample(h, h * 2) for h in range(24)])
    assert hist == [float(h * 2) for h in range(24)]


def test_pearson_identities():
    x = [1.0, 4.0, 2.0, 8.0]
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0)


def test_pearson_small_example():
    # x̄ = ȳ = 2; Σ(x-x̄)(y-ȳ) = (-1)(-1) + 0*1 + 1*0 = 1 ; Σ(x-x̄)² = Σ(y-ȳ)² = 2 -> r = 1/2
    assert brute_pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)
    assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-15)


def test_pearson_errors():
    with pytest.raises(UndefinedCorrelationError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson([1], [2])
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2, 3])


def test_pearson_matches_brute_force_random_vectors():
    rnd = random.Random(1234)
    for _ in range(100):
        x = [rnd.uniform(-100, 100) for _ in range(24)]
        y = [rnd.uniform(-100, 100) for _ in range(24)]
        assert abs(pearson(x, y) - brute_pearson(x, y)) <= 1e-12


vec = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=24, max_size=24)


def spread(v):
    return max(v) - min(v) > 1e-3


@given(vec, vec, st.floats(0.1, 10), st.floats(-50, 50), st.floats(-10, -0.1), st.floats(-50, 50))
def test_pearson_affine_invariance(x, y, a, b, c, d):
    assume(spread(x) and spread(y))
    r = pearson(x, y)
    assert pearson([a * v + b for v in x], [a * v + d for v in y]) == pytest.approx(r, abs=1e-6)
    assert pearson([a * v + b for v in x], [c * v + d for v in y]) == pytest.approx(-r, abs=1e-6)


@given(vec, vec)
def test_pearson_symmetric_and_bounded(x, y):
    assume(spread(x) and spread(y))
    r = pearson(x, y)
    assert r == pearson(y, x)
    assert -1.0 <= r <= 1.0


def test_spearman_monotone():
    x = list(range(24))
    assert spearman(x, [v ** 3 for v in x]) == pytest.approx(1.0)


def crimes_from_hist(hist):
    return [CrimeRecord(h * 3600 + k, 0, "T", 0) for h, n in enumerate(hist) for k in range(n)]


def test_report_proportional_density():
    hist = [(h * 7) % 11 + 1 for h in range(24)]
    density = [DensitySample(h, 30 * n) for h, n in enumerate(hist)]
    report = correlation_report(crimes_from_hist(hist), density)
    assert report.pearson_r == pytest.approx(1.0)
    assert report.n_bins == 24
    assert report.peak_crime_hour == int(np.argmax(hist))
    data = json.loads(report.to_json())
    assert set(data) == {"pearson_r", "n_bins", "peak_crime_hour", "peak_density_hour",
                         "crime_histogram", "density_histogram"}


def test_report_peak_ties_pick_smallest_hour():
    hist = [1] * 24
    hist[5] = hist[17] = 4
    density = [DensitySample(h, 10 + (h == 2)) for h in range(24)]
    report = correlation_report(crimes_from_hist(hist), density)
    assert report.peak_crime_hour == 5
    assert report.peak_density_hour == 2


def test_report_requires_data():
    with pytest.raises(UndefinedCorrelationError):
        correlation_report([], [DensitySample(h, h) for h in range(24)])
