import random
from collections import defaultdict

from hypothesis import given
from hypothesis import strategies as st

from shield.encounter_core import (
    DurationMatrix,
    EncounterMatrix,
    build_matrices,
    pair_stats,
    rank_distribution,
    update,
    write_matrices_csv,
)
from shield.trace_io import EncounterEvent

event_st = st.builds(
    lambda a, gap, dur: EncounterEvent(a, a + gap, 0, dur, 0),
    st.integers(0, 15), st.integers(1, 5), st.integers(1, 3600),
)


def tally(events):
    counts, durs = defaultdict(int), defaultdict(int)
    for e in events:
        key = (min(e.node_a, e.node_b), max(e.node_a, e.node_b))
        counts[key] += 1
        durs[key] += e.duration
    return dict(counts), dict(durs)


def test_empty():
    M, D = build_matrices([])
    assert len(M) == len(D) == 0
    assert pair_stats(M, D, 1, 2) == (0, 0)


def test_two_events_sum():
    M, D = build_matrices([EncounterEvent(3, 7, 0, 60, 1), EncounterEvent(7, 3, 500, 40, 2)])
    assert M[3, 7] == 2
    assert D[3, 7] == 100


def test_three_events_pair_stats():
    evs = [EncounterEvent(1, 2, t, d, 0) for t, d in ((0, 10), (100, 20), (200, 30))]
    M, D = build_matrices(evs)
    assert pair_stats(M, D, 1, 2) == (3, 60)
    assert pair_stats(M, D, 2, 1) == (3, 60)


def test_diagonal_is_zero():
    M, _ = build_matrices([EncounterEvent(1, 2, 0, 5, 0)])
    assert M[1, 1] == 0


@given(st.lists(event_st, max_size=60), st.randoms())
def test_shuffled_equals_sorted_and_brute_force(events, rnd):
    shuffled = list(events)
    rnd.shuffle(shuffled)
    M1, D1 = build_matrices(events)
    M2, D2 = build_matrices(shuffled)
    assert M1 == M2 and D1 == D2
    counts, durs = tally(events)
    for (a, b), c in counts.items():
        assert pair_stats(M2, D2, a, b) == (c, durs[a, b])
        assert pair_stats(M2, D2, b, a) == (c, durs[a, b])
    assert len(M2) == len(counts)


@given(st.lists(event_st, max_size=60))
def test_incremental_equals_batch(events):
    M, D = EncounterMatrix(), DurationMatrix()
    for e in events:
        update(M, D, e)
        for (a, b), v in M.items():
            assert M[b, a] == v
    assert (M, D) == build_matrices(events)
    assert M.total() == len(events)
    assert D.total() == sum(e.duration for e in events)
    for (a, b), v in D.items():
        assert (v > 0) == (M[a, b] > 0)


def test_rank_distribution_ties():
    M = EncounterMatrix()
    for peer, n in {7: 5, 2: 9, 4: 5}.items():
        M.add(1, peer, n)
    assert rank_distribution(M, 1) == [(2, 9), (4, 5), (7, 5)]
    assert rank_distribution(M, 99) == []


@given(st.lists(event_st, max_size=40), st.integers(0, 20))
def test_rank_distribution_non_increasing(events, node):
    M, D = build_matrices(events)
    for mat in (M, D):
        values = [v for _, v in rank_distribution(mat, node)]
        assert values == sorted(values, reverse=True)


def test_rank_curve_drops_after_community(campus_world):
    # for most nodes the top (community size - 1) peers by count are exactly its community mates
    M, _ = build_matrices(campus_world.encounters)
    comm = campus_world.communities
    hits = 0
    for node in range(40):
        mates = {n for n, c in comm.items() if c == comm[node] and n != node}
        top = {peer for peer, _ in rank_distribution(M, node)[: len(mates)]}
        hits += top == mates
    assert hits >= 36


def test_matrix_csv(tmp_path):
    M, D = build_matrices([EncounterEvent(2, 1, 0, 60, 0), EncounterEvent(3, 1, 0, 30, 0)])
    path = tmp_path / "m.csv"
    write_matrices_csv(path, M, D)
    assert path.read_text() == "node_a,node_b,count,duration_s\n1,2,1,60\n1,3,1,30\n"
