import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from secagg.params import hg_tail_exact
from secagg.selection import BeaconSeed, HashBeacon, PartyRange, committee, neighborhood, select
from secagg.sim.scenario import sample_corruptions_and_dropouts


def test_beacon_known_answer():
    q = HashBeacon(b"beacon")(1)
    assert q.value.hex() == "c9223bee8090c37dfc7966ffe6d346f71facda083a87a635c1bb3b342967cae9"
    assert committee(q, 100, 10) == [23, 84, 17, 4, 36, 26, 54, 94, 34, 28]
    assert neighborhood(q, 23, 100, 8) == [91, 46, 20, 67, 48, 85, 70, 51]


def test_beacon_seed_length_checked():
    with pytest.raises(ValueError):
        BeaconSeed(b"short")


def test_party_range():
    r = PartyRange(6, exclude=3)
    assert list(r) == [1, 2, 4, 5, 6]
    assert len(r) == 5 and r[2] == 4


@settings(max_examples=50, deadline=None)
@given(st.binary(min_size=1, max_size=8), st.integers(2, 300), st.data())
def test_selection_distinct_in_range_and_deterministic(seed, n, data):
    k = data.draw(st.integers(1, n))
    a = select(seed, PartyRange(n), k)
    assert len(a) == k == len(set(a))
    assert all(1 <= v <= n for v in a)
    assert a == select(seed, PartyRange(n), k)


def test_neighborhood_excludes_member():
    q = HashBeacon(b"x")(0)
    for j in committee(q, 50, 10):
        lj = neighborhood(q, j, 50, 49)
        assert j not in lj and len(set(lj)) == 49


def test_select_rejects_oversized_request():
    with pytest.raises(ValueError):
        select(b"s", PartyRange(5), 6)


def test_committee_membership_uniform():
    counts = Counter()
    beacon = HashBeacon(b"uniform")
    for r in range(4000):
        counts.update(committee(beacon(r), 20, 5))
    obs = [counts[i] for i in range(1, 21)]
    assert stats.chisquare(obs).pvalue > 0.001


def test_prefix_property_of_sampling():
    # a larger request extends a smaller one with the same seed
    assert select(b"p", PartyRange(100), 30)[:10] == select(b"p", PartyRange(100), 10)


def test_sampled_dropouts_exact_counts():
    c, d = sample_corruptions_and_dropouts(b"s", 100, 0.2, 0.33)
    assert len(c) == 20 and len(d) == 33
    assert all(2 <= r <= 5 for r in d.values())
    c, d = sample_corruptions_and_dropouts(b"s", 100, 0.0, 0.0)
    assert not c and not d


def test_committee_dropouts_follow_hypergeometric():
    n, k, delta = 100, 10, 0.33
    beacon = HashBeacon(b"hg")
    hist = Counter()
    seeds = 10_000
    for s in range(seeds):
        _, drops = sample_corruptions_and_dropouts(s.to_bytes(4, "big"), n, 0.0, delta, "early")
        hist[sum(1 for j in committee(beacon(s), n, k) if j in drops)] += 1
    pmf = [hg_tail_exact(n, 33, k, x) - hg_tail_exact(n, 33, k, x + 1) for x in range(k + 1)]
    # pool the sparse upper tail into one bin
    cut = 7
    obs = [hist[x] for x in range(cut)] + [sum(hist[x] for x in range(cut, k + 1))]
    exp = [seeds * p for p in pmf[:cut]] + [seeds * sum(pmf[cut:])]
    exp = np.array(exp) * (sum(obs) / sum(exp))
    assert stats.chisquare(obs, exp).pvalue > 0.01
    assert math.isclose(sum(pmf), 1.0, rel_tol=1e-9)
