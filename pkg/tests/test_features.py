import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlosbench.errors import NonUniformSpacing
from nlosbench.features import (
    FeatureSample,
    extract,
    format_samples,
    parse_samples,
    to_arrays,
    warmup_slots,
)
from nlosbench.trace import Condition, DeliveryRecord


def timeline(delivered, conditions=None, period=100):
    conditions = conditions or [Condition.LOS] * len(delivered)
    return [(DeliveryRecord(i, i * period, bool(d)), c)
            for i, (d, c) in enumerate(zip(delivered, conditions))]


def naive_pdr(delivered, i, w):
    """Rescan the w slots ending at (and including) slot i."""
    window = delivered[i - w + 1:i + 1]
    assert len(window) == w
    return sum(1 for d in window if d) / w


def test_saturated_channel():
    samples = extract(timeline([1] * 250))
    assert samples and all(s.x == (1.0, 1.0, 1.0) for s in samples)


def test_last_ten_slots_pdr():
    delivered = [1] * 90 + [1, 0, 1, 1, 0, 1, 1, 0, 1, 1]
    (s,) = extract(timeline(delivered))
    assert s.pdr_1s == naive_pdr(delivered, 99, 10) == 0.7
    assert s.pdr_5s == naive_pdr(delivered, 99, 50)
    assert s.pdr_10s == naive_pdr(delivered, 99, 100)


def test_exactly_one_sample_for_100_slots():
    samples = extract(timeline([1] * 100))
    assert len(samples) == 1
    assert samples[0].slot_time_ms == 99 * 100


def test_too_short_trace_gives_nothing():
    assert extract(timeline([1] * 99)) == []


def test_warmup_arithmetic():
    assert warmup_slots(100) == 99
    assert warmup_slots(50) == 199
    assert warmup_slots(300) == 33


def test_non_uniform_spacing():
    recs = timeline([1] * 120)
    rec, c = recs[60]
    recs[60] = (DeliveryRecord(rec.seq, rec.send_time_ms + 60, rec.delivered), c)
    with pytest.raises(NonUniformSpacing) as err:
        extract(recs)
    assert err.value.index == 60


def test_small_jitter_tolerated():
    recs = timeline([1] * 120)
    rec, c = recs[60]
    recs[60] = (DeliveryRecord(rec.seq, rec.send_time_ms + 40, rec.delivered), c)
    assert len(extract(recs)) == 21


def test_incremental_equals_naive_rescan_on_long_traces():
    gen = np.random.default_rng(5)
    for _ in range(10):
        p = gen.uniform(0.2, 1.0)
        delivered = (gen.random(10_000) < p).tolist()
        samples = extract(timeline(delivered))
        assert len(samples) == 10_000 - 99
        for s in samples:
            i = s.slot_time_ms // 100
            assert (s.pdr_1s, s.pdr_5s, s.pdr_10s) == (
                naive_pdr(delivered, i, 10), naive_pdr(delivered, i, 50), naive_pdr(delivered, i, 100))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.sampled_from([Condition.LOS, Condition.NLOS])),
                max_size=400))
def test_count_and_label_preservation(rows):
    delivered = [d for d, _ in rows]
    conds = [c for _, c in rows]
    samples = extract(timeline(delivered, conds))
    assert len(samples) == max(0, len(rows) - 100 + 1)
    assert Counter(s.label for s in samples) == Counter(conds[99:])
    for s in samples:
        assert 0.0 <= s.pdr_1s <= 1.0 and 0.0 <= s.pdr_5s <= 1.0 and 0.0 <= s.pdr_10s <= 1.0


def test_samples_roundtrip_is_lossless():
    gen = np.random.default_rng(9)
    delivered = (gen.random(400) < 0.77).tolist()
    conds = [Condition.NLOS if i % 37 < 11 else Condition.LOS for i in range(400)]
    samples = extract(timeline(delivered, conds))
    assert parse_samples(io.StringIO(format_samples(samples))) == samples


def test_to_arrays_labels():
    s = [FeatureSample(0.1, 0.2, 0.3, Condition.NLOS, 0), FeatureSample(1, 1, 1, Condition.LOS, 100)]
    X, y = to_arrays(s)
    assert X.shape == (2, 3)
    assert y.tolist() == [1, -1]
