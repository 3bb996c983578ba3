
import numpy as np
import pytest

from nlosbench.errors import ConfigError, DomainError
from nlosbench.seeding import rng
from nlosbench.simgen import Scenario, ScenarioConfig, generate, packet_logs, preset, sample_pareto
from nlosbench.trace import Condition, intervals_from_labels, match_logs


def small(**kw):
    base = dict(scenario=Scenario.CUSTOM, p_deliver_los=0.9, p_deliver_nlos=0.4,
                pareto_scale_los_s=3.0, pareto_alpha_los=1.7, pareto_scale_nlos_s=1.5,
                pareto_alpha_nlos=1.9, packet_period_ms=100, duration_s=60.0, seed=7)
    base.update(kw)
    return ScenarioConfig(**base)


def test_pareto_lower_bound():
    assert sample_pareto(1.0, 2.0, 0.0) == 1.0


def test_pareto_hand_inverse():
    # F(x) = 1 - x**-2 = 0.75  ->  x = 2
    assert sample_pareto(1.0, 2.0, 0.75) == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("scale,alpha,u", [(1, 2, 1.0), (1, 2, -0.1), (1, 1.0, 0.5), (1, 0.5, 0.5),
                                           (0, 2, 0.5)])
def test_pareto_domain(scale, alpha, u):
    with pytest.raises(DomainError):
        sample_pareto(scale, alpha, u)


def test_pareto_empirical_mean():
    u = rng(2024).random(100_000)
    draws = np.array([sample_pareto(1.0, 3.0, float(x)) for x in u])
    assert draws.min() >= 1.0
    # analytic mean alpha * scale / (alpha - 1)
    assert abs(draws.mean() - 1.5) / 1.5 < 0.05


def test_degenerate_probabilities():
    sim = generate(small(p_deliver_los=1.0, p_deliver_nlos=0.0))
    for rec, cond in sim.labeled():
        assert rec.delivered == (cond is Condition.LOS)


def test_record_count():
    sim = generate(small(duration_s=60.0))
    assert len(sim.records) == 600
    assert [r.send_time_ms for r in sim.records[:3]] == [0, 100, 200]


def test_record_count_floor():
    assert len(generate(small(duration_s=1.25, packet_period_ms=100)).records) == 12


def test_intervals_tile_and_alternate():
    sim = generate(small(duration_s=300.0))
    ivs = sim.intervals
    assert ivs[0].start_ms == 0 and ivs[-1].end_ms == 300_000
    assert ivs[0].condition is Condition.LOS
    for a, b in zip(ivs, ivs[1:]):
        assert a.end_ms == b.start_ms
        assert a.condition is not b.condition


def test_episode_durations_at_least_scale():
    cfg = small(duration_s=2000.0)
    ivs = generate(cfg).intervals
    for iv in ivs[:-1]:  # last one is truncated
        scale = cfg.pareto_scale_los_s if iv.condition is Condition.LOS else cfg.pareto_scale_nlos_s
        assert iv.end_ms - iv.start_ms >= scale * 1000


def test_intervals_reconstructed_from_labels():
    cfg = small(duration_s=500.0)
    sim = generate(cfg)
    rebuilt = intervals_from_labels(sim.labeled(), cfg.packet_period_ms, end_ms=500_000)
    assert rebuilt == sim.intervals


def test_determinism_and_seed_sensitivity():
    a, b = generate(small(seed=11)), generate(small(seed=11))
    assert a == b
    assert generate(small(seed=12)).records != a.records


def test_los_pdr_law_of_large_numbers():
    cfg = small(p_deliver_los=0.95, p_deliver_nlos=0.5, duration_s=10_000.0)
    sim = generate(cfg)
    assert len(sim.records) >= 100_000
    los = [r.delivered for r, c in sim.labeled() if c is Condition.LOS]
    assert abs(np.mean(los) - 0.95) <= 0.01


@pytest.mark.parametrize("field,value,invariant", [
    ("p_deliver_los", 0.3, "p_deliver_los > p_deliver_nlos"),
    ("pareto_alpha_los", 1.0, "pareto_alpha_los > 1"),
    ("pareto_alpha_nlos", 0.9, "pareto_alpha_nlos > 1"),
    ("p_deliver_nlos", -0.1, "p_deliver_nlos in [0, 1]"),
    ("packet_period_ms", 0, "packet_period_ms is a positive integer"),
    ("duration_s", 0.0, "duration_s > 0"),
])
def test_config_errors_name_invariant(field, value, invariant):
    with pytest.raises(ConfigError) as err:
        generate(small(**{field: value}))
    assert err.value.invariant == invariant


@pytest.mark.parametrize("scenario,slots", [("highway", 16425), ("suburban", 16033), ("urban", 27439)])
def test_preset_sample_counts(scenario, slots):
    cfg = preset(scenario)
    assert cfg.n_slots == slots
    assert cfg.packet_period_ms == 100
    cfg.validate()


def test_highway_has_smallest_delivery_gap():
    gaps = {s: preset(s).p_deliver_los - preset(s).p_deliver_nlos for s in ("highway", "suburban", "urban")}
    assert min(gaps, key=gaps.get) == "highway"


def test_custom_has_no_preset():
    with pytest.raises(ConfigError):
        preset("custom")


def test_config_dict_roundtrip():
    cfg = preset("urban", seed=99)
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


def test_packet_logs_match_back_to_records():
    sim = generate(small(duration_s=30.0))
    tx, rx = packet_logs(sim)
    assert match_logs(tx, rx, 0) == sim.records
