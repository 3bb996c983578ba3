"""Synthetic LoS/NLoS delivery traces from a two-state semi-Markov channel.

The channel alternates LoS and NLoS episodes whose lengths follow Pareto
laws, so episodes have memory (a long-running episode tends to keep going).
Within an episode each packet slot is delivered independently with the
state's delivery probability.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DomainError
from .seeding import U64, rng
from .trace import (
    Condition,
    DeliveryRecord,
    LabelInterval,
    PacketLogEntry,
    Side,
)


class Scenario(str, Enum):
    HIGHWAY = "highway"
    SUBURBAN = "suburban"
    URBAN = "urban"
    CUSTOM = "custom"  # fully user-specified parameters; has no preset


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario
    p_deliver_los: float
    p_deliver_nlos: float
    pareto_scale_los_s: float
    pareto_alpha_los: float
    pareto_scale_nlos_s: float
    pareto_alpha_nlos: float
    packet_period_ms: int = 100
    duration_s: float = 600.0
    seed: int = 0

    def validate(self) -> "ScenarioConfig":
        checks = [
            (0.0 <= self.p_deliver_los <= 1.0, "p_deliver_los in [0, 1]"),
            (0.0 <= self.p_deliver_nlos <= 1.0, "p_deliver_nlos in [0, 1]"),
            (self.p_deliver_los > self.p_deliver_nlos, "p_deliver_los > p_deliver_nlos"),
            (self.pareto_scale_los_s > 0, "pareto_scale_los_s > 0"),
            (self.pareto_scale_nlos_s > 0, "pareto_scale_nlos_s > 0"),
            (self.pareto_alpha_los > 1, "pareto_alpha_los > 1"),
            (self.pareto_alpha_nlos > 1, "pareto_alpha_nlos > 1"),
            (int(self.packet_period_ms) == self.packet_period_ms and self.packet_period_ms > 0,
             "packet_period_ms is a positive integer"),
            (self.duration_s > 0, "duration_s > 0"),
            (isinstance(self.scenario, Scenario), "scenario is a known Scenario"),
            (0 <= int(self.seed) <= U64, "seed is a 64-bit unsigned integer"),
        ]
        for ok, name in checks:
            if not ok:
                raise ConfigError(name)
        return self

    @property
    def n_slots(self) -> int:
        return _n_slots(self.duration_s, self.packet_period_ms)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scenario"] = self.scenario.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        d["scenario"] = Scenario(d["scenario"])
        return cls(**d)


@dataclass(frozen=True)
class SimOutput:
    records: list[DeliveryRecord]
    intervals: list[LabelInterval]
    config_echo: ScenarioConfig

    def labeled(self) -> list[tuple[DeliveryRecord, Condition]]:
        """Pair every record with the condition of the episode it falls in."""
        out = []
        k = 0
        for rec in self.records:
            while not self.intervals[k].contains(rec.send_time_ms):
                k += 1
            out.append((rec, self.intervals[k].condition))
        return out


def _n_slots(duration_s: float, period_ms: int) -> int:
    # round to whole ms first so e.g. 1642.5 s is not lost to float error
    return round(duration_s * 1000) // int(period_ms)


# Calibrated by scripts/calibrate.py (10-fold CV, seed 42) so NB/SVM accuracy
# lands in the 0.92-0.98 band with Highway hardest (smallest delivery gap).
# Durations give 16425 / 16033 / 27439 slots at 100 ms.
_PRESETS = {
    Scenario.HIGHWAY: dict(p_deliver_los=0.95, p_deliver_nlos=0.65, duration_s=1642.5),
    Scenario.SUBURBAN: dict(p_deliver_los=0.97, p_deliver_nlos=0.25, duration_s=1603.3),
    Scenario.URBAN: dict(p_deliver_los=0.97, p_deliver_nlos=0.20, duration_s=2743.9),
}
EPISODE_DEFAULTS = dict(
    pareto_scale_los_s=15.0,
    pareto_alpha_los=1.7,
    pareto_scale_nlos_s=8.0,
    pareto_alpha_nlos=1.9,
)


def preset(scenario: Scenario | str, seed: int = 0) -> ScenarioConfig:
    scenario = Scenario(scenario)
    if scenario not in _PRESETS:
        raise ConfigError(f"scenario {scenario.value!r} has no preset")
    return ScenarioConfig(
        scenario=scenario, packet_period_ms=100, seed=seed, **EPISODE_DEFAULTS, **_PRESETS[scenario]
    ).validate()


def sample_pareto(scale: float, alpha: float, u: float) -> float:
    """Inverse CDF of the Pareto law ``F(x) = 1 - (scale/x)**alpha``."""
    if not 0.0 <= u < 1.0:
        raise DomainError(f"u={u} outside [0, 1)")
    if not alpha > 1.0:
        raise DomainError(f"alpha={alpha} must exceed 1")
    if not scale > 0.0:
        raise DomainError(f"scale={scale} must be positive")
    return scale * (1.0 - u) ** (-1.0 / alpha)


def generate(config: ScenarioConfig) -> SimOutput:
    config.validate()
    period = int(config.packet_period_ms)
    n = config.n_slots
    end_ms = n * period
    if n == 0:
        raise ConfigError("duration_s covers at least one packet period")
    gen = rng(config.seed, "simgen")

    params = {
        Condition.LOS: (config.pareto_scale_los_s, config.pareto_alpha_los),
        Condition.NLOS: (config.pareto_scale_nlos_s, config.pareto_alpha_nlos),
    }
    intervals = []
    state = Condition.LOS
    t = 0
    while t < end_ms:
        scale, alpha = params[state]
        dur_ms = sample_pareto(scale, alpha, float(gen.random())) * 1000.0
        # episodes snap up to whole slots so boundaries fall on send times
        slots = max(1, math.ceil(dur_ms / period - 1e-9))
        stop = min(t + slots * period, end_ms)
        intervals.append(LabelInterval(t, stop, state))
        t = stop
        state = Condition.NLOS if state is Condition.LOS else Condition.LOS

    p = np.empty(n)
    for iv in intervals:
        lo, hi = iv.start_ms // period, iv.end_ms // period
        p[lo:hi] = config.p_deliver_los if iv.condition is Condition.LOS else config.p_deliver_nlos
    delivered = gen.random(n) < p

    records = [DeliveryRecord(i, i * period, bool(delivered[i])) for i in range(n)]
    return SimOutput(records, intervals, config)


def packet_logs(
    sim: SimOutput,
    origin=(31.2304, 121.4737, 4.0),
    speed_mps: float = 13.9,
) -> tuple[list[PacketLogEntry], list[PacketLogEntry]]:
    """Render a simulated run as the sender and receiver packet logs a field test would give.

    Positions are a straight eastbound track at constant speed; only seq and
    timing carry information.
    """
    lat0, lon0, alt = origin
    deg_per_m = 1.0 / (111_320.0 * math.cos(math.radians(lat0)))
    tx, rx = [], []
    for rec in sim.records:
        lon = round(lon0 + speed_mps * rec.send_time_ms / 1000.0 * deg_per_m, 7)
        tx.append(PacketLogEntry(Side.TX, rec.seq, rec.send_time_ms, lat0, lon, alt, speed_mps))
        if rec.delivered:
            rx.append(PacketLogEntry(Side.RX, rec.seq, rec.send_time_ms + 1, lat0, lon, alt, speed_mps))
    return tx, rx
