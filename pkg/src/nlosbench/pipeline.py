"""End-to-end studies over the scenario presets, shared by the CLI and tests."""

from __future__ import annotations

import dataclasses

from .evaluation import CvReport, ModelParams, RobustnessCurve, cross_validate, robustness_experiment
from .features import FeatureSample, extract, to_arrays
from .seeding import derive_seed
from .simgen import Scenario, ScenarioConfig, generate, preset


def scenario_config(scenario: Scenario | str, seed: int, **overrides) -> ScenarioConfig:
    cfg = preset(scenario, seed=seed)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return dataclasses.replace(cfg, **overrides).validate() if overrides else cfg


def simulate_samples(config: ScenarioConfig) -> list[FeatureSample]:
    sim = generate(config)
    return extract(sim.labeled(), config.packet_period_ms)


def fold_seed(seed: int) -> int:
    return derive_seed(seed, "kfold")


def robustness_seed(seed: int) -> int:
    return derive_seed(seed, "robustness")


def crossval_study(
    configs: list[ScenarioConfig],
    models=("nb", "svm"),
    seed: int = 42,
    k: int = 10,
    shuffle: bool = True,
    params: ModelParams = ModelParams(),
    workers: int = 1,
) -> list[CvReport]:
    reports = []
    for cfg in configs:
        data = to_arrays(simulate_samples(cfg))
        for kind in models:
            reports.append(cross_validate(
                data, kind, k, fold_seed(seed), shuffle=shuffle,
                scenario=cfg.scenario.value, params=params, workers=workers,
            ))
    return reports


def robustness_study(
    configs: list[ScenarioConfig],
    models=("nb", "svm"),
    seed: int = 42,
    params: ModelParams = ModelParams(),
    workers: int = 1,
) -> list[RobustnessCurve]:
    curves = []
    for cfg in configs:
        data = to_arrays(simulate_samples(cfg))
        for kind in models:
            curves.append(robustness_experiment(
                data, kind, robustness_seed(seed), scenario=cfg.scenario.value,
                params=params, workers=workers,
            ))
    return curves
