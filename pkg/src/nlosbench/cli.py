"""Command line entry point: ``nlosbench <command> ...``.

Exit codes: 0 ok, 2 usage or config error, 3 data error, 4 SVM training did
not converge (diagnostics are still written).
"""

from __future__ import annotations

import argparse
import dataclasses
import glob
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, pipeline
from ._io import atomic_write_json, atomic_write_text, dumps_json
from .errors import ConfigError, DataError, NlosBenchError
from .evaluation import (
    METRICS,
    CvReport,
    ModelParams,
    compute_metrics,
    cross_validate,
    fit_model,
    robustness_experiment,
)
from .features import extract, format_samples, parse_samples, to_arrays
from .learn import SvmModel, model_from_dict, predict_labels
from .report import render, table_rows
from .simgen import Scenario, ScenarioConfig, generate, packet_logs
from .trace import (
    Side,
    format_delivery,
    format_labels,
    format_trace,
    label_records,
    match_logs,
    parse_delivery,
    parse_labels,
    parse_trace,
)

logger = logging.getLogger("nlosbench")

EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGED = 2, 3, 4
PRESETS = ("highway", "suburban", "urban")
REPORT_EXT = {"table": "txt", "csv": "csv", "json": "json"}


class UsageError(NlosBenchError):
    pass


class Run:
    """Collects the outputs of one command and writes its manifest."""

    def __init__(self, args: argparse.Namespace, argv: list[str]):
        self.args = args
        self.argv = argv
        self.out_dir = Path(args.out_dir)
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.started = time.perf_counter()

    def write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        atomic_write_text(path, text)
        self.outputs.append(str(path))
        return path

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, dumps_json(obj))

    def read(self, path: str):
        self.inputs.append(str(path))
        return open(path, encoding="utf-8")

    def finish(self) -> None:
        config = {k: v for k, v in vars(self.args).items() if k != "func"}
        manifest = {
            "command": self.args.command,
            "argv": self.argv,
            "config": config,
            "seed": getattr(self.args, "seed", None),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "tool_version": __version__,
            "wall_clock_s": round(time.perf_counter() - self.started, 3),
        }
        atomic_write_json(self.out_dir / "manifest.json", manifest)


def _model_params(args) -> ModelParams:
    return ModelParams(
        var_smoothing=args.var_smoothing, c=args.c, kernel=args.kernel, gamma=args.gamma,
        tol=args.tol, max_passes=args.max_passes,
    )


def _models(args) -> tuple[str, ...]:
    return ("nb", "svm") if args.model == "both" else (args.model,)


def _sim_overrides(args) -> dict:
    return dict(
        p_deliver_los=args.p_los, p_deliver_nlos=args.p_nlos,
        pareto_scale_los_s=args.scale_los, pareto_alpha_los=args.alpha_los,
        pareto_scale_nlos_s=args.scale_nlos, pareto_alpha_nlos=args.alpha_nlos,
        packet_period_ms=args.period_ms, duration_s=args.duration_s,
    )


def _config_for(scenario: str | None, args) -> ScenarioConfig:
    overrides = _sim_overrides(args)
    if scenario is not None:
        return pipeline.scenario_config(scenario, args.seed, **overrides)
    missing = [f for f in ("p_los", "p_nlos", "duration_s") if getattr(args, f) is None]
    if missing:
        raise UsageError(
            "give --scenario, or explicit --p-los, --p-nlos and --duration-s "
            f"(missing: {', '.join('--' + m.replace('_', '-') for m in missing)})"
        )
    base = pipeline.scenario_config("highway", args.seed)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return dataclasses.replace(base, scenario=Scenario.CUSTOM, **overrides).validate()


def _scenario_configs(args) -> list[ScenarioConfig]:
    names = PRESETS if args.scenario == "all" else (args.scenario,)
    return [_config_for(n, args) for n in names]


def _datasets(args, run: Run) -> list[tuple[str, tuple[np.ndarray, np.ndarray]]]:
    """Either the --samples file(s) or freshly simulated presets."""
    if args.samples:
        out = []
        for path in args.samples:
            with run.read(path) as fh:
                data = to_arrays(parse_samples(fh))
            out.append((args.tag or Path(path).stem, data))
        return out
    if not args.scenario:
        raise UsageError("give --samples or --scenario")
    return [(cfg.scenario.value, to_arrays(pipeline.simulate_samples(cfg)))
            for cfg in _scenario_configs(args)]


def cmd_simulate(args, run: Run) -> int:
    cfg = _config_for(args.scenario, args)
    sim = generate(cfg)
    run.write_text("delivery.csv", format_delivery(sim.labeled()))
    run.write_text("labels.csv", format_labels(sim.intervals))
    run.write_json("config.json", cfg.to_dict())
    if args.emit_trace:
        tx, rx = packet_logs(sim)
        run.write_text("trace.csv", format_trace(tx + rx))
    n_nlos = sum(iv.end_ms - iv.start_ms for iv in sim.intervals if iv.condition.value == "nlos")
    print(f"simulated {cfg.scenario.value}: {len(sim.records)} slots, "
          f"{len(sim.intervals)} episodes, NLoS share {n_nlos / (sim.intervals[-1].end_ms):.3f}")
    return 0


def cmd_featurize(args, run: Run) -> int:
    labels = None
    if args.labels:
        with run.read(args.labels) as fh:
            labels = parse_labels(fh)
    if args.trace:
        with run.read(args.trace) as fh:
            entries = parse_trace(fh)
        tx = [e for e in entries if e.side is Side.TX]
        rx = [e for e in entries if e.side is Side.RX]
        records = match_logs(tx, rx, args.clock_offset_ms)
        conditions = [None] * len(records)
    elif args.delivery:
        with run.read(args.delivery) as fh:
            rows = parse_delivery(fh)
        records = [r for r, _ in rows]
        conditions = [c for _, c in rows]
    else:
        raise UsageError("give --delivery or --trace")

    if labels is not None:
        labeled, coverage = label_records(records, labels)
        uncovered = coverage.uncovered
    elif all(c is not None for c in conditions):
        labeled, uncovered = list(zip(records, conditions)), 0
    else:
        raise DataError("records carry no condition; pass --labels")

    samples = extract(labeled, args.period_ms)
    run.write_text("samples.csv", format_samples(samples))
    nlos = sum(s.label.value == "nlos" for s in samples)
    print(f"featurized {len(records)} slots -> {len(samples)} samples "
          f"({nlos} NLoS, {uncovered} slots outside label intervals)")
    return 0


def cmd_train(args, run: Run) -> int:
    with run.read(args.samples) as fh:
        X, y = to_arrays(parse_samples(fh))
    params = _model_params(args)
    code = 0
    for kind in _models(args):
        model = fit_model(kind, X, y, params)
        run.write_json(f"model_{kind}.json", model.to_dict())
        if isinstance(model, SvmModel):
            print(f"svm: {len(model.alphas)} support vectors, "
                  f"{model.diagnostics['iterations']} SMO iterations, "
                  f"KKT gap {model.diagnostics['kkt_gap']:.2e}")
            if not model.converged:
                code = EXIT_NONCONVERGED
        else:
            print(f"nb: priors LoS={model.prior[0]:.4f} NLoS={model.prior[1]:.4f}")
    return code


def cmd_evaluate(args, run: Run) -> int:
    with run.read(args.model) as fh:
        try:
            model = model_from_dict(json.load(fh))
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"cannot load model: {exc}") from None
    with run.read(args.samples) as fh:
        X, y = to_arrays(parse_samples(fh))
    dim = model.n_features
    if dim != X.shape[1]:
        raise DataError(f"model expects {dim} features, samples have {X.shape[1]}")
    report = compute_metrics(y, predict_labels(model, X))
    run.write_json("metrics.json", report.to_dict())
    print("  ".join(f"{m}={getattr(report, m)!r}" if not isinstance(getattr(report, m), float)
                    else f"{m}={getattr(report, m):.4f}" for m in METRICS))
    return 0


def cmd_crossval(args, run: Run) -> int:
    params = _model_params(args)
    reports: list[CvReport] = []
    for tag, data in _datasets(args, run):
        for kind in _models(args):
            r = cross_validate(data, kind, args.folds, pipeline.fold_seed(args.seed),
                               shuffle=not args.no_shuffle, scenario=tag, params=params,
                               workers=args.workers)
            run.write_json(f"cv_{tag}_{kind}.json", r.to_dict())
            reports.append(r)
    rows = table_rows(reports)
    run.write_text(f"table_i.{REPORT_EXT[args.format]}", render(rows, args.format))
    print(f"{args.folds}-fold CV ({'temporal blocks' if args.no_shuffle else 'shuffled'})")
    print(render(rows, "table"), end="")
    return EXIT_NONCONVERGED if any(r.nonconverged for r in reports) else 0


def cmd_robustness(args, run: Run) -> int:
    params = _model_params(args)
    lines = ["scenario,model,step,training_fraction,accuracy"]
    code = 0
    for tag, data in _datasets(args, run):
        for kind in _models(args):
            c = robustness_experiment(data, kind, pipeline.robustness_seed(args.seed),
                                      scenario=tag, params=params, workers=args.workers)
            run.write_json(f"robustness_{tag}_{kind}.json", c.to_dict())
            for j, (f, a) in enumerate(zip(c.fractions, c.accuracies)):
                lines.append(f"{tag},{kind},{j + 1},{f!r},{a!r}")
            print(f"{tag:<9} {kind:<4} " + " ".join(
                f"{a:.3f}" if isinstance(a, float) else "  -  " for a in c.accuracies))
            if c.nonconverged:
                code = EXIT_NONCONVERGED
    run.write_text("robustness.csv", "\n".join(lines) + "\n")
    return code


def cmd_report(args, run: Run) -> int:
    paths = sorted(glob.glob(os.path.join(args.cv_dir, "cv_*.json")))
    if not paths:
        raise DataError(f"no cv_*.json files in {args.cv_dir}")
    reports = []
    for p in paths:
        with run.read(p) as fh:
            reports.append(CvReport.from_dict(json.load(fh)))
    rows = table_rows(reports)
    run.write_text(f"table_i.{REPORT_EXT[args.format]}", render(rows, args.format))
    print(render(rows, "table"), end="")
    return 0


def cmd_rerun(args, run: Run | None) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = list(manifest["argv"])
    if args.out_dir:
        i = argv.index("--out-dir")
        argv[i + 1] = args.out_dir
    return main(argv)


def _add_sim_overrides(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("simulation overrides")
    g.add_argument("--p-los", type=float)
    g.add_argument("--p-nlos", type=float)
    g.add_argument("--scale-los", type=float, help="LoS episode Pareto scale (s)")
    g.add_argument("--alpha-los", type=float)
    g.add_argument("--scale-nlos", type=float, help="NLoS episode Pareto scale (s)")
    g.add_argument("--alpha-nlos", type=float)
    g.add_argument("--period-ms", type=int)
    g.add_argument("--duration-s", type=float)


def _add_model_params(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model parameters")
    g.add_argument("--var-smoothing", type=float, default=1e-9)
    g.add_argument("--c", type=float, default=1.0)
    g.add_argument("--kernel", choices=["rbf", "linear"], default="rbf")
    g.add_argument("--gamma", type=float, default=None, help="default: 1/(3 * mean feature variance)")
    g.add_argument("--tol", type=float, default=1e-3)
    g.add_argument("--max-passes", type=int, default=10)


def _add_study_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", nargs="+", help="samples CSV file(s)")
    p.add_argument("--tag", help="scenario tag for --samples input (default: file stem)")
    p.add_argument("--scenario", choices=[*PRESETS, "all"], help="simulate preset(s) instead")
    p.add_argument("--model", choices=["nb", "svm", "both"], default="both")
    p.add_argument("--workers", type=int, default=1, help="parallel fold processes")
    _add_sim_overrides(p)
    _add_model_params(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlosbench", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        if name != "rerun":
            p.add_argument("--seed", type=int, default=42)
            p.add_argument("--out-dir", required=True)
        return p

    p = command("simulate", cmd_simulate, "generate a labeled synthetic delivery trace")
    p.add_argument("--scenario", choices=PRESETS)
    p.add_argument("--emit-trace", action="store_true", help="also write tx/rx packet logs")
    _add_sim_overrides(p)

    p = command("featurize", cmd_featurize, "label a delivery timeline and extract PDR features")
    p.add_argument("--delivery", help="delivery CSV")
    p.add_argument("--trace", help="tx/rx packet-log CSV (matched by seq)")
    p.add_argument("--labels", help="label-interval CSV")
    p.add_argument("--clock-offset-ms", type=int, default=0)
    p.add_argument("--period-ms", type=int, default=100)

    p = command("train", cmd_train, "train NB and/or SVM on a samples CSV")
    p.add_argument("--samples", required=True)
    p.add_argument("--model", choices=["nb", "svm", "both"], default="both")
    _add_model_params(p)

    p = command("evaluate", cmd_evaluate, "score a trained model on a samples CSV")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--samples", required=True)

    p = command("crossval", cmd_crossval, "k-fold cross-validation with a Table-I summary")
    _add_study_inputs(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--no-shuffle", action="store_true", help="temporal-block folds")
    p.add_argument("--format", choices=list(REPORT_EXT), default="table")

    p = command("robustness", cmd_robustness, "accuracy versus training-set size")
    _add_study_inputs(p)

    p = command("report", cmd_report, "render cv_*.json files as a Table-I summary")
    p.add_argument("--cv-dir", required=True)
    p.add_argument("--format", choices=list(REPORT_EXT), default="table")

    p = command("rerun", cmd_rerun, "repeat a command from its manifest.json")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", help="write to this directory instead")
    return ap


def _setup_logging() -> None:
    level = os.environ.get("NLOSBENCH_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "rerun":
        return cmd_rerun(args, None)
    run = Run(args, argv)
    try:
        code = args.func(args, run)
    except (UsageError, ConfigError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
