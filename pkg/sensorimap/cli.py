from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from sensorimap.arm.kinematics import Normalizer, babble, read_babble_csv, write_babble_csv
from sensorimap.core.config import get_settings
from sensorimap.core.exceptions import ConfigurationError, SensorimapError
from sensorimap.core.logging import configure_logging, get_logger
from sensorimap.harness.evaluation import evaluate
from sensorimap.harness.experiment import ExperimentConfig, load_experiment_config
from sensorimap.harness.export import export_heatmap, export_report, export_trace, load_report
from sensorimap.harness.scenario import (
    SEED_BRIDGE_BABBLE,
    SEED_TRAIN_BABBLE,
    fresh_bridge,
    run_scenario,
    stage,
    train_maps,
)
from sensorimap.harness.snapshot import describe_snapshot, load_snapshot, save_snapshot
from sensorimap.learning.bridge import AssociativeBridge
from sensorimap.learning.model import SensorimotorModel
from sensorimap.maps.models import GridSpec


logger = get_logger(__name__)


def _overrides(args: argparse.Namespace) -> Dict[str, object]:
    values: Dict[str, object] = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
        values[key] = value
    for flag, key in (("seed", "seed"), ("grid", "grid_sizes"), ("iters", "total_iters"), ("variant", "variant")):
        value = getattr(args, flag, None)
        if value is not None:
            values[key] = value
    return values


def _config(args: argparse.Namespace) -> ExperimentConfig:
    with stage("config"):
        return load_experiment_config(args.config, _overrides(args))


def _print(payload: object) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_babble(args: argparse.Namespace) -> None:
    cfg = _config(args)
    arm = cfg.arm()
    seed = cfg.effective_test_seed if args.kind == "test" else cfg.seed + SEED_TRAIN_BABBLE
    n = args.n or (cfg.test_samples if args.kind == "test" else cfg.train_samples)
    with stage("babble"):
        out = write_babble_csv(babble(arm, n, seed), args.out)
    _print({"samples": n, "seed": seed, "path": str(out)})


def _single_grid(cfg: ExperimentConfig) -> GridSpec:
    with stage("config"):
        if len(cfg.grid_sizes) != 1:
            raise ConfigurationError(f"train writes one snapshot; pass a single grid size, got {cfg.grid_sizes}")
        return cfg.grids()[0]


def cmd_train(args: argparse.Namespace) -> None:
    cfg = _config(args)
    arm = cfg.arm()
    spec = _single_grid(cfg)
    normalizer = Normalizer.from_arm(arm)
    with stage("babble"):
        data = (
            read_babble_csv(args.data, normalizer)
            if args.data
            else babble(arm, cfg.train_samples, cfg.seed + SEED_TRAIN_BABBLE, normalizer)
        )
    with stage("train_maps"):
        motor, motor_trace, sensory, sensory_trace = train_maps(cfg, spec, data, cfg.seed)
    with stage("export"):
        out = Path(args.out)
        model = SensorimotorModel(
            motor=motor,
            sensory=sensory,
            bridge=AssociativeBridge.zeros(spec.size, spec.size, eta=cfg.eta_init),
            normalizer=normalizer,
        )
        save_snapshot(model, out)
        export_trace(motor_trace, out.with_name(out.stem + "_trace_motor.csv"))
        export_trace(sensory_trace, out.with_name(out.stem + "_trace_sensory.csv"))
    _print({"snapshot": str(out), "grid": spec.label, "variant": cfg.map_variant, "iters": cfg.total_iters})


def cmd_bridge(args: argparse.Namespace) -> None:
    cfg = _config(args)
    with stage("load"):
        model = load_snapshot(args.snapshot)
    with stage("babble"):
        pairs = (
            read_babble_csv(args.data, model.normalizer)
            if args.data
            else babble(cfg.arm(), cfg.bridge_samples, cfg.seed + SEED_BRIDGE_BABBLE, model.normalizer)
        )
    with stage("train_bridge"):
        bridge = fresh_bridge(cfg, model.motor, model.sensory, pairs)
    with stage("export"):
        out = save_snapshot(
            SensorimotorModel(motor=model.motor, sensory=model.sensory, bridge=bridge, normalizer=model.normalizer),
            args.out or args.snapshot,
        )
    _print({"snapshot": str(out), "samples": len(pairs)})


def cmd_eval(args: argparse.Namespace) -> None:
    cfg = _config(args)
    with stage("load"):
        model = load_snapshot(args.snapshot)
    arm = cfg.arm()
    with stage("babble"):
        tests = (
            read_babble_csv(args.data, model.normalizer)
            if args.data
            else babble(arm, cfg.test_samples, cfg.effective_test_seed, model.normalizer)
        )
    with stage("evaluate"):
        report = evaluate(model, arm, tests, cfg.query_radius, cfg.query_mode)
    with stage("export"):
        export_report(report, args.out)
    _print({"report": str(args.out), "grid": report.grid, "mean(max)": report.table_row()})


def cmd_heatmap(args: argparse.Namespace) -> None:
    with stage("heatmap"):
        out = export_heatmap(load_report(args.report), args.out, args.side)
    _print({"heatmap": str(out), "side": args.side})


def cmd_scenario(args: argparse.Namespace) -> None:
    cfg = _config(args)
    results = run_scenario(cfg, args.out or get_settings().output_dir)
    _print(results)


def cmd_snapshot(args: argparse.Namespace) -> None:
    with stage("snapshot"):
        _print(describe_snapshot(args.path))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="KEY=VALUE experiment config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key (repeatable)")
    common.add_argument("--seed", type=int)
    common.add_argument("--grid", help="square grid side(s), comma-separated")
    common.add_argument("--iters", type=int, help="map training iterations")
    common.add_argument("--variant", choices=["som", "vdsom"])

    parser = argparse.ArgumentParser(prog="sensorimap", description="Sensorimotor SOM/VDSOM maps for a 2-link arm")
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("babble", parents=[common], help="write a motor-babbling dataset as CSV")
    p.add_argument("--kind", choices=["train", "test"], default="train")
    p.add_argument("--n", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_babble)

    p = sub.add_parser("train", parents=[common], help="train motor and sensory maps into a snapshot")
    p.add_argument("--data", help="babble CSV to train on instead of fresh babbling")
    p.add_argument("--out", required=True, help="snapshot path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bridge", parents=[common], help="train the connections of a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--data", help="babble CSV of (joint, task) pairs")
    p.add_argument("--out", help="output snapshot (defaults to overwriting --snapshot)")
    p.set_defaults(func=cmd_bridge)

    p = sub.add_parser("eval", parents=[common], help="evaluate a snapshot on a test set")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--data", help="babble CSV test set")
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("heatmap", help="export a per-node error grid from a report")
    p.add_argument("--report", required=True)
    p.add_argument("--side", choices=["motor", "sensory"], default="motor")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("scenario", parents=[common], help="run a full reproduction scenario")
    p.add_argument("--out", help="output directory (defaults to OUTPUT_DIR)")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("snapshot", help="describe a snapshot file")
    p.add_argument("path")
    p.set_defaults(func=cmd_snapshot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)
    logger.debug("command=%s", args.command)
    try:
        args.func(args)
    except SensorimapError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0
