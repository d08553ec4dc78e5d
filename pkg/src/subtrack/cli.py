"""Command-line entry point.

Subcommands:
  train      fit tracker + scaler (+ regressor) on a training file
  infer      health-index curves and RUL estimates from saved artifacts
  benchmark  end-to-end run with metrics report
  synth      generate a synthetic fleet in CMAPSS format

Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dataset, evaluation, persist
from .config import RunConfig
from .errors import DataFormatError, NumericalError, PrognosticsError, ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


_CONFIG_FLAGS = {
    "mode": str,
    "n_regimes": int,
    "subspace_dim": int,
    "delta": float,
    "alpha": float,
    "eta": float,
    "max_epochs": int,
    "rel_tol": float,
    "healthy_cycles": int,
    "tau1": int,
    "tau2": int,
    "beta": float,
    "smoothing": float,
    "seed": int,
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file; flags win")
    for name, typ in _CONFIG_FLAGS.items():
        flag = "--" + name.replace("_", "-")
        if name == "mode":
            p.add_argument(flag, choices=["sst", "sst-lr"], default=None)
        else:
            p.add_argument(flag, type=typ, default=None)
    p.add_argument(
        "--include-settings",
        choices=["auto", "yes", "no"],
        default=None,
        help="track operational settings as features (auto: only when K=1)",
    )


def _build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config is not None:
        values.update(json.loads(Path(args.config).read_text()))
    for name in _CONFIG_FLAGS:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    inc = getattr(args, "include_settings", None)
    if inc is not None:
        values["include_settings"] = None if inc == "auto" else (inc == "yes")
    return RunConfig.from_dict(values)


def _write_train_artifacts(pipe: evaluation.TrainedPipeline, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    persist.save_any_model(pipe.model, out / "model.json")
    (out / "scaler.json").write_text(json.dumps(persist.scaler_to_dict(pipe.scaler)))
    (out / "normalizer.json").write_text(
        json.dumps(persist.normalizer_to_dict(pipe.normalizer))
    )
    if pipe.regressor is not None:
        (out / "regressor.json").write_text(
            json.dumps(persist.regressor_to_dict(pipe.regressor))
        )
    persist.save_config(pipe.config, out / "config.json")
    persist.write_curves_csv(pipe.train_curves, out / "train_curves.csv")
    trace_lines = ["epoch,mean_dist"] + [
        f"{i},{v!r}" for i, v in enumerate(pipe.error_trace)
    ]
    (out / "error_trace.csv").write_text("\n".join(trace_lines) + "\n")


def _load_pipeline(model_dir: Path) -> evaluation.TrainedPipeline:
    for name in ("config.json", "model.json", "scaler.json", "normalizer.json"):
        if not (model_dir / name).exists():
            raise ValidationError(f"missing artifact {model_dir / name}")
    cfg = persist.load_config(model_dir / "config.json")
    regressor = None
    reg_path = model_dir / "regressor.json"
    if reg_path.exists():
        regressor = persist.regressor_from_dict(json.loads(reg_path.read_text()))
    return evaluation.TrainedPipeline(
        config=cfg,
        normalizer=persist.normalizer_from_dict(
            json.loads((model_dir / "normalizer.json").read_text())
        ),
        model=persist.load_any_model(model_dir / "model.json"),
        scaler=persist.scaler_from_dict(
            json.loads((model_dir / "scaler.json").read_text())
        ),
        regressor=regressor,
        train_curves=persist.read_curves_csv(model_dir / "train_curves.csv"),
        error_trace=[],
    )


def cmd_train(args) -> int:
    cfg = _build_config(args)
    train_set = dataset.load_cmapss(args.train)
    pipe = evaluation.train_pipeline(train_set, cfg)
    _write_train_artifacts(pipe, Path(args.out))
    print(f"trained on {len(train_set)} units -> {args.out}")
    return EXIT_OK


def cmd_infer(args) -> int:
    pipe = _load_pipeline(Path(args.model_dir))
    tset = dataset.load_cmapss(args.data)
    curves = evaluation.infer_curves(pipe, tset)
    # units with no valid match (e.g. full-length curves) get an empty row
    # instead of aborting the whole fleet
    estimates = evaluation.estimate_fleet(pipe, curves, skip_unmatched=True)
    truths = None
    if args.rul is not None:
        truths = dataset.load_rul_targets(args.rul, len(tset))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    persist.write_curves_csv(curves, out / "hi_curves.csv")
    persist.write_estimates_csv(
        estimates, truths, out / "rul_estimates.csv", unit_ids=tset.unit_ids
    )
    print(f"inferred {len(curves)} units -> {args.out}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _build_config(args)
    report, pipe, test_curves = evaluation.run_benchmark(
        args.train, args.test, args.rul, cfg
    )
    estimates = evaluation.estimate_fleet(pipe, test_curves)
    truths = [row["truth"] for row in report.rows]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "report.txt").write_text(report.to_text() + "\n")
    persist.write_curves_csv(pipe.train_curves, out / "hi_curves_train.csv")
    persist.write_curves_csv(test_curves, out / "hi_curves.csv")
    persist.write_estimates_csv(estimates, truths, out / "rul_estimates.csv")
    print(report.to_text())
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = dataset.SynthConfig(
        n_units=args.units,
        n_regimes=args.n_regimes or 1,
        subspace_dim=args.subspace_dim or 3,
        noise_std=args.noise_std,
        drift_onset_fraction=args.drift_onset,
        drift_rate=args.drift_rate,
        seed=args.seed or 0,
        min_cycles=args.min_cycles,
        max_cycles=args.max_cycles,
    )
    train_set, test_set, truths, _ = dataset.generate_synthetic(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset.save_cmapss(train_set, out / "train_synth.txt")
    dataset.save_cmapss(test_set, out / "test_synth.txt")
    (out / "RUL_synth.txt").write_text("".join(f"{r}\n" for r in truths))
    print(f"wrote {len(train_set)} train / {len(test_set)} test units -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subtrack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit tracker and scaler on training data")
    p.add_argument("--train", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="HI curves and RUL estimates from artifacts")
    p.add_argument("--model-dir", required=True, type=Path)
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--rul", type=Path, default=None)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("benchmark", help="end-to-end run with metrics report")
    p.add_argument("--train", required=True, type=Path)
    p.add_argument("--test", required=True, type=Path)
    p.add_argument("--rul", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("synth", help="generate a synthetic CMAPSS-format fleet")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--units", type=int, default=50)
    p.add_argument("--n-regimes", type=int, default=1)
    p.add_argument("--subspace-dim", type=int, default=3)
    p.add_argument("--noise-std", type=float, default=0.01)
    p.add_argument("--drift-rate", type=float, default=0.02)
    p.add_argument("--drift-onset", type=float, default=0.5)
    p.add_argument("--min-cycles", type=int, default=150)
    p.add_argument("--max-cycles", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DataFormatError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PrognosticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
