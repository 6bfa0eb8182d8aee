"""Command-line front end.

Exit codes: 0 success, 1 bad usage or validation failure, 2 I/O or parse
failure. Every file a command writes is printed to stdout, one per line.
"""

from __future__ import annotations

import argparse
import csv
import os
import re
import sys
from dataclasses import replace

from ..attacks import attack_batch
from ..errors import AdvLabError, ConfigError
from ..preprocess import apply, get_spec
from .corpus import load_corpus
from .experiment import (
    DetectorSpec,
    _resolve,
    _write_channel_stats,
    _write_detections,
    _write_sweep,
    _write_transfer_csv,
    _write_transfer_json,
    _write_zero_counts,
    _transfer_report,
    _is_targeted,
    load_config,
    run_experiment,
    saturation_sweep,
    train_from_config,
)
from ..nn.serialize import load_model

__all__ = ["main", "entry"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="advlab", description="Adversarial-attack experiment harness.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, help_text, out_required=False, workers=False, detector=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config JSON path")
        p.add_argument("--out", required=out_required,
                       help="output path" if name == "train" else "output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if workers:
            p.add_argument("--workers", type=int, default=1, help="parallel image workers")
        if detector:
            p.add_argument("--detector", default=None,
                           choices=["gap", "shift", "zero-count", "disagreement"],
                           help="run this single detector instead of the configured list")
            p.add_argument("--epsilon", type=float, default=None,
                           help="detector threshold (count threshold for zero-count)")
            p.add_argument("--channel", type=int, default=None, help="channel for shift")
        return p

    add("train", "train a model from a train config and save it", out_required=True)
    add("attack", "run the configured attacks, write per-record CSVs", workers=True)
    add("detect", "run detectors over the clean corpus, write verdicts", detector=True)
    add("transfer", "run attacks and the transfer stage, write transfer reports", workers=True)
    add("stats", "write channel and zero-count tables for the clean corpus")
    add("sweep", "run the FGSM epsilon sweep, write the saturation table", workers=True)
    add("run", "run the full experiment pipeline", workers=True)
    return parser


def _out_dir(args, cfg):
    out = args.out if args.out else _resolve(cfg.base_dir, cfg.out_dir)
    os.makedirs(out, exist_ok=True)
    return out


def _override_seed(cfg, seed):
    if seed is None:
        return cfg
    attacks = tuple((name, replace(a, seed=seed)) for name, a in cfg.attacks)
    return replace(cfg, seed=seed, attacks=attacks)


def _load_inputs(cfg):
    corpus = load_corpus(_resolve(cfg.base_dir, cfg.corpus))
    source = load_model(_resolve(cfg.base_dir, cfg.source_model))
    targets = [
        (os.path.splitext(os.path.basename(p))[0], load_model(_resolve(cfg.base_dir, p)))
        for p in cfg.target_models
    ]
    return corpus, source, targets


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9.-]+", "_", name).strip("_")


def _cmd_train(args):
    path = train_from_config(args.config, args.out, seed=args.seed)
    print(path)
    return 0


def _cmd_attack(args):
    cfg = _override_seed(load_config(args.config), args.seed)
    corpus, source, _ = _load_inputs(cfg)
    out = _out_dir(args, cfg)
    for name, attack_cfg in cfg.attacks:
        results = attack_batch(source, corpus, attack_cfg, workers=args.workers)
        path = os.path.join(out, f"records_{_safe_name(name)}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([
                "index", "image_id", "true_label", "clean_pred", "adv_pred",
                "linf", "l2", "succeeded", "target_label", "error",
            ])
            for b in results:
                r = b.record
                if r is None:
                    writer.writerow([b.index, b.image_id] + [""] * 7 + [b.error])
                else:
                    writer.writerow([
                        b.index, b.image_id, r.true_label, r.clean_pred, r.adv_pred,
                        repr(r.linf), repr(r.l2), str(r.succeeded).lower(),
                        "" if r.target_label is None else r.target_label, "",
                    ])
        print(path)
    return 0


def _cmd_detect(args):
    cfg = _override_seed(load_config(args.config), args.seed)
    corpus, source, targets = _load_inputs(cfg)
    detectors = cfg.detectors
    if args.detector is not None:
        spec = DetectorSpec(args.detector)
        if args.epsilon is not None:
            if args.detector == "zero-count":
                spec = DetectorSpec(args.detector, threshold=args.epsilon)
            else:
                spec = DetectorSpec(args.detector, epsilon=args.epsilon,
                                    channel=args.channel if args.channel is not None else 0)
        elif args.channel is not None:
            spec = DetectorSpec(args.detector, channel=args.channel)
        if args.detector == "disagreement" and not targets:
            raise ConfigError("/target_models", "disagreement detector needs at least one target model")
        detectors = (spec,)
    out = _out_dir(args, cfg)
    clean_pre = [apply(get_spec(source.spec_name), item.image) for item in corpus]
    path = os.path.join(out, "detections.jsonl")
    _write_detections(path, detectors, source, targets, corpus, clean_pre, [])
    print(path)
    return 0


def _cmd_transfer(args):
    cfg = _override_seed(load_config(args.config), args.seed)
    corpus, source, targets = _load_inputs(cfg)
    out = _out_dir(args, cfg)
    source_name = os.path.splitext(os.path.basename(cfg.source_model))[0]
    reports = []
    for name, attack_cfg in cfg.attacks:
        results = attack_batch(source, corpus, attack_cfg, workers=args.workers)
        reports.append(
            _transfer_report(source_name, name, results, targets, _is_targeted(attack_cfg))
        )
    json_path = os.path.join(out, "transfer_report.json")
    csv_path = os.path.join(out, "transfer_report.csv")
    _write_transfer_json(json_path, cfg, reports)
    _write_transfer_csv(csv_path, reports)
    print(json_path)
    print(csv_path)
    return 0


def _cmd_stats(args):
    cfg = _override_seed(load_config(args.config), args.seed)
    corpus, source, _ = _load_inputs(cfg)
    out = _out_dir(args, cfg)
    spec = get_spec(source.spec_name)
    clean_pre = [apply(spec, item.image) for item in corpus]
    stats_path = os.path.join(out, "channel_stats.csv")
    zero_path = os.path.join(out, "zero_counts.csv")
    _write_channel_stats(stats_path, spec, clean_pre, [])
    _write_zero_counts(zero_path, clean_pre, [])
    print(stats_path)
    print(zero_path)
    return 0


def _cmd_sweep(args):
    cfg = _override_seed(load_config(args.config), args.seed)
    corpus, source, _ = _load_inputs(cfg)
    out = _out_dir(args, cfg)
    rows = saturation_sweep(
        source, corpus, cfg.sweep_epsilons, cfg.clip_policy,
        seed=cfg.seed, workers=args.workers,
    )
    path = os.path.join(out, "saturation_sweep.csv")
    _write_sweep(path, rows)
    print(path)
    return 0


def _cmd_run(args):
    cfg = _override_seed(load_config(args.config), args.seed)
    paths = run_experiment(cfg, out_dir=args.out, workers=args.workers)
    for path in paths:
        print(path)
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "attack": _cmd_attack,
    "detect": _cmd_detect,
    "transfer": _cmd_transfer,
    "stats": _cmd_stats,
    "sweep": _cmd_sweep,
    "run": _cmd_run,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("advlab: a command is required", file=sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"advlab: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"advlab: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"advlab: {exc}", file=sys.stderr)
        return 1
    except (AdvLabError, OSError) as exc:
        print(f"advlab: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
