"""Config-driven experiment orchestration and report emission.

An experiment runs attack -> transfer -> detect over one corpus and writes
six artifacts into the output directory:

    transfer_report.json   full transfer structure, one block per attack
    transfer_report.csv    one row per (attack, target model)
    channel_stats.csv      channel-extreme aggregates, clean and per attack
    zero_counts.csv        exact-0.0 pixel counts, clean and per attack
    detections.jsonl       one verdict per (detector, image) pair
    saturation_sweep.csv   FGSM epsilon versus observed max L-infinity

Every report is deterministic for a fixed (config, seed): same bytes, any
worker count.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

from ..attacks import (
    CwL2Config,
    CwLinfConfig,
    FgsmConfig,
    PgdConfig,
    attack_batch,
)
from ..detectors import (
    ZERO_COUNT_DEFAULT,
    corpus_channel_table,
    disagreement_detect,
    gap_detect,
    shift_detect,
    verdict_json,
    zero_detect,
)
from ..errors import ConfigError
from ..nn.build import build_model
from ..nn.serialize import load_model, save_model
from ..nn.train import TrainConfig, train
from ..preprocess import apply, get_clip_policy, get_spec, invert
from ..tensor import channel_stats
from .corpus import load_corpus
from .transfer import (
    TargetTransfer,
    TransferReport,
    avg_linf,
    select_eligible,
    transfer_predictions,
)

__all__ = [
    "DetectorSpec",
    "ExperimentConfig",
    "load_config",
    "run_experiment",
    "saturation_sweep",
    "load_train_config",
    "train_from_config",
    "REPORT_FILES",
]

REPORT_FILES = (
    "transfer_report.json",
    "transfer_report.csv",
    "channel_stats.csv",
    "zero_counts.csv",
    "detections.jsonl",
    "saturation_sweep.csv",
)

_SWEEP_DEFAULT = (10.0, 20.0, 40.0, 80.0, 150.0, 160.0)


@dataclass(frozen=True)
class DetectorSpec:
    kind: str
    epsilon: float = 8.0
    channel: int = 0
    threshold: float = float(ZERO_COUNT_DEFAULT)


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: str
    source_model: str
    target_models: tuple
    attacks: tuple  # (name, attack config) pairs
    detectors: tuple  # DetectorSpec
    clip_policy: object
    seed: int
    out_dir: str
    sweep_epsilons: tuple
    base_dir: str


def _want(obj, key, kinds, pointer, required=True, default=None):
    if key not in obj:
        if required:
            raise ConfigError(pointer, f"missing required key {key!r}")
        return default
    value = obj[key]
    if kinds is not None and not isinstance(value, kinds):
        kind_names = (
            kinds.__name__ if isinstance(kinds, type)
            else "/".join(k.__name__ for k in kinds)
        )
        raise ConfigError(f"{pointer}/{key}", f"expected {kind_names}, got {type(value).__name__}")
    if isinstance(value, bool) and kinds is not None and bool not in (
        kinds if isinstance(kinds, tuple) else (kinds,)
    ):
        raise ConfigError(f"{pointer}/{key}", f"expected number, got bool")
    return value


_NUMBER = (int, float)


def _attack_from_entry(entry, i, default_policy, default_seed):
    pointer = f"/attacks/{i}"
    if not isinstance(entry, dict):
        raise ConfigError(pointer, f"expected object, got {type(entry).__name__}")
    kind = _want(entry, "type", str, pointer)
    policy_name = _want(entry, "clip_policy", str, pointer, required=False)
    try:
        policy = get_clip_policy(policy_name) if policy_name else default_policy
    except ValueError as exc:
        raise ConfigError(f"{pointer}/clip_policy", str(exc)) from None
    seed = _want(entry, "seed", int, pointer, required=False, default=default_seed)
    known = {
        "fgsm": ("epsilon", "targeted", "target_label"),
        "pgd": ("epsilon", "alpha", "steps", "random_starts", "targeted", "target_label"),
        "cw-l2": ("kappa", "search_steps", "iterations", "learning_rate", "initial_c",
                  "target_label"),
        "cw-linf": ("iterations", "initial_tau", "decay", "c", "learning_rate"),
    }
    if kind not in known:
        raise ConfigError(f"{pointer}/type", f"unknown attack type {kind!r}")
    for key in entry:
        if key not in known[kind] + ("type", "clip_policy", "seed"):
            raise ConfigError(f"{pointer}/{key}", f"unknown key for attack type {kind!r}")
    try:
        if kind == "fgsm":
            cfg = FgsmConfig(
                epsilon=float(_want(entry, "epsilon", _NUMBER, pointer)),
                targeted=_want(entry, "targeted", bool, pointer, required=False, default=False),
                target_label=_want(entry, "target_label", int, pointer, required=False),
                clip_policy=policy,
                seed=seed,
            )
        elif kind == "pgd":
            cfg = PgdConfig(
                epsilon=float(_want(entry, "epsilon", _NUMBER, pointer)),
                alpha=float(_want(entry, "alpha", _NUMBER, pointer)),
                steps=_want(entry, "steps", int, pointer),
                random_starts=_want(entry, "random_starts", int, pointer, required=False, default=0),
                targeted=_want(entry, "targeted", bool, pointer, required=False, default=False),
                target_label=_want(entry, "target_label", int, pointer, required=False),
                clip_policy=policy,
                seed=seed,
            )
        elif kind == "cw-l2":
            cfg = CwL2Config(
                kappa=float(_want(entry, "kappa", _NUMBER, pointer, required=False, default=0.0)),
                search_steps=_want(entry, "search_steps", int, pointer, required=False, default=9),
                iterations=_want(entry, "iterations", int, pointer, required=False, default=1000),
                learning_rate=float(_want(entry, "learning_rate", _NUMBER, pointer,
                                          required=False, default=0.01)),
                initial_c=float(_want(entry, "initial_c", _NUMBER, pointer,
                                      required=False, default=1.0)),
                target_label=_want(entry, "target_label", int, pointer, required=False),
                clip_policy=policy,
                seed=seed,
            )
        else:
            tau = _want(entry, "initial_tau", _NUMBER, pointer, required=False)
            lr = _want(entry, "learning_rate", _NUMBER, pointer, required=False)
            cfg = CwLinfConfig(
                iterations=_want(entry, "iterations", int, pointer, required=False, default=100),
                initial_tau=None if tau is None else float(tau),
                decay=float(_want(entry, "decay", _NUMBER, pointer, required=False, default=0.9)),
                c=float(_want(entry, "c", _NUMBER, pointer, required=False, default=10.0)),
                learning_rate=None if lr is None else float(lr),
                clip_policy=policy,
                seed=seed,
            )
    except ValueError as exc:
        raise ConfigError(pointer, str(exc)) from None
    return kind, cfg


def _describe_attack(kind, cfg) -> str:
    if isinstance(cfg, FgsmConfig):
        mode = "targ" if cfg.targeted else "untarg"
        return f"{mode} fgsm eps={cfg.epsilon:g}"
    if isinstance(cfg, PgdConfig):
        mode = "targ" if cfg.targeted else "untarg"
        return f"{mode} pgd eps={cfg.epsilon:g} alpha={cfg.alpha:g} steps={cfg.steps}"
    if isinstance(cfg, CwL2Config):
        mode = "untarg" if cfg.target_label is None else "targ"
        return f"{mode} cw-l2 kappa={cfg.kappa:g}"
    return f"untarg cw-linf c={cfg.c:g}"


def _detector_from_entry(entry, i, target_count):
    pointer = f"/detectors/{i}"
    if not isinstance(entry, dict):
        raise ConfigError(pointer, f"expected object, got {type(entry).__name__}")
    kind = _want(entry, "type", str, pointer)
    if kind == "gap":
        allowed = ("epsilon",)
    elif kind == "shift":
        allowed = ("epsilon", "channel")
    elif kind == "zero-count":
        allowed = ("threshold",)
    elif kind == "disagreement":
        allowed = ()
        if target_count == 0:
            raise ConfigError(pointer, "disagreement detector needs at least one target model")
    else:
        raise ConfigError(f"{pointer}/type", f"unknown detector type {kind!r}")
    for key in entry:
        if key not in allowed + ("type",):
            raise ConfigError(f"{pointer}/{key}", f"unknown key for detector type {kind!r}")
    epsilon = float(_want(entry, "epsilon", _NUMBER, pointer, required=False, default=8.0))
    channel = _want(entry, "channel", int, pointer, required=False, default=0)
    threshold = float(_want(entry, "threshold", _NUMBER, pointer, required=False,
                            default=float(ZERO_COUNT_DEFAULT)))
    if epsilon < 0:
        raise ConfigError(f"{pointer}/epsilon", "must be >= 0")
    if channel < 0:
        raise ConfigError(f"{pointer}/channel", "must be >= 0")
    return DetectorSpec(kind, epsilon, channel, threshold)


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment config file.

    Validation failures raise ConfigError carrying a JSON-pointer path to
    the offending value.
    """
    path = str(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", f"config root must be an object, got {type(raw).__name__}")
    known = {"corpus", "source_model", "target_models", "attacks", "detectors",
             "clip_policy", "seed", "out_dir", "sweep_epsilons"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"/{key}", "unknown config key")

    corpus = _want(raw, "corpus", str, "")
    source_model = _want(raw, "source_model", str, "")
    out_dir = _want(raw, "out_dir", str, "")
    targets = _want(raw, "target_models", list, "", required=False, default=[])
    for i, t in enumerate(targets):
        if not isinstance(t, str):
            raise ConfigError(f"/target_models/{i}", f"expected string, got {type(t).__name__}")
    seed = _want(raw, "seed", int, "", required=False, default=0)
    policy_name = _want(raw, "clip_policy", str, "", required=False, default="none")
    try:
        policy = get_clip_policy(policy_name)
    except ValueError as exc:
        raise ConfigError("/clip_policy", str(exc)) from None

    attacks = []
    names = []
    entries = _want(raw, "attacks", list, "", required=False, default=[])
    for i, entry in enumerate(entries):
        kind, cfg = _attack_from_entry(entry, i, policy, seed)
        name = _describe_attack(kind, cfg)
        if name in names:
            name = f"{name} #{i}"
        names.append(name)
        attacks.append((name, cfg))

    detectors = []
    entries = _want(raw, "detectors", list, "", required=False, default=[])
    for i, entry in enumerate(entries):
        detectors.append(_detector_from_entry(entry, i, len(targets)))

    sweep = _want(raw, "sweep_epsilons", list, "", required=False, default=list(_SWEEP_DEFAULT))
    for i, eps in enumerate(sweep):
        if isinstance(eps, bool) or not isinstance(eps, _NUMBER) or eps < 0:
            raise ConfigError(f"/sweep_epsilons/{i}", "expected a number >= 0")

    return ExperimentConfig(
        corpus=corpus,
        source_model=source_model,
        target_models=tuple(targets),
        attacks=tuple(attacks),
        detectors=tuple(detectors),
        clip_policy=policy,
        seed=seed,
        out_dir=out_dir,
        sweep_epsilons=tuple(float(e) for e in sweep),
        base_dir=os.path.dirname(os.path.abspath(path)),
    )


def _resolve(base_dir, path):
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def _model_name(path) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def saturation_sweep(model, corpus, epsilons, policy, seed=0, workers=1):
    """Max observed L-infinity perturbation of an FGSM run per epsilon."""
    rows = []
    for eps in epsilons:
        cfg = FgsmConfig(epsilon=float(eps), clip_policy=policy, seed=seed)
        results = attack_batch(model, corpus, cfg, workers=workers)
        records = [b.record for b in results if b.record is not None]
        worst = max((r.linf for r in records), default=None)
        rows.append((float(eps), worst))
    return rows


def _transfer_report(source_name, attack_name, results, targets, targeted):
    records = [b.record for b in results if b.record is not None]
    eligible = select_eligible(records)
    clamped = 0
    per_target = []
    cells = {}
    if eligible:
        for tname, tmodel in targets:
            cells[tname] = transfer_predictions(eligible, tmodel)
        first = next(iter(cells.values()), None)
        if first is not None:
            clamped = sum(1 for _, c in first if c)
        else:
            source_spec = get_spec(eligible[0].adversarial.domain)
            clamped = sum(1 for r in eligible if invert(source_spec, r.adversarial)[1])
    for tname, tmodel in targets:
        if not eligible:
            per_target.append(TargetTransfer(tname, 0, 0, None, None))
            continue
        preds = cells[tname]
        transferred = sum(1 for (p, _), r in zip(preds, eligible) if p != r.true_label)
        hit = None
        if targeted:
            hits = sum(
                1 for (p, _), r in zip(preds, eligible)
                if r.target_label is not None and p == r.target_label
            )
            hit = hits / len(eligible)
        per_target.append(
            TargetTransfer(tname, len(eligible), transferred, transferred / len(eligible), hit)
        )
    return TransferReport(
        source=source_name,
        attack=attack_name,
        records=len(records),
        errors=len(results) - len(records),
        eligible=len(eligible),
        avg_linf_eligible=avg_linf(eligible),
        clamped=clamped,
        targets=tuple(per_target),
    )


def _is_targeted(cfg) -> bool:
    if isinstance(cfg, (FgsmConfig, PgdConfig)):
        return cfg.targeted
    if isinstance(cfg, CwL2Config):
        return cfg.target_label is not None
    return False


def _write_transfer_json(path, cfg, reports):
    doc = {
        "source": _model_name(cfg.source_model),
        "seed": cfg.seed,
        "clip_policy": cfg.clip_policy.kind,
        "avg_linf_population": "eligible",
        "attacks": [
            {
                "attack": rep.attack,
                "records": rep.records,
                "errors": rep.errors,
                "eligible": rep.eligible,
                "avg_linf_eligible": rep.avg_linf_eligible,
                "clamped_on_invert": rep.clamped,
                "targets": [
                    {
                        "target": cell.target,
                        "eligible": cell.eligible,
                        "transferred": cell.transferred,
                        "transfer_rate": cell.rate,
                        "hit_target_rate": cell.hit_target_rate,
                    }
                    for cell in rep.targets
                ],
            }
            for rep in reports
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _write_transfer_csv(path, reports):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([
            "attack", "source", "target", "eligible", "transferred",
            "transfer_rate", "hit_target_rate", "avg_linf_eligible", "clamped_on_invert",
        ])
        for rep in reports:
            for cell in rep.targets:
                writer.writerow([
                    rep.attack, rep.source, cell.target, cell.eligible,
                    cell.transferred, _fmt(cell.rate), _fmt(cell.hit_target_rate),
                    _fmt(rep.avg_linf_eligible), rep.clamped,
                ])


def _write_channel_stats(path, spec, clean_images, attack_images):
    """attack_images: ordered (name, list of ImageTensor) pairs."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([
            "set", "channel", "images",
            "min_of_min", "avg_of_min", "max_of_min", "std_of_min",
            "min_of_max", "avg_of_max", "max_of_max", "std_of_max",
            "limit_lo", "limit_hi",
        ])
        for name, images in [("clean", clean_images)] + list(attack_images):
            if not images:
                continue
            table = corpus_channel_table(images, spec)
            for c in range(len(table.min_of)):
                lo, hi = table.limits[c]
                mn, mx = table.min_of[c], table.max_of[c]
                writer.writerow([
                    name, c, table.image_count,
                    _fmt(mn.minimum), _fmt(mn.average), _fmt(mn.maximum), _fmt(mn.std),
                    _fmt(mx.minimum), _fmt(mx.average), _fmt(mx.maximum), _fmt(mx.std),
                    _fmt(float(lo)), _fmt(float(hi)),
                ])


def _zero_count(img) -> int:
    return sum(channel_stats(img).zero_count)


def _write_zero_counts(path, clean_images, attack_images):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["set", "images", "min_zero_count", "avg_zero_count", "max_zero_count"])

        def row(name, images):
            if not images:
                writer.writerow([name, 0, "-", "-", "-"])
                return
            counts = [_zero_count(img) for img in images]
            writer.writerow([
                name, len(counts), min(counts),
                _fmt(sum(counts) / len(counts)), max(counts),
            ])

        row("clean", clean_images)
        for name, images in attack_images:
            row(name, images)


def _write_detections(path, detectors, source, targets, corpus, clean_pre, attack_records):
    source_spec = get_spec(source.spec_name)
    lines = []

    def run_one(dspec, image_id, pre_img, raw_img):
        if dspec.kind == "gap":
            v = gap_detect(pre_img, source_spec, dspec.epsilon)
        elif dspec.kind == "shift":
            v = shift_detect(pre_img, dspec.channel, dspec.epsilon)
        elif dspec.kind == "zero-count":
            v = zero_detect(pre_img, dspec.threshold)
        else:
            v = disagreement_detect(source, targets[0][1], raw_img)
        lines.append(json.dumps(verdict_json(v, image_id)))

    for dspec in detectors:
        need_raw = dspec.kind == "disagreement"
        for item, pre in zip(corpus, clean_pre):
            run_one(dspec, item.image_id, pre, item.image if need_raw else None)
        for name, results in attack_records:
            for b in results:
                if b.record is None:
                    continue
                raw = invert(source_spec, b.record.adversarial)[0] if need_raw else None
                run_one(dspec, f"{b.image_id}#{name}", b.record.adversarial, raw)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _write_sweep(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epsilon", "max_linf"])
        for eps, worst in rows:
            writer.writerow([_fmt(eps), _fmt(worst)])


def run_experiment(config, out_dir=None, workers=1):
    """Run the full pipeline; returns the list of files written."""
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    corpus = load_corpus(_resolve(cfg.base_dir, cfg.corpus))
    source = load_model(_resolve(cfg.base_dir, cfg.source_model))
    source_name = _model_name(cfg.source_model)
    targets = [
        (_model_name(p), load_model(_resolve(cfg.base_dir, p)))
        for p in cfg.target_models
    ]
    source_spec = get_spec(source.spec_name)

    out = out_dir if out_dir is not None else _resolve(cfg.base_dir, cfg.out_dir)
    os.makedirs(out, exist_ok=True)

    all_results = []
    for name, attack_cfg in cfg.attacks:
        all_results.append((name, attack_batch(source, corpus, attack_cfg, workers=workers)))

    reports = [
        _transfer_report(source_name, name, results, targets, _is_targeted(acfg))
        for (name, acfg), (_, results) in zip(cfg.attacks, all_results)
    ]

    clean_pre = [apply(source_spec, item.image) for item in corpus]
    stat_images = [
        (name, [b.record.adversarial for b in results if b.record is not None])
        for name, results in all_results
    ]
    zero_images = [
        (name, [b.record.adversarial for b in results
                if b.record is not None and b.record.succeeded])
        for name, results in all_results
    ]

    sweep_rows = saturation_sweep(
        source, corpus, cfg.sweep_epsilons, cfg.clip_policy, seed=cfg.seed, workers=workers
    )

    paths = [os.path.join(out, name) for name in REPORT_FILES]
    _write_transfer_json(paths[0], cfg, reports)
    _write_transfer_csv(paths[1], reports)
    _write_channel_stats(paths[2], source_spec, clean_pre, stat_images)
    _write_zero_counts(paths[3], clean_pre, zero_images)
    _write_detections(paths[4], cfg.detectors, source, targets, corpus, clean_pre, all_results)
    _write_sweep(paths[5], sweep_rows)
    return paths


@dataclass(frozen=True)
class TrainSpec:
    corpus: str
    spec_name: str
    layers: tuple
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int
    base_dir: str


def load_train_config(path) -> TrainSpec:
    path = str(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", f"config root must be an object, got {type(raw).__name__}")
    known = {"corpus", "spec", "layers", "learning_rate", "epochs", "batch_size", "seed"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"/{key}", "unknown config key")
    spec_name = _want(raw, "spec", str, "", required=False, default="identity")
    try:
        get_spec(spec_name)
    except ValueError as exc:
        raise ConfigError("/spec", str(exc)) from None
    layers = _want(raw, "layers", list, "")
    if not layers:
        raise ConfigError("/layers", "needs at least one layer")
    for i, layer in enumerate(layers):
        if not isinstance(layer, dict) or not isinstance(layer.get("type"), str):
            raise ConfigError(f"/layers/{i}", "expected an object with a string 'type'")
    lr = _want(raw, "learning_rate", _NUMBER, "", required=False, default=0.05)
    epochs = _want(raw, "epochs", int, "", required=False, default=1)
    batch = _want(raw, "batch_size", int, "", required=False, default=8)
    seed = _want(raw, "seed", int, "", required=False, default=0)
    try:
        TrainConfig(float(lr), epochs, batch, seed)
    except ValueError as exc:
        raise ConfigError("", str(exc)) from None
    return TrainSpec(
        corpus=_want(raw, "corpus", str, ""),
        spec_name=spec_name,
        layers=tuple(layers),
        learning_rate=float(lr),
        epochs=epochs,
        batch_size=batch,
        seed=seed,
        base_dir=os.path.dirname(os.path.abspath(path)),
    )


def train_from_config(config_path, out_path, seed=None, quiet=False):
    """Build, train, and save a model per a train config; returns the model path."""
    spec = load_train_config(config_path)
    corpus = load_corpus(_resolve(spec.base_dir, spec.corpus))
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    pspec = get_spec(spec.spec_name)
    pre = [(apply(pspec, item.image), item.label) for item in corpus]
    used_seed = spec.seed if seed is None else seed
    try:
        model = build_model(
            spec.layers, pre[0][0].shape, spec_name=pspec.name, seed=used_seed
        )
    except (ValueError, KeyError) as exc:
        raise ConfigError("/layers", str(exc)) from None
    trained = train(
        model, pre,
        TrainConfig(spec.learning_rate, spec.epochs, spec.batch_size, used_seed),
    )
    save_model(trained, out_path)
    return out_path
