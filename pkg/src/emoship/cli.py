"""Command-line entry points: replay, eval, energy, pilot, train-head, selftest.

All reports are plain text or CSV; every command is deterministic given
identical inputs and --seed.  Exit codes: 0 ok, 2 input error, 3 provider
error (fatal at startup only).
"""

from __future__ import annotations

import argparse
import importlib.resources
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import config as config_mod
from .archive import TensorArchive, load_tensor_archive
from .config import Config, load_config
from .core import EmotionLabel, NON_NEUTRAL_EMOTIONS
from .dataio import load_manifest, read_records, write_records
from .embedding import EmbeddingStore
from .energy import (PowerProfile, UsageLedger, battery_life_h, energy_wh,
                     record_everything_life_h)
from .errors import (DataError, EmoshipError, InputError, ProtocolError,
                     ProviderUnavailableError)
from .eyefeat import MockExtractor, PassthroughExtractor, TriggerModel
from .fusion import FusionHead, train_head
from .metrics import (ConfusionMatrix, load_pilot_csv, macro_metrics,
                      multiclass_accuracy, pilot_derive, pilot_summary,
                      profile_type)
from .pipeline import PipelineModels
from . import pipeline as pipeline_mod
from .providers import make_provider
from .roiselect import select_candidates

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROVIDER = 3


def _config_epilog() -> str:
    lines = ["configuration keys (file/env/--set override, 'key = value'):"]
    for key, value in sorted(config_mod.DEFAULTS.items()):
        lines.append(f"  {key} (default: {value!r})")
    lines.append("env: EMOSHIP_CONFIG names a default config file")
    return "\n".join(lines)


def _build_config(args) -> Config:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise InputError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    return load_config(getattr(args, "config", None), overrides)


def _default_embeddings() -> EmbeddingStore:
    path = importlib.resources.files("emoship").joinpath("data/embeddings_small.txt")
    with importlib.resources.as_file(path) as p:
        return EmbeddingStore.load(p)


def _load_models(archive_path: str, cfg: Config, seed: int,
                 use_mock_extractor: bool) -> PipelineModels:
    archive = load_tensor_archive(archive_path)
    trigger = TriggerModel.from_archive(archive, theta=cfg["trigger.theta"])
    head = FusionHead.from_archive(
        archive, d_vis=cfg["fusion.d_vis"], d_eye=cfg["fusion.d_eye"],
        r_max=cfg["fusion.r_max"])
    if use_mock_extractor:
        extractor = MockExtractor(dim=cfg["fusion.d_eye"] - 2, seed=seed)
    else:
        extractor = PassthroughExtractor()
    return PipelineModels(trigger=trigger, head=head, extractor=extractor)


def _fmt(x: float) -> str:
    return repr(float(x))


# -- commands ---------------------------------------------------------------

def cmd_replay(args) -> int:
    cfg = _build_config(args)
    manifest = load_manifest(args.manifest)
    for key, value in manifest.config_overrides.items():
        cfg.set(key, value)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    use_mock = not (manifest.frames and manifest.frames[0].eye.feature is not None)
    models = _load_models(args.models, cfg, args.seed, use_mock)
    store = (EmbeddingStore.load(args.embeddings) if args.embeddings
             else _default_embeddings())
    provider = make_provider(args.provider, sidecar_dir=manifest.sidecar_dir,
                             timeout_s=cfg["provider.timeout_s"],
                             d_vis=cfg["fusion.d_vis"])
    try:
        records, ledger, diagnostics, is_points = pipeline_mod.run(
            manifest, models, provider, store, cfg)
    finally:
        provider.close()
    write_records(records, out_dir / "records.jsonl")
    (out_dir / "ledger.txt").write_text(ledger.to_text(), encoding="utf-8")
    (out_dir / "diagnostics.txt").write_text(diagnostics.to_text(), encoding="utf-8")
    with open(out_dir / "is_series.csv", "w", encoding="utf-8", newline="") as f:
        f.write("t_ms,influential_score\n")
        for t, score in is_points:
            f.write(f"{t},{_fmt(score)}\n")
    print(f"replay: {len(records)} record(s), "
          f"{diagnostics.frames} frame(s) -> {out_dir}")
    return EXIT_OK


def cmd_eval(args) -> int:
    records = read_records(args.records)
    truth_lines = [ln for ln in Path(args.truth).read_text(encoding="utf-8").splitlines()
                   if ln.strip()]
    if not truth_lines:
        raise InputError(f"{args.truth}: empty truth file")
    try:
        truth = [EmotionLabel(int(ln.strip())) for ln in truth_lines]
    except ValueError as exc:
        raise InputError(f"{args.truth}: bad label: {exc}") from exc
    if any(lab.is_neutral for lab in truth):
        raise InputError("truth labels must be non-neutral (codes 1..6)")
    pred = [r.emotion for r in records]
    if len(pred) != len(truth):
        raise InputError(
            f"misaligned inputs: {len(pred)} records vs {len(truth)} truth labels")
    precision, recall, accuracy = macro_metrics(truth, pred)
    plain_acc = multiclass_accuracy(truth, pred)
    matrix = ConfusionMatrix.build(truth, pred)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix.to_csv(out_dir / "confusion.csv")
    report = [
        f"samples = {len(truth)}",
        f"macro_precision = {_fmt(precision)}",
        f"macro_recall = {_fmt(recall)}",
        f"macro_accuracy = {_fmt(accuracy)}",
        f"multiclass_accuracy = {_fmt(plain_acc)}",
    ]
    text = "\n".join(report) + "\n"
    (out_dir / "eval.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def cmd_energy(args) -> int:
    profile = (PowerProfile.load(args.profile) if args.profile
               else PowerProfile.paper_defaults())
    if args.ledger:
        ledger = UsageLedger.from_text(
            Path(args.ledger).read_text(encoding="utf-8"))
        if ledger.t_always_on_ms == 0:
            raise InputError("ledger has zero always-on time")
        duty_neye = ledger.t_neye_ms / ledger.t_always_on_ms
        duty_capture = ledger.t_captured_ms / ledger.t_always_on_ms
        consumed = energy_wh(ledger, profile)
        print(f"consumed_wh = {_fmt(consumed)}")
    else:
        try:
            duty_neye, duty_capture = (float(v) for v in args.duties.split(","))
        except (AttributeError, ValueError) as exc:
            raise InputError(f"--duties expects 'neye,capture', got {args.duties!r}") from exc
    life = battery_life_h(profile, duty_neye, duty_capture)
    always = record_everything_life_h(profile)
    ratio = life / always
    print(f"duty_neye = {_fmt(duty_neye)}")
    print(f"duty_capture = {_fmt(duty_capture)}")
    print(f"emoship_hours = {_fmt(life)} (rounded: {life:.1f})")
    print(f"record_everything_hours = {_fmt(always)} (rounded: {always:.1f})")
    print(f"improvement_ratio = {_fmt(ratio)} (rounded: {ratio:.1f}X)")
    return EXIT_OK


def cmd_pilot(args) -> int:
    rows = load_pilot_csv(args.csv)
    print("participant,precision,recall")
    for row in rows:
        precision, recall = pilot_derive(row)
        p = "undefined" if precision is None else f"{100 * precision:.1f}%"
        r = "undefined" if recall is None else f"{100 * recall:.1f}%"
        print(f"{row.participant},{p},{r}")
    summary = pilot_summary(rows)
    print(f"mean_precision = {100 * summary.mean_precision:.1f}%")
    print(f"mean_recall = {100 * summary.mean_recall:.1f}%")
    print(f"unweighted_precision = {100 * summary.unweighted_precision:.1f}%")
    print(f"unweighted_recall = {100 * summary.unweighted_recall:.1f}%")
    print(f"total_always_on_min = {summary.total_always_on:.1f}")
    print(f"total_neye_min = {summary.total_neye:.1f}")
    print(f"total_capture_min = {summary.total_capture:.1f}")
    print(f"reduction_neye = {100 * summary.reduction_neye:.1f}%")
    print(f"reduction_capture = {100 * summary.reduction_capture:.1f}%")
    if args.positive is not None and args.negative is not None:
        counts = {EmotionLabel.HAPPINESS: args.positive,
                  EmotionLabel.SADNESS: args.negative}
        kind, pr, nr = profile_type(counts)
        print(f"profile = {kind} (Pr={pr:.3f}, Nr={nr:.3f})")
    return EXIT_OK


def cmd_train_head(args) -> int:
    from .eyefeat import extract_eye_feature
    from .providers import MockProvider, fetch_regions

    cfg = _build_config(args)
    manifest = load_manifest(args.manifest)
    for key, value in manifest.config_overrides.items():
        cfg.set(key, value)
    if manifest.sidecar_dir is None:
        raise InputError("train-head needs a manifest with a sidecar directory")
    use_mock = not (manifest.frames and manifest.frames[0].eye.feature is not None)
    extractor = (MockExtractor(dim=cfg["fusion.d_eye"] - 2, seed=args.seed)
                 if use_mock else PassthroughExtractor())
    provider = MockProvider(manifest.sidecar_dir, d_vis=cfg["fusion.d_vis"])
    dataset = []
    for entry in manifest.frames:
        if entry.label is None or entry.label.is_neutral:
            continue
        regions = fetch_regions(entry.scene, provider, cfg["fusion.d_vis"])
        if not regions:
            continue
        cands = select_candidates(regions, entry.eye.gaze,
                                  frame_id=entry.scene.frame_id,
                                  max_candidates=cfg["roi.max_candidates"])
        dataset.append((extract_eye_feature(entry.eye, extractor), cands,
                        entry.label))
    if not dataset:
        raise InputError("no labeled non-neutral frames to train on")
    if args.models_in:
        archive = load_tensor_archive(args.models_in)
        head = FusionHead.from_archive(archive, d_vis=cfg["fusion.d_vis"],
                                       d_eye=cfg["fusion.d_eye"],
                                       r_max=cfg["fusion.r_max"])
    else:
        head = FusionHead.random(
            d_vis=cfg["fusion.d_vis"], d_eye=cfg["fusion.d_eye"],
            r_max=cfg["fusion.r_max"], se_reduction=cfg["fusion.se_reduction"],
            seed=cfg["train.seed"])
    trained = train_head(dataset, head, lr=cfg["train.lr"],
                         epochs=cfg["train.epochs"], batch_size=cfg["train.batch"],
                         seed=cfg["train.seed"], optimizer=args.optimizer)
    out = trained.to_archive()
    if args.models_in:  # carry the trigger tensors through unchanged
        source = load_tensor_archive(args.models_in)
        for name in source.names():
            if name not in out:
                out.add(name, source.get(name))
    out.save(args.out)
    print(f"train-head: {len(dataset)} sample(s) -> {args.out}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok:
            failures += 1

    archive = TensorArchive()
    archive.add("w", np.arange(4.0).reshape(2, 2))
    check("tensor archive round-trip",
          TensorArchive.load_bytes(archive.save_bytes()).save_bytes()
          == archive.save_bytes())

    from .fusion import influential_score
    u = np.full(260, 0.5)
    check("uniform gate scores 0.5", influential_score(u) == 0.5)

    profile = PowerProfile.paper_defaults()
    life = battery_life_h(profile, 0.132, 0.054)
    check("battery life near 5.5 h", abs(life - 5.45) < 0.01)
    check("record-everything near 1.5 h",
          abs(record_everything_life_h(profile) - 1.533) < 0.01)
    return EXIT_OK if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emoship",
        description="Deterministic gaze-driven emotion pipeline tools",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="single config override (repeatable)")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("replay", help="replay a manifest into records/ledger")
    add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--models", required=True, help="tensor archive path")
    p.add_argument("--provider", default="mock",
                   help="mock | exec:CMD | http:URL | transcript:PATH")
    p.add_argument("--embeddings", help="embedding table path")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("eval", help="score records against a truth label file")
    add_common(p)
    p.add_argument("--records", required=True)
    p.add_argument("--truth", required=True,
                   help="one emotion code (1..6) per line, aligned to records")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("energy", help="battery life report from ledger or duties")
    add_common(p)
    p.add_argument("--ledger", help="ledger.txt from a replay")
    p.add_argument("--duties", help="NEYE,CAPTURE duty factors in [0,1]")
    p.add_argument("--profile", help="power profile file (paper defaults if omitted)")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("pilot", help="pilot-study analytics from a CSV table")
    add_common(p)
    p.add_argument("--csv", required=True)
    p.add_argument("--positive", type=int, help="total positive moments (typing)")
    p.add_argument("--negative", type=int, help="total negative moments (typing)")
    p.set_defaults(func=cmd_pilot)

    p = sub.add_parser("train-head", help="train the fusion head on a labeled manifest")
    add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--models-in", help="archive to initialize from")
    p.add_argument("--optimizer", choices=["sgd", "adam"], default="adam")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_head)

    p = sub.add_parser("selftest", help="quick internal consistency checks")
    add_common(p)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProviderUnavailableError, ProtocolError) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (DataError, InputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmoshipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
