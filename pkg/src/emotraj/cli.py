"""Command-line entry point: ``emotraj <subcommand> ...``.

Exit codes: 0 on success, 1 on a fatal error (bad config, unreadable file,
id mismatch; nothing is written), 2 when some records failed (the good
ones are still written and the failures are listed on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from functools import partial
from typing import Optional

from . import __version__
from .batch import (RecordError, atomic_write, dumps_csv, dumps_jsonl, parallel_map, read_csv,
                    read_jsonl)
from .config import CONFIG_ENV, RunConfig, load_config
from .emotion import (EmotionConfig, IdfTable, VadVector, build_idf, label_command_detailed,
                      load_label_map, load_lexicon, load_stopwords)
from .errors import EmotrajError, IdMismatch
from .preference import (AugmentedCommandSet, CommandVariant, DpoConfig, build_pair, dpo_loss,
                         reward_margin)
from .spatial_labels import (Detection3D, DirectionConfig, RawBBox, depth_target, direction_class,
                             filter_detections, normalize_bbox)
from .stats import AlignmentTable, build_alignment_table
from .traj_features import FEATURE_NAMES, extract_features
from .traj_metrics import DISTANCE_METRICS, evaluate_multi_gt, pa_column


class Fatal(Exception):
    pass


def _emit(text: str, output: Optional[str], config: Optional[RunConfig] = None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    atomic_write(output, text)
    if config is not None:
        meta = {"tool": "emotraj", "version": __version__, "config": config.provenance()}
        atomic_write(output + ".config.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _report(errors: list[RecordError]) -> int:
    for err in errors:
        print(f"error: {err}", file=sys.stderr)
    if errors:
        print(f"{len(errors)} record(s) failed", file=sys.stderr)
        return 2
    return 0


def _run(worker, records, jobs):
    """Apply ``worker`` to ``(lineno, record)`` pairs; split successes and failures."""
    results = parallel_map(worker, records, jobs)
    good, bad = [], []
    for (lineno, rec), (ok, payload) in zip(records, results):
        if ok:
            good.append(payload)
        else:
            bad.append(RecordError(lineno, rec.get("id"), payload))
    return good, bad


def _guard(fn, item):
    lineno, rec = item
    try:
        return True, fn(rec)
    except (EmotrajError, KeyError, TypeError, ValueError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        return False, msg


# --- vad-label ---------------------------------------------------------------

@dataclass(frozen=True)
class _VadContext:
    lexicon: dict
    label_map: dict
    idf: IdfTable
    config: EmotionConfig


def _vad_one(ctx: _VadContext, rec: dict) -> dict:
    out = label_command_detailed(rec["command"], rec["scores"], ctx.lexicon, ctx.idf,
                                 ctx.label_map, ctx.config)
    return {"id": rec.get("id"), "vad": list(out.vad), "e_goe": list(out.e_goe),
            "e_words": list(out.e_words)}


def cmd_vad_label(args, cfg: RunConfig) -> int:
    lexicon = load_lexicon(args.lexicon)
    label_map = load_label_map(args.label_map)
    stop = load_stopwords(args.stopwords) if args.stopwords else frozenset()
    records, errors = read_jsonl(args.input)
    corpus_path = args.corpus
    if corpus_path:
        with open(corpus_path, encoding="utf-8") as fh:
            corpus = [line.strip() for line in fh if line.strip()]
    else:
        corpus = [r["command"] for _, r in records if isinstance(r.get("command"), str)]
    idf = build_idf(corpus, stop) if corpus else IdfTable({}, 0)
    ecfg = EmotionConfig(alpha=cfg.alpha, beta_ex=cfg.beta_ex, neutral=VadVector(*cfg.neutral),
                         top_k=cfg.top_k, min_score=cfg.min_score, stopwords=stop)
    ctx = _VadContext(lexicon, label_map, idf, ecfg)
    good, bad = _run(partial(_guard, partial(_vad_one, ctx)), records, cfg.jobs)
    _emit(dumps_jsonl(good), args.output, cfg)
    return _report(sorted(errors + bad, key=lambda e: e.line))


# --- traj-eval ---------------------------------------------------------------

def _eval_one(cfg: RunConfig, rec: dict) -> dict:
    gts = rec["gts"] if "gts" in rec else [rec["gt"]]
    res = evaluate_multi_gt(rec["pred"], gts, cfg.pa_gates, cfg.aggregate, cfg.pa_mode, cfg.resample)
    return {"id": rec.get("id"), **res.as_row(cfg.pa_gates)}


def _join_pred_gt(pred_path, gt_path):
    preds, errs = read_jsonl(pred_path)
    gts, errs2 = read_jsonl(gt_path)
    gt_by_id = {r.get("id"): r for _, r in gts}
    pred_ids = {r.get("id") for _, r in preds}
    missing = pred_ids.symmetric_difference(gt_by_id)
    if missing:
        raise IdMismatch("prediction and ground-truth ids differ", missing)
    joined = []
    for lineno, rec in preds:
        g = gt_by_id[rec.get("id")]
        merged = {"id": rec.get("id"), "pred": rec.get("pred", rec.get("points"))}
        merged["gts"] = g["gts"] if "gts" in g else [g.get("gt", g.get("points"))]
        joined.append((lineno, merged))
    return joined, errs + errs2


def cmd_traj_eval(args, cfg: RunConfig) -> int:
    if args.pred or args.gt:
        if not (args.pred and args.gt):
            raise Fatal("--pred and --gt must be given together")
        records, errors = _join_pred_gt(args.pred, args.gt)
    elif args.input:
        records, errors = read_jsonl(args.input)
    else:
        raise Fatal("give an input file or --pred/--gt")
    good, bad = _run(partial(_guard, partial(_eval_one, cfg)), records, cfg.jobs)
    columns = ["id", *DISTANCE_METRICS, *(pa_column(g) for g in cfg.pa_gates)]
    rows = list(good)
    if good:
        mean = {"id": "mean"}
        for c in columns[1:]:
            mean[c] = sum(r[c] for r in good) / len(good)
        rows.append(mean)
    _emit(dumps_csv(rows, columns), args.output, cfg)
    return _report(sorted(errors + bad, key=lambda e: e.line))


# --- traj-features -----------------------------------------------------------

def _traj_field(rec: dict):
    for key in ("traj", "points", "trajectory", "pred"):
        if key in rec:
            return rec[key]
    raise KeyError("traj")


def _features_one(rec: dict) -> dict:
    return {"id": rec.get("id"), **extract_features(_traj_field(rec)).as_dict()}


def cmd_traj_features(args, cfg: RunConfig) -> int:
    records, errors = read_jsonl(args.input)
    good, bad = _run(partial(_guard, _features_one), records, cfg.jobs)
    _emit(dumps_csv(good, ["id", *FEATURE_NAMES]), args.output, cfg)
    return _report(sorted(errors + bad, key=lambda e: e.line))


# --- build-pairs / dpo-score -------------------------------------------------

def _parse_set(rec: dict) -> AugmentedCommandSet:
    orig = rec["original"]
    return AugmentedCommandSet(
        id=rec.get("id"),
        original=CommandVariant(orig.get("command", ""), VadVector.checked(orig["vad"])),
        variants=tuple(CommandVariant(v.get("command", ""), VadVector.checked(v["vad"]))
                       for v in rec["variants"]),
    )


def _pair_one(rec: dict) -> dict:
    cset = _parse_set(rec)
    rejected = {int(k): v for k, v in (rec.get("rejected_trajs") or {}).items()}
    pair = build_pair(cset, rec.get("gt_traj"), rejected)
    out = {"id": pair.id, "k_neg": pair.k_neg, "vad_deviation": pair.vad_deviation,
           "negative_command": pair.negative_command, "preferred": pair.preferred,
           "rejected": pair.rejected}
    if "logp_preferred" in rec and "logp_rejected" in rec:
        out["logp_preferred"] = float(rec["logp_preferred"])
        out["logp_rejected"] = float(rec["logp_rejected"])
    return out


def _with_mean(rows):
    if rows:
        rows = rows + [{"id": "mean", "margin": sum(r["margin"] for r in rows) / len(rows),
                        "loss": sum(r["loss"] for r in rows) / len(rows)}]
    return rows


def cmd_build_pairs(args, cfg: RunConfig) -> int:
    records, errors = read_jsonl(args.input)
    good, bad = _run(partial(_guard, _pair_one), records, cfg.jobs)
    _emit(dumps_jsonl(good), args.output, cfg)
    if args.scores:
        scored = [r for r in good if "logp_preferred" in r]
        rows = [_score_one(cfg.dpo_beta, r) for r in scored]
        atomic_write(args.scores, dumps_csv(_with_mean(rows), ["id", "margin", "loss"]))
    return _report(sorted(errors + bad, key=lambda e: e.line))


def _score_one(beta: float, rec: dict) -> dict:
    w, l = float(rec["logp_preferred"]), float(rec["logp_rejected"])
    return {"id": rec.get("id"), "margin": reward_margin(w, l), "loss": dpo_loss(w, l, DpoConfig(beta))}


def cmd_dpo_score(args, cfg: RunConfig) -> int:
    if args.input.endswith(".csv"):
        records, errors = [(i + 2, r) for i, r in enumerate(read_csv(args.input))], []
    else:
        records, errors = read_jsonl(args.input)
    good, bad = _run(partial(_guard, partial(_score_one, cfg.dpo_beta)), records, cfg.jobs)
    rows = _with_mean(good)
    _emit(dumps_csv(rows, ["id", "margin", "loss"]), args.output, cfg)
    return _report(sorted(errors + bad, key=lambda e: e.line))


# --- spatial-labels ----------------------------------------------------------

def _spatial_one(cfg: RunConfig, rec: dict) -> dict:
    out = {"id": rec.get("id"), "bbox_norm": None, "direction": None, "depth": None}
    if rec.get("bbox") is not None:
        b, img = rec["bbox"], rec["image"]
        raw = RawBBox(float(b["x_min"]), float(b["y_min"]), float(b["x_max"]), float(b["y_max"]),
                      float(img["w"]), float(img["h"]))
        out["bbox_norm"] = normalize_bbox(raw).as_list()
    dets = [Detection3D(d["class"], float(d["centroid"][0]), float(d["centroid"][1]),
                        float(d["confidence"])) for d in rec.get("detections", [])]
    kept, ambiguous = filter_detections(dets, cfg.confidence_threshold)
    out["ambiguous"] = ambiguous
    target = None
    if not ambiguous:
        wanted = rec.get("target_class")
        if wanted is not None:
            target = next((d for d in kept if d.class_name == wanted), None)
        elif len(kept) == 1:
            target = kept[0]
    if target is not None:
        dcfg = DirectionConfig(cfg.ahead_deg, cfg.side_deg)
        out["direction"] = direction_class(target.x, target.y, dcfg).value
        out["depth"] = depth_target((target.x, target.y))
    return out


def cmd_spatial_labels(args, cfg: RunConfig) -> int:
    records, errors = read_jsonl(args.input)
    good, bad = _run(partial(_guard, partial(_spatial_one, cfg)), records, cfg.jobs)
    _emit(dumps_jsonl(good), args.output, cfg)
    return _report(sorted(errors + bad, key=lambda e: e.line))


# --- align-report ------------------------------------------------------------

def _feature_table(path) -> dict:
    table = {}
    for row in read_csv(path):
        table[row["id"]] = {f: (float(row[f]) if row.get(f) not in (None, "") else None)
                            for f in FEATURE_NAMES}
    return table


def _arousal_table(path) -> dict:
    records, errors = read_jsonl(path)
    if errors:
        raise Fatal(f"{path}: {errors[0]}")
    out = {}
    for _, rec in records:
        value = rec["arousal"] if "arousal" in rec else rec["vad"][1]
        out[str(rec["id"])] = float(value)
    return out


def _table_from_correlations(path) -> AlignmentTable:
    data = json.loads(open(path, encoding="utf-8").read())
    return AlignmentTable(
        gt_corr=data["gt"], baseline_corr=data.get("baseline"), model_corr=data["model"],
        baseline_phys=data.get("baseline_phys"), model_phys=data["model_phys"],
    )


def cmd_align_report(args, cfg: RunConfig) -> int:
    if args.correlations:
        table = _table_from_correlations(args.correlations)
    else:
        if not (args.vad and args.gt_features and args.model_features):
            raise Fatal("need --vad, --gt-features and --model-features (or --correlations)")
        baseline = _feature_table(args.baseline_features) if args.baseline_features else None
        table = build_alignment_table(_arousal_table(args.vad), _feature_table(args.gt_features),
                                      _feature_table(args.model_features), baseline, cfg.method)
    sys.stdout.write(table.render())
    if args.output:
        _emit(dumps_csv(table.rows(), ["panel", "metric", *FEATURE_NAMES]), args.output, cfg)
    return 0


# --- parser --------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--jobs", type=int, help="worker processes (output does not depend on it)")
    common.add_argument("--output", "-o", help="output path (default: stdout)")

    parser = argparse.ArgumentParser(prog="emotraj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vad-label", parents=[common], help="continuous VAD labels for commands")
    p.add_argument("input", help="JSON-lines with id, command, scores")
    p.add_argument("--lexicon", required=True, help="term/valence/arousal/dominance TSV")
    p.add_argument("--label-map", required=True, help="JSON object label -> [v, a, d]")
    p.add_argument("--stopwords", help="stop-word file, one word per line")
    p.add_argument("--corpus", help="text file of commands for IDF (default: the input commands)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta-ex", type=float)
    p.add_argument("--top-k", type=int)
    p.set_defaults(func=cmd_vad_label)

    p = sub.add_parser("traj-eval", parents=[common], help="ADE/FDE/Frechet/DTW/SSPD/PA metrics")
    p.add_argument("input", nargs="?", help="JSON-lines with id, pred, gts")
    p.add_argument("--pred", help="JSON-lines with id, pred")
    p.add_argument("--gt", help="JSON-lines with id, gts (or gt)")
    p.add_argument("--pa-gates", type=_floats)
    p.add_argument("--pa-mode", choices=["final", "per-point-mean"])
    p.add_argument("--aggregate", choices=["min", "mean"])
    p.add_argument("--resample", type=int, help="resample both trajectories to N points for ADE/PA")
    p.set_defaults(func=cmd_traj_eval)

    p = sub.add_parser("traj-features", parents=[common], help="shape features per trajectory")
    p.add_argument("input", help="JSON-lines with id, traj")
    p.set_defaults(func=cmd_traj_features)

    p = sub.add_parser("build-pairs", parents=[common], help="pseudo-preference pairs")
    p.add_argument("input", help="JSON-lines augmented command sets")
    p.add_argument("--scores", help="also write a margin/loss CSV for records with log-likelihoods")
    p.add_argument("--dpo-beta", type=float)
    p.set_defaults(func=cmd_build_pairs)

    p = sub.add_parser("dpo-score", parents=[common], help="DPO loss and reward margin")
    p.add_argument("input", help="JSON-lines or CSV with id, logp_preferred, logp_rejected")
    p.add_argument("--dpo-beta", type=float)
    p.set_defaults(func=cmd_dpo_score)

    p = sub.add_parser("spatial-labels", parents=[common], help="bbox/direction/depth targets")
    p.add_argument("input", help="JSON-lines samples with detections, bbox, image")
    p.add_argument("--confidence-threshold", type=float)
    p.add_argument("--ahead-deg", type=float)
    p.add_argument("--side-deg", type=float)
    p.set_defaults(func=cmd_spatial_labels)

    p = sub.add_parser("align-report", parents=[common], help="arousal/geometry alignment tables")
    p.add_argument("--vad", help="vad-label output (or JSON-lines with id, arousal)")
    p.add_argument("--gt-features", help="traj-features CSV of ground-truth trajectories")
    p.add_argument("--model-features", help="traj-features CSV of the evaluated model")
    p.add_argument("--baseline-features", help="traj-features CSV of the baseline model")
    p.add_argument("--method", choices=["spearman", "kendall", "pearson"])
    p.add_argument("--correlations", help="JSON of precomputed correlations; skips feature files")
    p.set_defaults(func=cmd_align_report)
    return parser


_OVERRIDES = ("jobs", "alpha", "beta_ex", "top_k", "pa_gates", "pa_mode", "aggregate", "resample",
              "dpo_beta", "confidence_threshold", "ahead_deg", "side_deg", "method")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in _OVERRIDES if getattr(args, k, None) is not None}
    try:
        cfg = load_config(args.config, overrides)
        return args.func(args, cfg)
    except IdMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        for ident in exc.missing:
            print(f"  missing id: {ident}", file=sys.stderr)
        return 1
    except (Fatal, EmotrajError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
