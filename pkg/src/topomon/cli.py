"""Command-line interface.

Every workflow reads and writes files (networks, profiles, datasets,
graphs); nothing is piped in-process between subcommands, so any run can be
reproduced from its inputs and seed alone. Reports are emitted as plain text
tables or as JSON (--format structured) carrying the same numbers.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import datagen, monitor
from . import profile as profile_mod
from .data import Dataset, fmt_float, load_dataset, save_dataset
from .errors import TopomonError
from .model import load_network, predict
from .monitor import confidence_scores, roc_metrics, selection_score, shift_monitor


def _emit(text_lines, payload, args) -> None:
    if args.format == "structured":
        content = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        content = "\n".join(text_lines) + "\n"
    if args.output:
        Path(args.output).write_text(content, encoding="utf-8")
    else:
        sys.stdout.write(content)


def _num(v):
    return "-" if v is None else fmt_float(v)


def _parse_layers(spec: str | None):
    if spec is None:
        return None
    try:
        return tuple(int(tok) for tok in spec.split(",") if tok.strip())
    except ValueError as exc:
        raise ValueError(f"bad --layers value {spec!r}; expected e.g. '1,2'") from exc


def _parse_shape(spec: str, feature_count: int | None = None):
    if spec:
        try:
            rows, cols = (int(tok) for tok in spec.lower().split("x"))
            return rows, cols
        except ValueError as exc:
            raise ValueError(f"bad --shape value {spec!r}; expected e.g. '28x28'") from exc
    side = math.isqrt(feature_count or 0)
    if feature_count is None or side * side != feature_count:
        raise ValueError(
            f"cannot infer an image shape from {feature_count} features; pass --shape"
        )
    return side, side


# ---------------------------------------------------------------------------
# subcommands


def _cmd_fit(args) -> int:
    net = load_network(args.net)
    data = load_dataset(args.data)
    prof = profile_mod.fit_profile(
        net,
        data.features,
        layers=_parse_layers(args.layers),
        subsample=args.subsample,
        seed=args.seed,
        include_output=args.include_output,
    )
    profile_mod.save_profile(prof, args.output)
    n_fit = int(sum(prof.counts.values()))
    print(
        f"wrote profile to {args.output} "
        f"({n_fit} fitting samples, layers {','.join(map(str, prof.layers))})"
    )
    return 0


def _cmd_score(args) -> int:
    net = load_network(args.net)
    prof = profile_mod.load_profile(args.profile)
    data = load_dataset(args.data)
    reports = profile_mod.score_batch(prof, net, data.features)
    lines = ["index predicted confidence tu"]
    samples = []
    for i, r in enumerate(reports):
        lines.append(f"{i} {r.predicted} {fmt_float(r.confidence)} {fmt_float(r.tu)}")
        samples.append(
            {"index": i, "predicted": r.predicted, "confidence": r.confidence, "tu": r.tu}
        )
    _emit(lines, {"samples": samples}, args)
    return 0


def _cmd_detect_ood(args) -> int:
    net = load_network(args.net)
    prof = profile_mod.load_profile(args.profile)
    in_data = load_dataset(args.data)
    out_data = load_dataset(args.ood_data)
    q = args.quantile

    in_tu = [r.tu for r in profile_mod.score_batch(prof, net, in_data.features)]
    out_tu = [r.tu for r in profile_mod.score_batch(prof, net, out_data.features)]
    tu_report = roc_metrics(
        in_tu, out_tu, "flag_above", q=q, calibration_scores=prof.train_tu
    )
    in_conf = confidence_scores(net, in_data.features)
    out_conf = confidence_scores(net, out_data.features)
    conf_report = roc_metrics(in_conf, out_conf, "flag_below", q=q)

    lines = ["method direction threshold fpr_at_95_tpr auroc"]
    payload = {"quantile": q, "n_in": len(in_data), "n_out": len(out_data), "methods": {}}
    for name, rep in (
        ("confidence_baseline", conf_report),
        ("topological_uncertainty", tu_report),
    ):
        lines.append(
            f"{name} {rep.direction} {fmt_float(rep.threshold)} "
            f"{fmt_float(rep.fpr_at_95_tpr)} {fmt_float(rep.auroc)}"
        )
        payload["methods"][name] = {
            "direction": rep.direction,
            "threshold": rep.threshold,
            "fpr_at_95_tpr": rep.fpr_at_95_tpr,
            "auroc": rep.auroc,
        }
    _emit(lines, payload, args)
    return 0


def _cmd_select_model(args) -> int:
    manifest_path = Path(args.manifest)
    base = manifest_path.parent
    models, ids, accuracies = [], [], []
    for lineno, raw in enumerate(
        manifest_path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(
                f"{manifest_path}:{lineno}: expected '<net> <profile> [accuracy]'"
            )
        models.append(
            (load_network(base / parts[0]), profile_mod.load_profile(base / parts[1]))
        )
        ids.append(parts[0])
        accuracies.append(float(parts[2]) if len(parts) == 3 else None)
    have_acc = all(a is not None for a in accuracies) and accuracies
    data = load_dataset(args.data)
    result = selection_score(
        models, data.features, accuracies if have_acc else None, model_ids=ids
    )

    lines = ["rank model mean_tu accuracy skipped"]
    rows = []
    by_id = {s.model_id: s for s in result.scores}
    for rank, mid in enumerate(result.ranking, start=1):
        s = by_id[mid]
        lines.append(
            f"{rank} {s.model_id} {fmt_float(s.mean_score)} {_num(s.accuracy)} {s.skipped}"
        )
        rows.append(
            {
                "rank": rank,
                "model": s.model_id,
                "mean_tu": s.mean_score,
                "accuracy": s.accuracy,
                "skipped": s.skipped,
            }
        )
    payload = {"ranking": rows, "gap_metric": result.gap_metric}
    if result.gap_metric is not None:
        lines.append(f"gap_metric {fmt_float(result.gap_metric)}")
    _emit(lines, payload, args)
    return 0


def _cmd_monitor_shift(args) -> int:
    net = load_network(args.net)
    prof = profile_mod.load_profile(args.profile)
    data = load_dataset(args.data)
    levels = [float(tok) for tok in args.levels.split(",") if tok.strip()]
    if not levels:
        raise ValueError("--levels must list at least one shift level")
    shape = _parse_shape(args.shape, data.dim)
    if shape[0] * shape[1] != data.dim:
        raise ValueError(f"shape {shape} does not match {data.dim} features")

    batches = []
    level_seeds = np.random.SeedSequence(args.seed).spawn(len(levels))
    for level, level_seed in zip(levels, level_seeds):
        sample_seeds = level_seed.spawn(len(data))
        shifted = np.stack(
            [
                datagen.ShiftSpec(args.shift, level, seed)
                .apply(row.reshape(shape))
                .ravel()
                for row, seed in zip(data.features, sample_seeds)
            ]
        )
        batches.append(
            (level, shifted, data.labels) if data.labeled else (level, shifted)
        )

    summaries = shift_monitor(prof, net, batches)
    lines = ["level mean_tu tu_q10 tu_q90 mean_confidence accuracy"]
    rows = []
    for s in summaries:
        lines.append(
            f"{fmt_float(s.level)} {fmt_float(s.mean_tu)} {fmt_float(s.tu_q10)} "
            f"{fmt_float(s.tu_q90)} {fmt_float(s.mean_confidence)} {_num(s.accuracy)}"
        )
        rows.append(
            {
                "level": s.level,
                "mean_tu": s.mean_tu,
                "tu_q10": s.tu_q10,
                "tu_q90": s.tu_q90,
                "mean_confidence": s.mean_confidence,
                "accuracy": s.accuracy,
                "size": s.size,
            }
        )
    _emit(lines, {"shift": args.shift, "levels": rows}, args)
    return 0


def _parse_centers(spec: str) -> np.ndarray:
    try:
        rows = [
            [float(tok) for tok in group.split(",")]
            for group in spec.split(";")
            if group.strip()
        ]
        return np.asarray(rows, dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"bad --centers value {spec!r}; expected 'x,y;x,y;...'") from exc


def _cmd_gen_data(args) -> int:
    kind = args.kind
    if kind == "fake-graphs":
        if args.vertex_samples is None or args.edge_samples is None:
            raise ValueError("fake-graphs needs --vertex-samples and --edge-samples")
        vertex_samples = [int(v) for v in args.vertex_samples.split(",")]
        edge_samples = [int(v) for v in args.edge_samples.split(",")]
        graphs = datagen.fake_graphs(vertex_samples, edge_samples, args.n, args.seed)
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, g in enumerate(graphs):
            datagen.save_graph(g, out_dir / f"graph{i:04d}.txt")
        print(f"wrote {len(graphs)} graphs to {out_dir}")
        if args.features:
            feats = np.stack([datagen.graph_spectral_features(g) for g in graphs])
            save_dataset(Dataset(feats), args.features)
            print(f"wrote spectral features to {args.features}")
        return 0

    if kind == "two-moons":
        ds = datagen.two_moons(args.n, noise=args.noise, seed=args.seed)
    elif kind == "blobs":
        if args.centers is None:
            raise ValueError("blobs needs --centers 'x,y;x,y;...'")
        ds = datagen.gaussian_blobs(
            args.n, _parse_centers(args.centers), sigma=args.sigma, seed=args.seed
        )
    elif kind == "uniform-images":
        ds = datagen.uniform_images(args.n, _parse_shape(args.shape), seed=args.seed)
    elif kind == "gaussian-images":
        ds = datagen.gaussian_images(
            args.n,
            _parse_shape(args.shape),
            mean=args.mean,
            sigma=args.sigma,
            seed=args.seed,
        )
    else:  # pragma: no cover - argparse choices guard this
        raise ValueError(f"unknown kind {kind!r}")
    save_dataset(ds, args.output)
    print(f"wrote {len(ds)} samples to {args.output}")
    return 0


def _cmd_eval_net(args) -> int:
    net = load_network(args.net)
    data = load_dataset(args.data)
    if not data.labeled:
        raise ValueError("eval-net needs a labeled dataset")
    hits = 0
    confs = []
    for x, y in zip(data.features, data.labels):
        pred, conf = predict(net, x)
        hits += int(pred == int(y))
        confs.append(conf)
    accuracy = hits / len(data)
    mean_conf = float(np.mean(confs))
    lines = [
        "n accuracy mean_confidence",
        f"{len(data)} {fmt_float(accuracy)} {fmt_float(mean_conf)}",
    ]
    payload = {"n": len(data), "accuracy": accuracy, "mean_confidence": mean_conf}
    _emit(lines, payload, args)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topomon",
        description="Monitor trained networks through activation-graph topology.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_report_flags(p):
        p.add_argument("--output", default=None, help="write report here (default stdout)")
        p.add_argument("--format", choices=("text", "structured"), default="text")

    p = sub.add_parser("fit", help="fit a topological profile from training data")
    p.add_argument("--net", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--output", required=True, help="profile file to write")
    p.add_argument("--layers", default=None, help="comma list, e.g. '1,2'")
    p.add_argument("--subsample", type=int, default=None, help="per-class cap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--include-output", action="store_true",
                   help="also profile the final pre-softmax layer")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("score", help="topological uncertainty per sample")
    p.add_argument("--net", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--data", required=True)
    add_report_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("detect-ood", help="compare TU and confidence detectors")
    p.add_argument("--net", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--data", required=True, help="in-distribution dataset")
    p.add_argument("--ood-data", required=True, help="out-of-distribution dataset")
    p.add_argument("--quantile", type=float, default=0.95)
    add_report_flags(p)
    p.set_defaults(func=_cmd_detect_ood)

    p = sub.add_parser("select-model", help="rank candidate models on a batch")
    p.add_argument("--manifest", required=True,
                   help="lines of '<net> <profile> [accuracy]', paths relative to it")
    p.add_argument("--data", required=True)
    add_report_flags(p)
    p.set_defaults(func=_cmd_select_model)

    p = sub.add_parser("monitor-shift", help="TU distribution across shift levels")
    p.add_argument("--net", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--data", required=True, help="base batch (image rows)")
    p.add_argument("--shift", choices=("pixel_corruption", "gaussian_blur"),
                   required=True)
    p.add_argument("--levels", required=True, help="comma list of shift levels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", default="", help="image shape RxC (default: square)")
    add_report_flags(p)
    p.set_defaults(func=_cmd_monitor_shift)

    p = sub.add_parser("gen-data", help="generate synthetic datasets and graphs")
    p.add_argument("--kind", required=True,
                   choices=("two-moons", "blobs", "uniform-images",
                            "gaussian-images", "fake-graphs"))
    p.add_argument("--n", type=int, required=True,
                   help="sample count (graph count for fake-graphs)")
    p.add_argument("--noise", type=float, default=0.1, help="two-moons noise std")
    p.add_argument("--centers", default=None, help="blobs centers 'x,y;x,y;...'")
    p.add_argument("--sigma", type=float, default=0.1,
                   help="blobs/gaussian-images std")
    p.add_argument("--mean", type=float, default=0.5, help="gaussian-images mean")
    p.add_argument("--shape", default="", help="image shape RxC")
    p.add_argument("--vertex-samples", default=None, help="comma list for fake-graphs")
    p.add_argument("--edge-samples", default=None, help="comma list for fake-graphs")
    p.add_argument("--features", default=None,
                   help="also write spectral features of fake graphs here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True,
                   help="dataset file (directory for fake-graphs)")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("eval-net", help="accuracy/confidence summary on labeled data")
    p.add_argument("--net", required=True)
    p.add_argument("--data", required=True)
    add_report_flags(p)
    p.set_defaults(func=_cmd_eval_net)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TopomonError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
