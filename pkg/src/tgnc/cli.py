"""Command-line front end.

Subcommands: synth, split, run, evaluate, inspect-embeddings.
Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import build_config
from .data import load_dataset
from .embedding import EmbeddingMatrix
from .errors import ConfigError, DataError, NumericError, TgncError
from .pipeline import RunResult, evaluate, run_pipeline
from .snapshots import TimeWindow, split_windows
from .synth import SynthSpec, write_dataset


def _dataset_paths(data_dir: str) -> tuple[str, str, str]:
    return (
        os.path.join(data_dir, "users.csv"),
        os.path.join(data_dir, "posts.csv"),
        os.path.join(data_dir, "edges.csv"),
    )


def _load_truth(path: str) -> dict[str, int]:
    if not os.path.exists(path):
        raise DataError(f"truth file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    labels = payload["labels"] if isinstance(payload, dict) and "labels" in payload else payload
    out: dict[str, int] = {}
    for user, text in labels.items():
        if text not in ("safe", "risky"):
            raise DataError(f"truth label for {user} must be safe/risky, got {text!r}")
        out[user] = 0 if text == "safe" else 1
    return out


def _write_predictions(path: str, result: RunResult) -> None:
    lines = ["user_id,final_label,score_risky,score_safe,snapshot_labels"]
    names = {0: "safe", 1: "risky"}
    for user in result.test_users:
        final = result.finals[user]
        ledger = ";".join(f"{i}:{names[lab]}" for i, lab in result.ledgers[user])
        lines.append(
            f"{user},{names[final.label]},{final.score_risky},{final.score_safe},{ledger}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_metrics(path: str, report) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        n_users=args.users,
        risky_fraction=args.risky_fraction,
        n_posts=args.posts,
        span_start=args.span_start,
        span_length=args.span_length,
        homophily=args.homophily,
        vocab_size=args.vocab_size,
        token_bias=args.token_bias,
        tokens_per_post=args.tokens_per_post,
        risky_center_lat=args.risky_center[0],
        risky_center_lon=args.risky_center[1],
        safe_center_lat=args.safe_center[0],
        safe_center_lon=args.safe_center[1],
        cluster_spread_deg=args.cluster_spread,
        drift_fraction=args.drift_fraction,
        unlabeled_fraction=args.unlabeled_fraction,
        edges_per_user=args.edges_per_user,
        seed=args.seed,
    )
    paths = write_dataset(spec, args.out)
    print(json.dumps(paths, indent=2, sort_keys=True))
    return 0


def _cmd_split(args) -> int:
    users, posts, edges = _dataset_paths(args.data)
    dataset = load_dataset(users, posts, edges)
    windows = split_windows(dataset.posts, args.snapshots, args.overlap)
    print(json.dumps([w.to_dict() for w in windows], indent=2))
    return 0


def _run_overrides(args) -> dict:
    return {
        "snapshots": args.snapshots,
        "overlap": args.overlap,
        "voting": args.voting,
        "smoothing": args.smoothing,
        "baseline": args.baseline,
        "seed": args.seed,
        "jobs": args.jobs,
        "stacking_holdout": args.stacking_holdout,
        "k_r": args.k_r,
        "k_s": args.k_s,
        "walks_per_node": args.walks_per_node,
        "walk_length": args.walk_length,
        "sg_window": args.sg_window,
        "sg_epochs": args.sg_epochs,
    }


def _cmd_run(args) -> int:
    cfg = build_config(args.config, _run_overrides(args))
    users, posts, edges = _dataset_paths(args.data)
    dataset = load_dataset(users, posts, edges)
    truth = _load_truth(args.truth) if args.truth else None
    windows = None
    if args.windows_file:
        with open(args.windows_file, "r", encoding="utf-8") as fh:
            windows = [TimeWindow.from_dict(d) for d in json.load(fh)]
    result = run_pipeline(dataset, cfg, truth=truth, windows=windows)
    os.makedirs(args.out, exist_ok=True)
    predictions_path = os.path.join(args.out, "predictions.csv")
    _write_predictions(predictions_path, result)
    print(f"predictions: {predictions_path}")
    if result.metrics is not None:
        metrics_path = os.path.join(args.out, "metrics.json")
        _write_metrics(metrics_path, result.metrics)
        print(f"metrics: {metrics_path}")
        print(json.dumps(result.metrics.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_evaluate(args) -> int:
    truth = _load_truth(args.truth)
    predicted: dict[str, int] = {}
    with open(args.predictions, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            u_col = header.index("user_id")
            l_col = header.index("final_label")
        except ValueError:
            raise DataError(f"{args.predictions}: missing user_id/final_label columns") from None
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) <= max(u_col, l_col):
                continue
            predicted[parts[u_col]] = 1 if parts[l_col] == "risky" else 0
    missing = sorted(set(predicted) - set(truth))
    if missing:
        raise DataError(f"truth labels missing for predicted users: {missing[:5]}")
    report = evaluate(predicted, {u: truth[u] for u in predicted})
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_inspect_embeddings(args) -> int:
    matrix = EmbeddingMatrix.load_binary(args.file)
    if args.text:
        matrix.save_text(args.text)
        print(f"wrote text format: {args.text}")
        return 0
    norms = [float((matrix.vectors[i] ** 2).sum()) ** 0.5 for i in range(len(matrix))]
    print(json.dumps({
        "rows": len(matrix),
        "dim": matrix.dim,
        "min_norm": min(norms) if norms else 0.0,
        "max_norm": max(norms) if norms else 0.0,
        "first_ids": matrix.ids[:5],
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgnc",
        description="Temporal multi-view node classification over social-network snapshots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset with planted class signal")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--users", type=int, default=600)
    p.add_argument("--risky-fraction", type=float, default=0.4)
    p.add_argument("--posts", type=int, default=18000)
    p.add_argument("--span-start", type=int, default=1_500_000_000)
    p.add_argument("--span-length", type=int, default=10_000_000)
    p.add_argument("--homophily", type=float, default=0.9)
    p.add_argument("--vocab-size", type=int, default=400)
    p.add_argument("--token-bias", type=float, default=0.85)
    p.add_argument("--tokens-per-post", type=int, default=8)
    p.add_argument("--risky-center", type=float, nargs=2, default=[34.0, 12.0],
                   metavar=("LAT", "LON"))
    p.add_argument("--safe-center", type=float, nargs=2, default=[52.0, 40.0],
                   metavar=("LAT", "LON"))
    p.add_argument("--cluster-spread", type=float, default=1.0)
    p.add_argument("--drift-fraction", type=float, default=0.0)
    p.add_argument("--unlabeled-fraction", type=float, default=0.25)
    p.add_argument("--edges-per-user", type=int, default=4)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("split", help="emit time windows as JSON")
    p.add_argument("--data", required=True, help="directory with users/posts/edges CSVs")
    p.add_argument("--snapshots", type=int, default=5)
    p.add_argument("--overlap", type=float, default=0.25)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("run", help="full train/predict/vote/evaluate pipeline")
    p.add_argument("--data", required=True, help="directory with users/posts/edges CSVs")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--truth", default=None, help="truth JSON for evaluating test users")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--windows-file", default=None, help="manual window override JSON")
    p.add_argument("--snapshots", type=int, default=None)
    p.add_argument("--overlap", type=float, default=None)
    p.add_argument("--voting", choices=("uniform", "linear", "quadratic"), default=None)
    p.add_argument("--smoothing", type=lambda s: s.lower() in ("1", "true", "on", "yes"),
                   default=None, metavar="BOOL")
    p.add_argument("--baseline", choices=("merged",), default=None)
    p.add_argument("--stacking-holdout", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--k-r", dest="k_r", type=int, default=None)
    p.add_argument("--k-s", dest="k_s", type=int, default=None)
    p.add_argument("--walks-per-node", type=int, default=None)
    p.add_argument("--walk-length", type=int, default=None)
    p.add_argument("--sg-window", type=int, default=None)
    p.add_argument("--sg-epochs", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("evaluate", help="score a predictions CSV against truth labels")
    p.add_argument("--predictions", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("inspect-embeddings", help="summarize or convert an embedding file")
    p.add_argument("--file", required=True)
    p.add_argument("--text", default=None, help="write word2vec-style text format here")
    p.set_defaults(func=_cmd_inspect_embeddings)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except TgncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
