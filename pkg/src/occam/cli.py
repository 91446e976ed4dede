"""Command-line interface.

Commands: score (one embedding/label pair), rank (a zoo manifest), eval
(predicted scores vs ground-truth accuracies), synth (seeded blob datasets),
verify-lda (nearest-center equivalence of a softmax head). All machine output
is deterministic JSON (sorted keys, 17-significant-digit floats); errors are
JSON on stderr. Exit codes: 0 success, 1 malformed input or data error,
2 undefined score.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import jsonio
from .centers import (
    SoftmaxHead,
    compute_centers,
    verify_argmax_equivalence,
    verify_confidence_equality,
)
from .conceptvar import CvConfig, cv_score
from .data import (
    load_dataset,
    load_embeddings,
    load_ground_truth,
    load_score_map,
    load_vector,
    save_embeddings,
    save_labels,
)
from .distances import DEFAULT_BLOCK_ROWS, DEFAULT_MEMORY_CAP, DistanceMetric
from .errors import OccamError, UndefinedScore
from .interclass import Aggregation, IntScoreConfig, int_score
from .ranking import load_manifest, rank_zoo
from .ranktau import evaluate_ranking
from .synth import BlobSpec, generate_blobs


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on bad flags, never argparse's 2
        raise _UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--threads", type=int, default=0, help="worker threads, 0 = auto"
    )
    parser.add_argument(
        "--memory-cap",
        type=int,
        default=DEFAULT_MEMORY_CAP,
        help="allocation cap in bytes for distance buffers",
    )
    parser.add_argument(
        "--block-rows",
        type=int,
        default=DEFAULT_BLOCK_ROWS,
        help="row-block size for streamed distance post-processing",
    )
    parser.add_argument("--output", default=None, help="write to file instead of stdout")
    parser.add_argument("--format", choices=["json", "table"], default="json")


def _build_parser() -> _Parser:
    parser = _Parser(prog="occam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score one embeddings/labels pair")
    p_score.add_argument("embeddings")
    p_score.add_argument("labels")
    p_score.add_argument("--metric", choices=["int", "cv", "both"], default="int")
    p_score.add_argument(
        "--distance",
        choices=["euclidean", "sqeuclidean", "manhattan", "cosine"],
        default=None,
        help="distance for the interclass metric (default euclidean)",
    )
    p_score.add_argument("--alpha", type=float, default=2.0)
    p_score.add_argument("--epsilon", type=float, default=1e-10)
    p_score.add_argument("--aggregation", choices=["mean", "raw"], default="mean")
    p_score.add_argument(
        "--negate-cv",
        action="store_true",
        help="negate the concept-variation score",
    )
    p_score.add_argument("--model-id", default="")
    _add_common(p_score)
    p_score.set_defaults(func=_cmd_score)

    p_rank = sub.add_parser("rank", help="rank a model zoo from a JSON manifest")
    p_rank.add_argument("manifest")
    p_rank.add_argument(
        "--metric", choices=["int", "cv", "combined"], default="int"
    )
    p_rank.add_argument(
        "--distance",
        choices=["euclidean", "sqeuclidean", "manhattan", "cosine"],
        default=None,
    )
    p_rank.add_argument("--alpha", type=float, default=2.0)
    p_rank.add_argument("--epsilon", type=float, default=1e-10)
    p_rank.add_argument("--aggregation", choices=["mean", "raw"], default="mean")
    p_rank.add_argument("--negate-cv", action="store_true")
    _add_common(p_rank)
    p_rank.set_defaults(func=_cmd_rank)

    p_eval = sub.add_parser(
        "eval", help="rank correlation between predicted scores and ground truth"
    )
    p_eval.add_argument("pred", help="JSON object: model id -> predicted score")
    p_eval.add_argument("gt", help="JSON object: model id -> accuracy in [0,1]")
    _add_common(p_eval)
    p_eval.set_defaults(func=_cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a seeded Gaussian-blob dataset")
    p_synth.add_argument("--classes", type=int, required=True)
    p_synth.add_argument("--per-class", type=int, required=True)
    p_synth.add_argument("--dim", type=int, required=True)
    p_synth.add_argument("--sigma", type=float, default=1.0)
    p_synth.add_argument("--center-spread", type=float, default=10.0)
    p_synth.add_argument(
        "--centers", default=None, help="JSON array of explicit class centers"
    )
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output path prefix")
    _add_common(p_synth)
    p_synth.set_defaults(func=_cmd_synth)

    p_verify = sub.add_parser(
        "verify-lda", help="verify nearest-center equivalence of a softmax head"
    )
    p_verify.add_argument("weights", help="d x C weight matrix (.npy or CSV)")
    p_verify.add_argument("bias", help="length-C bias vector (.npy or CSV)")
    p_verify.add_argument("points", help="N x d points to check (.npy or CSV)")
    p_verify.add_argument("--gap-tol", type=float, default=1e-9)
    _add_common(p_verify)
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(args, payload, table_lines) -> None:
    if args.format == "table":
        _write(args, "\n".join(table_lines) + "\n")
    else:
        _write(args, jsonio.dumps(payload) + "\n")


def _score_table(reports: list[dict]) -> list[str]:
    lines = [f"{'metric':<10}{'score':<24}{'undefined':<11}warnings"]
    for rep in reports:
        score = "-" if rep["score"] is None else format(rep["score"], ".12g")
        lines.append(
            f"{rep['metric']:<10}{score:<24}{str(rep['undefined']):<11}"
            f"{';'.join(rep['warnings'])}"
        )
    return lines


def _cmd_score(args) -> int:
    ds = load_dataset(args.embeddings, args.labels)
    distance = (
        DistanceMetric.parse(args.distance)
        if args.distance is not None
        else DistanceMetric.EUCLIDEAN
    )
    reports = []
    if args.metric in ("int", "both"):
        cfg = IntScoreConfig(distance, Aggregation.parse(args.aggregation))
        reports.append(
            int_score(
                ds,
                cfg,
                model_id=args.model_id,
                threads=args.threads,
                block_rows=args.block_rows,
                memory_cap=args.memory_cap,
            )
        )
    if args.metric in ("cv", "both"):
        rep = cv_score(
            ds,
            CvConfig(alpha=args.alpha, epsilon=args.epsilon),
            model_id=args.model_id,
            memory_cap=args.memory_cap,
            negate=args.negate_cv,
        )
        if args.metric == "cv" and args.distance is not None:
            rep = dataclasses.replace(
                rep, warnings=rep.warnings + ("distance_flag_ignored_for_cv",)
            )
        reports.append(rep)
    dicts = [r.to_json_dict() for r in reports]
    payload = dicts[0] if len(dicts) == 1 else dicts
    _emit(args, payload, _score_table(dicts))
    return 2 if any(r.undefined for r in reports) else 0


def _rank_table(ranking: dict) -> list[str]:
    lines = [f"{'rank':<6}{'model_id':<32}{'score':<24}undefined"]
    for row in ranking["ranking"]:
        score = "-" if row["score"] is None else format(row["score"], ".12g")
        lines.append(
            f"{row['rank']:<6}{row['model_id']:<32}{score:<24}{row['undefined']}"
        )
    for failure in ranking["failures"]:
        lines.append(f"FAILED {failure['model_id']}: [{failure['error']}] "
                     f"{failure['message']}")
    return lines


def _cmd_rank(args) -> int:
    entries = load_manifest(args.manifest)
    distance = (
        DistanceMetric.parse(args.distance)
        if args.distance is not None
        else DistanceMetric.EUCLIDEAN
    )
    ranking = rank_zoo(
        entries,
        metric=args.metric.upper(),
        int_cfg=IntScoreConfig(distance, Aggregation.parse(args.aggregation)),
        cv_cfg=CvConfig(alpha=args.alpha, epsilon=args.epsilon),
        threads=args.threads,
        block_rows=args.block_rows,
        memory_cap=args.memory_cap,
        negate_cv=args.negate_cv,
        cache_dir=os.environ.get("OCCAM_CACHE_DIR") or None,
    )
    payload = ranking.to_json_dict()
    _emit(args, payload, _rank_table(payload))
    return 0


def _cmd_eval(args) -> int:
    report = evaluate_ranking(load_score_map(args.pred), load_ground_truth(args.gt))
    payload = report.to_json_dict()
    table = [f"{key}: {value}" for key, value in sorted(payload.items())]
    _emit(args, payload, table)
    return 0


def _cmd_synth(args) -> int:
    centers = None
    if args.centers is not None:
        import json as _json

        try:
            centers = np.asarray(_json.loads(args.centers), dtype=np.float64)
        except (ValueError, TypeError) as exc:
            raise _UsageError(f"--centers: {exc}") from None
    spec = BlobSpec(
        n_classes=args.classes,
        per_class=args.per_class,
        dim=args.dim,
        centers=centers,
        center_spread=args.center_spread,
        sigma=args.sigma,
        seed=args.seed,
    )
    ds = generate_blobs(spec)
    emb_path = f"{args.out}_embeddings.npy"
    lab_path = f"{args.out}_labels.npy"
    spec_path = f"{args.out}_spec.json"
    save_embeddings(emb_path, ds.embeddings.values)
    save_labels(lab_path, ds.labels.ids)
    with open(spec_path, "w", encoding="utf-8") as fh:
        fh.write(jsonio.dumps(spec.to_json_dict()) + "\n")
    payload = {
        "embeddings": emb_path,
        "labels": lab_path,
        "spec": spec_path,
        "n_samples": ds.n,
        "n_classes": ds.n_classes,
        "dim": ds.dim,
    }
    table = [f"{key}: {value}" for key, value in sorted(payload.items())]
    _emit(args, payload, table)
    return 0


def _cmd_verify(args) -> int:
    weights = load_embeddings(args.weights).values
    bias = load_vector(args.bias)
    points = load_embeddings(args.points)
    head = SoftmaxHead.from_arrays(weights, bias)
    centers = compute_centers(head)
    argmax_report = verify_argmax_equivalence(
        head, centers, points, gap_tol=args.gap_tol
    )
    confidence = verify_confidence_equality(head, centers, points)
    payload = {
        "n_classes": head.n_classes,
        "dim": head.dim,
        "residual": centers.residual,
        "shift_norm": float(np.linalg.norm(centers.shift)),
        "argmax": argmax_report.to_json_dict(),
        "confidence": confidence.to_json_dict(),
    }
    table = [
        f"residual: {payload['residual']:.3e}",
        f"shift_norm: {payload['shift_norm']:.6g}",
        f"argmax: {argmax_report.n_agree}/{argmax_report.n_checked} agree, "
        f"{argmax_report.n_ambiguous} ambiguous",
        f"confidence max deviation: {confidence.max_deviation:.3e} "
        f"(uniform_bias={confidence.uniform_bias})",
    ]
    _emit(args, payload, table)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(
            jsonio.dumps({"error": "OutOfRange", "message": str(exc)}) + "\n"
        )
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write(
            jsonio.dumps({"error": "OutOfRange", "message": str(exc)}) + "\n"
        )
        return 1
    except UndefinedScore as exc:
        sys.stderr.write(jsonio.dumps(exc.to_json_dict()) + "\n")
        return 2
    except OccamError as exc:
        sys.stderr.write(jsonio.dumps(exc.to_json_dict()) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
