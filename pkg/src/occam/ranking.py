"""Model-zoo scoring and deterministic ranking.

Each zoo entry (embeddings + labels files) is scored independently; entries
whose files fail to load are collected as failure records instead of aborting
the rest. The COMBINED metric min-max normalizes each component metric across
the zoo's fully-scored entries to [0, 1] and sums them (a degenerate range,
including a single-model zoo, normalizes to 0). Rankings sort by score
descending with ties broken by model_id ascending; undefined entries are kept,
flagged, and ranked after every defined entry.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import jsonio
from .conceptvar import CvConfig, cv_score
from .data import LabeledDataset, ScoreReport, load_dataset
from .errors import MalformedFile, OccamError
from .interclass import DEFAULT_BLOCK_ROWS, DEFAULT_MEMORY_CAP, IntScoreConfig, int_score

METRICS = ("INT", "CV", "COMBINED")


@dataclass(frozen=True)
class ZooEntry:
    model_id: str
    embeddings_path: str
    labels_path: str


@dataclass(frozen=True)
class RankedEntry:
    rank: int
    model_id: str
    report: ScoreReport

    def to_json_dict(self) -> dict:
        return {
            "rank": self.rank,
            "model_id": self.model_id,
            "score": self.report.score,
            "undefined": self.report.undefined,
            "warnings": list(self.report.warnings),
        }


@dataclass(frozen=True)
class ZooRanking:
    metric: str
    params: dict
    entries: tuple[RankedEntry, ...]
    failures: tuple[dict, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric,
            "params": dict(self.params),
            "ranking": [e.to_json_dict() for e in self.entries],
            "failures": [dict(f) for f in self.failures],
        }


def load_manifest(path) -> list[ZooEntry]:
    """JSON array of {"model_id", "embeddings", "labels"} records."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError, OSError) as exc:
        raise MalformedFile(f"{path}: {exc}") from None
    if not isinstance(raw, list) or not raw:
        raise MalformedFile(f"{path}: manifest must be a non-empty JSON array")
    entries: list[ZooEntry] = []
    seen: set[str] = set()
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or not {"model_id", "embeddings", "labels"} <= set(
            item
        ):
            raise MalformedFile(
                f"{path}: entry {i} must have model_id, embeddings, labels"
            )
        model_id = item["model_id"]
        if not isinstance(model_id, str) or not model_id:
            raise MalformedFile(f"{path}: entry {i} model_id must be a non-empty string")
        if model_id in seen:
            raise MalformedFile(f"{path}: duplicate model_id {model_id!r}")
        seen.add(model_id)
        entries.append(ZooEntry(model_id, str(item["embeddings"]), str(item["labels"])))
    return entries


def _cache_key(entry: ZooEntry, metric: str, params: dict) -> str:
    digest = hashlib.sha256()
    for file_path in (entry.embeddings_path, entry.labels_path):
        try:
            digest.update(Path(file_path).read_bytes())
        except OSError as exc:
            raise MalformedFile(f"{file_path}: {exc}") from None
        digest.update(b"\x00")
    digest.update(metric.encode())
    digest.update(jsonio.dumps(params).encode())
    return digest.hexdigest()


def _cache_load(cache_dir: Path, key: str, entry: ZooEntry) -> ScoreReport | None:
    path = cache_dir / f"{key}.json"
    if not path.is_file():
        return None
    start = time.perf_counter()
    try:
        stored = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError, OSError):
        return None  # unreadable cache entries are recomputed, never fatal
    return ScoreReport(
        model_id=entry.model_id,
        metric=stored["metric"],
        score=stored["score"],
        undefined=stored["undefined"],
        undefined_reason=stored["undefined_reason"],
        params=stored["params"],
        n_samples=stored["n_samples"],
        n_classes=stored["n_classes"],
        dim=stored["dim"],
        wall_time_s=max(time.perf_counter() - start, 1e-9),
        warnings=tuple(stored["warnings"]),
    )


def _cache_store(cache_dir: Path, key: str, report: ScoreReport) -> None:
    cache_dir.mkdir(parents=True, exist_ok=True)
    payload = report.to_json_dict()
    del payload["model_id"], payload["wall_time_s"]  # caller- and run-specific
    tmp = cache_dir / f"{key}.json.tmp"
    tmp.write_text(jsonio.dumps(payload), encoding="utf-8")
    tmp.replace(cache_dir / f"{key}.json")


def _score_entry(
    entry: ZooEntry,
    metric: str,
    int_cfg: IntScoreConfig,
    cv_cfg: CvConfig,
    *,
    threads: int,
    block_rows: int,
    memory_cap: int,
    negate_cv: bool,
    cache_dir: Path | None,
) -> dict[str, ScoreReport]:
    """Reports keyed by component metric name ('INT' and/or 'CV')."""
    needed = ("INT", "CV") if metric == "COMBINED" else (metric,)
    reports: dict[str, ScoreReport] = {}
    dataset: LabeledDataset | None = None
    for name in needed:
        params = (
            {"distance": int_cfg.metric.value, "aggregation": int_cfg.aggregation.value}
            if name == "INT"
            else {
                "alpha": cv_cfg.alpha,
                "epsilon": cv_cfg.epsilon,
                "normalization": cv_cfg.normalization.value,
                "negated": negate_cv,
            }
        )
        key = None
        if cache_dir is not None:
            key = _cache_key(entry, name, params)
            cached = _cache_load(cache_dir, key, entry)
            if cached is not None:
                reports[name] = cached
                continue
        if dataset is None:
            dataset = load_dataset(entry.embeddings_path, entry.labels_path)
        if name == "INT":
            report = int_score(
                dataset,
                int_cfg,
                model_id=entry.model_id,
                threads=threads,
                block_rows=block_rows,
                memory_cap=memory_cap,
            )
        else:
            report = cv_score(
                dataset,
                cv_cfg,
                model_id=entry.model_id,
                memory_cap=memory_cap,
                negate=negate_cv,
            )
        if cache_dir is not None and key is not None:
            _cache_store(cache_dir, key, report)
        reports[name] = report
    return reports


def _min_max_normalize(raw: dict[str, float]) -> dict[str, float]:
    if not raw:
        return {}
    lo = min(raw.values())
    hi = max(raw.values())
    if hi == lo:
        return {k: 0.0 for k in raw}
    return {k: (v - lo) / (hi - lo) for k, v in raw.items()}


def rank_zoo(
    zoo: list[ZooEntry],
    metric: str = "INT",
    int_cfg: IntScoreConfig = IntScoreConfig(),
    cv_cfg: CvConfig = CvConfig(),
    *,
    threads: int = 0,
    block_rows: int = DEFAULT_BLOCK_ROWS,
    memory_cap: int = DEFAULT_MEMORY_CAP,
    negate_cv: bool = False,
    cache_dir=None,
) -> ZooRanking:
    if metric not in METRICS:
        raise MalformedFile(f"unknown ranking metric {metric!r}; expected {METRICS}")
    cache_path = Path(cache_dir) if cache_dir else None
    scored: list[tuple[ZooEntry, dict[str, ScoreReport]]] = []
    failures: list[dict] = []
    for entry in zoo:
        try:
            reports = _score_entry(
                entry,
                metric,
                int_cfg,
                cv_cfg,
                threads=threads,
                block_rows=block_rows,
                memory_cap=memory_cap,
                negate_cv=negate_cv,
                cache_dir=cache_path,
            )
        except OccamError as exc:
            failures.append(
                {"model_id": entry.model_id, "error": exc.code, "message": str(exc)}
            )
            continue
        scored.append((entry, reports))

    if metric == "COMBINED":
        defined = {
            e.model_id: r
            for e, r in scored
            if not r["INT"].undefined and not r["CV"].undefined
        }
        norm_int = _min_max_normalize(
            {m: r["INT"].score for m, r in defined.items()}
        )
        norm_cv = _min_max_normalize({m: r["CV"].score for m, r in defined.items()})
        final: list[ScoreReport] = []
        for entry, reports in scored:
            int_rep, cv_rep = reports["INT"], reports["CV"]
            undefined = int_rep.undefined or cv_rep.undefined
            params = {
                "int": dict(int_rep.params),
                "cv": dict(cv_rep.params),
                "int_score": int_rep.score,
                "cv_score": cv_rep.score,
                "combined_normalization": "min_max_across_zoo",
            }
            score = None
            if not undefined:
                params["int_normalized"] = norm_int[entry.model_id]
                params["cv_normalized"] = norm_cv[entry.model_id]
                score = norm_int[entry.model_id] + norm_cv[entry.model_id]
            reasons = [
                r.undefined_reason
                for r in (int_rep, cv_rep)
                if r.undefined_reason is not None
            ]
            final.append(
                ScoreReport(
                    model_id=entry.model_id,
                    metric="COMBINED",
                    score=score,
                    undefined=undefined,
                    undefined_reason="+".join(reasons) if reasons else None,
                    params=params,
                    n_samples=int_rep.n_samples,
                    n_classes=int_rep.n_classes,
                    dim=int_rep.dim,
                    wall_time_s=int_rep.wall_time_s + cv_rep.wall_time_s,
                    warnings=int_rep.warnings + cv_rep.warnings,
                )
            )
    else:
        final = [reports[metric] for _, reports in scored]

    defined_entries = sorted(
        (r for r in final if not r.undefined), key=lambda r: (-r.score, r.model_id)
    )
    undefined_entries = sorted(
        (r for r in final if r.undefined), key=lambda r: r.model_id
    )
    ordered = defined_entries + undefined_entries
    entries = tuple(
        RankedEntry(rank=i + 1, model_id=r.model_id, report=r)
        for i, r in enumerate(ordered)
    )
    shared_params = _shared_params(metric, int_cfg, cv_cfg, negate_cv)
    return ZooRanking(
        metric=metric,
        params=shared_params,
        entries=entries,
        failures=tuple(failures),
    )


def _shared_params(
    metric: str, int_cfg: IntScoreConfig, cv_cfg: CvConfig, negate_cv: bool
) -> dict:
    params: dict = {}
    if metric in ("INT", "COMBINED"):
        params["distance"] = int_cfg.metric.value
        params["aggregation"] = int_cfg.aggregation.value
    if metric in ("CV", "COMBINED"):
        params["alpha"] = cv_cfg.alpha
        params["epsilon"] = cv_cfg.epsilon
        params["normalization"] = cv_cfg.normalization.value
        params["negated"] = negate_cv
    if metric == "COMBINED":
        params["combined_normalization"] = "min_max_across_zoo"
    return params
