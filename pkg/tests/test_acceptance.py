"""Acceptance gate: one visible PASS/FAIL line per criterion.

Each test prints "[Ax] PASS/FAIL - detail" even without -s, then asserts.
Timing-sensitive criteria include their elapsed time in the detail line.
"""

import json
import time

import numpy as np
import pytest

from occam import (
    BlobSpec,
    CvConfig,
    DistanceMetric,
    IntScoreConfig,
    LabeledDataset,
    concept_variation,
    cv_score,
    generate_blobs,
    int_score,
    kendall_tau,
    save_embeddings,
    save_labels,
    stratified_subsample,
    weight_function,
    weighted_kendall_tau,
)
from occam.cli import main as cli_main

from oracles import kendall_oracle, naive_concept_variation, naive_int_score

ALL_DISTANCES = ("euclidean", "sqeuclidean", "manhattan", "cosine")


@pytest.fixture
def announce(capsys):
    def _announce(tag: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"[{tag}] {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, f"{tag}: {detail}"

    return _announce


def test_a1_int_score_matches_naive_oracle(announce):
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(20, 301))
        d = int(rng.integers(2, 65))
        c = int(rng.integers(2, 7))
        x = rng.normal(size=(n, d)) * float(rng.uniform(0.5, 3.0))
        y = rng.integers(0, c, size=n)
        y[:c] = np.arange(c)  # every class populated
        ds = LabeledDataset.from_arrays(x, y)
        for metric in ALL_DISTANCES:
            got = int_score(ds, IntScoreConfig(DistanceMetric.parse(metric))).score
            want = naive_int_score(x, y, metric)
            worst = max(worst, abs(got - want) / abs(want))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 30.0
    announce(
        "A1",
        ok,
        f"interclass score vs naive triple-loop oracle on 50 datasets x 4 "
        f"distances: worst rel err {worst:.2e} (tol 1e-10), {elapsed:.1f}s (< 30s)",
    )


def test_a2_concept_variation_matches_naive_oracle(announce):
    rng = np.random.default_rng(22)
    t0 = time.perf_counter()
    worst_v = 0.0
    worst_std = 0.0
    for _ in range(50):
        n = int(rng.integers(10, 301))
        d = int(rng.integers(1, 33))
        c = int(rng.integers(2, 7))
        x = rng.normal(size=(n, d))
        y = rng.integers(0, c, size=n)
        result = concept_variation(LabeledDataset.from_arrays(x, y))
        v_want, _, std_want = naive_concept_variation(x, y)
        worst_v = max(worst_v, float(np.max(np.abs(result.per_example - v_want))))
        worst_std = max(worst_std, abs(result.std - std_want))
    elapsed = time.perf_counter() - t0
    ok = worst_v <= 1e-10 and worst_std <= 1e-10 and elapsed < 60.0
    announce(
        "A2",
        ok,
        f"concept variation vs naive N^2-loop oracle on 50 datasets: worst "
        f"per-example err {worst_v:.2e}, worst std err {worst_std:.2e} "
        f"(tol 1e-10), {elapsed:.1f}s (< 60s)",
    )


def test_a3_overlapping_classes_score_lower(announce):
    t0 = time.perf_counter()
    dim = 8
    direction = np.zeros(dim)
    direction[0] = 1.0
    wins = 0
    for seed in range(100):
        scores = {}
        for gap in (10.0, 1.0):
            centers = np.vstack([np.zeros(dim), gap * direction])
            spec = BlobSpec(
                n_classes=2, per_class=30, dim=dim, centers=centers,
                sigma=1.0, seed=seed,
            )
            scores[gap] = int_score(generate_blobs(spec)).score
        wins += scores[10.0] > scores[1.0]
    elapsed = time.perf_counter() - t0
    ok = wins >= 99 and elapsed < 10.0
    announce(
        "A3",
        ok,
        f"10-sigma separation scored strictly above 1-sigma in {wins}/100 seeds "
        f"(need >= 99), {elapsed:.1f}s (< 10s)",
    )


def test_a4_analytic_fixed_points(announce):
    ds_345 = LabeledDataset.from_arrays([[0.0, 0.0], [3.0, 4.0]], [0, 1])
    score_345 = int_score(ds_345).score
    ok_345 = abs(score_345 - 5.0) <= 1e-12

    tri = [[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]]
    score_tri = int_score(LabeledDataset.from_arrays(tri, [0, 1, 2])).score
    ok_tri = abs(score_tri - 1.0) <= 1e-12

    rng = np.random.default_rng(4)
    same = LabeledDataset.from_arrays(rng.normal(size=(40, 6)), [0] * 40)
    std_same = concept_variation(same).std
    ok_same = std_same == 0.0

    ok_w = all(
        weight_function(0.0, dim=d) == 1.0
        and weight_function(float(np.sqrt(d)), dim=d) == 0.0
        for d in (1, 2, 7, 64, 768)
    )

    ok = ok_345 and ok_tri and ok_same and ok_w
    announce(
        "A4",
        ok,
        f"3-4-5 pair = {score_345!r} (want 5.0 +/- 1e-12: {ok_345}); "
        f"equilateral = {score_tri!r} (want 1.0 +/- 1e-12: {ok_tri}); "
        f"all-same-label std = {std_same!r} (want exact 0.0: {ok_same}); "
        f"weight endpoints w(0)=1, w(sqrt(d))=0: {ok_w}",
    )


def test_a5_kendall_suite(announce):
    from itertools import permutations

    gt = {"a": 4.0, "b": 3.0, "c": 2.0, "d": 1.0}
    exact = all(
        kendall_tau(dict(zip(gt, perm)), gt) == kendall_oracle(dict(zip(gt, perm)), gt)
        for perm in permutations([4.0, 3.0, 2.0, 1.0])
    )
    swap_adjacent = kendall_tau({"a": 4.0, "b": 3.0, "c": 1.0, "d": 2.0}, gt)
    ok_swap = swap_adjacent == 2.0 / 3.0
    ident = weighted_kendall_tau(gt, gt)
    rev = weighted_kendall_tau({"a": 1.0, "b": 2.0, "c": 3.0, "d": 4.0}, gt)
    ok_ends = ident == 1.0 and rev == -1.0
    top = weighted_kendall_tau({"a": 3.0, "b": 4.0, "c": 2.0, "d": 1.0}, gt)
    bottom = weighted_kendall_tau({"a": 4.0, "b": 3.0, "c": 1.0, "d": 2.0}, gt)
    ok_weighting = top < bottom

    ok = exact and ok_swap and ok_ends and ok_weighting
    announce(
        "A5",
        ok,
        f"tau exact on all 24 permutations: {exact}; adjacent swap = "
        f"{swap_adjacent!r} (want 2/3); weighted tau identity/reversal = "
        f"{ident}/{rev}; top swap {top:.6f} < bottom swap {bottom:.6f}: "
        f"{ok_weighting}",
    )


def test_a6_nearest_center_equivalence(announce):
    from occam import (
        SoftmaxHead,
        compute_centers,
        verify_argmax_equivalence,
        verify_confidence_equality,
    )

    rng = np.random.default_rng(66)
    t0 = time.perf_counter()
    n_heads = 200
    worst_residual = 0.0
    worst_confidence = 0.0
    total_checked = 0
    total_agree = 0
    for _ in range(n_heads):
        c = int(rng.integers(2, 9))
        d = int(rng.integers(c, 65))
        weights = rng.normal(size=(d, c))
        bias = np.full(c, float(rng.normal()))  # uniform bias: exact-equivalence regime
        head = SoftmaxHead.from_arrays(weights, bias)
        centers = compute_centers(head)
        worst_residual = max(worst_residual, centers.residual)
        points = rng.normal(size=(1000, d))
        argmax = verify_argmax_equivalence(head, centers, points)
        total_checked += argmax.n_checked
        total_agree += argmax.n_agree
        confidence = verify_confidence_equality(head, centers, points)
        worst_confidence = max(worst_confidence, confidence.max_deviation)
    elapsed = time.perf_counter() - t0
    ok = (
        total_agree == total_checked
        and worst_residual <= 1e-8
        and worst_confidence <= 1e-8
        and elapsed < 60.0
    )
    announce(
        "A6",
        ok,
        f"200 uniform-bias heads x 1000 points: argmax agreement "
        f"{total_agree}/{total_checked}, max residual {worst_residual:.2e} "
        f"(tol 1e-8), max confidence deviation {worst_confidence:.2e} "
        f"(tol 1e-8), {elapsed:.1f}s (< 60s)",
    )


def _strip_wall_time(obj):
    if isinstance(obj, dict):
        return {k: _strip_wall_time(v) for k, v in obj.items() if k != "wall_time_s"}
    if isinstance(obj, list):
        return [_strip_wall_time(v) for v in obj]
    return obj


def _canonical(stdout_text: str) -> str:
    return json.dumps(_strip_wall_time(json.loads(stdout_text)), sort_keys=True)


def test_a7_outputs_identical_across_threads_and_blocks(
    announce, tmp_path, capsys, monkeypatch
):
    monkeypatch.delenv("OCCAM_CACHE_DIR", raising=False)
    rng = np.random.default_rng(77)
    n = 120
    emb = tmp_path / "e.npy"
    lab = tmp_path / "l.npy"
    save_embeddings(emb, rng.normal(size=(n, 16)))
    labels = rng.integers(0, 5, size=n)
    labels[:5] = np.arange(5)
    save_labels(lab, labels)

    manifest = []
    for i in range(3):
        m_emb = tmp_path / f"m{i}e.npy"
        m_lab = tmp_path / f"m{i}l.npy"
        save_embeddings(m_emb, rng.normal(size=(60, 8)) * (i + 1))
        save_labels(m_lab, np.arange(60) % 3)
        manifest.append(
            {"model_id": f"m{i}", "embeddings": str(m_emb), "labels": str(m_lab)}
        )
    man_path = tmp_path / "zoo.json"
    man_path.write_text(json.dumps(manifest))
    pred_path = tmp_path / "pred.json"
    gt_path = tmp_path / "gt.json"
    pred_path.write_text(json.dumps({"a": 3.0, "b": 1.0, "c": 2.0}))
    gt_path.write_text(json.dumps({"a": 0.9, "b": 0.6, "c": 0.7}))

    outputs = {"score": set(), "rank": set(), "eval": set()}
    for threads in ("1", "4", "0"):
        for blocks in ("16", "64", str(n)):
            common = ["--threads", threads, "--block-rows", blocks]
            runs = {
                "score": ["score", str(emb), str(lab), "--metric", "both", *common],
                "rank": ["rank", str(man_path), "--metric", "combined", *common],
                "eval": ["eval", str(pred_path), str(gt_path), *common],
            }
            for name, argv in runs.items():
                assert cli_main(argv) == 0
                outputs[name].add(_canonical(capsys.readouterr().out))
    distinct = {name: len(variants) for name, variants in outputs.items()}
    ok = all(count == 1 for count in distinct.values())
    announce(
        "A7",
        ok,
        f"score/rank/eval outputs across threads {{1,4,auto}} x block rows "
        f"{{16,64,N}}: distinct outputs {distinct} (want all 1; timing field "
        f"excluded)",
    )


def test_a8_performance_gate(announce):
    spec = BlobSpec(n_classes=10, per_class=500, dim=768, sigma=1.0, seed=8)
    ds = generate_blobs(spec)
    t0 = time.perf_counter()
    int_score(ds)
    t_int = time.perf_counter() - t0
    t0 = time.perf_counter()
    cv_score(ds)
    t_cv = time.perf_counter() - t0

    ds2 = generate_blobs(
        BlobSpec(n_classes=10, per_class=1000, dim=768, sigma=1.0, seed=8)
    )
    t0 = time.perf_counter()
    int_score(ds2)
    t_int2 = time.perf_counter() - t0
    ratio = t_int2 / t_int

    ok = t_int <= 10.0 and t_cv <= 30.0 and ratio <= 5.0
    announce(
        "A8",
        ok,
        f"N=5000 d=768: interclass {t_int:.2f}s (<= 10s), concept variation "
        f"{t_cv:.2f}s (<= 30s); N=10000 interclass {t_int2:.2f}s, ratio "
        f"{ratio:.2f} (<= 5)",
    )


def test_a9_stratified_subsample_protocol(announce):
    ds = generate_blobs(BlobSpec(n_classes=3, per_class=100, dim=8, sigma=2.0, seed=9))
    sub_a = stratified_subsample(ds, per_class=40, seed=17)
    sub_b = stratified_subsample(ds, per_class=40, seed=17)
    counts = np.bincount(sub_a.labels.ids).tolist()
    ok_counts = counts == [40, 40, 40]
    ok_deterministic = np.array_equal(
        sub_a.embeddings.values, sub_b.embeddings.values
    ) and np.array_equal(sub_a.labels.ids, sub_b.labels.ids)

    worst = 0.0
    for metric in ALL_DISTANCES:
        got = int_score(sub_a, IntScoreConfig(DistanceMetric.parse(metric))).score
        want = naive_int_score(sub_a.embeddings.values, sub_a.labels.ids, metric)
        worst = max(worst, abs(got - want) / abs(want))
    ok = ok_counts and ok_deterministic and worst <= 1e-10
    announce(
        "A9",
        ok,
        f"subsample 100->40 per class: counts {counts}, deterministic by seed: "
        f"{ok_deterministic}, oracle check on subsample worst rel err "
        f"{worst:.2e} (tol 1e-10)",
    )
