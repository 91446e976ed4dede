"""Bit-for-bit parity between the bindings and the CLI on shared fixtures.

Ten fixtures cover the three bound operations: four interclass-score datasets
(one per distance), three concept-variation datasets, and three zoo rankings
(one per ranking metric). The CLI is run as a real subprocess and its JSON is
the reference; floats are compared by their exact bit pattern (float.hex).
One visible [B1] PASS/FAIL line summarizes the gate.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

import occam_bindings as bnd
from occam import save_embeddings, save_labels


def _cli(*argv, env_extra=None):
    import os

    env = dict(os.environ)
    env.pop("OCCAM_CACHE_DIR", None)
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run(
        [sys.executable, "-m", "occam.cli", *argv],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def _hex(value):
    return None if value is None else float(value).hex()


def _dataset(seed, n, d, c):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d)) * float(rng.uniform(0.5, 2.0))
    y = rng.integers(0, c, size=n)
    y[:c] = np.arange(c)
    return x, y


def _save(tmp_path, name, x, y):
    emb = tmp_path / f"{name}_e.npy"
    lab = tmp_path / f"{name}_l.npy"
    save_embeddings(emb, x)
    save_labels(lab, y)
    return str(emb), str(lab)


def test_b1_binding_cli_parity(tmp_path, capsys):
    failures = []
    n_fixtures = 0

    # -- four interclass-score fixtures, one per distance ------------------
    int_fixtures = [
        ("345", np.array([[0.0, 0.0], [3.0, 4.0]]), np.array([0, 1]), "euclidean"),
        ("rand_sq", *_dataset(101, 300, 32, 5), "sqeuclidean"),
        ("rand_man", *_dataset(102, 150, 12, 4), "manhattan"),
        ("rand_cos", *_dataset(103, 80, 6, 3), "cosine"),
    ]
    for name, x, y, distance in int_fixtures:
        n_fixtures += 1
        emb, lab = _save(tmp_path, name, x, y)
        cli_score = _cli(
            "score", emb, lab, "--metric", "int", "--distance", distance
        )["score"]
        bound_score = bnd.int_score(x, y, distance)
        if _hex(bound_score) != _hex(cli_score):
            failures.append(f"int/{name}: {bound_score!r} != CLI {cli_score!r}")

    # -- three concept-variation fixtures ----------------------------------
    golden_x = np.array([[0.0], [1.0 / 3.0], [2.0 / 3.0], [1.0]])
    golden_y = np.array([0, 0, 1, 1])
    same_x, _ = _dataset(104, 50, 5, 2)
    cv_fixtures = [
        ("golden", golden_x, golden_y, 2.0),
        ("same", same_x, np.zeros(50, dtype=np.int64), 2.0),
        ("rand_alpha", *_dataset(105, 120, 10, 4), 0.5),
    ]
    for name, x, y, alpha in cv_fixtures:
        n_fixtures += 1
        emb, lab = _save(tmp_path, name, x, y)
        cli_score = _cli(
            "score", emb, lab, "--metric", "cv", "--alpha", str(alpha)
        )["score"]
        bound_score = bnd.concept_variation_score(x, y, alpha=alpha)
        if _hex(bound_score) != _hex(cli_score):
            failures.append(f"cv/{name}: {bound_score!r} != CLI {cli_score!r}")

    # -- three zoo rankings, one per metric --------------------------------
    zoo = []
    manifest = []
    for i in range(4):
        x, y = _dataset(110 + i, 90, 8, 3)
        if i == 3:
            y[:] = 0  # undefined under INT: must sort last with null score
        zoo.append((f"m{i}", x, y))
        emb, lab = _save(tmp_path, f"zoo{i}", x, y)
        manifest.append({"model_id": f"m{i}", "embeddings": emb, "labels": lab})
    man_path = tmp_path / "zoo.json"
    man_path.write_text(json.dumps(manifest))

    for metric in ("int", "cv", "combined"):
        n_fixtures += 1
        cli_rows = _cli("rank", str(man_path), "--metric", metric)["ranking"]
        cli_pairs = [(row["model_id"], _hex(row["score"])) for row in cli_rows]
        bound_pairs = [(m, _hex(s)) for m, s in bnd.rank_zoo(zoo, metric=metric)]
        if bound_pairs != cli_pairs:
            failures.append(f"rank/{metric}: {bound_pairs} != CLI {cli_pairs}")

    ok = not failures and n_fixtures == 10
    detail = (
        f"{n_fixtures} shared fixtures bit-identical to CLI JSON"
        if ok
        else "; ".join(failures) or f"expected 10 fixtures, ran {n_fixtures}"
    )
    with capsys.disabled():
        print(f"[B1] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_undefined_score_maps_to_cli_exit_2(tmp_path):
    """The report-level undefined flag (CLI exit 2) maps to a raised
    UndefinedScore in the bindings with the same reason string."""
    x = np.eye(3)
    y = np.zeros(3, dtype=np.int64)
    emb, lab = _save(tmp_path, "single", x, y)
    import os

    env = dict(os.environ)
    env.pop("OCCAM_CACHE_DIR", None)
    proc = subprocess.run(
        [sys.executable, "-m", "occam.cli", "score", emb, lab, "--metric", "int"],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 2
    cli_reason = json.loads(proc.stdout)["undefined_reason"]
    with pytest.raises(bnd.UndefinedScore) as excinfo:
        bnd.int_score(x, y)
    assert excinfo.value.reason == cli_reason == "single_class"
