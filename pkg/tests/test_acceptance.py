"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside pytest's own verdicts.
"""

import math
import resource
import time

import numpy as np
import pytest

from embtree.analysis import CONSISTENT, INCONSISTENT, cold_start_embed, diagnose_leaf
from embtree.dataset import (
    CATEGORICAL,
    NUMERIC,
    BinningSpec,
    EmbeddingMatrix,
    FeatureColumn,
    RawFeatureTable,
    binarize,
)
from embtree.projection import project
from embtree.split import embedding_bic
from embtree.tree import StoppingCriteria, build_tree, serialize_tree
from tests.conftest import make_four_blob
from tests.test_split import direct_loglik
from tests.test_tree import _members


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_c1_split_score_oracle_equivalence():
    """1,000 random instances match the independent direct evaluation to 1e-9."""
    rng = np.random.default_rng(1)
    started = time.monotonic()
    worst = 0.0
    compared = 0
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        scale = rng.uniform(0.1, 30.0)
        scores = rng.normal(scale=scale, size=n) + rng.uniform(-100.0, 100.0)
        bits = rng.integers(0, 2, n)
        mine = embedding_bic(scores, bits)
        reference = direct_loglik(scores, bits)
        if math.isinf(reference):
            assert not mine.valid
            continue
        compared += 1
        worst = max(worst, abs(mine.log_likelihood - reference))
    elapsed = time.monotonic() - started
    _report(
        "C1 split-score oracle equivalence",
        worst <= 1e-9 and elapsed < 5.0 and compared > 900,
        f"max |diff| {worst:.2e} over {compared} valid instances in {elapsed:.2f}s",
    )


def test_c2_hierarchy_recovery():
    """Root splits on the strongest feature, depth-1 on the second, >=95/100."""

    def recovered(seed):
        rng = np.random.default_rng(seed)
        n, p = 2000, 16
        a = rng.integers(0, 2, n)
        b = rng.integers(0, 2, n)
        c = rng.integers(0, 2, n)
        vectors = rng.normal(0.0, 1.0, (n, p))
        vectors[:, 0] += a * 20.0
        vectors[:, 1] += b * 5.0
        vectors[:, 2] += c * 1.0
        ids = [f"e{i}" for i in range(n)]
        embeddings = EmbeddingMatrix(ids, vectors)
        table = RawFeatureTable(
            ids,
            [
                FeatureColumn("A", CATEGORICAL, [str(v) for v in a]),
                FeatureColumn("B", CATEGORICAL, [str(v) for v in b]),
                FeatureColumn("C", CATEGORICAL, [str(v) for v in c]),
            ],
        )
        binary = binarize(table)
        tree = build_tree(embeddings, binary, StoppingCriteria(min_node_size=20, max_depth=2))
        top = [tree.root, tree.root.left, tree.root.right]
        if any(node is None or node.is_leaf for node in top):
            return False
        names = [binary.descriptors[node.split.feature_index].name for node in top]
        return names == ["A", "B", "B"]

    started = time.monotonic()
    hits = sum(recovered(seed) for seed in range(100))
    elapsed = time.monotonic() - started
    _report(
        "C2 hierarchy recovery",
        hits >= 95 and elapsed < 60.0,
        f"{hits}/100 seeds recovered in {elapsed:.1f}s",
    )


def test_c3_build_determinism():
    """Identical inputs give byte-identical tree JSON, parallel or not."""

    def build_once(parallel):
        embeddings, table, _, _ = make_four_blob(seed=4)
        columns = table.columns + [
            FeatureColumn(
                "load",
                NUMERIC,
                np.random.default_rng(8).normal(size=embeddings.n).tolist(),
            )
        ]
        table = RawFeatureTable(list(table.entity_ids), columns)
        binary = binarize(table, BinningSpec(bin_count=3))
        tree = build_tree(
            embeddings,
            binary,
            StoppingCriteria(min_node_size=10, max_depth=8),
            fingerprint="fixed",
            parallel=parallel,
        )
        return serialize_tree(tree)

    first = build_once(parallel=False)
    second = build_once(parallel=False)
    threaded = build_once(parallel=True)
    _report(
        "C3 determinism",
        first == second == threaded,
        f"3 builds, {len(first)} bytes each, byte-identical={first == second == threaded}",
    )


def test_c4_partition_and_conservation():
    """Children partition every internal node; leaf counts sum to N (50 datasets)."""
    failures = 0
    for seed in range(50):
        rng = np.random.default_rng(10_000 + seed)
        n = int(rng.integers(30, 150))
        p = int(rng.integers(2, 8))
        vectors = rng.normal(size=(n, p))
        vectors[:, 0] += rng.integers(0, 2, n) * rng.uniform(0.5, 8.0)
        ids = [f"e{i}" for i in range(n)]
        embeddings = EmbeddingMatrix(ids, vectors)
        table = RawFeatureTable(
            ids,
            [
                FeatureColumn("u", CATEGORICAL, [str(v) for v in rng.integers(0, 3, n)]),
                FeatureColumn("v", CATEGORICAL, [str(v) for v in rng.integers(0, 2, n)]),
                FeatureColumn("w", NUMERIC, rng.normal(size=n).tolist()),
            ],
        )
        tree = build_tree(
            embeddings, binarize(table), StoppingCriteria(min_node_size=5, max_depth=6)
        )
        leaf_total = 0
        for node in tree.nodes():
            if node.is_leaf:
                leaf_total += node.count
                continue
            left, right = _members(node.left), _members(node.right)
            disjoint = len(np.intersect1d(left, right)) == 0
            complete = np.array_equal(
                np.sort(np.concatenate([left, right])), _members(node)
            )
            if not (disjoint and complete):
                failures += 1
        if leaf_total != n:
            failures += 1
    _report("C4 partition/conservation", failures == 0, f"{failures} violations over 50 datasets")


def test_c5_pca_against_full_decomposition():
    """k in {1,2} matches an SVD oracle on 100 random matrices with p <= 32."""
    rng = np.random.default_rng(424242)
    worst_rel = 0.0
    worst_cos = 1.0
    for trial in range(100):
        n = int(rng.integers(6, 60))
        p = int(rng.integers(2, 33))
        points = rng.normal(size=(n, p))
        k = 2 if trial % 2 == 0 else 1
        result = project(points, k=k)
        centered = points - points.mean(axis=0)
        _, singular, vt = np.linalg.svd(centered, full_matrices=False)
        eigvals = singular**2 / n
        for j in range(k):
            rel = abs(result.explained_variance[j] - eigvals[j]) / eigvals[j]
            cos = abs(float(result.components[j] @ vt[j]))
            worst_rel = max(worst_rel, rel)
            worst_cos = min(worst_cos, cos)
    _report(
        "C5 PCA correctness",
        worst_rel <= 1e-6 and worst_cos >= 1.0 - 1e-8,
        f"worst eigenvalue rel err {worst_rel:.2e}, worst |cos| {worst_cos:.12f}",
    )


def test_c6_diagnosis_power():
    """Unimodal leaves judged consistent and 6-sigma bimodal leaves
    inconsistent, each >=95/100."""

    def single_leaf(values):
        values = np.asarray(values, dtype=np.float64).reshape(-1, 1)
        ids = [f"u{i}" for i in range(values.shape[0])]
        embeddings = EmbeddingMatrix(ids, values)
        table = RawFeatureTable(ids, [FeatureColumn("g", CATEGORICAL, ["x"] * len(ids))])
        tree = build_tree(
            embeddings, binarize(table), StoppingCriteria(min_node_size=2, max_depth=0)
        )
        return tree, embeddings

    consistent_hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        tree, embeddings = single_leaf(rng.normal(0.0, 1.0, 200))
        report = diagnose_leaf(tree, embeddings, tree.root.node_id)
        consistent_hits += report.verdict == CONSISTENT

    inconsistent_hits = 0
    for seed in range(100):
        rng = np.random.default_rng(50_000 + seed)
        values = np.concatenate([rng.normal(-3.0, 1.0, 100), rng.normal(3.0, 1.0, 100)])
        tree, embeddings = single_leaf(values)
        report = diagnose_leaf(tree, embeddings, tree.root.node_id)
        inconsistent_hits += report.verdict == INCONSISTENT

    _report(
        "C6 diagnosis power",
        consistent_hits >= 95 and inconsistent_hits >= 95,
        f"unimodal consistent {consistent_hits}/100, bimodal inconsistent {inconsistent_hits}/100",
    )


def test_c7_cold_start_fidelity(four_blob):
    """Every training entity routes to its own leaf; vectors match to 1e-12."""
    tree = four_blob["tree"]
    table = four_blob["table"]
    embeddings = four_blob["embeddings"]
    leaf_of = {}
    for leaf in tree.leaves():
        for index in leaf.entities:
            leaf_of[int(index)] = leaf.node_id

    routed = 0
    worst = 0.0
    for i in range(embeddings.n):
        query = {col.name: col.values[i] for col in table.columns}
        result = cold_start_embed(tree, query)
        routed += result.leaf_id == leaf_of[i]
        members = tree.node(result.leaf_id).entities
        recomputed = embeddings.vectors[members].mean(axis=0)
        worst = max(worst, float(np.max(np.abs(result.embedding - recomputed))))
    _report(
        "C7 cold-start fidelity",
        routed == embeddings.n and worst <= 1e-12,
        f"{routed}/{embeddings.n} routed home, max |mean diff| {worst:.2e}",
    )


def test_c8_scale():
    """N=50,000, p=128, q=30 builds in <120 s and <4 GB."""
    rng = np.random.default_rng(2024)
    n, p = 50_000, 128
    cats = [rng.integers(0, 3, n) for _ in range(6)]
    nums = [rng.normal(size=n) for _ in range(4)]
    vectors = rng.normal(0.0, 1.0, (n, p))
    for j, scale in enumerate((16.0, 8.0, 4.0, 2.0, 1.0)):
        vectors[:, j] += cats[j] * scale
    ids = [f"e{i}" for i in range(n)]

    started = time.monotonic()
    embeddings = EmbeddingMatrix(ids, vectors)
    columns = [
        FeatureColumn(f"c{j}", CATEGORICAL, [str(v) for v in cats[j]]) for j in range(6)
    ]
    columns += [FeatureColumn(f"x{j}", NUMERIC, nums[j].tolist()) for j in range(4)]
    binary = binarize(RawFeatureTable(ids, columns), BinningSpec(bin_count=3))
    assert binary.q == 30
    tree = build_tree(embeddings, binary, StoppingCriteria(min_node_size=20, max_depth=10))
    elapsed = time.monotonic() - started
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / (1024**2)
    _report(
        "C8 scale",
        elapsed < 120.0 and peak_gb < 4.0,
        f"built {len(tree.leaves())} leaves (depth {tree.depth}) in {elapsed:.1f}s, peak RSS {peak_gb:.2f} GB",
    )
