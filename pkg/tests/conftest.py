import csv

import numpy as np
import pytest

from embtree.dataset import (
    CATEGORICAL,
    NUMERIC,
    EmbeddingMatrix,
    FeatureColumn,
    RawFeatureTable,
    binarize,
    fingerprint,
)
from embtree.tree import StoppingCriteria, build_tree


def make_four_blob(n=200, p=8, seed=11, noise=0.1):
    """Four well-separated blobs keyed by two binary features.

    Feature A shifts the first axis by 20, feature B the second by 2; with
    noise sigma 0.1 both splits are unambiguous.
    """
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, n)
    b = rng.integers(0, 2, n)
    vectors = rng.normal(0.0, noise, (n, p))
    vectors[:, 0] += a * 20.0
    vectors[:, 1] += b * 2.0
    ids = [f"m{i}" for i in range(n)]
    embeddings = EmbeddingMatrix(ids, vectors)
    table = RawFeatureTable(
        list(ids),
        [
            FeatureColumn("A", CATEGORICAL, [str(v) for v in a]),
            FeatureColumn("B", CATEGORICAL, [str(v) for v in b]),
        ],
    )
    return embeddings, table, a, b


def write_dataset_csv(dirpath, embeddings, table, schema=None):
    """Write the CSV pair (and optional schema JSON) the CLI consumes."""
    epath = dirpath / "embeddings.csv"
    fpath = dirpath / "features.csv"
    with epath.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id"] + [f"d{j}" for j in range(embeddings.p)])
        for entity, row in zip(embeddings.entity_ids, embeddings.vectors):
            writer.writerow([entity] + [repr(float(x)) for x in row])
    with fpath.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id"] + table.names)
        for i, entity in enumerate(table.entity_ids):
            cells = []
            for col in table.columns:
                value = col.values[i]
                cells.append(repr(float(value)) if col.kind == NUMERIC else str(value))
            writer.writerow([entity] + cells)
    paths = [epath, fpath]
    if schema is not None:
        import json

        spath = dirpath / "schema.json"
        spath.write_text(json.dumps(schema))
        paths.append(spath)
    return tuple(paths)


@pytest.fixture(scope="session")
def four_blob():
    embeddings, table, a, b = make_four_blob()
    binary = binarize(table)
    tree = build_tree(
        embeddings,
        binary,
        StoppingCriteria(min_node_size=20, max_depth=10),
        fingerprint=fingerprint(embeddings, table),
    )
    return {
        "embeddings": embeddings,
        "table": table,
        "binary": binary,
        "tree": tree,
        "a": a,
        "b": b,
    }
