"""Command line entry points: build, diagnose, infer, serve.

Exit codes: 0 success, 1 validation or algorithm error, 2 I/O error.
Human-readable diagnostics go to stderr; machine output goes to files or
stdout only.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .analysis import DiagnosisError, InferenceError, cold_start_embed, diagnose_leaf
from .dataset import BinningSpec, DatasetError, binarize, fingerprint, load_dataset
from .tree import StoppingCriteria, TreeFormatError, build_tree, deserialize_tree, serialize_tree

EXIT_VALIDATION = 1
EXIT_IO = 2


def _fail(code: int, message: str) -> None:
    click.echo(f"embtree: {message}", err=True)
    sys.exit(code)


def _load_inputs(embeddings_path: str, features_path: str, schema_path: str | None):
    try:
        return load_dataset(embeddings_path, features_path, schema_path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot open {exc.filename or embeddings_path}: {exc.strerror or exc}")
    except DatasetError as exc:
        _fail(EXIT_VALIDATION, str(exc))


def _load_tree(tree_path: str):
    try:
        data = Path(tree_path).read_bytes()
    except OSError as exc:
        _fail(EXIT_IO, f"cannot open {tree_path}: {exc.strerror or exc}")
    try:
        return deserialize_tree(data)
    except TreeFormatError as exc:
        _fail(EXIT_VALIDATION, str(exc))


@click.group()
def main() -> None:
    """Organize high-dimensional embeddings by a hierarchy of entity features."""


@main.command()
@click.option("--embeddings", "embeddings_path", required=True, help="Embeddings CSV (id,d0,...).")
@click.option("--features", "features_path", required=True, help="Features CSV (id,<names...>).")
@click.option("--schema", "schema_path", default=None, help="Feature kind schema JSON.")
@click.option("--bins", default=3, show_default=True, help="Buckets per numeric feature.")
@click.option("--min-leaf", default=20, show_default=True, help="Minimum splittable node size.")
@click.option("--max-depth", default=10, show_default=True, help="Maximum tree depth.")
@click.option("--out", "out_path", required=True, help="Output tree JSON path.")
def build(embeddings_path, features_path, schema_path, bins, min_leaf, max_depth, out_path) -> None:
    """Build a tree from an embeddings CSV and a features CSV."""
    embeddings, table = _load_inputs(embeddings_path, features_path, schema_path)
    try:
        binary = binarize(table, BinningSpec(bin_count=bins))
        criteria = StoppingCriteria(min_node_size=min_leaf, max_depth=max_depth)
        tree = build_tree(
            embeddings, binary, criteria, fingerprint=fingerprint(embeddings, table)
        )
        payload = serialize_tree(tree)
    except (DatasetError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    try:
        Path(out_path).write_bytes(payload)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {out_path}: {exc.strerror or exc}")
    leaves = len(tree.leaves())
    click.echo(
        f"built tree: N={tree.n} p={tree.p} q={binary.q} leaves={leaves} depth={tree.depth}",
        err=True,
    )


@main.command()
@click.option("--tree", "tree_path", required=True, help="Tree JSON produced by build.")
@click.option("--embeddings", "embeddings_path", required=True)
@click.option("--features", "features_path", required=True)
@click.option("--schema", "schema_path", default=None)
def diagnose(tree_path, embeddings_path, features_path, schema_path) -> None:
    """Emit one consistency report per qualifying leaf, as JSON lines."""
    tree = _load_tree(tree_path)
    embeddings, table = _load_inputs(embeddings_path, features_path, schema_path)
    if tree.fingerprint and tree.fingerprint != fingerprint(embeddings, table):
        _fail(EXIT_VALIDATION, "fingerprint mismatch: tree was built from different data")
    minimum = max(2, 2 * tree.min_side)
    for leaf in tree.leaves():
        if leaf.count < minimum:
            continue
        try:
            report = diagnose_leaf(tree, embeddings, leaf.node_id)
        except DiagnosisError as exc:
            _fail(EXIT_VALIDATION, str(exc))
        click.echo(json.dumps(report.to_json_dict()))


@main.command()
@click.option("--tree", "tree_path", required=True, help="Tree JSON produced by build.")
def infer(tree_path) -> None:
    """Read a feature assignment JSON from stdin, write a cold-start result."""
    tree = _load_tree(tree_path)
    try:
        payload = json.load(sys.stdin)
    except json.JSONDecodeError as exc:
        _fail(EXIT_VALIDATION, f"cannot parse feature JSON: {exc}")
    if not isinstance(payload, dict):
        _fail(EXIT_VALIDATION, "feature JSON must be an object mapping feature name to value")
    try:
        result = cold_start_embed(tree, payload)
    except InferenceError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    click.echo(json.dumps(result.to_json_dict()))


@main.command()
@click.option("--tree", "tree_path", required=True, help="Tree JSON produced by build.")
@click.option("--embeddings", "embeddings_path", required=True)
@click.option("--features", "features_path", required=True)
@click.option("--schema", "schema_path", default=None)
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(tree_path, embeddings_path, features_path, schema_path, port, host) -> None:
    """Serve the explorer API over the given tree and dataset."""
    import uvicorn

    from .server import SessionState, create_app

    tree = _load_tree(tree_path)
    embeddings, table = _load_inputs(embeddings_path, features_path, schema_path)
    if tree.fingerprint and tree.fingerprint != fingerprint(embeddings, table):
        _fail(EXIT_VALIDATION, "fingerprint mismatch: tree was built from different data")
    app = create_app(SessionState(tree, embeddings, table))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
