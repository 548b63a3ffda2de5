"""Recursive tree construction over binary features, plus JSON round-trip.

Every node projects its member embeddings onto their first principal
direction and keeps the feature whose bit best separates the projected
scores into two Gaussians.  Recursion stops when a node is too small, too
deep, or no feature yields a valid split.  Construction is deterministic:
identical inputs give byte-identical serialized trees, with or without
parallel sibling builds.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import BinaryFeatureMatrix, BinningSpec, EmbeddingMatrix, FeatureDescriptor
from .projection import project
from .split import VAR_FLOOR_ABS, VAR_FLOOR_REL, SplitEvaluation, best_split

SCHEMA_VERSION = 1

# sibling subtrees above this depth may build on worker threads
PARALLEL_DEPTH = 2

INTERNAL = "internal"
LEAF = "leaf"


class TreeFormatError(ValueError):
    """Serialized tree is malformed or has an unsupported schema version."""


@dataclass(frozen=True)
class StoppingCriteria:
    """Recursion bounds: a node may split only if its entity count is at
    least min_node_size and its depth is below max_depth."""

    min_node_size: int = 20
    max_depth: int = 10

    def __post_init__(self) -> None:
        if self.min_node_size < 2:
            raise ValueError("min_node_size must be >= 2")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")

    def allows_split(self, count: int, depth: int) -> bool:
        return count >= self.min_node_size and depth < self.max_depth


@dataclass(eq=False)
class TreeNode:
    node_id: int
    depth: int
    count: int
    mean: np.ndarray  # (p,) mean embedding of members
    split: SplitEvaluation | None = None
    left: TreeNode | None = None  # bit == 0 branch
    right: TreeNode | None = None  # bit == 1 branch
    entities: np.ndarray | None = None  # ascending member indices, leaves only

    @property
    def kind(self) -> str:
        return LEAF if self.split is None else INTERNAL

    @property
    def is_leaf(self) -> bool:
        return self.split is None


@dataclass(eq=False)
class EmbeddingTree:
    root: TreeNode
    criteria: StoppingCriteria
    binning: BinningSpec
    descriptors: list[FeatureDescriptor]
    fingerprint: str = ""
    min_side: int = 1
    var_floor_rel: float = VAR_FLOOR_REL
    var_floor_abs: float = VAR_FLOOR_ABS
    _by_id: dict[int, TreeNode] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._by_id = {node.node_id: node for node in self.nodes()}

    def nodes(self):
        """Yield nodes in breadth-first order (matching node_id order)."""
        queue = [self.root]
        while queue:
            node = queue.pop(0)
            yield node
            if node.left is not None:
                queue.append(node.left)
            if node.right is not None:
                queue.append(node.right)

    def leaves(self) -> list[TreeNode]:
        return [node for node in self.nodes() if node.is_leaf]

    def node(self, node_id: int) -> TreeNode:
        return self._by_id[node_id]

    @property
    def n(self) -> int:
        return self.root.count

    @property
    def p(self) -> int:
        return int(self.root.mean.shape[0])

    @property
    def depth(self) -> int:
        return max(node.depth for node in self.nodes())


def build_tree(
    embeddings: EmbeddingMatrix,
    features: BinaryFeatureMatrix,
    criteria: StoppingCriteria | None = None,
    *,
    min_side: int = 1,
    var_floor_rel: float = VAR_FLOOR_REL,
    var_floor_abs: float = VAR_FLOOR_ABS,
    fingerprint: str = "",
    parallel: bool = False,
) -> EmbeddingTree:
    """Grow a tree over the aligned embeddings and binary feature matrix.

    At each splittable node the member embeddings are projected onto their
    first principal direction and every feature that is not constant on the
    node's subset is scored; the node splits on the best valid feature
    (left = bit 0, right = bit 1) and recurses.  With parallel=True sibling
    subtrees near the root build on worker threads; the result is identical
    to the sequential build.
    """
    criteria = criteria or StoppingCriteria()
    if features.bits.shape[0] != embeddings.n:
        raise ValueError("embeddings and feature bits disagree on entity count")
    if embeddings.n == 0:
        raise ValueError("cannot build a tree from an empty dataset")

    vectors = embeddings.vectors
    bits = features.bits

    def grow(indices: np.ndarray, depth: int) -> TreeNode:
        count = indices.size
        node = TreeNode(
            node_id=-1,
            depth=depth,
            count=count,
            mean=vectors[indices].mean(axis=0),
        )
        if not criteria.allows_split(count, depth):
            node.entities = indices
            return node

        scores = project(vectors[indices], k=1).scores[:, 0]
        sub_bits = bits[indices]
        col_ones = sub_bits.sum(axis=0, dtype=np.int64)
        active = np.flatnonzero((col_ones > 0) & (col_ones < count))
        winner = best_split(
            scores,
            sub_bits,
            active,
            min_side=min_side,
            var_floor_rel=var_floor_rel,
            var_floor_abs=var_floor_abs,
        )
        if winner is None:
            node.entities = indices
            return node

        mask = sub_bits[:, winner.feature_index] != 0
        left_idx = indices[~mask]
        right_idx = indices[mask]
        node.split = winner
        if parallel and depth < PARALLEL_DEPTH:
            with ThreadPoolExecutor(max_workers=2) as pool:
                left_future = pool.submit(grow, left_idx, depth + 1)
                right_future = pool.submit(grow, right_idx, depth + 1)
                node.left = left_future.result()
                node.right = right_future.result()
        else:
            node.left = grow(left_idx, depth + 1)
            node.right = grow(right_idx, depth + 1)
        return node

    root = grow(np.arange(embeddings.n, dtype=np.int64), 0)
    _assign_ids(root)
    return EmbeddingTree(
        root=root,
        criteria=criteria,
        binning=features.binning,
        descriptors=list(features.descriptors),
        fingerprint=fingerprint,
        min_side=min_side,
        var_floor_rel=var_floor_rel,
        var_floor_abs=var_floor_abs,
    )


def _assign_ids(root: TreeNode) -> None:
    # breadth-first ids are stable references for serialization and the UI
    queue = [root]
    next_id = 0
    while queue:
        node = queue.pop(0)
        node.node_id = next_id
        next_id += 1
        if node.left is not None:
            queue.append(node.left)
        if node.right is not None:
            queue.append(node.right)


# ---------------------------------------------------------------------------
# JSON serialization
#
# The writer is hand-rolled so floats are always emitted with 17 significant
# digits (lossless for float64) and the byte stream is reproducible.


def serialize_tree(tree: EmbeddingTree) -> bytes:
    document = {
        "version": SCHEMA_VERSION,
        "params": {
            "min_node_size": tree.criteria.min_node_size,
            "max_depth": tree.criteria.max_depth,
            "bin_count": tree.binning.bin_count,
            "boundaries": {
                name: [float(b) for b in cuts] for name, cuts in tree.binning.boundaries.items()
            },
            "min_side": tree.min_side,
            "var_floor_rel": tree.var_floor_rel,
            "var_floor_abs": tree.var_floor_abs,
        },
        "fingerprint": tree.fingerprint,
        "features": [
            {
                "name": d.name,
                "kind": d.kind,
                "predicate": d.predicate,
                "value": d.value,
                "bin": d.bin,
                "low": d.low,
                "high": d.high,
            }
            for d in tree.descriptors
        ],
        "root": _node_document(tree.root),
    }
    return _write_json(document).encode("utf-8")


def _node_document(node: TreeNode) -> dict:
    split = None
    if node.split is not None:
        ev = node.split
        split = {
            "feature": ev.feature_index,
            "evaluation": {
                "s": ev.s,
                "mu1": ev.mu1,
                "var1": ev.var1,
                "mu2": ev.mu2,
                "var2": ev.var2,
                "w1": ev.w1,
                "w2": ev.w2,
                "loglik": ev.log_likelihood,
            },
        }
    return {
        "id": node.node_id,
        "kind": node.kind,
        "count": node.count,
        "depth": node.depth,
        "split": split,
        "left": _node_document(node.left) if node.left is not None else None,
        "right": _node_document(node.right) if node.right is not None else None,
        "entities": [int(i) for i in node.entities] if node.entities is not None else None,
        "mean": [float(x) for x in node.mean],
    }


def _write_json(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise TreeFormatError("cannot serialize non-finite number")
        if value == 0.0:
            return "0"  # avoid "-0", which would re-parse as an int
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_write_json(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{_write_json(v)}" for k, v in value.items()) + "}"
    raise TreeFormatError(f"cannot serialize value of type {type(value).__name__}")


def deserialize_tree(data: bytes | str) -> EmbeddingTree:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        document = json.loads(data)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"malformed tree JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise TreeFormatError("tree JSON must be an object")
    if document.get("version") != SCHEMA_VERSION:
        raise TreeFormatError(
            f"unsupported schema version {document.get('version')!r}, expected {SCHEMA_VERSION}"
        )
    try:
        params = document["params"]
        criteria = StoppingCriteria(
            min_node_size=params["min_node_size"], max_depth=params["max_depth"]
        )
        binning = BinningSpec(
            bin_count=params["bin_count"],
            boundaries={
                name: tuple(float(b) for b in cuts)
                for name, cuts in params["boundaries"].items()
            },
        )
        descriptors = [
            FeatureDescriptor(
                name=f["name"],
                kind=f["kind"],
                predicate=f["predicate"],
                value=f["value"],
                bin=f["bin"],
                low=f["low"],
                high=f["high"],
            )
            for f in document["features"]
        ]
        root = _node_from_document(document["root"])
        return EmbeddingTree(
            root=root,
            criteria=criteria,
            binning=binning,
            descriptors=descriptors,
            fingerprint=document["fingerprint"],
            min_side=params["min_side"],
            var_floor_rel=params["var_floor_rel"],
            var_floor_abs=params["var_floor_abs"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, TreeFormatError):
            raise
        raise TreeFormatError(f"tree JSON missing or invalid field: {exc}") from exc


def _node_from_document(doc: dict) -> TreeNode:
    split = None
    if doc["split"] is not None:
        ev = doc["split"]["evaluation"]
        s = int(ev["s"])
        count = int(doc["count"])
        split = SplitEvaluation(
            feature_index=int(doc["split"]["feature"]),
            s=s,
            n_minus_s=count - s,
            mu1=float(ev["mu1"]),
            mu2=float(ev["mu2"]),
            var1=float(ev["var1"]),
            var2=float(ev["var2"]),
            w1=float(ev["w1"]),
            w2=float(ev["w2"]),
            log_likelihood=float(ev["loglik"]),
            valid=True,
        )
    node = TreeNode(
        node_id=int(doc["id"]),
        depth=int(doc["depth"]),
        count=int(doc["count"]),
        mean=np.asarray(doc["mean"], dtype=np.float64),
        split=split,
        entities=(
            np.asarray(doc["entities"], dtype=np.int64) if doc["entities"] is not None else None
        ),
    )
    if doc["left"] is not None:
        node.left = _node_from_document(doc["left"])
    if doc["right"] is not None:
        node.right = _node_from_document(doc["right"])
    if (node.split is None) != (node.left is None and node.right is None):
        raise TreeFormatError(f"node {node.node_id} mixes leaf and internal fields")
    return node
