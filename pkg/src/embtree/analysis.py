"""Applications of a built tree: leaf diagnosis and cold-start embeddings.

A leaf whose defining features fully explain its embeddings should hold a
single cluster of projected scores; a second cluster means the embedding
carries structure no feature captured.  The check here compares the best
threshold 2-split of the leaf's projected scores against a single-Gaussian
fit, penalized for the three extra parameters (one mean, one variance,
one weight).

Cold start routes an unseen entity's raw features down the tree and
returns the reached leaf's cached mean embedding as its initial vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import (
    KIND_BIN,
    KIND_EQUALS,
    BinningSpec,
    EmbeddingMatrix,
    FeatureDescriptor,
    assign_bins,
    canonical_value,
)
from .projection import project
from .split import variance_floor
from .tree import EmbeddingTree

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"

# one extra mean, variance, and weight in the 2-component model
EXTRA_PARAMS = 3


class InferenceError(ValueError):
    """Cold-start input is missing or incompatible with a required feature."""


class DiagnosisError(ValueError):
    """Leaf cannot be diagnosed (unknown, internal, or too small)."""


@dataclass(frozen=True)
class ConsistencyReport:
    """Verdict for one leaf.

    delta_log_likelihood is the gain of the best threshold 2-split over the
    single-Gaussian fit (-inf when no realizable cut exists); the verdict
    is inconsistent exactly when the gain exceeds the penalty, i.e. the
    penalized gain is positive.  cut is the score threshold of the best
    split, for locating the second cluster.
    """

    leaf_id: int
    verdict: str
    delta_log_likelihood: float
    penalty: float
    cluster_count_estimate: int
    cut: float | None

    def to_json_dict(self) -> dict:
        delta = self.delta_log_likelihood
        return {
            "leaf_id": self.leaf_id,
            "verdict": self.verdict,
            "delta_loglik": delta if math.isfinite(delta) else None,
            "penalty": self.penalty,
            "cluster_count_estimate": self.cluster_count_estimate,
            "cut": self.cut,
        }


def diagnose_leaf(tree: EmbeddingTree, embeddings: EmbeddingMatrix, leaf_id: int) -> ConsistencyReport:
    """Judge whether one leaf holds a single cluster of embeddings.

    The leaf's member embeddings are projected onto their first principal
    direction; the best hard 2-split over all realizable threshold cuts of
    the sorted scores is compared against the single-Gaussian fit.  The
    verdict is inconsistent when the log-likelihood gain exceeds
    (3/2) ln(n), the usual complexity penalty for the extra component.
    """
    try:
        node = tree.node(leaf_id)
    except KeyError:
        raise DiagnosisError(f"no node with id {leaf_id}") from None
    if not node.is_leaf:
        raise DiagnosisError(f"node {leaf_id} is not a leaf")
    if node.count < max(2, 2 * tree.min_side):
        raise DiagnosisError(f"leaf {leaf_id} is too small to diagnose ({node.count} entities)")

    scores = project(embeddings.vectors[node.entities], k=1).scores[:, 0]
    n = scores.size
    floor = variance_floor(scores, tree.var_floor_rel, tree.var_floor_abs)

    var_all = float(np.mean((scores - scores.mean()) ** 2))
    single = -0.5 * n * math.log(2.0 * math.pi * max(var_all, floor))

    two_split, cut = _best_threshold_split(scores, floor)
    penalty = 0.5 * EXTRA_PARAMS * math.log(n)
    delta = two_split - single if two_split is not None else -math.inf
    inconsistent = delta > penalty
    return ConsistencyReport(
        leaf_id=leaf_id,
        verdict=INCONSISTENT if inconsistent else CONSISTENT,
        delta_log_likelihood=delta,
        penalty=penalty,
        cluster_count_estimate=2 if inconsistent else 1,
        cut=cut,
    )


def _best_threshold_split(scores: np.ndarray, floor: float) -> tuple[float | None, float | None]:
    """Best hard 2-Gaussian log-likelihood over threshold cuts of scores.

    Scans the n-1 boundaries of the sorted scores.  A boundary is a
    candidate only if it corresponds to a realizable threshold (the values
    on either side differ) and neither group is a point mass: a group of
    identical values has zero maximum-likelihood variance, so its Gaussian
    likelihood is unbounded and would always win spuriously.  Returns
    (None, None) when no candidate survives.
    """
    ordered = np.sort(scores)
    n = ordered.size
    shifted = ordered - ordered.mean()  # guards the one-pass variances below

    prefix = np.cumsum(shifted)
    prefix_sq = np.cumsum(shifted**2)
    total, total_sq = prefix[-1], prefix_sq[-1]

    sizes = np.arange(1, n, dtype=np.float64)  # left group sizes 1..n-1
    left_mean = prefix[:-1] / sizes
    left_var = np.maximum(prefix_sq[:-1] / sizes - left_mean**2, 0.0)
    right_sizes = n - sizes
    right_mean = (total - prefix[:-1]) / right_sizes
    right_var = np.maximum((total_sq - prefix_sq[:-1]) / right_sizes - right_mean**2, 0.0)

    log_likelihood = (
        -0.5 * sizes * np.log(2.0 * math.pi * np.maximum(left_var, floor))
        - 0.5 * right_sizes * np.log(2.0 * math.pi * np.maximum(right_var, floor))
        + sizes * np.log(sizes / n)
        + right_sizes * np.log(right_sizes / n)
    )

    pos = np.arange(1, n)
    realizable = ordered[:-1] < ordered[1:]
    spread_left = ordered[0] < ordered[pos - 1]
    spread_right = ordered[pos] < ordered[-1]
    valid = realizable & spread_left & spread_right
    if not valid.any():
        return None, None
    log_likelihood[~valid] = -np.inf
    best = int(np.argmax(log_likelihood))
    cut = float((ordered[best] + ordered[best + 1]) / 2.0)
    return float(log_likelihood[best]), cut


@dataclass(frozen=True)
class PathStep:
    descriptor: FeatureDescriptor
    branch: int  # 0 = left, 1 = right


@dataclass(eq=False)
class ColdStartResult:
    leaf_id: int
    embedding: np.ndarray
    path: list[PathStep]

    def to_json_dict(self) -> dict:
        return {
            "leaf_id": self.leaf_id,
            "embedding": [float(x) for x in self.embedding],
            "path": [
                {
                    "feature": step.descriptor.name,
                    "predicate": step.descriptor.predicate,
                    "branch": step.branch,
                }
                for step in self.path
            ],
        }


def cold_start_embed(tree: EmbeddingTree, features: dict) -> ColdStartResult:
    """Produce an initial embedding for an unseen entity from its features.

    Descends from the root, at each split taking the branch matching the
    entity's bit on the split feature; numeric values are bucketed with the
    boundaries stored at build time.  Returns the reached leaf's cached
    mean embedding and the decision path.
    """
    node = tree.root
    path: list[PathStep] = []
    while not node.is_leaf:
        descriptor = tree.descriptors[node.split.feature_index]
        if descriptor.name not in features:
            raise InferenceError(
                f"missing feature {descriptor.name!r} required at depth {node.depth}"
            )
        bit = feature_bit(descriptor, features[descriptor.name], tree.binning)
        path.append(PathStep(descriptor, bit))
        node = node.right if bit else node.left
    return ColdStartResult(leaf_id=node.node_id, embedding=node.mean.copy(), path=path)


def feature_bit(descriptor: FeatureDescriptor, value, binning: BinningSpec) -> int:
    """Evaluate one derived binary feature on a raw input value."""
    if descriptor.kind == KIND_EQUALS:
        return int(canonical_value(value) == descriptor.value)
    if descriptor.kind == KIND_BIN:
        try:
            numeric = float(value)
        except (TypeError, ValueError) as exc:
            raise InferenceError(
                f"feature {descriptor.name!r} expects a numeric value, got {value!r}"
            ) from exc
        boundaries = binning.boundaries.get(descriptor.name)
        if boundaries is None:
            raise InferenceError(f"no stored bin boundaries for feature {descriptor.name!r}")
        assigned = int(assign_bins(numeric, boundaries)[0])
        return int(assigned == descriptor.bin)
    raise InferenceError(f"unknown feature kind {descriptor.kind!r}")
