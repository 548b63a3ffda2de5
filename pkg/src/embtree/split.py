"""Hard two-Gaussian likelihood scoring of candidate binary splits.

A binary feature partitions a node's 1D-projected scores into two groups.
Each group is modeled as a Gaussian whose parameters come straight from
the group statistics (a hard-assignment mixture fit: memberships are
dictated by the feature bit, so the usual per-sample latent cluster
probabilities are 0/1 and never materialized).  The resulting maximized
log-likelihood is the split score; the feature maximizing it wins.

With group sizes s and n-s, means m1/m2, population variances v1/v2 and
weights w1 = s/n, w2 = (n-s)/n, the score is

    L = -(s/2) log(2 pi v1) - ((n-s)/2) log(2 pi v2)
        + s log w1 + (n-s) log w2

where additive terms independent of the parameters are dropped.  Every
candidate split at a node shares the same parameter count, so no explicit
complexity penalty is needed for the comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Keeps the log finite when a group has zero variance; scaled to the score
# spread so the floor is unit-free.
VAR_FLOOR_REL = 1e-12
VAR_FLOOR_ABS = 1e-300


@dataclass(frozen=True)
class SplitEvaluation:
    """Score of one binary feature on one node's projected scores.

    s counts the bit-0 group, n_minus_s the bit-1 group.  Means and
    variances are the per-group maximum-likelihood estimates (variances
    divide by the group size); the variance floor is applied only inside
    the log when computing log_likelihood.  Invalid evaluations (a side
    smaller than min_side) carry -inf log_likelihood.
    """

    feature_index: int
    s: int
    n_minus_s: int
    mu1: float
    mu2: float
    var1: float
    var2: float
    w1: float
    w2: float
    log_likelihood: float
    valid: bool


def variance_floor(scores: np.ndarray, rel: float = VAR_FLOOR_REL, abs_: float = VAR_FLOOR_ABS) -> float:
    spread = float(np.max(scores) - np.min(scores))
    return max(rel * spread * spread, abs_)


def _group_contribution(count: int, values: np.ndarray, weight: float, floor: float) -> tuple[float, float, float]:
    mean = float(values.mean())
    var = float(np.mean((values - mean) ** 2))
    contrib = -0.5 * count * math.log(2.0 * math.pi * max(var, floor)) + count * math.log(weight)
    return mean, var, contrib


def embedding_bic(
    scores,
    bits,
    feature_index: int = 0,
    *,
    min_side: int = 1,
    var_floor_rel: float = VAR_FLOOR_REL,
    var_floor_abs: float = VAR_FLOOR_ABS,
) -> SplitEvaluation:
    """Score one binary feature by the hard two-Gaussian log-likelihood.

    scores and bits must be aligned 1D arrays with at least two entries.
    Degenerate partitions (either side smaller than min_side) come back
    with valid=False and a -inf score rather than raising.
    """
    scores = np.asarray(scores, dtype=np.float64)
    bits = np.asarray(bits)
    n = scores.size
    if n < 2:
        raise ValueError("need at least two scores to evaluate a split")
    if bits.shape != scores.shape:
        raise ValueError("scores and bits must have the same length")

    ones = bits != 0
    s = int(n - np.count_nonzero(ones))
    n_minus_s = n - s
    w1 = s / n
    w2 = n_minus_s / n

    if s < min_side or n_minus_s < min_side:
        mu1 = var1 = mu2 = var2 = math.nan
        if s > 0:
            group = scores[~ones]
            mu1, var1 = float(group.mean()), float(np.mean((group - group.mean()) ** 2))
        if n_minus_s > 0:
            group = scores[ones]
            mu2, var2 = float(group.mean()), float(np.mean((group - group.mean()) ** 2))
        return SplitEvaluation(
            feature_index, s, n_minus_s, mu1, mu2, var1, var2, w1, w2, -math.inf, False
        )

    floor = variance_floor(scores, var_floor_rel, var_floor_abs)
    mu1, var1, c1 = _group_contribution(s, scores[~ones], w1, floor)
    mu2, var2, c2 = _group_contribution(n_minus_s, scores[ones], w2, floor)
    return SplitEvaluation(
        feature_index, s, n_minus_s, mu1, mu2, var1, var2, w1, w2, c1 + c2, True
    )


def best_split(
    scores,
    bit_matrix,
    active_features=None,
    *,
    min_side: int = 1,
    var_floor_rel: float = VAR_FLOOR_REL,
    var_floor_abs: float = VAR_FLOOR_ABS,
) -> SplitEvaluation | None:
    """Evaluate candidate features and return the best valid one.

    Ties break toward the lowest feature index (iteration is in ascending
    index order and a candidate must be strictly better to displace the
    incumbent).  Returns None when no feature yields a valid split.
    """
    scores = np.asarray(scores, dtype=np.float64)
    bit_matrix = np.asarray(bit_matrix)
    if bit_matrix.ndim != 2 or bit_matrix.shape[0] != scores.size:
        raise ValueError("bit matrix must be n x q aligned with scores")
    if active_features is None:
        active_features = range(bit_matrix.shape[1])

    best: SplitEvaluation | None = None
    for index in sorted(int(i) for i in active_features):
        if not 0 <= index < bit_matrix.shape[1]:
            raise ValueError(f"feature index {index} out of range")
        evaluation = embedding_bic(
            scores,
            bit_matrix[:, index],
            index,
            min_side=min_side,
            var_floor_rel=var_floor_rel,
            var_floor_abs=var_floor_abs,
        )
        if not evaluation.valid:
            continue
        if best is None or evaluation.log_likelihood > best.log_likelihood:
            best = evaluation
    return best
