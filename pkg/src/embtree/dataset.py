"""Loading, validation, and binarization of embedding + feature data.

The tree builder consumes an embedding matrix aligned row-by-row with a
table of raw entity features.  Raw features are reduced to binary yes/no
indicator columns: one column per categorical value, one column per
quantile bucket of a numeric feature.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# descriptor kinds
KIND_EQUALS = "categorical-equals"
KIND_BIN = "numeric-bin"


class DatasetError(ValueError):
    """Input data violates the dataset contract."""


@dataclass(eq=False)
class EmbeddingMatrix:
    """N aligned entity ids and their p-dimensional embedding vectors."""

    entity_ids: list[str]
    vectors: np.ndarray  # (n, p) float64

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1 or self.vectors.shape[1] < 1:
            raise DatasetError("embedding matrix must be n x p with n >= 1, p >= 1")
        if len(self.entity_ids) != self.vectors.shape[0]:
            raise DatasetError("entity id count does not match embedding row count")
        if not np.isfinite(self.vectors).all():
            i, j = np.argwhere(~np.isfinite(self.vectors))[0]
            raise DatasetError(f"non-finite value at row {i}, dim {j}")
        seen: set[str] = set()
        for entity in self.entity_ids:
            if entity in seen:
                raise DatasetError(f"duplicate id {entity!r}")
            seen.add(entity)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def p(self) -> int:
        return self.vectors.shape[1]


@dataclass
class FeatureColumn:
    name: str
    kind: str  # NUMERIC or CATEGORICAL
    values: list  # floats for numeric, raw strings for categorical


@dataclass
class RawFeatureTable:
    """Raw per-entity features, in the same row order as the embeddings."""

    entity_ids: list[str]
    columns: list[FeatureColumn]

    def __post_init__(self) -> None:
        for col in self.columns:
            if len(col.values) != len(self.entity_ids):
                raise DatasetError(f"feature {col.name!r} has wrong length")
            if col.kind not in (NUMERIC, CATEGORICAL):
                raise DatasetError(f"feature {col.name!r} has unknown kind {col.kind!r}")

    def column(self, name: str) -> FeatureColumn:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]


@dataclass
class BinningSpec:
    """Bucketing policy for numeric features.

    `boundaries` maps feature name to the quantile cut points computed when
    the feature was binarized; it is filled by :func:`binarize` and reused
    verbatim when routing unseen entities.
    """

    bin_count: int = 3
    boundaries: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.bin_count < 2:
            raise DatasetError("bin_count must be >= 2")


@dataclass(frozen=True)
class FeatureDescriptor:
    """Provenance of one derived binary column.

    For `categorical-equals` columns the bit is 1 when the source value
    equals `value`.  For `numeric-bin` columns the bit is 1 when the source
    value falls into bucket `bin`, whose interval is [low, high) with None
    meaning unbounded.
    """

    name: str
    kind: str
    predicate: str
    value: str | None = None
    bin: int | None = None
    low: float | None = None
    high: float | None = None


@dataclass(eq=False)
class BinaryFeatureMatrix:
    """N x q matrix of 0/1 indicator bits plus per-column provenance."""

    bits: np.ndarray  # (n, q) uint8
    descriptors: list[FeatureDescriptor]
    binning: BinningSpec

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 2:
            raise DatasetError("bit matrix must be two-dimensional")
        if self.bits.shape[1] != len(self.descriptors):
            raise DatasetError("descriptor count does not match bit columns")
        if not np.isin(self.bits, (0, 1)).all():
            raise DatasetError("bit matrix entries must be 0 or 1")

    @property
    def q(self) -> int:
        return self.bits.shape[1]


def bin_numeric(column, spec: BinningSpec) -> tuple[np.ndarray, tuple[float, ...]]:
    """Bucket a numeric column into ``spec.bin_count`` quantile bins.

    Cut points are the k/bin_count quantiles (linear interpolation between
    order statistics).  Returns (assignments, boundaries) where assignment
    j means boundaries[j-1] <= value < boundaries[j], with the first bucket
    open below and the last open above.
    """
    values = np.asarray(column, dtype=np.float64)
    if values.ndim != 1:
        raise DatasetError("numeric column must be one-dimensional")
    b = spec.bin_count
    if values.size < b:
        raise DatasetError(f"cannot bin {values.size} values into {b} buckets")
    qs = [k / b for k in range(1, b)]
    boundaries = tuple(float(x) for x in np.quantile(values, qs, method="linear"))
    return assign_bins(values, boundaries), boundaries


def assign_bins(values, boundaries: tuple[float, ...]) -> np.ndarray:
    """Map values to bucket indices for the given cut points.

    When every cut point is identical the half-open intervals degenerate;
    values at the cut then collapse into the first bucket so that constant
    columns land in bucket 0.
    """
    values = np.atleast_1d(np.asarray(values, dtype=np.float64))
    cuts = np.asarray(boundaries, dtype=np.float64)
    if cuts[0] == cuts[-1]:
        return np.where(values <= cuts[0], 0, len(cuts)).astype(np.int64)
    return np.searchsorted(cuts, values, side="right").astype(np.int64)


def _fmt(x: float) -> str:
    return format(x, ".6g")


def _is_binary_categorical(values: list[str]) -> bool:
    return sorted(set(values)) == ["0", "1"]


def _is_binary_numeric(values: np.ndarray) -> bool:
    distinct = set(float(v) for v in values)
    return distinct == {0.0, 1.0}


def binarize(table: RawFeatureTable, spec: BinningSpec | None = None) -> BinaryFeatureMatrix:
    """Expand every raw feature into binary indicator columns.

    Categorical features get one column per distinct value (lexicographic
    order); numeric features are quantile-binned first.  Features that are
    already binary (values exactly {0, 1}) pass through as a single
    indicator for value 1, since the complement column carries no
    additional split.
    """
    spec = spec or BinningSpec()
    n = len(table.entity_ids)
    columns: list[np.ndarray] = []
    descriptors: list[FeatureDescriptor] = []
    resolved = BinningSpec(bin_count=spec.bin_count, boundaries=dict(spec.boundaries))

    for col in table.columns:
        if col.kind == CATEGORICAL:
            values = [str(v) for v in col.values]
            if _is_binary_categorical(values):
                bits = np.fromiter((v == "1" for v in values), dtype=np.uint8, count=n)
                columns.append(bits)
                descriptors.append(
                    FeatureDescriptor(col.name, KIND_EQUALS, f"{col.name} == 1", value="1")
                )
                continue
            for target in sorted(set(values)):
                bits = np.fromiter((v == target for v in values), dtype=np.uint8, count=n)
                columns.append(bits)
                descriptors.append(
                    FeatureDescriptor(
                        col.name, KIND_EQUALS, f"{col.name} == {target}", value=target
                    )
                )
        else:
            values = np.asarray(col.values, dtype=np.float64)
            if _is_binary_numeric(values):
                columns.append((values == 1.0).astype(np.uint8))
                descriptors.append(
                    FeatureDescriptor(col.name, KIND_EQUALS, f"{col.name} == 1", value="1")
                )
                continue
            assignments, boundaries = bin_numeric(values, spec)
            resolved.boundaries[col.name] = boundaries
            edges = [None, *boundaries, None]
            for j in range(spec.bin_count):
                lo, hi = edges[j], edges[j + 1]
                if lo is None:
                    predicate = f"{col.name} < {_fmt(hi)}"
                elif hi is None:
                    predicate = f"{col.name} >= {_fmt(lo)}"
                else:
                    predicate = f"{_fmt(lo)} <= {col.name} < {_fmt(hi)}"
                columns.append((assignments == j).astype(np.uint8))
                descriptors.append(
                    FeatureDescriptor(col.name, KIND_BIN, predicate, bin=j, low=lo, high=hi)
                )

    if not columns:
        raise DatasetError("feature table produced no binary columns")
    bits = np.column_stack(columns)
    return BinaryFeatureMatrix(bits=bits, descriptors=descriptors, binning=resolved)


def canonical_value(value) -> str:
    """Render a raw feature value the way CSV cells are matched.

    Booleans map to "1"/"0"; floats use minimal formatting so that 5814.0
    matches the CSV cell "5814".
    """
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, "g")
    return str(value)


# ---------------------------------------------------------------------------
# CSV ingestion


def load_dataset(
    embedding_source, feature_source, schema_source=None
) -> tuple[EmbeddingMatrix, RawFeatureTable]:
    """Load and join the embeddings CSV and features CSV on entity id.

    Row order follows the embeddings file.  Entities present in only one
    of the two files are rejected, as are duplicate ids, missing cells,
    and non-finite embedding values.
    """
    embeddings = _read_embeddings(embedding_source)
    feat_ids, names, rows = _read_feature_rows(feature_source)
    schema = _read_schema(schema_source, names) if schema_source is not None else {}

    by_id: dict[str, list[str]] = {}
    for entity, row in zip(feat_ids, rows):
        if entity in by_id:
            raise DatasetError(f"duplicate id {entity!r}")
        by_id[entity] = row
    for entity in embeddings.entity_ids:
        if entity not in by_id:
            raise DatasetError(f"unmatched entity {entity}")
    known = set(embeddings.entity_ids)
    for entity in feat_ids:
        if entity not in known:
            raise DatasetError(f"unmatched entity {entity}")

    ordered = [by_id[e] for e in embeddings.entity_ids]
    columns = []
    for j, name in enumerate(names):
        raw = [row[j] for row in ordered]
        kind = schema.get(name) or _infer_kind(raw)
        if kind == NUMERIC:
            columns.append(FeatureColumn(name, NUMERIC, _parse_numeric(name, raw)))
        else:
            columns.append(FeatureColumn(name, CATEGORICAL, raw))
    table = RawFeatureTable(entity_ids=list(embeddings.entity_ids), columns=columns)
    return embeddings, table


def _read_embeddings(source) -> EmbeddingMatrix:
    header, data_rows = _read_csv(source)
    if not header or header[0] != "id" or len(header) < 2:
        raise DatasetError("embeddings header must be id,d0,...,d{p-1}")
    p = len(header) - 1
    ids: list[str] = []
    vectors = np.empty((len(data_rows), p), dtype=np.float64)
    for i, row in enumerate(data_rows):
        if len(row) != p + 1:
            raise DatasetError(f"embeddings row {i}: expected {p + 1} cells, got {len(row)}")
        ids.append(row[0])
        for j, cell in enumerate(row[1:]):
            if cell.strip() == "":
                raise DatasetError(f"missing cell at row {i}, dim {j}")
            try:
                value = float(cell)
            except ValueError as exc:
                raise DatasetError(
                    f"cannot parse embedding value {cell!r} at row {i}, dim {j}"
                ) from exc
            if not math.isfinite(value):
                raise DatasetError(f"non-finite value at row {i}, dim {j}")
            vectors[i, j] = value
    if not ids:
        raise DatasetError("embeddings file has no data rows")
    return EmbeddingMatrix(entity_ids=ids, vectors=vectors)


def _read_feature_rows(source) -> tuple[list[str], list[str], list[list[str]]]:
    header, data_rows = _read_csv(source)
    if not header or header[0] != "id" or len(header) < 2:
        raise DatasetError("features header must be id,<feature names...>")
    names = header[1:]
    if len(set(names)) != len(names):
        raise DatasetError("features header contains duplicate column names")
    ids: list[str] = []
    rows: list[list[str]] = []
    for i, row in enumerate(data_rows):
        if len(row) != len(names) + 1:
            raise DatasetError(f"features row {i}: expected {len(names) + 1} cells, got {len(row)}")
        for name, cell in zip(names, row[1:]):
            if cell.strip() == "":
                raise DatasetError(f"missing cell for entity {row[0]!r} in feature {name!r}")
        ids.append(row[0])
        rows.append(row[1:])
    if not ids:
        raise DatasetError("features file has no data rows")
    return ids, names, rows


def _read_csv(source) -> tuple[list[str] | None, list[list[str]]]:
    if hasattr(source, "read"):
        reader = csv.reader(source)
        rows = list(reader)
    else:
        with Path(source).open(newline="") as handle:
            rows = list(csv.reader(handle))
    if not rows:
        raise DatasetError("empty CSV input")
    return rows[0], rows[1:]


def _read_schema(source, names: list[str]) -> dict[str, str]:
    if hasattr(source, "read"):
        raw = source.read()
    else:
        raw = Path(source).read_text()
    try:
        schema = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"cannot parse schema JSON: {exc}") from exc
    if not isinstance(schema, dict):
        raise DatasetError("schema must be a JSON object mapping feature name to kind")
    for name, kind in schema.items():
        if name not in names:
            raise DatasetError(f"schema names unknown feature {name!r}")
        if kind not in (NUMERIC, CATEGORICAL):
            raise DatasetError(f"schema kind for {name!r} must be numeric or categorical")
    return schema


def _infer_kind(raw: list[str]) -> str:
    try:
        for cell in raw:
            float(cell)
    except ValueError:
        return CATEGORICAL
    return NUMERIC


def _parse_numeric(name: str, raw: list[str]) -> list[float]:
    values = []
    for cell in raw:
        try:
            value = float(cell)
        except ValueError as exc:
            raise DatasetError(f"feature {name!r}: cannot parse {cell!r} as numeric") from exc
        if not math.isfinite(value):
            raise DatasetError(f"feature {name!r}: non-finite value {cell!r}")
        values.append(value)
    return values


def fingerprint(embeddings: EmbeddingMatrix, table: RawFeatureTable) -> str:
    """Content hash binding a built tree to the exact inputs it came from."""
    digest = hashlib.sha256()
    digest.update(f"{embeddings.n},{embeddings.p}".encode())
    for entity in embeddings.entity_ids:
        digest.update(entity.encode())
        digest.update(b"\x1f")
    digest.update(np.ascontiguousarray(embeddings.vectors, dtype="<f8").tobytes())
    for col in table.columns:
        digest.update(f"\x1e{col.name}\x1f{col.kind}\x1f".encode())
        if col.kind == NUMERIC:
            digest.update(np.asarray(col.values, dtype="<f8").tobytes())
        else:
            for v in col.values:
                digest.update(str(v).encode())
                digest.update(b"\x1f")
    return digest.hexdigest()
