"""Read-only HTTP API over a built tree and its dataset.

Backs the three explorer views: tree topology, per-node 2D projections,
and a sortable/filterable entity table.  The tree and dataset are loaded
once and never mutated; per-node projections are computed lazily and
cached (recomputation is deterministic, so concurrent fills for the same
node are harmless).
"""

from __future__ import annotations

from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, RootModel

from .analysis import DiagnosisError, InferenceError, cold_start_embed, diagnose_leaf
from .dataset import EmbeddingMatrix, RawFeatureTable
from .projection import project
from .tree import EmbeddingTree, TreeNode

DEFAULT_PAGE_LIMIT = 50


class SplitOut(BaseModel):
    feature: int
    name: str
    predicate: str


class TopologyNode(BaseModel):
    id: int
    kind: str
    count: int
    depth: int
    split: Optional[SplitOut] = None
    left: Optional["TopologyNode"] = None
    right: Optional["TopologyNode"] = None


class TopologyOut(BaseModel):
    n: int
    root: TopologyNode


class ProjectionPoint(BaseModel):
    entity_id: str
    x: float
    y: float


class EntityPage(BaseModel):
    total: int
    rows: list[dict[str, Any]]


class DiagnosisOut(BaseModel):
    leaf_id: int
    verdict: str
    delta_loglik: Optional[float]
    penalty: float
    cluster_count_estimate: int
    cut: Optional[float]


class PathStepOut(BaseModel):
    feature: str
    predicate: str
    branch: int


class InferOut(BaseModel):
    leaf_id: int
    embedding: list[float]
    path: list[PathStepOut]


class InferRequest(RootModel[dict[str, bool | int | float | str]]):
    """Flat map of raw feature name to value."""


TopologyNode.model_rebuild()


class SessionState:
    """Loaded tree + dataset plus the append-only projection cache."""

    def __init__(self, tree: EmbeddingTree, embeddings: EmbeddingMatrix, table: RawFeatureTable):
        self.tree = tree
        self.embeddings = embeddings
        self.table = table
        self._projections: dict[int, list[ProjectionPoint]] = {}
        self._members: dict[int, np.ndarray] = {}
        self._collect_members(tree.root)

    def _collect_members(self, node: TreeNode) -> np.ndarray:
        if node.is_leaf:
            members = node.entities
        else:
            members = np.concatenate(
                [self._collect_members(node.left), self._collect_members(node.right)]
            )
            members = np.sort(members)
        self._members[node.node_id] = members
        return members

    def members(self, node_id: int) -> np.ndarray:
        return self._members[node_id]

    def projection(self, node_id: int) -> list[ProjectionPoint]:
        cached = self._projections.get(node_id)
        if cached is not None:
            return cached
        members = self._members[node_id]
        k = min(2, self.embeddings.p)
        result = project(self.embeddings.vectors[members], k=k)
        points = []
        for row, index in zip(result.scores, members):
            x = float(row[0])
            y = float(row[1]) if k == 2 else 0.0
            points.append(ProjectionPoint(entity_id=self.embeddings.entity_ids[index], x=x, y=y))
        self._projections[node_id] = points
        return points


def create_app(state: SessionState | None = None) -> FastAPI:
    app = FastAPI(title="embtree explorer API")
    app.state.session = state

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(HTTPException)
    async def http_error(request: Request, exc: HTTPException) -> JSONResponse:
        return JSONResponse(status_code=exc.status_code, content={"error": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    def session() -> SessionState:
        if app.state.session is None:
            raise HTTPException(status_code=503, detail="no tree loaded")
        return app.state.session

    def find_node(node_id: int) -> TreeNode:
        try:
            return session().tree.node(node_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no node with id {node_id}") from None

    @app.get("/api/tree", response_model=TopologyOut, response_model_exclude_none=False)
    def get_tree() -> TopologyOut:
        """Tree structure without entity lists, for the tree view."""
        tree = session().tree
        return TopologyOut(n=tree.n, root=_topology(tree, tree.root))

    @app.get("/api/node/{node_id}/projection", response_model=list[ProjectionPoint])
    def get_projection(node_id: int) -> list[ProjectionPoint]:
        """2D principal projection of the node's member embeddings."""
        find_node(node_id)
        return session().projection(node_id)

    @app.get("/api/node/{node_id}/entities", response_model=EntityPage)
    def get_entities(
        node_id: int,
        offset: int = 0,
        limit: int = DEFAULT_PAGE_LIMIT,
        sort_by: str = "entity_id",
        order: str = "asc",
        filter: str = "",
        include_embedding: bool = False,
    ) -> EntityPage:
        """One page of the node's entities as table rows."""
        node = find_node(node_id)
        state = session()
        if offset < 0:
            raise HTTPException(status_code=400, detail="offset must be >= 0")
        if limit < 0:
            raise HTTPException(status_code=400, detail="limit must be >= 0")
        if order not in ("asc", "desc"):
            raise HTTPException(status_code=400, detail="order must be 'asc' or 'desc'")
        names = state.table.names
        if sort_by != "entity_id" and sort_by not in names:
            raise HTTPException(status_code=400, detail=f"unknown sort column {sort_by!r}")

        members = state.members(node_id)
        rows = []
        for index in members:
            row: dict[str, Any] = {"entity_id": state.embeddings.entity_ids[index]}
            for col in state.table.columns:
                row[col.name] = col.values[index]
            if include_embedding:
                row["embedding"] = [float(x) for x in state.embeddings.vectors[index]]
            rows.append(row)

        if filter:
            rows = [
                row
                for row in rows
                if any(filter in str(row[key]) for key in ("entity_id", *names))
            ]
        total = len(rows)
        rows.sort(key=lambda row: row[sort_by], reverse=(order == "desc"))
        return EntityPage(total=total, rows=rows[offset : offset + limit])

    @app.get("/api/node/{node_id}/diagnosis", response_model=DiagnosisOut)
    def get_diagnosis(node_id: int) -> DiagnosisOut:
        """Single-cluster vs two-cluster verdict for a leaf."""
        find_node(node_id)
        state = session()
        try:
            report = diagnose_leaf(state.tree, state.embeddings, node_id)
        except DiagnosisError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return DiagnosisOut(**report.to_json_dict())

    @app.post("/api/infer", response_model=InferOut)
    def post_infer(payload: InferRequest) -> InferOut:
        """Cold-start embedding for a raw feature assignment."""
        state = session()
        try:
            result = cold_start_embed(state.tree, payload.root)
        except InferenceError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return InferOut(**result.to_json_dict())

    return app


def _topology(tree: EmbeddingTree, node: TreeNode) -> TopologyNode:
    split = None
    if node.split is not None:
        descriptor = tree.descriptors[node.split.feature_index]
        split = SplitOut(
            feature=node.split.feature_index,
            name=descriptor.name,
            predicate=descriptor.predicate,
        )
    return TopologyNode(
        id=node.node_id,
        kind=node.kind,
        count=node.count,
        depth=node.depth,
        split=split,
        left=_topology(tree, node.left) if node.left is not None else None,
        right=_topology(tree, node.right) if node.right is not None else None,
    )
