// Typed client for the explorer HTTP API.

export interface SplitInfo {
  feature: number;
  name: string;
  predicate: string;
}

export interface TopologyNode {
  id: number;
  kind: "internal" | "leaf";
  count: number;
  depth: number;
  split: SplitInfo | null;
  left: TopologyNode | null;
  right: TopologyNode | null;
}

export interface Topology {
  n: number;
  root: TopologyNode;
}

export interface ProjectionPoint {
  entity_id: string;
  x: number;
  y: number;
}

export type EntityRow = Record<string, unknown> & { entity_id: string };

export interface EntityPage {
  total: number;
  rows: EntityRow[];
}

export interface EntityQuery {
  offset?: number;
  limit?: number;
  sortBy?: string;
  order?: "asc" | "desc";
  filter?: string;
  includeEmbedding?: boolean;
}

export interface Diagnosis {
  leaf_id: number;
  verdict: "consistent" | "inconsistent";
  delta_loglik: number | null;
  penalty: number;
  cluster_count_estimate: number;
  cut: number | null;
}

export interface InferResult {
  leaf_id: number;
  embedding: number[];
  path: { feature: string; predicate: string; branch: number }[];
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) message = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, message);
    }
    return (await response.json()) as T;
  }

  getTree(): Promise<Topology> {
    return this.request<Topology>("/api/tree");
  }

  getProjection(nodeId: number): Promise<ProjectionPoint[]> {
    return this.request<ProjectionPoint[]>(`/api/node/${nodeId}/projection`);
  }

  getEntities(nodeId: number, query: EntityQuery = {}): Promise<EntityPage> {
    const params = new URLSearchParams();
    if (query.offset !== undefined) params.set("offset", String(query.offset));
    if (query.limit !== undefined) params.set("limit", String(query.limit));
    if (query.sortBy) params.set("sort_by", query.sortBy);
    if (query.order) params.set("order", query.order);
    if (query.filter) params.set("filter", query.filter);
    if (query.includeEmbedding) params.set("include_embedding", "true");
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.request<EntityPage>(`/api/node/${nodeId}/entities${suffix}`);
  }

  getDiagnosis(nodeId: number): Promise<Diagnosis> {
    return this.request<Diagnosis>(`/api/node/${nodeId}/diagnosis`);
  }

  infer(features: Record<string, unknown>): Promise<InferResult> {
    return this.request<InferResult>("/api/infer", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(features),
    });
  }
}

/** Walk a topology depth-first, yielding every node. */
export function* walkTopology(node: TopologyNode): Generator<TopologyNode> {
  yield node;
  if (node.left) yield* walkTopology(node.left);
  if (node.right) yield* walkTopology(node.right);
}
