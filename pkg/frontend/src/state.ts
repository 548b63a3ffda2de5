// Shared view state and the coordination rules between the three views.

import { Topology, TopologyNode, walkTopology } from "./api.js";

export interface TableState {
  sortBy: string;
  order: "asc" | "desc";
  filter: string;
  page: number;
  pageSize: number;
  showEmbedding: boolean;
}

export function defaultTableState(): TableState {
  return {
    sortBy: "entity_id",
    order: "asc",
    filter: "",
    page: 0,
    pageSize: 15,
    showEmbedding: false,
  };
}

export class ViewState {
  expanded = new Set<number>();
  selectedLeaf: number | null = null;
  lasso = new Set<string>();
  table: TableState = defaultTableState();

  private leafIds = new Set<number>();
  private internalIds = new Set<number>();

  setTopology(topology: Topology): void {
    this.leafIds.clear();
    this.internalIds.clear();
    for (const node of walkTopology(topology.root)) {
      (node.kind === "leaf" ? this.leafIds : this.internalIds).add(node.id);
    }
    this.expanded = new Set(this.internalIds); // start fully expanded
    if (this.selectedLeaf !== null && !this.leafIds.has(this.selectedLeaf)) {
      this.selectedLeaf = null;
      this.lasso.clear();
    }
  }

  isLeaf(id: number): boolean {
    return this.leafIds.has(id);
  }

  /** Fold or unfold an internal node; returns the new expanded flag. */
  toggleExpanded(id: number): boolean {
    if (!this.internalIds.has(id)) return false;
    if (this.expanded.has(id)) {
      this.expanded.delete(id);
      return false;
    }
    this.expanded.add(id);
    return true;
  }

  /** Select a leaf for the projection + table views; clears the lasso. */
  selectLeaf(id: number): void {
    if (!this.leafIds.has(id)) {
      throw new Error(`node ${id} is not a leaf in the current tree`);
    }
    this.selectedLeaf = id;
    this.lasso.clear();
    this.table.page = 0;
    this.table.filter = "";
  }

  /**
   * Install a lasso selection. Ids outside the selected leaf are dropped
   * (the lasso is always a subset of the leaf's entities); an empty lasso
   * clears the selection.
   */
  setLasso(ids: Iterable<string>, leafEntityIds: ReadonlySet<string>): void {
    this.lasso = new Set([...ids].filter((id) => leafEntityIds.has(id)));
    this.table.page = 0;
  }

  get lassoActive(): boolean {
    return this.lasso.size > 0;
  }

  /**
   * The table's candidate row set: the lasso selection when one is
   * active, otherwise every entity of the selected leaf.
   */
  candidateIds(leafEntityIds: readonly string[]): string[] {
    if (!this.lassoActive) return [...leafEntityIds];
    return leafEntityIds.filter((id) => this.lasso.has(id));
  }
}

/**
 * Ids of the nodes that should be drawn: a node is visible when every
 * ancestor on its path is expanded. A folded internal node is itself
 * visible; its subtree is not.
 */
export function visibleNodeIds(topology: Topology, expanded: ReadonlySet<number>): Set<number> {
  const visible = new Set<number>();
  const walk = (node: TopologyNode): void => {
    visible.add(node.id);
    if (node.kind === "internal" && expanded.has(node.id)) {
      if (node.left) walk(node.left);
      if (node.right) walk(node.right);
    }
  };
  walk(topology.root);
  return visible;
}
