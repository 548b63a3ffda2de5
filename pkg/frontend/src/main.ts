// Explorer application: wires the tree, projection, and table views over
// the HTTP API. The server is the numeric source of truth; this layer only
// coordinates selections.

import { ApiClient, EntityRow, ProjectionPoint, Topology } from "./api.js";
import { ScatterView } from "./scatter_view.js";
import { defaultTableState, ViewState } from "./state.js";
import { TableView } from "./table_view.js";
import { TreeView } from "./tree_view.js";

export class ExplorerApp {
  readonly state = new ViewState();
  readonly treeView: TreeView;
  readonly scatterView: ScatterView;
  readonly tableView: TableView;

  topology: Topology | null = null;
  projection: ProjectionPoint[] = [];
  private leafEntityIds = new Set<string>();
  private featureColumns: string[] = [];
  private generation = 0;
  private readonly errorBanner: HTMLElement;
  private readonly scatterTitle: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    root.innerHTML = `
      <div id="error-banner" class="error-banner" hidden></div>
      <div class="panes">
        <section class="pane" id="tree-pane">
          <h2>Tree</h2>
          <svg id="tree-svg"></svg>
        </section>
        <section class="pane" id="scatter-pane">
          <h2 id="scatter-title">Projection</h2>
          <svg id="scatter-svg"></svg>
        </section>
        <section class="pane" id="table-pane">
          <h2>Entities</h2>
          <div id="table-host"></div>
        </section>
      </div>`;
    this.errorBanner = root.querySelector("#error-banner") as HTMLElement;
    this.scatterTitle = root.querySelector("#scatter-title") as HTMLElement;

    this.treeView = new TreeView(root.querySelector("#tree-svg") as SVGSVGElement, {
      onLeafClick: (id) => void this.selectLeaf(id),
      onInternalClick: (id) => this.toggleFold(id),
    });
    this.scatterView = new ScatterView(root.querySelector("#scatter-svg") as SVGSVGElement);
    this.scatterView.onLasso = (ids) => void this.applyLasso(ids);
    this.tableView = new TableView(root.querySelector("#table-host") as HTMLElement, {
      onSort: (column) => void this.sortBy(column),
      onFilter: (text) => void this.setFilter(text),
      onPage: (delta) => void this.turnPage(delta),
      onToggleEmbedding: (show) => void this.toggleEmbedding(show),
    });
  }

  async start(): Promise<void> {
    try {
      this.topology = await this.api.getTree();
      this.state.setTopology(this.topology);
      this.renderTree();
      this.clearError();
    } catch (error) {
      this.showError(`failed to load tree: ${(error as Error).message}`);
    }
  }

  renderTree(): void {
    if (!this.topology) return;
    this.treeView.render(this.topology, this.state.expanded, this.state.selectedLeaf);
  }

  toggleFold(id: number): void {
    this.state.toggleExpanded(id);
    this.renderTree();
  }

  async selectLeaf(id: number): Promise<void> {
    this.state.selectLeaf(id);
    this.state.table = { ...defaultTableState(), showEmbedding: this.state.table.showEmbedding };
    this.renderTree();
    const generation = ++this.generation;
    try {
      const points = await this.api.getProjection(id);
      if (generation !== this.generation) return; // a newer selection won
      this.projection = points;
      this.leafEntityIds = new Set(points.map((point) => point.entity_id));
      this.scatterView.render(points);
      this.scatterView.highlight(new Set());
      this.scatterTitle.textContent = `Projection: node ${id} (${points.length} entities)`;
      await this.refreshTable(generation);
      this.clearError();
    } catch (error) {
      if (generation === this.generation) {
        this.showError(`failed to load node ${id}: ${(error as Error).message}`);
      }
    }
  }

  async applyLasso(ids: Set<string>): Promise<void> {
    this.state.setLasso(ids, this.leafEntityIds);
    this.scatterView.highlight(this.state.lasso);
    await this.refreshTable(++this.generation);
  }

  async sortBy(column: string): Promise<void> {
    const table = this.state.table;
    if (table.sortBy === column) {
      table.order = table.order === "asc" ? "desc" : "asc";
    } else {
      table.sortBy = column;
      table.order = "asc";
    }
    table.page = 0;
    await this.refreshTable(++this.generation);
  }

  async setFilter(text: string): Promise<void> {
    this.state.table.filter = text;
    this.state.table.page = 0;
    await this.refreshTable(++this.generation);
  }

  async turnPage(delta: number): Promise<void> {
    this.state.table.page = Math.max(0, this.state.table.page + delta);
    await this.refreshTable(++this.generation);
  }

  async toggleEmbedding(show: boolean): Promise<void> {
    this.state.table.showEmbedding = show;
    await this.refreshTable(++this.generation);
  }

  /**
   * Fetch and render the table for the current selection. Sorting and
   * text filtering run on the server. With a lasso active the full leaf
   * is fetched so the lasso restriction (client-side) sees every row, and
   * pagination happens locally; otherwise the server pages.
   */
  async refreshTable(generation: number): Promise<void> {
    const leaf = this.state.selectedLeaf;
    if (leaf === null || !this.topology) return;
    const table = this.state.table;
    try {
      let rows: EntityRow[];
      let total: number;
      if (this.state.lassoActive) {
        const page = await this.api.getEntities(leaf, {
          limit: this.leafEntityIds.size,
          sortBy: table.sortBy,
          order: table.order,
          filter: table.filter,
          includeEmbedding: table.showEmbedding,
        });
        const kept = page.rows.filter((row) => this.state.lasso.has(row.entity_id));
        total = kept.length;
        rows = kept.slice(
          table.page * table.pageSize,
          (table.page + 1) * table.pageSize,
        );
      } else {
        const page = await this.api.getEntities(leaf, {
          offset: table.page * table.pageSize,
          limit: table.pageSize,
          sortBy: table.sortBy,
          order: table.order,
          filter: table.filter,
          includeEmbedding: table.showEmbedding,
        });
        rows = page.rows;
        total = page.total;
      }
      if (generation !== this.generation) return;
      this.tableView.render(this.columnsFor(rows), this.expandEmbedding(rows), total, table);
      this.clearError();
    } catch (error) {
      if (generation === this.generation) {
        this.showError(`failed to load entities: ${(error as Error).message}`);
      }
    }
  }

  private columnsFor(rows: EntityRow[]): string[] {
    if (rows.length > 0) {
      this.featureColumns = Object.keys(rows[0]).filter(
        (key) => key !== "entity_id" && key !== "embedding",
      );
    }
    const columns = ["entity_id", ...this.featureColumns];
    if (this.state.table.showEmbedding && rows.length > 0) {
      const embedding = rows[0].embedding as number[] | undefined;
      if (embedding) {
        for (let i = 0; i < embedding.length; i++) columns.push(`d${i}`);
      }
    }
    return columns;
  }

  private expandEmbedding(rows: EntityRow[]): EntityRow[] {
    if (!this.state.table.showEmbedding) return rows;
    return rows.map((row) => {
      const embedding = row.embedding as number[] | undefined;
      if (!embedding) return row;
      const expanded: EntityRow = { ...row };
      embedding.forEach((value, i) => {
        expanded[`d${i}`] = value;
      });
      return expanded;
    });
  }

  private showError(message: string): void {
    this.errorBanner.textContent = message;
    this.errorBanner.hidden = false;
  }

  private clearError(): void {
    this.errorBanner.hidden = true;
  }
}

export function resolveApiBase(search: string, origin: string): string {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const override = params.get("api");
  if (override) return override;
  if (origin && origin !== "null" && !origin.startsWith("file:")) return origin;
  return "http://127.0.0.1:8080";
}

const mount = typeof document !== "undefined" ? document.getElementById("app") : null;
if (mount) {
  const base = resolveApiBase(window.location.search, window.location.origin);
  void new ExplorerApp(mount, new ApiClient(base)).start();
}
