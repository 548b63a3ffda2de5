// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, EntityPage, ProjectionPoint, Topology, TopologyNode } from "../src/api.js";
import { ExplorerApp, resolveApiBase } from "../src/main.js";

function leaf(id: number, count: number, depth: number): TopologyNode {
  return { id, kind: "leaf", count, depth, split: null, left: null, right: null };
}

function internal(
  id: number,
  depth: number,
  predicate: string,
  left: TopologyNode,
  right: TopologyNode,
): TopologyNode {
  return {
    id,
    kind: "internal",
    count: left.count + right.count,
    depth,
    split: { feature: id, name: predicate, predicate },
    left,
    right,
  };
}

const topology: Topology = {
  n: 38,
  root: internal(
    0,
    0,
    "A == 1",
    internal(1, 1, "B == 1", leaf(3, 10, 2), leaf(4, 12, 2)),
    internal(2, 1, "B == 1", leaf(5, 7, 2), leaf(6, 9, 2)),
  ),
};

const projections: Record<number, ProjectionPoint[]> = {
  3: [
    { entity_id: "m0", x: -1.0, y: 0.0 },
    { entity_id: "m1", x: -0.8, y: 0.2 },
    { entity_id: "m2", x: 1.0, y: -0.1 },
  ],
};

class FakeApi {
  rows: Record<string, unknown>[] = [
    { entity_id: "m0", plan: "base" },
    { entity_id: "m1", plan: "premium" },
    { entity_id: "m2", plan: "base" },
  ];
  lastQuery: unknown = null;
  failProjection = false;
  projectionDelays: Record<number, number> = {};

  async getTree(): Promise<Topology> {
    return topology;
  }

  async getProjection(nodeId: number): Promise<ProjectionPoint[]> {
    if (this.failProjection) throw new Error("boom");
    const delay = this.projectionDelays[nodeId] ?? 0;
    if (delay > 0) await new Promise((resolve) => setTimeout(resolve, delay));
    return projections[nodeId] ?? [];
  }

  async getEntities(_nodeId: number, query: unknown): Promise<EntityPage> {
    this.lastQuery = query;
    return { total: this.rows.length, rows: this.rows as EntityPage["rows"] };
  }
}

function visibleIds(root: HTMLElement): number[] {
  return [...root.querySelectorAll("[data-node-id]")]
    .map((el) => Number(el.getAttribute("data-node-id")))
    .sort((a, b) => a - b);
}

function click(root: HTMLElement, nodeId: number): void {
  const el = root.querySelector(`[data-node-id="${nodeId}"]`) as SVGGElement;
  el.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

async function settle(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

describe("ExplorerApp", () => {
  let root: HTMLElement;
  let api: FakeApi;
  let app: ExplorerApp;

  beforeEach(async () => {
    document.body.innerHTML = '<div id="root"></div>';
    root = document.getElementById("root") as HTMLElement;
    api = new FakeApi();
    app = new ExplorerApp(root, api as unknown as ApiClient);
    await app.start();
  });

  it("renders every node with counts and predicates", () => {
    expect(visibleIds(root)).toEqual([0, 1, 2, 3, 4, 5, 6]);
    const rootNode = root.querySelector('[data-node-id="0"]') as SVGGElement;
    expect(rootNode.querySelector("text.predicate")?.textContent).toBe("A == 1");
    const leafNode = root.querySelector('[data-node-id="4"]') as SVGGElement;
    expect(leafNode.querySelector("text.count")?.textContent).toBe("12");
  });

  it("folding an internal node hides exactly its descendants", () => {
    click(root, 1);
    expect(visibleIds(root)).toEqual([0, 1, 2, 5, 6]);
    // the folded node itself stays, siblings untouched
    const folded = root.querySelector('[data-node-id="1"]') as SVGGElement;
    expect(folded.classList.contains("folded")).toBe(true);
    click(root, 1);
    expect(visibleIds(root)).toEqual([0, 1, 2, 3, 4, 5, 6]);
    const restored = root.querySelector('[data-node-id="1"]') as SVGGElement;
    expect(restored.classList.contains("folded")).toBe(false);
  });

  it("link widths are proportional to entity counts", () => {
    const widthOf = (id: number): number =>
      Number(
        (root.querySelector(`[data-link-to="${id}"]`) as SVGPathElement).getAttribute(
          "stroke-width",
        ),
      );
    const ratio = widthOf(1) / widthOf(2);
    expect(ratio).toBeCloseTo((10 + 12) / (7 + 9), 10);
  });

  it("clicking a leaf loads its projection and table", async () => {
    click(root, 3);
    await settle();
    const circles = root.querySelectorAll(".scatter-point");
    expect(circles.length).toBe(3);
    expect(app.state.selectedLeaf).toBe(3);
    const rows = root.querySelectorAll("tbody tr");
    expect(rows.length).toBe(3);
  });

  it("lasso restricts the table to the enclosed ids", async () => {
    click(root, 3);
    await settle();
    const positions = app.scatterView.screenPositions();
    const [x0, y0] = positions.get("m0")!;
    const [x1, y1] = positions.get("m1")!;
    const left = Math.min(x0, x1) - 5;
    const right = Math.max(x0, x1) + 5;
    const top = Math.min(y0, y1) - 5;
    const bottom = Math.max(y0, y1) + 5;
    app.scatterView.completeLasso([
      [left, top],
      [right, top],
      [right, bottom],
      [left, bottom],
    ]);
    await settle();
    expect([...app.state.lasso].sort()).toEqual(["m0", "m1"]);
    const shown = [...root.querySelectorAll("tbody tr")].map(
      (tr) => (tr as HTMLTableRowElement).dataset.entityId,
    );
    expect(shown.sort()).toEqual(["m0", "m1"]);
    const highlighted = root.querySelectorAll(".scatter-point.lassoed");
    expect(highlighted.length).toBe(2);
  });

  it("an empty lasso clears the selection", async () => {
    click(root, 3);
    await settle();
    app.scatterView.completeLasso([
      [0, 0],
      [1, 0],
      [1, 1],
    ]);
    await settle();
    expect(app.state.lassoActive).toBe(false);
    expect(root.querySelectorAll("tbody tr").length).toBe(3);
  });

  it("header clicks toggle the server sort order", async () => {
    click(root, 3);
    await settle();
    const header = root.querySelector('th[data-column="plan"]') as HTMLTableCellElement;
    header.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await settle();
    expect(api.lastQuery).toMatchObject({ sortBy: "plan", order: "asc" });
    const again = root.querySelector('th[data-column="plan"]') as HTMLTableCellElement;
    again.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await settle();
    expect(api.lastQuery).toMatchObject({ sortBy: "plan", order: "desc" });
  });

  it("a stale slow fetch loses to the latest selection", async () => {
    projections[4] = [{ entity_id: "q0", x: 0.5, y: 0.5 }];
    api.projectionDelays[3] = 40; // first selection resolves after the second
    const first = app.selectLeaf(3);
    await new Promise((resolve) => setTimeout(resolve, 5));
    await app.selectLeaf(4);
    await first;
    await settle();
    expect(app.state.selectedLeaf).toBe(4);
    const circles = root.querySelectorAll(".scatter-point");
    expect(circles.length).toBe(1);
    expect((circles[0] as SVGCircleElement).getAttribute("data-entity-id")).toBe("q0");
    delete projections[4];
    delete api.projectionDelays[3];
  });

  it("shows an error banner when a fetch fails", async () => {
    api.failProjection = true;
    click(root, 3);
    await settle();
    const banner = root.querySelector("#error-banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("boom");
  });
});

describe("resolveApiBase", () => {
  it("prefers the explicit query parameter", () => {
    expect(resolveApiBase("?api=http://10.0.0.5:9000", "http://localhost:3000")).toBe(
      "http://10.0.0.5:9000",
    );
  });

  it("falls back to the page origin, then localhost", () => {
    expect(resolveApiBase("", "http://host:8080")).toBe("http://host:8080");
    expect(resolveApiBase("", "null")).toBe("http://127.0.0.1:8080");
  });
});
