// Collapsible tree rendering. Link widths scale with entity counts so the
// flow of entities is visible at a glance.

import { Topology, TopologyNode } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const COLUMN_WIDTH = 170;
const ROW_HEIGHT = 46;
const MARGIN = 28;
const MAX_LINK_WIDTH = 14;

export interface TreeViewHandlers {
  onLeafClick: (id: number) => void;
  onInternalClick: (id: number) => void;
}

interface LayoutNode {
  node: TopologyNode;
  x: number;
  y: number;
  folded: boolean;
  children: LayoutNode[];
}

export class TreeView {
  constructor(
    private readonly svg: SVGSVGElement,
    private readonly handlers: TreeViewHandlers,
  ) {}

  render(topology: Topology, expanded: ReadonlySet<number>, selectedLeaf: number | null): void {
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);

    let nextRow = 0;
    const layout = (node: TopologyNode, depth: number): LayoutNode => {
      const folded = node.kind === "internal" && !expanded.has(node.id);
      const children: LayoutNode[] = [];
      if (node.kind === "internal" && !folded) {
        if (node.left) children.push(layout(node.left, depth + 1));
        if (node.right) children.push(layout(node.right, depth + 1));
      }
      const y =
        children.length > 0
          ? (children[0].y + children[children.length - 1].y) / 2
          : MARGIN + ROW_HEIGHT * nextRow++;
      return { node, x: MARGIN + depth * COLUMN_WIDTH, y, folded, children };
    };
    const root = layout(topology.root, 0);

    const depthOf = (entry: LayoutNode): number =>
      entry.children.length > 0
        ? Math.max(...entry.children.map(depthOf)) + 1
        : 0;
    const width = MARGIN * 2 + (depthOf(root) + 1) * COLUMN_WIDTH;
    const height = MARGIN * 2 + Math.max(1, nextRow) * ROW_HEIGHT;
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);

    const links = document.createElementNS(SVG_NS, "g");
    const nodes = document.createElementNS(SVG_NS, "g");
    this.svg.append(links, nodes);
    this.drawNode(root, null, topology.n, selectedLeaf, links, nodes);
  }

  private drawNode(
    entry: LayoutNode,
    parent: LayoutNode | null,
    total: number,
    selectedLeaf: number | null,
    links: SVGGElement,
    nodes: SVGGElement,
  ): void {
    if (parent) {
      const path = document.createElementNS(SVG_NS, "path");
      const x0 = parent.x;
      const y0 = parent.y;
      const x1 = entry.x;
      const y1 = entry.y;
      const bend = (x0 + x1) / 2;
      path.setAttribute("d", `M${x0},${y0} C${bend},${y0} ${bend},${y1} ${x1},${y1}`);
      path.setAttribute("class", "tree-link");
      path.setAttribute("fill", "none");
      path.setAttribute(
        "stroke-width",
        String(Math.max(1, (MAX_LINK_WIDTH * entry.node.count) / total)),
      );
      path.setAttribute("data-link-to", String(entry.node.id));
      links.appendChild(path);
    }

    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("data-node-id", String(entry.node.id));
    group.setAttribute("data-kind", entry.node.kind);
    group.setAttribute("transform", `translate(${entry.x},${entry.y})`);
    const classes = ["tree-node", entry.node.kind];
    if (entry.folded) classes.push("folded");
    if (entry.node.id === selectedLeaf) classes.push("selected");
    group.setAttribute("class", classes.join(" "));

    if (entry.node.kind === "leaf") {
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("r", "14");
      group.appendChild(circle);
      group.appendChild(this.label(String(entry.node.count), 0, 4, "count"));
    } else {
      const box = document.createElementNS(SVG_NS, "rect");
      box.setAttribute("x", "-10");
      box.setAttribute("y", "-12");
      box.setAttribute("width", "20");
      box.setAttribute("height", "24");
      box.setAttribute("rx", "4");
      group.appendChild(box);
      const predicate = entry.node.split ? entry.node.split.predicate : "";
      group.appendChild(this.label(predicate, 0, -18, "predicate"));
      if (entry.folded) {
        group.appendChild(this.label(`${entry.node.count}`, 0, 4, "count"));
      }
    }

    group.addEventListener("click", (event) => {
      event.stopPropagation();
      if (entry.node.kind === "leaf") {
        this.handlers.onLeafClick(entry.node.id);
      } else {
        this.handlers.onInternalClick(entry.node.id);
      }
    });
    nodes.appendChild(group);

    for (const child of entry.children) {
      this.drawNode(child, entry, total, selectedLeaf, links, nodes);
    }
  }

  private label(text: string, x: number, y: number, cls: string): SVGTextElement {
    const element = document.createElementNS(SVG_NS, "text");
    element.setAttribute("x", String(x));
    element.setAttribute("y", String(y));
    element.setAttribute("text-anchor", "middle");
    element.setAttribute("class", cls);
    element.textContent = text;
    return element;
  }
}
