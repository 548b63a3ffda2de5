// Projection scatterplot with freehand lasso selection.

import { ProjectionPoint } from "./api.js";
import { Point, pointInPolygon } from "./geometry.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 480;
const HEIGHT = 420;
const PADDING = 24;

interface PlacedPoint {
  entityId: string;
  sx: number;
  sy: number;
  circle: SVGCircleElement;
}

export class ScatterView {
  onLasso: (ids: Set<string>) => void = () => {};

  private placed: PlacedPoint[] = [];
  private lassoPath: Point[] = [];
  private lassoElement: SVGPolylineElement | null = null;
  private drawing = false;

  constructor(private readonly svg: SVGSVGElement) {
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.svg.addEventListener("pointerdown", (event) => this.startLasso(event));
    this.svg.addEventListener("pointermove", (event) => this.extendLasso(event));
    this.svg.addEventListener("pointerup", () => this.finishLasso());
    this.svg.addEventListener("pointerleave", () => this.finishLasso());
  }

  render(points: ProjectionPoint[]): void {
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
    this.placed = [];
    this.lassoElement = null;

    const xs = points.map((point) => point.x);
    const ys = points.map((point) => point.y);
    const toScreen = (value: number, low: number, high: number, size: number): number => {
      const span = high - low;
      if (span === 0) return size / 2;
      return PADDING + ((value - low) / span) * (size - 2 * PADDING);
    };
    const xLow = Math.min(...xs);
    const xHigh = Math.max(...xs);
    const yLow = Math.min(...ys);
    const yHigh = Math.max(...ys);

    const group = document.createElementNS(SVG_NS, "g");
    this.svg.appendChild(group);
    for (const point of points) {
      const circle = document.createElementNS(SVG_NS, "circle");
      const sx = toScreen(point.x, xLow, xHigh, WIDTH);
      const sy = HEIGHT - toScreen(point.y, yLow, yHigh, HEIGHT);
      circle.setAttribute("cx", String(sx));
      circle.setAttribute("cy", String(sy));
      circle.setAttribute("r", "3.5");
      circle.setAttribute("class", "scatter-point");
      circle.setAttribute("data-entity-id", point.entity_id);
      group.appendChild(circle);
      this.placed.push({ entityId: point.entity_id, sx, sy, circle });
    }
  }

  highlight(ids: ReadonlySet<string>): void {
    for (const point of this.placed) {
      point.circle.classList.toggle("lassoed", ids.has(point.entityId));
    }
    if (ids.size === 0) {
      for (const point of this.placed) point.circle.classList.remove("lassoed");
    }
  }

  /**
   * Resolve a lasso polygon (in the svg's viewBox coordinates) to the
   * enclosed entity ids and notify the listener. The polygon is treated
   * as auto-closed. Pointer handlers call this; tests may call it
   * directly.
   */
  completeLasso(polygon: Point[]): void {
    const ids = new Set<string>();
    if (polygon.length >= 3) {
      for (const point of this.placed) {
        if (pointInPolygon(point.sx, point.sy, polygon)) ids.add(point.entityId);
      }
    }
    this.onLasso(ids);
  }

  screenPositions(): Map<string, Point> {
    return new Map(this.placed.map((point) => [point.entityId, [point.sx, point.sy]]));
  }

  private toViewBox(event: PointerEvent): Point {
    const rect = this.svg.getBoundingClientRect();
    if (rect.width === 0 || rect.height === 0) return [0, 0];
    const x = ((event.clientX - rect.left) / rect.width) * WIDTH;
    const y = ((event.clientY - rect.top) / rect.height) * HEIGHT;
    return [x, y];
  }

  private startLasso(event: PointerEvent): void {
    this.drawing = true;
    this.lassoPath = [this.toViewBox(event)];
    if (!this.lassoElement) {
      this.lassoElement = document.createElementNS(SVG_NS, "polyline");
      this.lassoElement.setAttribute("class", "lasso");
      this.lassoElement.setAttribute("fill", "none");
      this.svg.appendChild(this.lassoElement);
    }
  }

  private extendLasso(event: PointerEvent): void {
    if (!this.drawing || !this.lassoElement) return;
    this.lassoPath.push(this.toViewBox(event));
    this.lassoElement.setAttribute(
      "points",
      this.lassoPath.map(([x, y]) => `${x},${y}`).join(" "),
    );
  }

  private finishLasso(): void {
    if (!this.drawing) return;
    this.drawing = false;
    const polygon = this.lassoPath;
    this.lassoPath = [];
    if (this.lassoElement) {
      this.lassoElement.remove();
      this.lassoElement = null;
    }
    this.completeLasso(polygon);
  }
}
