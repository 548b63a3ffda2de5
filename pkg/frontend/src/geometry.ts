// Lasso hit testing: ray casting in screen coordinates.

export type Point = [number, number];

/**
 * Whether (x, y) lies inside the polygon. The polygon is treated as
 * closed (last vertex connects back to the first), matching a freehand
 * lasso that is auto-closed on release.
 */
export function pointInPolygon(x: number, y: number, polygon: Point[]): boolean {
  if (polygon.length < 3) return false;
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const [xi, yi] = polygon[i];
    const [xj, yj] = polygon[j];
    const crosses =
      yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi;
    if (crosses) inside = !inside;
  }
  return inside;
}
