/** Minimal deterministic SVG string builder. */

export const WIDTH = 560;
export const HEIGHT = 360;
export const MARGIN = { top: 36, right: 20, bottom: 44, left: 62 };

/** Fixed-precision coordinate formatting so output bytes are stable. */
export function px(v: number): string {
  return v.toFixed(2);
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tag(
  name: string,
  attrs: Record<string, string>,
  body = "",
): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${escapeXml(v)}"`)
    .join("");
  return body === "" ? `<${name}${parts}/>` : `<${name}${parts}>${body}</${name}>`;
}

export function polyline(points: Array<[number, number]>, stroke: string): string {
  const pts = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  return tag("polyline", { points: pts, fill: "none", stroke, "stroke-width": "1.5" });
}

export function text(x: number, y: number, body: string, anchor = "middle"): string {
  return tag(
    "text",
    { x: px(x), y: px(y), "text-anchor": anchor, "font-size": "11", "font-family": "sans-serif" },
    escapeXml(body),
  );
}

export function document(body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n` +
    body +
    "\n</svg>\n"
  );
}
