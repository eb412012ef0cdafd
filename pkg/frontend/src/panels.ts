import { argminRow, Table } from "./csv.js";
import { linearScale, logScale, Scale, splitLambdaScale } from "./scales.js";
import { document, HEIGHT, MARGIN, polyline, px, tag, text, WIDTH } from "./svg.js";

const X0 = MARGIN.left;
const X1 = WIDTH - MARGIN.right;
const Y0 = HEIGHT - MARGIN.bottom;
const Y1 = MARGIN.top;

const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c"];

function finite(vs: number[]): number[] {
  return vs.filter((v) => !Number.isNaN(v) && Number.isFinite(v));
}

function yScaleFor(values: number[]): Scale {
  const vs = finite(values);
  const lo = Math.min(...vs);
  const hi = Math.max(...vs);
  const pad = (hi - lo || Math.abs(hi) || 1) * 0.05;
  return linearScale(lo - pad, hi + pad, Y0, Y1);
}

function axes(x: Scale, y: Scale, xLabel: string, yLabel: string): string {
  const parts: string[] = [];
  parts.push(tag("line", { x1: px(X0), y1: px(Y0), x2: px(X1), y2: px(Y0), stroke: "black" }));
  parts.push(tag("line", { x1: px(X0), y1: px(Y0), x2: px(X0), y2: px(Y1), stroke: "black" }));
  for (const t of x.ticks) {
    const xp = x(t);
    if (xp < X0 - 0.5 || xp > X1 + 0.5) continue;
    parts.push(tag("line", { x1: px(xp), y1: px(Y0), x2: px(xp), y2: px(Y0 + 4), stroke: "black" }));
    parts.push(text(xp, Y0 + 16, formatTick(t)));
  }
  for (const t of y.ticks) {
    const yp = y(t);
    if (yp > Y0 + 0.5 || yp < Y1 - 0.5) continue;
    parts.push(tag("line", { x1: px(X0 - 4), y1: px(yp), x2: px(X0), y2: px(yp), stroke: "black" }));
    parts.push(text(X0 - 7, yp + 3, formatTick(t), "end"));
  }
  parts.push(text((X0 + X1) / 2, HEIGHT - 8, xLabel));
  parts.push(
    tag(
      "text",
      {
        x: px(14),
        y: px((Y0 + Y1) / 2),
        "text-anchor": "middle",
        "font-size": "11",
        "font-family": "sans-serif",
        transform: `rotate(-90 14 ${px((Y0 + Y1) / 2)})`,
      },
      yLabel,
    ),
  );
  return parts.join("\n");
}

function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-2) return v.toExponential(0);
  return String(Number(v.toPrecision(3)));
}

/**
 * Dot marking the row with minimum `yCol`. Source values are echoed into
 * data attributes verbatim so the annotation provably comes from the CSV.
 */
function minMarker(table: Table, xCol: string, yCol: string, x: Scale, y: Scale): string {
  const i = argminRow(table, yCol);
  const row = table.rows[i];
  return tag("circle", {
    class: "min-marker",
    "data-series": yCol,
    "data-x": row.raw[xCol],
    "data-y": row.raw[yCol],
    cx: px(x(row.values[xCol])),
    cy: px(y(row.values[yCol])),
    r: "4",
    fill: "black",
  });
}

function seriesLines(
  table: Table,
  xCol: string,
  yCols: string[],
  x: Scale,
  y: Scale,
): string {
  const parts: string[] = [];
  yCols.forEach((col, ci) => {
    const pts: Array<[number, number]> = [];
    for (const row of table.rows) {
      const v = row.values[col];
      if (Number.isNaN(v)) continue;
      pts.push([x(row.values[xCol]), y(v)]);
    }
    parts.push(polyline(pts, SERIES_COLORS[ci % SERIES_COLORS.length]));
    parts.push(minMarker(table, xCol, col, x, y));
  });
  return parts.join("\n");
}

function lambdaScale(table: Table, xCol: string): Scale {
  const xs = table.rows.map((r) => r.values[xCol]);
  const min = Math.min(...xs);
  const max = Math.max(...xs);
  const positives = xs.filter((v) => v > 0);
  if (min <= 0) {
    return splitLambdaScale(min, max, Math.min(...positives), X0, X1);
  }
  return logScale(min, max, X0, X1);
}

function renderCurve(table: Table, title: string): string {
  const x = lambdaScale(table, "lambda");
  const y = yScaleFor(table.rows.map((r) => r.values.mean_nmse));
  const parts = [axes(x, y, "penalty", "normalized MSE")];
  const hasNegative = table.rows.some((r) => r.values.lambda < 0);
  if (hasNegative) {
    parts.push(
      tag("line", {
        x1: px(x(0)), y1: px(Y0), x2: px(x(0)), y2: px(Y1),
        stroke: "#999", "stroke-dasharray": "4 3",
      }),
    );
  }
  parts.push(seriesLines(table, "lambda", ["mean_nmse"], x, y));
  const zero = table.rows.find((r) => r.values.lambda === 0 && !Number.isNaN(r.values.mean_nmse));
  if (zero) {
    parts.push(
      tag("rect", {
        class: "zero-marker",
        "data-y": zero.raw.mean_nmse,
        x: px(x(0) - 3.5),
        y: px(y(zero.values.mean_nmse) - 3.5),
        width: "7",
        height: "7",
        fill: "none",
        stroke: "black",
        "stroke-width": "1.5",
      }),
    );
  }
  parts.push(text((X0 + X1) / 2, 18, title));
  return document(parts.join("\n"));
}

function renderDimsweep(table: Table, which: "risk" | "lambda", title: string): string {
  const x = logScale(
    Math.min(...table.rows.map((r) => r.values.p)),
    Math.max(...table.rows.map((r) => r.values.p)),
    X0,
    X1,
  );
  const cols = which === "risk" ? ["risk_minnorm", "risk_opt"] : ["lambda_opt"];
  const y = yScaleFor(table.rows.flatMap((r) => cols.map((c) => r.values[c])));
  const parts = [axes(x, y, "dimension p", which === "risk" ? "normalized MSE" : "optimal penalty")];
  if (which === "lambda") {
    parts.push(tag("line", { x1: px(X0), y1: px(y(0)), x2: px(X1), y2: px(y(0)), stroke: "#999", "stroke-dasharray": "4 3" }));
  }
  parts.push(seriesLines(table, "p", cols, x, y));
  parts.push(text((X0 + X1) / 2, 18, title));
  return document(parts.join("\n"));
}

function renderSweep(table: Table, which: "risk" | "lambda", title: string): string {
  const qs = table.rows.map((r) => r.values.q);
  const x = linearScale(Math.min(...qs), Math.max(...qs), X0, X1);
  const cols = which === "risk" ? ["risk_trunc", "risk_full"] : ["lambda_opt"];
  const y = yScaleFor(table.rows.flatMap((r) => cols.map((c) => r.values[c])));
  const parts = [axes(x, y, "noise columns q", which === "risk" ? "normalized MSE" : "optimal penalty")];
  if (which === "lambda") {
    parts.push(tag("line", { x1: px(X0), y1: px(y(0)), x2: px(X1), y2: px(y(0)), stroke: "#999", "stroke-dasharray": "4 3" }));
  }
  parts.push(seriesLines(table, "q", cols, x, y));
  parts.push(text((X0 + X1) / 2, 18, title));
  return document(parts.join("\n"));
}

function renderDerivative(table: Table, title: string): string {
  const ps = table.rows.map((r) => r.values.p);
  const x = linearScale(Math.min(...ps), Math.max(...ps), X0, X1);
  const vals = table.rows.flatMap((r) => [
    r.values.derivative - 2 * r.values.std_err,
    r.values.derivative + 2 * r.values.std_err,
  ]);
  const y = yScaleFor(vals);
  const parts = [axes(x, y, "dimension p", "risk derivative at 0")];
  parts.push(tag("line", { x1: px(X0), y1: px(y(0)), x2: px(X1), y2: px(y(0)), stroke: "#999", "stroke-dasharray": "4 3" }));
  for (const row of table.rows) {
    const xp = x(row.values.p);
    parts.push(
      tag("line", {
        x1: px(xp),
        y1: px(y(row.values.derivative - 2 * row.values.std_err)),
        x2: px(xp),
        y2: px(y(row.values.derivative + 2 * row.values.std_err)),
        stroke: "#1f77b4",
      }),
    );
  }
  parts.push(seriesLines(table, "p", ["derivative"], x, y));
  parts.push(text((X0 + X1) / 2, 18, title));
  return document(parts.join("\n"));
}

function heatColor(v: number, scale: number): string {
  // diverging map: negative optima blue, positive red, white at zero
  const t = Math.max(-1, Math.min(1, v / (scale || 1)));
  const other = Math.round(255 * (1 - Math.abs(t)));
  const hex = (n: number) => n.toString(16).padStart(2, "0");
  return t >= 0
    ? `#ff${hex(other)}${hex(other)}`
    : `#${hex(other)}${hex(other)}ff`;
}

function renderHeatmap(table: Table, title: string): string {
  const ns = [...new Set(table.rows.map((r) => r.values.n))].sort((a, b) => a - b);
  const ps = [...new Set(table.rows.map((r) => r.values.p))].sort((a, b) => a - b);
  const cw = (X1 - X0) / ps.length;
  const ch = (Y0 - Y1) / ns.length;
  const scale = Math.max(...table.rows.map((r) => Math.abs(r.values.lambda_opt)));
  const minI = argminRow(table, "lambda_opt");
  const parts: string[] = [];
  table.rows.forEach((row, i) => {
    const xi = ps.indexOf(row.values.p);
    const yi = ns.indexOf(row.values.n);
    const attrs: Record<string, string> = {
      x: px(X0 + xi * cw),
      y: px(Y0 - (yi + 1) * ch),
      width: px(cw),
      height: px(ch),
      fill: heatColor(row.values.lambda_opt, scale),
      stroke: row.values.boundary_hit ? "black" : "#ddd",
      "stroke-width": row.values.boundary_hit ? "1.5" : "0.5",
    };
    if (i === minI) {
      attrs.class = "min-marker";
      attrs["data-series"] = "lambda_opt";
      attrs["data-x"] = row.raw.p;
      attrs["data-y"] = row.raw.lambda_opt;
      attrs["data-n"] = row.raw.n;
    }
    parts.push(tag("rect", attrs));
  });
  ps.forEach((p, xi) => parts.push(text(X0 + (xi + 0.5) * cw, Y0 + 16, formatTick(p))));
  ns.forEach((n, yi) => parts.push(text(X0 - 7, Y0 - (yi + 0.5) * ch + 3, formatTick(n), "end")));
  parts.push(text((X0 + X1) / 2, HEIGHT - 8, "dimension p"));
  parts.push(text((X0 + X1) / 2, 18, title));
  return document(parts.join("\n"));
}

/** Renders one panel of a given manifest kind to an SVG string. */
export function renderPanel(kind: string, table: Table, title: string): string {
  switch (kind) {
    case "curve":
      return renderCurve(table, title);
    case "dimsweep-risk":
      return renderDimsweep(table, "risk", title);
    case "dimsweep-lambda":
      return renderDimsweep(table, "lambda", title);
    case "sweep":
      return renderSweep(table, "risk", title);
    case "sweep-lambda":
      return renderSweep(table, "lambda", title);
    case "derivative":
      return renderDerivative(table, title);
    case "heatmap":
      return renderHeatmap(table, title);
    default:
      throw new Error(`unknown panel kind "${kind}"`);
  }
}
