import { existsSync, mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { KIND_SCHEMA, loadCsv, SchemaError } from "./csv.js";
import { renderPanel } from "./panels.js";

interface ManifestPanel {
  type: "panel";
  id: string;
  kind: string;
  csv: string;
  title: string;
}

interface Manifest {
  command: string;
  panels: ManifestPanel[];
}

export function readManifest(manifestPath: string): Manifest {
  const lines = readFileSync(manifestPath, "utf-8")
    .split("\n")
    .filter((line) => line.length > 0)
    .map((line) => JSON.parse(line));
  const run = lines.find((r) => r.type === "run");
  if (!run) throw new Error(`${manifestPath}: no run record`);
  const panels = lines.filter((r): r is ManifestPanel => r.type === "panel");
  return { command: run.command, panels };
}

/**
 * Renders every panel listed in a manifest to SVG files in `outDir`.
 *
 * Annotations (minimum dots, the square at zero penalty) are taken from the
 * CSV rows as written; nothing is recomputed. Returns the written paths.
 */
export function render(manifestPath: string, outDir: string): string[] {
  const manifest = readManifest(manifestPath);
  const base = dirname(manifestPath);
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const panel of manifest.panels) {
    const schema = KIND_SCHEMA[panel.kind];
    if (!schema) throw new Error(`panel ${panel.id}: unknown kind "${panel.kind}"`);
    const csvPath = join(base, panel.csv);
    if (!existsSync(csvPath)) {
      throw new SchemaError(`panel ${panel.id}: missing CSV ${panel.csv}`, "");
    }
    const table = loadCsv(csvPath, schema);
    const svg = renderPanel(panel.kind, table, panel.title || panel.id);
    const out = join(outDir, `${manifest.command}_${panel.id}.svg`);
    writeFileSync(out, svg, "utf-8");
    written.push(out);
  }
  return written;
}
