#!/usr/bin/env node
import { render } from "./render.js";

const [manifest, outDir] = process.argv.slice(2);
if (!manifest || !outDir) {
  console.error("usage: ridgelab-figures <manifest.jsonl> <out-dir>");
  process.exit(2);
}
try {
  const files = render(manifest, outDir);
  for (const f of files) console.log(f);
} catch (err) {
  console.error(err instanceof Error ? err.message : String(err));
  process.exit(1);
}
