/**
 * Bridge CLI: export distributions / embeddings for a model family.
 *
 *   export-distributions --family bert --checkpoint seed-1 \
 *       --input transformed.jsonl --out-prefix out/bert \
 *       [--visibility original|masked] [--pattern none|and|duplicate] \
 *       [--prefix-text "..."]
 *   export-embeddings --family bert --checkpoint seed-1 --out-prefix out/bert
 *
 * LEXSUB_BRIDGE_CACHE names the checkpoint cache directory (reserved for
 * checkpoint-loading backends; the seeded backend derives weights from the
 * checkpoint id alone).
 */

import * as path from "node:path";
import * as fs from "node:fs";

import { BackendSpec, Family, Pattern, SeededBackend, Visibility } from "./backend";
import { exportDistributions, exportEmbeddingTable } from "./exporter";

function parseArguments(argv: string[]): Map<string, string> {
  const options = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad argument ${flag}`);
    }
    options.set(flag.slice(2), argv[i + 1]);
  }
  return options;
}

function specFrom(options: Map<string, string>): BackendSpec {
  const family = options.get("family");
  if (!family) throw new Error("--family is required");
  return {
    family: family as Family,
    checkpoint: options.get("checkpoint") ?? "default",
    visibility: (options.get("visibility") ?? "masked") as Visibility,
    pattern: (options.get("pattern") ?? "none") as Pattern,
    prefixText: options.get("prefix-text"),
  };
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const options = parseArguments(rest);
    const outPrefix = options.get("out-prefix");
    if (!outPrefix) throw new Error("--out-prefix is required");
    fs.mkdirSync(path.dirname(path.resolve(outPrefix)), { recursive: true });
    const cacheDir = process.env.LEXSUB_BRIDGE_CACHE;
    const backend = new SeededBackend(specFrom(options));
    if (cacheDir) console.error(`checkpoint cache: ${cacheDir}`);

    if (command === "export-distributions") {
      const input = options.get("input");
      if (!input) throw new Error("--input is required");
      const result = exportDistributions(input, backend, outPrefix);
      console.error(
        `wrote ${result.written} examples, skipped ${result.skipped.length}: ` +
          result.files.join(", "),
      );
      return 0;
    }
    if (command === "export-embeddings") {
      const result = exportEmbeddingTable(backend, outPrefix);
      console.error(`wrote ${result.written} rows: ${result.files.join(", ")}`);
      return 0;
    }
    throw new Error(
      `unknown command ${command ?? "(none)"}; use export-distributions or export-embeddings`,
    );
  } catch (error) {
    console.error(`bridge: error: ${(error as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
