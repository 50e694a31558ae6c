/**
 * Export substitute distributions and embedding tables as interchange
 * files for the downstream toolkit.
 *
 * Input is the toolkit's transformed-input JSONL (one record per example:
 * id, variant, tokens, position).  Each example is scored at its
 * prediction position and written as float32 log-scores over the
 * substitution vocabulary; ids are keyed `id#variant` so one file set can
 * carry several input variants side by side.  Examples whose prediction
 * position is not representable are flagged, logged and skipped.
 */

import * as fs from "node:fs";

import { Backend, FAMILY_CONVENTIONS } from "./backend";
import { Distribution, writeDistributions, writeEmbeddings, writeVocab } from "./interchange";

/** Slot marker used by the upstream transform for pattern blanks. */
export const PREDICTION_SLOT = "____";

/** Inputs shorter than this get the prefix text prepended (when set). */
export const SHORT_CONTEXT_THRESHOLD = 8;

export interface TransformedExample {
  id: string;
  variant: string;
  tokens: string[];
  position: number;
}

export function readTransformedInputs(path: string): TransformedExample[] {
  const examples: TransformedExample[] = [];
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let record: unknown;
    try {
      record = JSON.parse(line);
    } catch {
      throw new Error(`${path}:${i + 1}: not JSON`);
    }
    const r = record as Partial<TransformedExample>;
    if (
      typeof r.id !== "string" ||
      !Array.isArray(r.tokens) ||
      typeof r.position !== "number"
    ) {
      throw new Error(`${path}:${i + 1}: missing id/tokens/position`);
    }
    examples.push({
      id: r.id,
      variant: typeof r.variant === "string" ? r.variant : "none",
      tokens: r.tokens.map(String),
      position: r.position,
    });
  }
  return examples;
}

/** `id#variant` key: pattern variants keep their name, plain inputs are
 *  keyed by what the model saw at the target (original vs masked). */
export function exampleKey(example: TransformedExample, backend: Backend): string {
  const variant =
    example.variant === "none" ? backend.spec.visibility : example.variant;
  return `${example.id}#${variant}`;
}

export interface ExportResult {
  written: number;
  skipped: { id: string; reason: string }[];
  files: string[];
}

function toFloat32(scores: Float64Array): Float32Array {
  return Float32Array.from(scores);
}

function prepared(
  example: TransformedExample,
  backend: Backend,
): { tokens: string[]; position: number; masked?: boolean } | null {
  let { tokens, position } = example;
  if (!Number.isInteger(position) || position < 0 || position >= tokens.length) {
    return null;
  }
  const conventions = FAMILY_CONVENTIONS[backend.spec.family];
  const slot = tokens[position] === PREDICTION_SLOT;
  if (slot && conventions.mask !== null) {
    tokens = [...tokens];
    tokens[position] = conventions.mask;
  }
  // short contexts degrade for the autoregressive family: prepend the
  // configured text, terminated by the end-of-document token
  const prefixText = backend.spec.prefixText;
  if (
    prefixText &&
    conventions.endOfDocument &&
    tokens.length < SHORT_CONTEXT_THRESHOLD
  ) {
    const prefix = [...prefixText.split(/\s+/).filter(Boolean), conventions.endOfDocument];
    tokens = [...prefix, ...tokens];
    position += prefix.length;
  }
  return { tokens, position, masked: slot ? true : undefined };
}

export function exportDistributions(
  inputPath: string,
  backend: Backend,
  outPrefix: string,
  log: (message: string) => void = console.error,
): ExportResult {
  const examples = readTransformedInputs(inputPath);
  const skipped: { id: string; reason: string }[] = [];
  const sides: ("left" | "right" | undefined)[] = FAMILY_CONVENTIONS[
    backend.spec.family
  ].splitContexts
    ? ["left", "right"]
    : [undefined];

  const bySide = new Map<string, Distribution[]>();
  for (const example of examples) {
    const input = prepared(example, backend);
    if (input === null) {
      const reason = `prediction position ${example.position} not representable`;
      skipped.push({ id: example.id, reason });
      log(`skip ${example.id}: ${reason}`);
      continue;
    }
    for (const side of sides) {
      const scores = backend.score(input.tokens, input.position, {
        side,
        masked: input.masked,
      });
      const key = side ?? "single";
      if (!bySide.has(key)) bySide.set(key, []);
      bySide.get(key)!.push({
        id: exampleKey(example, backend),
        scores: toFloat32(scores),
      });
    }
  }

  const vocab = backend.vocabulary.substitutionVocab;
  const files: string[] = [];
  for (const [key, distributions] of bySide) {
    const path =
      key === "single" ? `${outPrefix}.lsd1` : `${outPrefix}.${key}.lsd1`;
    writeDistributions(path, vocab.length, distributions);
    files.push(path);
  }
  const vocabPath = `${outPrefix}.vocab.txt`;
  writeVocab(vocabPath, vocab);
  files.push(vocabPath);
  return { written: examples.length - skipped.length, skipped, files };
}

export function exportEmbeddingTable(
  backend: Backend,
  outPrefix: string,
): ExportResult {
  const rows = backend.embeddings().map(toFloat32);
  const path = `${outPrefix}.lse1`;
  writeEmbeddings(path, rows);
  const vocabPath = `${outPrefix}.vocab.txt`;
  writeVocab(vocabPath, backend.vocabulary.substitutionVocab);
  return { written: rows.length, skipped: [], files: [path, vocabPath] };
}
