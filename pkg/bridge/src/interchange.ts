/**
 * Writers (and readers, used by tests) for the toolkit interchange files.
 *
 * Layouts, all little-endian:
 *
 *   LSD1: "LSD1" | u32 vocabSize | u64 exampleCount |
 *         per example: u16 idLen | id UTF-8 | vocabSize * f32 log-scores
 *   LSE1: "LSE1" | u32 vocabSize | u32 dim | row-major f32
 *   vocab: one entry per line, UTF-8
 */

import * as fs from "node:fs";

export interface Distribution {
  id: string;
  scores: Float32Array;
}

const DISTRIBUTION_MAGIC = "LSD1";
const EMBEDDING_MAGIC = "LSE1";

export function writeDistributions(
  path: string,
  vocabSize: number,
  distributions: Distribution[],
): void {
  const chunks: Buffer[] = [];
  const header = Buffer.alloc(16);
  header.write(DISTRIBUTION_MAGIC, 0, "ascii");
  header.writeUInt32LE(vocabSize, 4);
  header.writeBigUInt64LE(BigInt(distributions.length), 8);
  chunks.push(header);
  for (const d of distributions) {
    if (d.scores.length !== vocabSize) {
      throw new Error(`${d.id}: score length ${d.scores.length} != ${vocabSize}`);
    }
    const id = Buffer.from(d.id, "utf-8");
    if (id.length > 0xffff) throw new Error(`${d.id}: id too long`);
    const idLen = Buffer.alloc(2);
    idLen.writeUInt16LE(id.length, 0);
    const payload = Buffer.alloc(4 * vocabSize);
    for (let i = 0; i < vocabSize; i++) payload.writeFloatLE(d.scores[i], 4 * i);
    chunks.push(idLen, id, payload);
  }
  fs.writeFileSync(path, Buffer.concat(chunks));
}

export function readDistributions(path: string): {
  vocabSize: number;
  distributions: Distribution[];
} {
  const data = fs.readFileSync(path);
  if (data.subarray(0, 4).toString("ascii") !== DISTRIBUTION_MAGIC) {
    throw new Error(`${path}: bad magic`);
  }
  const vocabSize = data.readUInt32LE(4);
  const count = Number(data.readBigUInt64LE(8));
  const distributions: Distribution[] = [];
  let offset = 16;
  for (let k = 0; k < count; k++) {
    const idLen = data.readUInt16LE(offset);
    offset += 2;
    const id = data.subarray(offset, offset + idLen).toString("utf-8");
    offset += idLen;
    const scores = new Float32Array(vocabSize);
    for (let i = 0; i < vocabSize; i++) {
      scores[i] = data.readFloatLE(offset);
      offset += 4;
    }
    distributions.push({ id, scores });
  }
  if (offset > data.length) throw new Error(`${path}: truncated`);
  return { vocabSize, distributions };
}

export function writeEmbeddings(path: string, rows: Float32Array[]): void {
  if (rows.length === 0) throw new Error("no embedding rows");
  const dim = rows[0].length;
  const header = Buffer.alloc(12);
  header.write(EMBEDDING_MAGIC, 0, "ascii");
  header.writeUInt32LE(rows.length, 4);
  header.writeUInt32LE(dim, 8);
  const chunks = [header];
  for (const row of rows) {
    if (row.length !== dim) throw new Error("ragged embedding rows");
    const payload = Buffer.alloc(4 * dim);
    for (let i = 0; i < dim; i++) payload.writeFloatLE(row[i], 4 * i);
    chunks.push(payload);
  }
  fs.writeFileSync(path, Buffer.concat(chunks));
}

export function readEmbeddings(path: string): {
  vocabSize: number;
  dim: number;
  rows: Float32Array[];
} {
  const data = fs.readFileSync(path);
  if (data.subarray(0, 4).toString("ascii") !== EMBEDDING_MAGIC) {
    throw new Error(`${path}: bad magic`);
  }
  const vocabSize = data.readUInt32LE(4);
  const dim = data.readUInt32LE(8);
  const rows: Float32Array[] = [];
  let offset = 12;
  for (let r = 0; r < vocabSize; r++) {
    const row = new Float32Array(dim);
    for (let i = 0; i < dim; i++) {
      row[i] = data.readFloatLE(offset);
      offset += 4;
    }
    rows.push(row);
  }
  return { vocabSize, dim, rows };
}

export function writeVocab(path: string, entries: string[]): void {
  fs.writeFileSync(path, entries.map((w) => w + "\n").join(""));
}

export function readVocab(path: string): string[] {
  return fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.length > 0);
}
