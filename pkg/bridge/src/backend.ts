/**
 * Model backends and family input conventions.
 *
 * Each family carries its tokenizer's surface conventions: the mask token,
 * the subword continuation/word-boundary markers, the special tokens, and
 * whether the model sees the prediction position at all (the word-level
 * context models never do).  The backend shipped here derives every weight
 * deterministically from (family, checkpoint) seeds, so exports are
 * reproducible and the full pipeline can be exercised offline; swapping in
 * a checkpoint-loading backend only means implementing `Backend`.
 */

import { fnv1a, seededVector } from "./prng";

export type Family = "bert" | "roberta" | "xlnet" | "elmo" | "context2vec";
export type Visibility = "original" | "masked";
export type Pattern = "none" | "and" | "duplicate";

export interface BackendSpec {
  family: Family;
  checkpoint: string;
  visibility: Visibility;
  pattern: Pattern;
  /** Prepended (ending with the end-of-document token) for short inputs. */
  prefixText?: string;
  dim?: number;
}

export interface FamilyConventions {
  mask: string | null;
  /** Marks word-initial pieces ("Ġ", "▁") or continuations ("##"). */
  marker: { kind: "continuation" | "word-initial"; text: string } | null;
  specials: string[];
  /** Word-level context models never receive the target token. */
  supportsOriginal: boolean;
  /** Separate left/right context scoring (two export files). */
  splitContexts: boolean;
  endOfDocument: string | null;
}

export const FAMILY_CONVENTIONS: Record<Family, FamilyConventions> = {
  bert: {
    mask: "[MASK]",
    marker: { kind: "continuation", text: "##" },
    specials: ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"],
    supportsOriginal: true,
    splitContexts: false,
    endOfDocument: null,
  },
  roberta: {
    mask: "<mask>",
    marker: { kind: "word-initial", text: "Ġ" },
    specials: ["<s>", "</s>", "<pad>", "<unk>", "<mask>"],
    supportsOriginal: true,
    splitContexts: false,
    endOfDocument: null,
  },
  xlnet: {
    mask: "<mask>",
    marker: { kind: "word-initial", text: "▁" },
    specials: ["<s>", "</s>", "<pad>", "<unk>", "<mask>", "<eod>"],
    supportsOriginal: true,
    splitContexts: false,
    endOfDocument: "<eod>",
  },
  elmo: {
    mask: null,
    marker: null,
    specials: ["<S>", "</S>", "<UNK>"],
    supportsOriginal: false,
    splitContexts: true,
    endOfDocument: null,
  },
  context2vec: {
    mask: null,
    marker: null,
    specials: ["<UNK>"],
    supportsOriginal: false,
    splitContexts: false,
    endOfDocument: null,
  },
};

export function validateSpec(spec: BackendSpec): void {
  const conventions = FAMILY_CONVENTIONS[spec.family];
  if (!conventions) throw new Error(`unknown family ${spec.family}`);
  if (spec.visibility === "original" && !conventions.supportsOriginal) {
    throw new Error(
      `${spec.family} has no representation for predicting at a visible ` +
        "target position; use visibility=masked",
    );
  }
}

/** Words underlying every toy checkpoint's subword vocabulary. */
export const BASE_WORDS = [
  "animal", "auto", "automobile", "bank", "beast", "bicycle", "bike",
  "boat", "bus", "buy", "car", "cash", "cat", "child", "company", "credit",
  "creature", "cycle", "daughter", "dog", "drive", "firm", "flow", "fly",
  "girl", "go", "house", "institution", "kid", "kill", "loan", "machine",
  "money", "motor", "move", "murder", "pet", "phone", "purchase", "river",
  "road", "run", "shore", "slope", "soar", "stream", "telephone", "travel",
  "truck", "van", "vehicle", "water", "wheel", "wing", "wolf",
];

const CONTINUATIONS = ["s", "ed", "ing", "er", "est", "ly"];

export interface ModelVocabulary {
  /** Raw model tokens, specials and continuations included. */
  tokens: string[];
  /** Whole-word entries (markers stripped), in model-token order. */
  substitutionVocab: string[];
  /** Index into `tokens` for each substitution vocab entry. */
  tokenIndex: number[];
}

/**
 * The substitution vocabulary keeps exactly the model tokens that stand
 * for whole words: continuation pieces and special tokens are excluded,
 * word-boundary markers are stripped.
 */
export function buildModelVocabulary(family: Family): ModelVocabulary {
  const conventions = FAMILY_CONVENTIONS[family];
  const tokens: string[] = [...conventions.specials];
  for (const word of BASE_WORDS) {
    if (conventions.marker?.kind === "word-initial") {
      tokens.push(conventions.marker.text + word);
    } else {
      tokens.push(word);
    }
  }
  if (conventions.marker) {
    for (const piece of CONTINUATIONS) {
      // continuation pieces: "##s" style, or marker-less mid-word pieces
      tokens.push(
        conventions.marker.kind === "continuation"
          ? conventions.marker.text + piece
          : piece,
      );
    }
  }
  const substitutionVocab: string[] = [];
  const tokenIndex: number[] = [];
  for (let i = 0; i < tokens.length; i++) {
    const token = tokens[i];
    if (conventions.specials.includes(token)) continue;
    if (conventions.marker?.kind === "continuation") {
      if (token.startsWith(conventions.marker.text)) continue;
      substitutionVocab.push(token);
    } else if (conventions.marker?.kind === "word-initial") {
      if (!token.startsWith(conventions.marker.text)) continue;
      substitutionVocab.push(token.slice(conventions.marker.text.length));
    } else {
      substitutionVocab.push(token);
    }
    tokenIndex.push(i);
  }
  return { tokens, substitutionVocab, tokenIndex };
}

export interface ScoreOptions {
  /** Restrict the visible context for split-context families. */
  side?: "left" | "right";
  /** Hide the prediction position regardless of the spec's visibility
   *  (pattern slots are blanks and are always masked). */
  masked?: boolean;
}

export interface Backend {
  readonly spec: BackendSpec;
  readonly vocabulary: ModelVocabulary;
  /** Input-embedding rows aligned with the substitution vocabulary. */
  embeddings(): Float64Array[];
  /** Log-scores over the substitution vocabulary for predicting at
   *  `position`. */
  score(tokens: string[], position: number, options?: ScoreOptions): Float64Array;
}

const DEFAULT_DIM = 32;
const CONTEXT_DECAY = 0.8;

/** Deterministic backend: weights are seeded by (family, checkpoint). */
export class SeededBackend implements Backend {
  readonly spec: BackendSpec;
  readonly vocabulary: ModelVocabulary;
  private readonly dim: number;
  private readonly cache = new Map<string, Float64Array>();

  constructor(spec: BackendSpec) {
    validateSpec(spec);
    this.spec = spec;
    this.vocabulary = buildModelVocabulary(spec.family);
    this.dim = spec.dim ?? DEFAULT_DIM;
  }

  private embeddingOf(token: string): Float64Array {
    let row = this.cache.get(token);
    if (!row) {
      const seed = fnv1a(`${this.spec.family}:${this.spec.checkpoint}:${token}`);
      row = seededVector(seed, this.dim);
      this.cache.set(token, row);
    }
    return row;
  }

  embeddings(): Float64Array[] {
    return this.vocabulary.tokenIndex.map((tokenPosition) =>
      this.embeddingOf(this.vocabulary.tokens[tokenPosition]),
    );
  }

  score(
    tokens: string[],
    position: number,
    options: ScoreOptions = {},
  ): Float64Array {
    const hidden =
      options.masked ??
      (this.spec.visibility === "masked" ||
        FAMILY_CONVENTIONS[this.spec.family].mask === null);
    const side = options.side;
    const context = new Float64Array(this.dim);
    for (let i = 0; i < tokens.length; i++) {
      if (i === position && hidden) continue;
      if (side === "left" && i >= position) continue;
      if (side === "right" && i <= position) continue;
      const weight = Math.pow(CONTEXT_DECAY, Math.abs(i - position));
      const row = this.embeddingOf(tokens[i]);
      for (let d = 0; d < this.dim; d++) context[d] += weight * row[d];
    }
    const rows = this.embeddings();
    const scores = new Float64Array(rows.length);
    for (let w = 0; w < rows.length; w++) {
      let dot = 0;
      for (let d = 0; d < this.dim; d++) dot += rows[w][d] * context[d];
      scores[w] = dot;
    }
    // log-softmax, so files carry normalized log-probabilities
    let max = -Infinity;
    for (const s of scores) max = Math.max(max, s);
    let sum = 0;
    for (const s of scores) sum += Math.exp(s - max);
    const logZ = max + Math.log(sum);
    for (let w = 0; w < scores.length; w++) scores[w] -= logZ;
    return scores;
  }
}
