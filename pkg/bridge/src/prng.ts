/**
 * Deterministic PRNG and string hashing.
 *
 * Exports must be reproducible byte-for-byte across runs, so all weight
 * material is derived from splitmix32 streams seeded by FNV-1a hashes of
 * stable strings (family, checkpoint id, token text).
 */

export function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

export function splitmix32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z = z ^ (z >>> 15);
    return (z >>> 0) / 0x100000000;
  };
}

/** Standard-normal-ish samples via Box-Muller over the seeded stream. */
export function seededVector(seed: number, dim: number): Float64Array {
  const next = splitmix32(seed);
  const out = new Float64Array(dim);
  for (let i = 0; i < dim; i++) {
    const u = Math.max(next(), 1e-12);
    const v = next();
    out[i] = Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
  return out;
}
