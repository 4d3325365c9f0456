/** Small deterministic PRNG (splitmix32) so training is reproducible per seed. */

export class Rng {
  private state: number;

  constructor(seed: number) {
    this.state = seed >>> 0;
  }

  /** Uniform float in [0, 1). */
  next(): number {
    this.state = (this.state + 0x9e3779b9) >>> 0;
    let z = this.state;
    z ^= z >>> 16;
    z = Math.imul(z, 0x21f0aaad);
    z ^= z >>> 15;
    z = Math.imul(z, 0x735a2d97);
    z ^= z >>> 15;
    return (z >>> 0) / 4294967296;
  }

  /** Uniform integer in [0, bound). */
  int(bound: number): number {
    return Math.floor(this.next() * bound);
  }

  /** k distinct integers from [0, bound), in draw order. */
  sampleWithoutReplacement(bound: number, k: number): number[] {
    const pool = Array.from({ length: bound }, (_, i) => i);
    for (let i = 0; i < Math.min(k, bound); i += 1) {
      const j = i + this.int(bound - i);
      [pool[i], pool[j]] = [pool[j], pool[i]];
    }
    return pool.slice(0, Math.min(k, bound));
  }
}
