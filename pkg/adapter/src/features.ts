/**
 * Per-series statistical features, bit-compatible with the Python engine's
 * extractor ("stat11-v1"): min, max, mean, population std, Fisher-Pearson
 * skew, excess kurtosis (both 0 for constant series), and the 5/25/50/75/95th
 * percentiles with linear interpolation between order statistics. Features
 * are emitted metric-major: all 11 features of metric 0, then metric 1, ...
 */

export const FEATURE_NAMES = [
  "min",
  "max",
  "mean",
  "std",
  "skew",
  "kurtosis",
  "p5",
  "p25",
  "p50",
  "p75",
  "p95",
] as const;

export const FEATURES_PER_METRIC = FEATURE_NAMES.length;
export const FEATURE_RECIPE_ID = "stat11-v1";

const PERCENTILES = [5, 25, 50, 75, 95];

function percentile(sorted: number[], q: number): number {
  const n = sorted.length;
  if (n === 1) return sorted[0];
  const h = ((n - 1) * q) / 100;
  const lo = Math.floor(h);
  if (lo >= n - 1) return sorted[n - 1];
  return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
}

export function seriesFeatures(series: number[]): number[] {
  const n = series.length;
  let min = Infinity;
  let max = -Infinity;
  let sum = 0;
  for (const v of series) {
    if (v < min) min = v;
    if (v > max) max = v;
    sum += v;
  }
  const mean = sum / n;

  let m2 = 0;
  for (const v of series) {
    const d = v - mean;
    m2 += d * d;
  }
  m2 /= n;
  const std = Math.sqrt(m2);

  // Standardize before the higher moments so near-zero variances cannot
  // overflow; |z| is bounded by sqrt(n).
  let skew = 0;
  let kurtosis = 0;
  if (std > 0) {
    let z3 = 0;
    let z4 = 0;
    for (const v of series) {
      const z = (v - mean) / std;
      z3 += z * z * z;
      z4 += z * z * z * z;
    }
    skew = z3 / n;
    kurtosis = z4 / n - 3;
  }

  const sorted = [...series].sort((a, b) => a - b);
  const pcts = PERCENTILES.map((q) => percentile(sorted, q));
  return [min, max, mean, std, skew, kurtosis, ...pcts];
}

/** Features of an m-by-t sample matrix, metric-major. */
export function sampleFeatures(values: number[][]): number[] {
  const out: number[] = [];
  for (const row of values) {
    out.push(...seriesFeatures(row));
  }
  return out;
}

export function featureNames(metricNames: string[]): string[] {
  const out: string[] = [];
  for (const metric of metricNames) {
    for (const feat of FEATURE_NAMES) {
      out.push(`${metric}::${feat}`);
    }
  }
  return out;
}
