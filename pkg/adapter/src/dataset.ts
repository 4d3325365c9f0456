/**
 * Newline-delimited JSON datasets and the min-max normalization protocol, as
 * produced and consumed by the Python engine: the first record fixes the
 * metric order, normalization maps each metric onto [0, 1] using training-set
 * extrema, and constant metrics normalize to 0.
 */
import * as fs from "fs";

export interface DatasetSample {
  sampleId: string;
  label: string | null;
  values: number[][]; // m x t, metric-major in schema order
}

export interface Dataset {
  metricNames: string[];
  length: number;
  samples: DatasetSample[];
}

export function loadDataset(path: string): Dataset {
  const lines = fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty dataset`);
  }
  const first = JSON.parse(lines[0]);
  const metricNames = Object.keys(first.metrics);
  const length = (first.metrics[metricNames[0]] as number[]).length;

  const seen = new Set<string>();
  const samples: DatasetSample[] = [];
  for (const [index, line] of lines.entries()) {
    const record = JSON.parse(line);
    const sampleId = String(record.sample_id);
    if (seen.has(sampleId)) {
      throw new Error(`${path}:${index + 1}: duplicate sample id ${sampleId}`);
    }
    seen.add(sampleId);
    const values: number[][] = [];
    for (const name of metricNames) {
      const row = record.metrics[name];
      if (!Array.isArray(row) || row.length !== length) {
        throw new Error(`${path}:${index + 1}: metric ${name} is malformed`);
      }
      values.push(row.map(Number));
    }
    samples.push({
      sampleId,
      label: record.label === null || record.label === undefined ? null : String(record.label),
      values,
    });
  }
  return { metricNames, length, samples };
}

export interface Normalization {
  mins: number[];
  maxs: number[];
}

export function fitNormalization(dataset: Dataset): Normalization {
  const m = dataset.metricNames.length;
  const mins = new Array(m).fill(Infinity);
  const maxs = new Array(m).fill(-Infinity);
  for (const sample of dataset.samples) {
    for (let j = 0; j < m; j += 1) {
      for (const v of sample.values[j]) {
        if (v < mins[j]) mins[j] = v;
        if (v > maxs[j]) maxs[j] = v;
      }
    }
  }
  return { mins, maxs };
}

export function applyNormalization(norm: Normalization, values: number[][]): number[][] {
  return values.map((row, j) => {
    const span = norm.maxs[j] - norm.mins[j];
    if (span <= 0) return row.map(() => 0);
    return row.map((v) => (v - norm.mins[j]) / span);
  });
}
