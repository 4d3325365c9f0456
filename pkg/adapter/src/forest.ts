/**
 * A seeded random forest over feature vectors: bagged CART trees with Gini
 * impurity and per-node feature subsampling. Probabilities are the average of
 * the trees' leaf class distributions, so the ensemble output is a smooth
 * fraction rather than a hard vote.
 */
import { Rng } from "./rng";

interface LeafNode {
  kind: "leaf";
  distribution: number[]; // per-class, sums to 1
}

interface SplitNode {
  kind: "split";
  feature: number;
  threshold: number; // go left when value <= threshold
  left: TreeNode;
  right: TreeNode;
}

type TreeNode = LeafNode | SplitNode;

export interface ForestModel {
  classNames: string[];
  trees: TreeNode[];
}

function distribution(labels: number[], rows: number[], k: number): number[] {
  const counts = new Array(k).fill(0);
  for (const r of rows) counts[labels[r]] += 1;
  return counts.map((c) => c / rows.length);
}

function gini(counts: number[], total: number): number {
  let impurity = 1;
  for (const c of counts) {
    const p = c / total;
    impurity -= p * p;
  }
  return impurity;
}

interface Split {
  feature: number;
  threshold: number;
  left: number[];
  right: number[];
  impurity: number;
}

function bestSplitOn(
  features: number[][],
  labels: number[],
  rows: number[],
  candidates: number[],
  k: number
): Split | null {
  let best: Split | null = null;
  for (const feature of candidates) {
    const ordered = [...rows].sort((a, b) => features[a][feature] - features[b][feature]);
    const leftCounts = new Array(k).fill(0);
    const rightCounts = new Array(k).fill(0);
    for (const r of ordered) rightCounts[labels[r]] += 1;
    for (let i = 0; i < ordered.length - 1; i += 1) {
      const row = ordered[i];
      leftCounts[labels[row]] += 1;
      rightCounts[labels[row]] -= 1;
      const here = features[row][feature];
      const next = features[ordered[i + 1]][feature];
      if (here === next) continue; // cannot separate equal values
      const nLeft = i + 1;
      const nRight = ordered.length - nLeft;
      const impurity =
        (nLeft * gini(leftCounts, nLeft) + nRight * gini(rightCounts, nRight)) /
        ordered.length;
      if (best === null || impurity < best.impurity) {
        best = {
          feature,
          threshold: (here + next) / 2,
          left: ordered.slice(0, nLeft),
          right: ordered.slice(nLeft),
          impurity,
        };
      }
    }
  }
  return best;
}

function growTree(
  features: number[][],
  labels: number[],
  rows: number[],
  k: number,
  rng: Rng,
  featuresPerNode: number,
  maxDepth: number,
  depth: number
): TreeNode {
  const dist = distribution(labels, rows, k);
  if (depth >= maxDepth || rows.length < 2 || dist.some((p) => p === 1)) {
    return { kind: "leaf", distribution: dist };
  }
  const counts = new Array(k).fill(0);
  for (const r of rows) counts[labels[r]] += 1;
  const parentImpurity = gini(counts, rows.length);
  const total = features[0].length;
  const gains = (s: Split | null) => (s === null ? 0 : parentImpurity - s.impurity);

  let split = bestSplitOn(
    features, labels, rows, rng.sampleWithoutReplacement(total, featuresPerNode), k
  );
  if (gains(split) <= 1e-12) {
    // The sampled features could not separate anything; try the full set
    // before giving up, which keeps zero-noise datasets exactly separable.
    split = bestSplitOn(features, labels, rows, Array.from({ length: total }, (_, i) => i), k);
  }
  if (split === null || gains(split) <= 1e-12) {
    return { kind: "leaf", distribution: dist };
  }
  return {
    kind: "split",
    feature: split.feature,
    threshold: split.threshold,
    left: growTree(features, labels, split.left, k, rng, featuresPerNode, maxDepth, depth + 1),
    right: growTree(features, labels, split.right, k, rng, featuresPerNode, maxDepth, depth + 1),
  };
}

export interface TrainOptions {
  trees: number;
  seed: number;
  maxDepth?: number;
}

export function trainForest(
  features: number[][],
  labelNames: (string | null)[],
  options: TrainOptions
): ForestModel {
  if (features.length === 0) {
    throw new Error("cannot train on an empty dataset");
  }
  const classNames = [...new Set(labelNames.filter((l): l is string => l !== null))].sort();
  if (classNames.length < 2) {
    throw new Error("training needs at least two classes");
  }
  const labels = labelNames.map((l) => classNames.indexOf(l as string));
  const rng = new Rng(options.seed);
  const maxDepth = options.maxDepth ?? 12;
  const featuresPerNode = Math.max(1, Math.ceil(Math.sqrt(features[0].length)));
  const trees: TreeNode[] = [];
  for (let t = 0; t < options.trees; t += 1) {
    const rows = Array.from({ length: features.length }, () => rng.int(features.length));
    trees.push(
      growTree(features, labels, rows, classNames.length, rng, featuresPerNode, maxDepth, 0)
    );
  }
  return { classNames, trees };
}

function treeDistribution(tree: TreeNode, feature: number[]): number[] {
  let node = tree;
  while (node.kind === "split") {
    node = feature[node.feature] <= node.threshold ? node.left : node.right;
  }
  return node.distribution;
}

export function predictProbabilities(model: ForestModel, feature: number[]): number[] {
  const k = model.classNames.length;
  const sums = new Array(k).fill(0);
  for (const tree of model.trees) {
    const dist = treeDistribution(tree, feature);
    for (let c = 0; c < k; c += 1) sums[c] += dist[c];
  }
  return sums.map((s) => s / model.trees.length);
}
