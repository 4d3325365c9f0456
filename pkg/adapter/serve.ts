/**
 * Reference external classifier for the explanation engine's wire protocol.
 *
 * Trains a seeded tree ensemble on a dataset file (normalized internally with
 * the same min-max protocol the engine uses, over the same 11 statistical
 * features) and then answers handshake/predict requests on stdin until it
 * closes. Incoming samples are expected in normalized units, i.e. the space
 * the engine searches in.
 *
 *   node dist/serve.js --dataset train.ndjson --trees 50 --seed 7
 */
import * as readline from "readline";

import { applyNormalization, fitNormalization, loadDataset } from "./src/dataset";
import { FEATURE_RECIPE_ID, sampleFeatures } from "./src/features";
import { trainForest } from "./src/forest";
import { handleLine, ServerContext } from "./src/protocol";

interface Args {
  dataset: string;
  trees: number;
  seed: number;
  recipe: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { dataset: "", trees: 50, seed: 0, recipe: FEATURE_RECIPE_ID };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--dataset":
        args.dataset = value;
        i += 1;
        break;
      case "--trees":
        args.trees = Number(value);
        i += 1;
        break;
      case "--seed":
        args.seed = Number(value);
        i += 1;
        break;
      case "--recipe":
        args.recipe = value;
        i += 1;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.dataset) {
    throw new Error("--dataset is required");
  }
  if (args.recipe !== FEATURE_RECIPE_ID) {
    throw new Error(
      `feature recipe ${args.recipe} is not supported; this adapter implements ${FEATURE_RECIPE_ID}`
    );
  }
  return args;
}

export function buildContext(args: Args): ServerContext {
  const dataset = loadDataset(args.dataset);
  const normalization = fitNormalization(dataset);
  const features = dataset.samples.map((s) =>
    sampleFeatures(applyNormalization(normalization, s.values))
  );
  const model = trainForest(
    features,
    dataset.samples.map((s) => s.label),
    { trees: args.trees, seed: args.seed }
  );
  return { model, metricNames: dataset.metricNames, length: dataset.length };
}

function main(): void {
  const args = parseArgs(process.argv.slice(2));
  const context = buildContext(args);
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  rl.on("line", (line) => {
    const response = handleLine(context, line);
    if (response !== null) {
      process.stdout.write(JSON.stringify(response) + "\n");
    }
  });
}

if (require.main === module) {
  main();
}
