/**
 * The wire protocol: newline-delimited JSON requests on stdin, one response
 * object per line on stdout. Handshake declares class names; predict maps a
 * batch of m-by-t samples to probability rows. Bad input of any shape gets an
 * error response rather than a crash, so one malformed line never takes the
 * classifier down.
 */
import { sampleFeatures } from "./features";
import { ForestModel, predictProbabilities } from "./forest";

export interface ServerContext {
  model: ForestModel;
  metricNames: string[];
  length: number;
}

type Json = Record<string, unknown>;

function errorResponse(id: unknown, code: string, message: string): Json {
  return { id: id === undefined ? null : id, error: { code, message } };
}

export function handleLine(context: ServerContext, line: string): Json | null {
  const trimmed = line.trim();
  if (trimmed.length === 0) return null;

  let request: Json;
  try {
    request = JSON.parse(trimmed);
  } catch {
    return errorResponse(null, "bad-json", "request line is not valid JSON");
  }
  if (typeof request !== "object" || request === null) {
    return errorResponse(null, "bad-request", "request must be a JSON object");
  }
  const id = request.id;
  const op = request.op;

  if (op === "handshake") {
    return { id: id ?? null, class_names: context.model.classNames };
  }
  if (op !== "predict") {
    return errorResponse(id, "bad-op", `unknown op ${JSON.stringify(op)}`);
  }

  const samples = request.samples;
  if (!Array.isArray(samples)) {
    return errorResponse(id, "bad-request", "predict needs a samples array");
  }
  const names = request.metric_names;
  if (Array.isArray(names)) {
    const expected = context.metricNames;
    if (names.length !== expected.length || names.some((n, i) => n !== expected[i])) {
      return errorResponse(
        id, "schema-mismatch",
        `expected metrics [${expected.join(", ")}] in order`
      );
    }
  }

  const rows: number[][] = [];
  for (const sample of samples) {
    if (
      !Array.isArray(sample) ||
      sample.length !== context.metricNames.length ||
      sample.some((row) => !Array.isArray(row) || row.length !== context.length)
    ) {
      return errorResponse(
        id, "bad-sample",
        `each sample must be ${context.metricNames.length} series of length ${context.length}`
      );
    }
    const matrix = (sample as unknown[][]).map((row) => (row as unknown[]).map(Number));
    if (matrix.some((row) => row.some((v) => !Number.isFinite(v)))) {
      return errorResponse(id, "bad-sample", "sample values must be finite numbers");
    }
    rows.push(predictProbabilities(context.model, sampleFeatures(matrix)));
  }
  return { id: id ?? null, probabilities: rows, class_names: context.model.classNames };
}
