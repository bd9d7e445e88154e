/**
 * Node bindings for the structscore evaluation toolkit.
 *
 * Every call shells out to the structscore CLI and exchanges JSON text;
 * no metric math happens on this side of the boundary, so bound results
 * are the CLI's results byte for byte.
 */

import { execFile } from "node:child_process";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);

export interface MetricValues {
  sigma_pr: number;
  sigma_pp: number;
  sigma_rr: number;
  P?: number;
  R?: number;
  F?: number;
  J?: number;
  [key: string]: unknown;
}

export interface Report {
  aggregation: string;
  solver_exact: boolean;
  metrics: Record<string, MetricValues>;
  documents: Record<string, Record<string, MetricValues>>;
}

export interface CorpusResult {
  report: Report;
  /** exact bytes the CLI printed, for bit-for-bit comparisons */
  raw: string;
}

export interface ScoreOptions {
  solver?: "exact" | "hillclimb";
  seed?: number;
  nodeLimit?: number;
  aggregation?: "micro" | "macro";
  report?: string[];
}

export type BoundMetric =
  | { kind: "builtin"; name: string; config?: object }
  | { kind: "schema"; schema: object };

export class StructScoreError extends Error {
  constructor(
    message: string,
    public readonly errorKind: string,
    public readonly exitCode: number,
  ) {
    super(message);
    this.name = "StructScoreError";
  }
}

function cliCommand(): string[] {
  const override = process.env.STRUCTSCORE_CLI;
  return override ? override.split(" ") : ["structscore"];
}

export async function runCli(args: string[]): Promise<string> {
  const [command, ...prefix] = cliCommand();
  try {
    const { stdout } = await execFileAsync(command, [...prefix, ...args], {
      encoding: "utf-8",
      maxBuffer: 256 * 1024 * 1024,
    });
    return stdout;
  } catch (err) {
    const failure = err as { code?: number; stderr?: string; message: string };
    const stderr = failure.stderr ?? "";
    try {
      const body = JSON.parse(stderr.trim().split("\n").pop() ?? "");
      throw new StructScoreError(body.error.message, body.error.kind, failure.code ?? 1);
    } catch (parseErr) {
      if (parseErr instanceof StructScoreError) throw parseErr;
      throw new StructScoreError(stderr || failure.message, "transport", failure.code ?? 1);
    }
  }
}

async function withTempDir<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "structscore-"));
  try {
    return await fn(dir);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}

/** Validate a schema document and bind it as a metric. */
export async function bindSchema(schemaText: string): Promise<BoundMetric> {
  let schema: object;
  try {
    schema = JSON.parse(schemaText);
  } catch (err) {
    throw new StructScoreError(`schema is not valid JSON: ${err}`, "schema", 1);
  }
  await withTempDir(async (dir) => {
    const schemaPath = join(dir, "schema.json");
    await writeFile(schemaPath, JSON.stringify(schema));
    await runCli(["validate-schema", "--schema", schemaPath]);
  });
  return { kind: "schema", schema };
}

/** Bind a builtin metric by name, with an optional dataset config. */
export async function builtin(name: string, config?: object): Promise<BoundMetric> {
  const known = (await listMetrics()).map((m) => m.name);
  if (!known.includes(name)) {
    throw new StructScoreError(`unknown metric ${name}; known: ${known.join(", ")}`, "config", 1);
  }
  return { kind: "builtin", name, config };
}

export async function listMetrics(verbose = false): Promise<Array<{ name: string; payload?: string }>> {
  const args = verbose ? ["list-metrics", "--verbose"] : ["list-metrics"];
  return JSON.parse(await runCli(args));
}

function corpusLine(metric: BoundMetric, docId: string, payload: unknown): string {
  const body =
    metric.kind === "schema"
      ? { doc_id: docId, value: payload }
      : { doc_id: docId, ...(payload as object) };
  return JSON.stringify(body);
}

async function evalArgs(metric: BoundMetric, dir: string, opts: ScoreOptions): Promise<string[]> {
  const args: string[] = ["eval"];
  if (metric.kind === "schema") {
    const schemaPath = join(dir, "schema.json");
    await writeFile(schemaPath, JSON.stringify(metric.schema));
    args.push("--schema", schemaPath);
  } else {
    args.push("--metric", metric.name);
    if (metric.config) {
      const configPath = join(dir, "config.json");
      await writeFile(configPath, JSON.stringify(metric.config));
      args.push("--config", configPath);
    }
  }
  if (opts.solver) args.push("--solver", opts.solver);
  if (opts.seed !== undefined) args.push("--seed", String(opts.seed));
  if (opts.nodeLimit !== undefined) args.push("--node-limit", String(opts.nodeLimit));
  if (opts.aggregation) args.push("--aggregate", opts.aggregation);
  if (opts.report) args.push("--report", opts.report.join(","));
  return args;
}

/** Score one (pred, gold) document pair; returns the reported values. */
export async function score(
  metric: BoundMetric,
  pred: unknown,
  gold: unknown,
  opts: ScoreOptions = {},
): Promise<MetricValues> {
  const { report } = await scoreCorpus(metric, [{ docId: "doc", pred, gold }], opts);
  const key = metric.kind === "schema" ? "schema" : metric.name;
  return report.documents["doc"][key];
}

/** Score a corpus of document pairs; returns the full report. */
export async function scoreCorpus(
  metric: BoundMetric,
  docs: Array<{ docId: string; pred: unknown; gold: unknown }>,
  opts: ScoreOptions = {},
): Promise<CorpusResult> {
  return withTempDir(async (dir) => {
    const predPath = join(dir, "pred.jsonl");
    const goldPath = join(dir, "gold.jsonl");
    await writeFile(predPath, docs.map((d) => corpusLine(metric, d.docId, d.pred)).join("\n") + "\n");
    await writeFile(goldPath, docs.map((d) => corpusLine(metric, d.docId, d.gold)).join("\n") + "\n");
    const args = await evalArgs(metric, dir, opts);
    const raw = await runCli([...args, "--pred", predPath, "--gold", goldPath]);
    return { report: JSON.parse(raw) as Report, raw };
  });
}

/** Score prediction/reference JSONL files that already exist on disk. */
export async function scoreCorpusFiles(
  metric: BoundMetric,
  predPath: string,
  goldPath: string,
  opts: ScoreOptions = {},
): Promise<CorpusResult> {
  return withTempDir(async (dir) => {
    const args = await evalArgs(metric, dir, opts);
    const raw = await runCli([...args, "--pred", predPath, "--gold", goldPath]);
    return { report: JSON.parse(raw) as Report, raw };
  });
}
