/**
 * TypeScript bindings for the mpu-detect training primitives.
 *
 * The heavy lifting stays in the Python package; this module drives a
 * long-lived worker process over a newline-delimited JSON protocol, so
 * every value returned here is bit-identical to the primary
 * implementation (JSON round-trips IEEE doubles exactly via
 * shortest-representation printing on both sides).
 *
 * Gradients come back split by input array: the combined objective is
 *   loss = pnRisk(pnScores, pnLabels) + gamma * mpuRisk(pos..., unl...)
 * and posGrad/unlGrad/pnGrad are d(loss)/d(score) for the respective
 * arrays.  A host that feeds the same sample into both the PN and PU
 * terms sums the two entries itself.
 */

import { spawn, ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface, Interface } from "node:readline";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

export type PuVariant = "upu" | "nnpu";
export type Surrogate = "sigmoid" | "logistic";

export interface MpuLossArgs {
  posScores: number[];
  posLengths: number[];
  unlScores: number[];
  pnScores: number[];
  pnLabels: number[];
  gamma: number;
  /** Token-positive probability of the prior table. */
  p: number;
  /** Largest tabulated length; lookups clamp beyond it. */
  lMax: number;
  variant?: PuVariant;
  surrogate?: Surrogate;
}

export interface MpuLossResult {
  loss: number;
  posGrad: number[];
  unlGrad: number[];
  pnGrad: number[];
}

/** Error reported by the Python side of the boundary. */
export class BindingsError extends Error {
  constructor(
    readonly kind: string,
    message: string,
  ) {
    super(`${kind}: ${message}`);
    this.name = "BindingsError";
  }
}

/** Immutable prior table handle; lookups are local and clamp to the tail. */
export class BoundPriorTable {
  constructor(
    readonly p: number,
    readonly lMax: number,
    readonly values: readonly number[],
  ) {}

  lookup(length: number): number {
    if (!Number.isInteger(length) || length < 1) {
      throw new BindingsError("ConfigError", `token length must be >= 1, got ${length}`);
    }
    return this.values[Math.min(length, this.lMax) - 1];
  }
}

interface Pending {
  resolve: (value: unknown) => void;
  reject: (error: Error) => void;
}

/**
 * Connection to one worker process.  Safe for concurrent calls: requests
 * are tagged with ids and may pipeline; the worker answers in order.
 */
export class MpuBindings {
  private child: ChildProcessWithoutNullStreams | null = null;
  private lines: Interface | null = null;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private readonly pythonBin: string;
  private readonly workerPath: string;

  constructor(options: { pythonBin?: string } = {}) {
    this.pythonBin =
      options.pythonBin ?? process.env.MPU_BINDINGS_PYTHON ?? "python3";
    const here = dirname(fileURLToPath(import.meta.url));
    this.workerPath = join(here, "..", "python", "worker.py");
  }

  private ensureWorker(): ChildProcessWithoutNullStreams {
    if (this.child) {
      return this.child;
    }
    const child = spawn(this.pythonBin, [this.workerPath], {
      stdio: ["pipe", "pipe", "pipe"],
    });
    child.on("exit", () => {
      const error = new BindingsError("WorkerExit", "worker process exited");
      for (const entry of this.pending.values()) {
        entry.reject(error);
      }
      this.pending.clear();
      this.child = null;
      this.lines = null;
    });
    this.lines = createInterface({ input: child.stdout });
    this.lines.on("line", (line) => {
      if (!line.trim()) {
        return;
      }
      const response = JSON.parse(line) as {
        id: number;
        ok: boolean;
        result?: unknown;
        error?: { type: string; message: string };
      };
      const entry = this.pending.get(response.id);
      if (!entry) {
        return;
      }
      this.pending.delete(response.id);
      if (response.ok) {
        entry.resolve(response.result);
      } else {
        entry.reject(
          new BindingsError(response.error?.type ?? "Error", response.error?.message ?? ""),
        );
      }
    });
    this.child = child;
    return child;
  }

  private call<T>(op: string, args: Record<string, unknown>): Promise<T> {
    const child = this.ensureWorker();
    const id = this.nextId++;
    const request = JSON.stringify({ id, op, args });
    return new Promise<T>((resolve, reject) => {
      this.pending.set(id, { resolve: resolve as (v: unknown) => void, reject });
      child.stdin.write(request + "\n");
    });
  }

  /** Build (or fetch the worker-cached) prior table for (p, lMax). */
  async priorTable(p: number, lMax: number): Promise<BoundPriorTable> {
    const result = await this.call<{ p: number; l_max: number; values: number[] }>(
      "prior_table",
      { p, l_max: lMax },
    );
    return new BoundPriorTable(result.p, result.l_max, result.values);
  }

  /** Enumeration oracle for small lengths (testing aid, l <= 20). */
  async priorBruteforce(l: number, p: number): Promise<number> {
    const result = await this.call<{ value: number }>("prior_bruteforce", { l, p });
    return result.value;
  }

  /** Combined PN + gamma * multiscale-PU loss and per-score gradients. */
  async mpuLoss(args: MpuLossArgs): Promise<MpuLossResult> {
    const result = await this.call<{
      loss: number;
      pos_grad: number[];
      unl_grad: number[];
      pn_grad: number[];
    }>("mpu_loss", {
      pos_scores: args.posScores,
      pos_lengths: args.posLengths,
      unl_scores: args.unlScores,
      pn_scores: args.pnScores,
      pn_labels: args.pnLabels,
      gamma: args.gamma,
      p: args.p,
      l_max: args.lMax,
      variant: args.variant ?? "nnpu",
      surrogate: args.surrogate ?? "sigmoid",
    });
    return {
      loss: result.loss,
      posGrad: result.pos_grad,
      unlGrad: result.unl_grad,
      pnGrad: result.pn_grad,
    };
  }

  /** One sentence-multiscaling pass; identical to the primary for a seed. */
  async multiscale(text: string, pSent: number, seed: number): Promise<string> {
    const result = await this.call<{ text: string }>("multiscale", {
      text,
      p_sent: pSent,
      seed,
    });
    return result.text;
  }

  /** Terminate the worker process. */
  async close(): Promise<void> {
    if (this.child) {
      this.child.stdin.end();
      this.child.kill();
      this.child = null;
      this.lines = null;
    }
  }
}
