/** Designer state and the edit -> debounced predict -> render loop.
 *
 * Every number shown in the UI comes from a service response; the store
 * never evaluates the loss model locally.  Edits are validated before any
 * API call, predict requests are debounced, and responses that arrive out
 * of order are discarded by sequence number.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  LawParams,
  PredictResponse,
  ScheduleSpec,
  SweepCell,
  SweepResponse,
} from "./types.js";
import type { SweepKind } from "./api.js";
import { pruneForKind, validateSpec, type Issue } from "./validate.js";

export const MAX_OVERLAYS = 8;
export const DEFAULT_DEBOUNCE_MS = 150;

export interface Overlay {
  label: string;
  spec: ScheduleSpec;
  prediction: PredictResponse;
}

export interface SweepPanelState {
  kind: SweepKind;
  result: SweepResponse | null;
  error: string | null;
  hint: string | null;
  running: boolean;
}

export interface DesignerState {
  activeSpec: ScheduleSpec;
  fitId: string | null;
  params: LawParams | null;
  lambda: number | null;
  issues: Issue[];
  prediction: PredictResponse | null;
  predictionStale: boolean;
  error: string | null;
  overlays: Overlay[];
  sweep: SweepPanelState;
}

export const DEFAULT_SPEC: ScheduleSpec = {
  kind: "wsd",
  total_steps: 20_000,
  warmup_steps: 500,
  eta_max: 2e-4,
  eta_min: 0,
  stable_end: 18_000,
  anneal_fn: "cosine",
};

type Listener = (state: DesignerState) => void;

export class DesignerStore {
  readonly state: DesignerState;
  private listeners = new Set<Listener>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private seq = 0;
  private sweepSeq = 0;

  constructor(
    private api: ApiClient,
    private debounceMs: number = DEFAULT_DEBOUNCE_MS,
  ) {
    this.state = {
      activeSpec: { ...DEFAULT_SPEC },
      fitId: null,
      params: null,
      lambda: null,
      issues: [],
      prediction: null,
      predictionStale: false,
      error: null,
      overlays: [],
      sweep: { kind: "wsd", result: null, error: null, hint: null, running: false },
    };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** Apply a partial edit; schedules one debounced predict if it validates. */
  editSchedule(patch: Partial<ScheduleSpec>): void {
    let next: ScheduleSpec = { ...this.state.activeSpec, ...patch };
    if (patch.kind && patch.kind !== this.state.activeSpec.kind) {
      next = pruneForKind(next);
    }
    this.state.activeSpec = next;
    this.state.issues = validateSpec(next);
    this.state.predictionStale = true;
    if (this.state.issues.length === 0) {
      this.schedulePredict();
    } else if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.notify();
  }

  setFit(fitId: string | null, params: LawParams | null = null, lambda: number | null = null): void {
    this.state.fitId = fitId;
    this.state.params = params;
    this.state.lambda = lambda;
    if (validateSpec(this.state.activeSpec).length === 0) this.schedulePredict();
    this.notify();
  }

  private schedulePredict(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.firePredict();
    }, this.debounceMs);
  }

  /** Issue the predict call immediately (used on load; edits go through the debounce). */
  async firePredict(): Promise<void> {
    const mySeq = ++this.seq;
    const spec = this.state.activeSpec;
    try {
      const prediction = await this.api.predict({
        schedule_spec: spec,
        ...(this.state.fitId ? { fit_id: this.state.fitId } : {}),
        ...(this.state.params ? { params: this.state.params } : {}),
        ...(this.state.lambda != null ? { lambda: this.state.lambda } : {}),
      });
      if (mySeq !== this.seq) return; // a newer request is in flight
      this.state.prediction = prediction;
      this.state.predictionStale = false;
      this.state.error = null;
    } catch (err) {
      if (mySeq !== this.seq) return;
      // Surface inline; the edited spec is left untouched.
      this.state.error = err instanceof Error ? err.message : String(err);
    }
    this.notify();
  }

  pinOverlay(label?: string): boolean {
    const { prediction, activeSpec } = this.state;
    if (!prediction || this.state.overlays.length >= MAX_OVERLAYS) return false;
    this.state.overlays = [
      ...this.state.overlays,
      {
        label: label ?? `pin ${this.state.overlays.length + 1}: ${activeSpec.kind}`,
        spec: JSON.parse(JSON.stringify(activeSpec)) as ScheduleSpec,
        prediction,
      },
    ];
    this.notify();
    return true;
  }

  clearOverlays(): void {
    this.state.overlays = [];
    this.notify();
  }

  /** Serialize the active spec; importSpec() on the result is the identity. */
  exportSpec(): string {
    return JSON.stringify(this.state.activeSpec, Object.keys(this.state.activeSpec).sort(), 2);
  }

  importSpec(text: string): Issue[] {
    let parsed: unknown;
    try {
      parsed = JSON.parse(text);
    } catch {
      return [{ field: "", message: "not valid JSON" }];
    }
    const issues = validateSpec(parsed);
    if (issues.length === 0) {
      this.state.activeSpec = parsed as ScheduleSpec;
      this.state.issues = [];
      this.state.predictionStale = true;
      this.schedulePredict();
      this.notify();
    }
    return issues;
  }

  async runSweep(kind: SweepKind, grid: Record<string, unknown>): Promise<void> {
    const mySeq = ++this.sweepSeq;
    this.state.sweep = { kind, result: null, error: null, hint: null, running: true };
    this.notify();
    try {
      const result = await this.api.sweep(kind, {
        ...(this.state.fitId ? { fit_id: this.state.fitId } : {}),
        ...(this.state.params ? { params: this.state.params } : {}),
        ...(this.state.lambda != null ? { lambda: this.state.lambda } : {}),
        ...grid,
      });
      if (mySeq !== this.sweepSeq) return;
      this.state.sweep = { kind, result, error: null, hint: null, running: false };
    } catch (err) {
      if (mySeq !== this.sweepSeq) return;
      const message = err instanceof Error ? err.message : String(err);
      const hint =
        err instanceof ApiError && err.status === 413
          ? "grid too large for the service; use the CLI sweep commands"
          : null;
      this.state.sweep = { kind, result: null, error: message, hint, running: false };
    }
    this.notify();
  }
}

/** Axis values for rendering a sweep result along its swept dimension. */
export function sweepAxisValues(cells: SweepCell[]): { key: string; values: number[] } {
  if (cells.length === 0) return { key: "", values: [] };
  const numericKeys = Object.keys(cells[0]).filter((k) =>
    cells.every((c) => typeof c[k] === "number"),
  );
  let key = numericKeys[0] ?? "";
  let best = 0;
  for (const candidate of numericKeys) {
    const distinct = new Set(cells.map((c) => c[candidate])).size;
    if (distinct > best) {
      best = distinct;
      key = candidate;
    }
  }
  return { key, values: cells.map((c) => c[key] as number) };
}
