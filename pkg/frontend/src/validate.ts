/** Client-side schedule-spec validation.
 *
 * Enforces the same rules as the shared JSON schema plus the semantic
 * invariants the server checks, so the designer never issues an API call
 * with a spec the server would reject.  A test cross-checks the field and
 * enum lists here against the schema file itself.
 */

import type { ScheduleKind, ScheduleSpec } from "./types.js";

export const KINDS: ScheduleKind[] = [
  "constant",
  "cosine",
  "wsd",
  "multi_step_cosine",
  "cyclic",
  "piecewise_linear",
];

export const ANNEAL_FNS = [
  "cosine",
  "linear",
  "exponential",
  "one_sqrt",
  "one_square",
] as const;

export const COMMON_FIELDS = [
  "kind",
  "total_steps",
  "warmup_steps",
  "eta_max",
  "eta_min",
] as const;

/** Kind-specific fields; anything listed here is invalid for other kinds. */
export const KIND_FIELDS: Record<string, ScheduleKind> = {
  cycle_T: "cosine",
  stable_end: "wsd",
  anneal_fn: "wsd",
  stage_fractions: "multi_step_cosine",
  cycle_spec: "cyclic",
  points: "piecewise_linear",
};

export interface Issue {
  field: string;
  message: string;
}

function isInt(v: unknown): v is number {
  return typeof v === "number" && Number.isInteger(v);
}

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function pairList(v: unknown): v is [number, number][] {
  return (
    Array.isArray(v) &&
    v.length > 0 &&
    v.every((p) => Array.isArray(p) && p.length === 2 && p.every(isNum))
  );
}

export function validateSpec(raw: unknown): Issue[] {
  const issues: Issue[] = [];
  const bad = (field: string, message: string) => issues.push({ field, message });

  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    return [{ field: "", message: "spec must be a JSON object" }];
  }
  const spec = raw as Record<string, unknown>;

  const known = new Set<string>([...COMMON_FIELDS, ...Object.keys(KIND_FIELDS)]);
  for (const key of Object.keys(spec)) {
    if (!known.has(key)) bad(key, "unknown field");
  }

  const kind = spec.kind as ScheduleKind;
  if (!KINDS.includes(kind)) {
    bad("kind", `kind must be one of ${KINDS.join(", ")}`);
    return issues;
  }
  for (const [field, owner] of Object.entries(KIND_FIELDS)) {
    if (spec[field] !== undefined && owner !== kind) {
      bad(field, `only applies to kind=${owner}`);
    }
  }

  const total = spec.total_steps;
  if (!isInt(total) || (total as number) < 1) bad("total_steps", "must be an integer >= 1");
  const warmup = spec.warmup_steps ?? 0;
  if (!isInt(warmup) || (warmup as number) < 0) bad("warmup_steps", "must be an integer >= 0");
  else if (isInt(total) && (warmup as number) >= (total as number)) {
    bad("warmup_steps", "must be < total_steps");
  }
  const etaMax = spec.eta_max;
  if (!isNum(etaMax) || (etaMax as number) <= 0) bad("eta_max", "must be > 0");
  const etaMin = spec.eta_min ?? 0;
  if (!isNum(etaMin) || (etaMin as number) < 0) bad("eta_min", "must be >= 0");
  else if (isNum(etaMax) && (etaMin as number) > (etaMax as number)) {
    bad("eta_min", "must be <= eta_max");
  }
  if (issues.length) return issues;

  const t = total as number;
  const w = warmup as number;
  switch (kind) {
    case "cosine": {
      const cycle = spec.cycle_T ?? t;
      if (!isInt(cycle) || (cycle as number) <= w) bad("cycle_T", "must exceed warmup_steps");
      break;
    }
    case "wsd": {
      const stable = spec.stable_end;
      if (!isInt(stable)) bad("stable_end", "required for wsd");
      else if ((stable as number) < w || (stable as number) > t) {
        bad("stable_end", "needs warmup_steps <= stable_end <= total_steps");
      }
      const fn = spec.anneal_fn ?? "cosine";
      if (!(ANNEAL_FNS as readonly string[]).includes(fn as string)) {
        bad("anneal_fn", `must be one of ${ANNEAL_FNS.join(", ")}`);
      }
      break;
    }
    case "multi_step_cosine": {
      const stages = spec.stage_fractions;
      if (stages !== undefined) {
        if (!pairList(stages)) bad("stage_fractions", "must be [fraction, scale] pairs");
        else {
          const fracs = stages.map((p) => p[0]);
          if (fracs.some((f) => f <= 0)) bad("stage_fractions", "fractions must be > 0");
          if (Math.abs(fracs.reduce((a, b) => a + b, 0) - 1) > 1e-9) {
            bad("stage_fractions", "fractions must sum to 1");
          }
          if (stages.some((p) => p[1] < 0 || p[1] > 1)) {
            bad("stage_fractions", "scales must lie in [0, 1]");
          }
        }
      }
      break;
    }
    case "cyclic": {
      const cycles = spec.cycle_spec;
      if (!pairList(cycles)) bad("cycle_spec", "must be [rewarm, anneal] pairs");
      else {
        if (cycles.some((p) => !Number.isInteger(p[0]) || !Number.isInteger(p[1]) || p[0] < 0 || p[1] < 1)) {
          bad("cycle_spec", "needs rewarm >= 0 and anneal >= 1");
        }
        const used = w + cycles.reduce((acc, p) => acc + p[0] + p[1], 0);
        if (used > t) bad("cycle_spec", "phases exceed total_steps");
      }
      break;
    }
    case "piecewise_linear": {
      const points = spec.points;
      if (!pairList(points)) bad("points", "must be [step, eta] pairs");
      else {
        const steps = points.map((p) => p[0]);
        if (steps.some((s, i) => i > 0 && s <= steps[i - 1])) {
          bad("points", "knot steps must be strictly increasing");
        }
        if (steps[0] !== 1 && steps[0] <= w) bad("points", "first knot must sit at step 1 or after warmup");
        if (steps[steps.length - 1] > t) bad("points", "knots beyond total_steps");
        if (points.some((p) => p[1] < 0 || p[1] > (etaMax as number))) {
          bad("points", "knot etas must lie in [0, eta_max]");
        }
      }
      break;
    }
  }
  return issues;
}

/** Drop fields that do not apply to the given kind (used on kind switches). */
export function pruneForKind(spec: ScheduleSpec): ScheduleSpec {
  const out: Record<string, unknown> = {};
  for (const [key, value] of Object.entries(spec)) {
    const owner = KIND_FIELDS[key];
    if (value === undefined) continue;
    if (owner === undefined || owner === spec.kind) out[key] = value;
  }
  return out as unknown as ScheduleSpec;
}
