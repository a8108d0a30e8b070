/** Mirrors of the service-side JSON contracts. */

export type ScheduleKind =
  | "constant"
  | "cosine"
  | "wsd"
  | "multi_step_cosine"
  | "cyclic"
  | "piecewise_linear";

export type AnnealFn = "cosine" | "linear" | "exponential" | "one_sqrt" | "one_square";

/**
 * One schedule-spec JSON object, identical to the schema shared with the
 * backend (src/anneal_law/schemas/schedule_spec.schema.json).  Kind-specific
 * fields must be absent for other kinds; the server rejects unknown fields.
 */
export interface ScheduleSpec {
  kind: ScheduleKind;
  total_steps: number;
  eta_max: number;
  eta_min?: number;
  warmup_steps?: number;
  cycle_T?: number;
  stable_end?: number;
  anneal_fn?: AnnealFn;
  stage_fractions?: [number, number][];
  cycle_spec?: [number, number][];
  points?: [number, number][];
}

export interface LawParams {
  L0: number;
  A: number;
  C: number;
  alpha: number;
  B?: number;
  beta?: number;
  gamma?: number;
  zeta?: number;
}

export interface PredictResponse {
  steps: number[];
  lr: number[];
  s1: number[];
  s2: number[];
  loss: number[];
  s1_term: number[];
  s2_term: number[];
  l0: number;
  final_loss: number;
  total_steps: number;
}

export interface SweepCell {
  [key: string]: number | string;
}

export interface SweepResponse {
  axis: SweepCell[];
  final_losses: number[];
  argmin_index: number;
  per_group_argmin?: Record<string, number>;
}

export interface FitSummary {
  id: string;
  params: LawParams;
  lambda: number;
  epsilon: number;
}
