import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import {
  ANNEAL_FNS,
  COMMON_FIELDS,
  KIND_FIELDS,
  KINDS,
  validateSpec,
} from "../src/validate.js";

const here = dirname(fileURLToPath(import.meta.url));
const SCHEMA_PATH = join(
  here,
  "..",
  "..",
  "src",
  "anneal_law",
  "schemas",
  "schedule_spec.schema.json",
);

describe("shared schema consistency", () => {
  const schema = JSON.parse(readFileSync(SCHEMA_PATH, "utf-8"));

  it("covers exactly the fields of the shared schema", () => {
    const schemaFields = Object.keys(schema.properties).sort();
    const ours = [...COMMON_FIELDS, ...Object.keys(KIND_FIELDS)].sort();
    expect(ours).toEqual(schemaFields);
    expect(schema.additionalProperties).toBe(false);
  });

  it("matches the schema's enums", () => {
    expect([...KINDS].sort()).toEqual([...schema.properties.kind.enum].sort());
    expect([...ANNEAL_FNS].sort()).toEqual(
      [...schema.properties.anneal_fn.enum].sort(),
    );
  });
});

describe("validateSpec", () => {
  const good = {
    kind: "wsd",
    total_steps: 20_000,
    warmup_steps: 500,
    eta_max: 2e-4,
    eta_min: 0,
    stable_end: 18_000,
    anneal_fn: "cosine",
  };

  it("accepts a valid spec", () => {
    expect(validateSpec(good)).toEqual([]);
  });

  const cases: [string, object, string][] = [
    ["unknown field", { ...good, mystery: 1 }, "mystery"],
    ["bad kind", { ...good, kind: "sawtooth" }, "kind"],
    ["warmup >= total", { ...good, warmup_steps: 20_000 }, "warmup_steps"],
    ["eta_min above eta_max", { ...good, eta_min: 1 }, "eta_min"],
    ["stable_end beyond total", { ...good, stable_end: 30_000 }, "stable_end"],
    ["bad anneal fn", { ...good, anneal_fn: "sqrt" }, "anneal_fn"],
    [
      "field on wrong kind",
      { kind: "constant", total_steps: 10, eta_max: 1e-4, cycle_T: 5 },
      "cycle_T",
    ],
    [
      "cyclic overflow",
      { kind: "cyclic", total_steps: 100, eta_max: 1e-4, cycle_spec: [[0, 200]] },
      "cycle_spec",
    ],
    [
      "non-increasing knots",
      {
        kind: "piecewise_linear",
        total_steps: 100,
        eta_max: 1e-4,
        points: [
          [5, 1e-4],
          [5, 0],
        ],
      },
      "points",
    ],
    [
      "stage fractions not summing to 1",
      {
        kind: "multi_step_cosine",
        total_steps: 100,
        eta_max: 1e-4,
        stage_fractions: [
          [0.5, 1],
          [0.2, 0.5],
        ],
      },
      "stage_fractions",
    ],
  ];

  it.each(cases)("flags %s", (_name, spec, field) => {
    const issues = validateSpec(spec);
    expect(issues.map((i) => i.field)).toContain(field);
  });

  it("rejects non-objects", () => {
    expect(validateSpec(null).length).toBe(1);
    expect(validateSpec([1]).length).toBe(1);
  });
});
