/** DOM wiring for the schedule designer. */

import { ApiClient } from "./api.js";
import { renderLineChart } from "./charts.js";
import {
  DesignerStore,
  sweepAxisValues,
  MAX_OVERLAYS,
  type DesignerState,
} from "./store.js";
import type { LawParams, ScheduleSpec } from "./types.js";
import { ANNEAL_FNS } from "./validate.js";

const OVERLAY_COLORS = ["#e6832d", "#4da167", "#9467bd", "#c44e52", "#8c8c42", "#17a2b8", "#a0522d", "#708090"];

// Demo parameters used only when the server has no fits loaded; they are
// sent to the service with every request, never evaluated here.
const FALLBACK_PARAMS: LawParams = { L0: 2.628, A: 0.429, C: 0.411, alpha: 0.55 };

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function numberInput(id: string, onChange: (v: number) => void): HTMLInputElement {
  const input = byId<HTMLInputElement>(id);
  input.addEventListener("input", () => {
    const v = Number(input.value);
    if (Number.isFinite(v)) onChange(v);
  });
  return input;
}

export function bootstrap(): void {
  const api = new ApiClient("");
  const store = new DesignerStore(api);

  const kindSelect = byId<HTMLSelectElement>("kind");
  const totalInput = numberInput("total-steps", (v) => store.editSchedule({ total_steps: Math.round(v) }));
  const warmupInput = numberInput("warmup-steps", (v) => store.editSchedule({ warmup_steps: Math.round(v) }));
  const etaMaxInput = numberInput("eta-max", (v) => store.editSchedule({ eta_max: v }));
  const etaMinFrac = byId<HTMLInputElement>("eta-min-frac");
  const cycleInput = numberInput("cycle-t", (v) => store.editSchedule({ cycle_T: Math.round(v) }));
  const ratioSlider = byId<HTMLInputElement>("anneal-ratio");
  const ratioLabel = byId<HTMLSpanElement>("anneal-ratio-label");
  const annealFnSelect = byId<HTMLSelectElement>("anneal-fn");
  const stagesInput = byId<HTMLInputElement>("stages");
  const cyclesInput = byId<HTMLInputElement>("cycles");
  const pointsInput = byId<HTMLInputElement>("points");

  for (const fn of ANNEAL_FNS) {
    const opt = document.createElement("option");
    opt.value = fn;
    opt.textContent = fn;
    annealFnSelect.appendChild(opt);
  }
  annealFnSelect.value = "cosine";

  etaMinFrac.addEventListener("input", () => {
    const frac = Number(etaMinFrac.value);
    store.editSchedule({ eta_min: frac * store.state.activeSpec.eta_max });
  });

  const applyRatio = () => {
    const ratio = Number(ratioSlider.value) / 100;
    ratioLabel.textContent = `${ratioSlider.value}%`;
    const spec = store.state.activeSpec;
    const warmup = spec.warmup_steps ?? 0;
    const stable = Math.max(warmup, spec.total_steps - Math.round(ratio * spec.total_steps));
    store.editSchedule({ stable_end: stable });
  };
  ratioSlider.addEventListener("input", applyRatio);
  annealFnSelect.addEventListener("input", () =>
    store.editSchedule({ anneal_fn: annealFnSelect.value as ScheduleSpec["anneal_fn"] }),
  );

  const parsePairs = (input: HTMLInputElement, field: "stage_fractions" | "cycle_spec" | "points") => {
    try {
      const parsed = JSON.parse(input.value) as [number, number][];
      store.editSchedule({ [field]: parsed } as Partial<ScheduleSpec>);
      input.classList.remove("invalid");
    } catch {
      input.classList.add("invalid");
    }
  };
  stagesInput.addEventListener("change", () => parsePairs(stagesInput, "stage_fractions"));
  cyclesInput.addEventListener("change", () => parsePairs(cyclesInput, "cycle_spec"));
  pointsInput.addEventListener("change", () => parsePairs(pointsInput, "points"));

  kindSelect.addEventListener("input", () => {
    const kind = kindSelect.value as ScheduleSpec["kind"];
    const patch: Partial<ScheduleSpec> = { kind };
    const spec = store.state.activeSpec;
    if (kind === "wsd" && spec.stable_end === undefined) {
      patch.stable_end = Math.round(spec.total_steps * 0.9);
      patch.anneal_fn = annealFnSelect.value as ScheduleSpec["anneal_fn"];
    }
    if (kind === "cyclic" && spec.cycle_spec === undefined) {
      const seg = Math.floor((spec.total_steps - (spec.warmup_steps ?? 0)) / 2);
      patch.cycle_spec = [
        [0, seg],
        [Math.floor(seg / 3), seg - Math.floor(seg / 3)],
      ];
      cyclesInput.value = JSON.stringify(patch.cycle_spec);
    }
    if (kind === "piecewise_linear" && spec.points === undefined) {
      patch.points = [
        [Math.max(1, (spec.warmup_steps ?? 0) + 1), spec.eta_max],
        [spec.total_steps, 0],
      ];
      pointsInput.value = JSON.stringify(patch.points);
    }
    store.editSchedule(patch);
  });

  // Fit selection
  const fitSelect = byId<HTMLSelectElement>("fit-select");
  fitSelect.addEventListener("input", () => {
    if (fitSelect.value === "__params__") {
      store.setFit(null, FALLBACK_PARAMS);
    } else {
      store.setFit(fitSelect.value);
    }
  });

  // Overlays / export / import
  byId<HTMLButtonElement>("pin-overlay").addEventListener("click", () => {
    if (!store.pinOverlay()) {
      setText("error-box", `cannot pin: need a prediction and fewer than ${MAX_OVERLAYS} overlays`);
    }
  });
  byId<HTMLButtonElement>("clear-overlays").addEventListener("click", () => store.clearOverlays());
  const specBox = byId<HTMLTextAreaElement>("spec-box");
  byId<HTMLButtonElement>("export-spec").addEventListener("click", () => {
    specBox.value = store.exportSpec();
  });
  byId<HTMLButtonElement>("import-spec").addEventListener("click", () => {
    const issues = store.importSpec(specBox.value);
    setText("error-box", issues.map((i) => `${i.field}: ${i.message}`).join("; "));
  });

  // Sweep panel
  const sweepKind = byId<HTMLSelectElement>("sweep-kind");
  byId<HTMLButtonElement>("run-sweep").addEventListener("click", () => {
    const spec = store.state.activeSpec;
    const ratios = [0.02, 0.05, 0.08, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6];
    if (sweepKind.value === "wsd") {
      void store.runSweep("wsd", { totals: [spec.total_steps], ratios });
    } else if (sweepKind.value === "anneal-fn") {
      void store.runSweep("anneal-fn", {
        total: spec.total_steps,
        ratios,
        fns: ["one_sqrt", "cosine"],
      });
    } else {
      void store.runSweep("cosine", {
        total: spec.total_steps,
        cycle_factors: [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0],
        min_lr_fracs: [0.0],
      });
    }
  });

  function setText(id: string, text: string): void {
    byId(id).textContent = text;
  }

  function syncControls(state: DesignerState): void {
    const spec = state.activeSpec;
    kindSelect.value = spec.kind;
    totalInput.value = String(spec.total_steps);
    warmupInput.value = String(spec.warmup_steps ?? 0);
    etaMaxInput.value = String(spec.eta_max);
    document.querySelectorAll<HTMLElement>("[data-kind]").forEach((node) => {
      node.hidden = node.dataset.kind !== spec.kind;
    });
    if (spec.kind === "wsd" && spec.stable_end !== undefined) {
      const ratio = (spec.total_steps - spec.stable_end) / spec.total_steps;
      ratioLabel.textContent = `${Math.round(ratio * 100)}%`;
    }
  }

  function render(state: DesignerState): void {
    syncControls(state);
    const issueText = state.issues.map((i) => `${i.field}: ${i.message}`).join("; ");
    setText("issue-box", issueText);
    setText("error-box", state.error ?? "");

    const prediction = state.prediction;
    setText(
      "final-loss",
      prediction ? prediction.final_loss.toFixed(4) : "—",
    );
    byId("final-loss").classList.toggle("stale", state.predictionStale);

    if (prediction) {
      renderLineChart(byId("lr-chart"), [
        { label: "lr", x: prediction.steps, y: prediction.lr, color: "#2a6fb0" },
      ], { title: "learning rate", height: 180 });

      const lossSeries = [
        { label: "active", x: prediction.steps, y: prediction.loss, color: "#2a6fb0" },
        ...state.overlays.map((o, i) => ({
          label: o.label,
          x: o.prediction.steps,
          y: o.prediction.loss,
          color: OVERLAY_COLORS[i % OVERLAY_COLORS.length],
          dashed: true,
        })),
      ];
      renderLineChart(byId("loss-chart"), lossSeries, { title: "predicted loss" });

      renderLineChart(byId("terms-chart"), [
        { label: "S1 term", x: prediction.steps, y: prediction.s1_term, color: "#4da167" },
        { label: "-S2 term", x: prediction.steps, y: prediction.s2_term, color: "#c44e52" },
      ], { title: "loss-term decomposition", height: 200 });
    }

    const sweep = state.sweep;
    setText("sweep-error", sweep.error ? `${sweep.error}${sweep.hint ? ` — ${sweep.hint}` : ""}` : "");
    if (sweep.result) {
      const { key, values } = sweepAxisValues(sweep.result.axis);
      renderLineChart(byId("sweep-chart"), [
        { label: "final loss", x: values, y: sweep.result.final_losses, color: "#2a6fb0" },
      ], { title: `final loss vs ${key}`, markMin: true, height: 220 });
    }
  }

  store.subscribe(render);

  void (async () => {
    try {
      const fits = await api.fits();
      for (const fit of fits) {
        const opt = document.createElement("option");
        opt.value = fit.id;
        opt.textContent = fit.id;
        fitSelect.appendChild(opt);
      }
      const fallback = document.createElement("option");
      fallback.value = "__params__";
      fallback.textContent = "demo parameters";
      fitSelect.appendChild(fallback);
      // setFit schedules the initial (debounced) predict itself.
      if (fits.length > 0) {
        fitSelect.value = fits[0].id;
        store.setFit(fits[0].id);
      } else {
        fitSelect.value = "__params__";
        store.setFit(null, FALLBACK_PARAMS);
      }
    } catch (err) {
      setText("error-box", err instanceof Error ? err.message : String(err));
    }
  })();
}

if (typeof document !== "undefined" && document.getElementById("designer")) {
  bootstrap();
}
