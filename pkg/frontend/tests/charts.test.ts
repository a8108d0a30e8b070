// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { downsampleToWidth, renderLineChart } from "../src/charts.js";

function container(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

describe("renderLineChart", () => {
  it("renders one path per series", () => {
    const el = container();
    renderLineChart(el, [
      { label: "a", x: [1, 2, 3], y: [3, 2, 1], color: "#123" },
      { label: "b", x: [1, 2, 3], y: [1, 2, 3], color: "#456", dashed: true },
    ]);
    const paths = el.querySelectorAll("path");
    expect(paths).toHaveLength(2);
    expect(paths[0].getAttribute("data-series")).toBe("a");
    expect(paths[1].getAttribute("stroke-dasharray")).toBeTruthy();
  });

  it("marks the interior minimum of a parabola-like sweep", () => {
    const el = container();
    const ratios = [0.05, 0.1, 0.2, 0.3, 0.5];
    const losses = [2.82, 2.76, 2.71, 2.74, 2.8]; // interior min at index 2
    const { minIndex } = renderLineChart(
      el,
      [{ label: "final loss", x: ratios, y: losses, color: "#123" }],
      { markMin: true },
    );
    expect(minIndex).toBe(2);
    expect(minIndex).toBeGreaterThan(0);
    expect(minIndex).toBeLessThan(ratios.length - 1);
    const marker = el.querySelector("circle.argmin-marker");
    expect(marker).not.toBeNull();
    const label = el.querySelector("text.argmin-label");
    expect(label?.textContent).toContain("0.2");
  });

  it("replaces previous content on re-render", () => {
    const el = container();
    renderLineChart(el, [{ label: "a", x: [1, 2], y: [1, 2], color: "#123" }]);
    renderLineChart(el, [{ label: "b", x: [1, 2], y: [2, 1], color: "#456" }]);
    expect(el.querySelectorAll("svg")).toHaveLength(1);
    expect(el.querySelectorAll("path")).toHaveLength(1);
  });

  it("handles empty series without crashing", () => {
    const el = container();
    const { minIndex } = renderLineChart(el, []);
    expect(minIndex).toBeNull();
    expect(el.querySelector("svg")).not.toBeNull();
  });
});

describe("downsampleToWidth", () => {
  it("keeps both endpoints and respects the budget", () => {
    const n = 60_000;
    const x = Array.from({ length: n }, (_, i) => i + 1);
    const y = x.map((v) => Math.sin(v / 500));
    const out = downsampleToWidth(x, y, 450);
    expect(out.x.length).toBeLessThanOrEqual(452);
    expect(out.x[0]).toBe(1);
    expect(out.x[out.x.length - 1]).toBe(n);
  });

  it("passes short series through untouched", () => {
    const out = downsampleToWidth([1, 2, 3], [4, 5, 6], 450);
    expect(out.x).toEqual([1, 2, 3]);
  });
});
