/** Minimal dependency-free SVG line charts. */

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dashed?: boolean;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  title?: string;
  yFormat?: (v: number) => string;
  /** Marker drawn at the minimum of the first series (sweep panels). */
  markMin?: boolean;
}

const PAD = { left: 58, right: 12, top: 24, bottom: 26 };

/** Thin a series to roughly the pixel width of the plot area. */
export function downsampleToWidth(
  x: number[],
  y: number[],
  width: number,
): { x: number[]; y: number[] } {
  if (x.length <= width) return { x, y };
  const stride = Math.ceil(x.length / width);
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < x.length; i += stride) {
    xs.push(x[i]);
    ys.push(y[i]);
  }
  if (xs[xs.length - 1] !== x[x.length - 1]) {
    xs.push(x[x.length - 1]);
    ys.push(y[y.length - 1]);
  }
  return { x: xs, y: ys };
}

interface Scale {
  x: (v: number) => number;
  y: (v: number) => number;
}

function makeScale(series: Series[], width: number, height: number): Scale {
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of series) {
    for (const v of s.x) {
      if (v < xMin) xMin = v;
      if (v > xMax) xMax = v;
    }
    for (const v of s.y) {
      if (v < yMin) yMin = v;
      if (v > yMax) yMax = v;
    }
  }
  if (xMax === xMin) xMax = xMin + 1;
  if (yMax === yMin) {
    yMax = yMin + Math.abs(yMin || 1) * 0.01;
  }
  const ySpan = yMax - yMin;
  yMin -= ySpan * 0.05;
  yMax += ySpan * 0.05;
  const plotW = width - PAD.left - PAD.right;
  const plotH = height - PAD.top - PAD.bottom;
  return {
    x: (v) => PAD.left + ((v - xMin) / (xMax - xMin)) * plotW,
    y: (v) => PAD.top + (1 - (v - yMin) / (yMax - yMin)) * plotH,
  };
}

export function buildPath(x: number[], y: number[], scale: Scale): string {
  const parts: string[] = [];
  for (let i = 0; i < x.length; i++) {
    const cmd = i === 0 ? "M" : "L";
    parts.push(`${cmd}${scale.x(x[i]).toFixed(1)},${scale.y(y[i]).toFixed(1)}`);
  }
  return parts.join(" ");
}

function el<K extends string>(doc: Document, tag: K, attrs: Record<string, string>): SVGElement {
  const node = doc.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const tick = step * mult;
  const start = Math.ceil(lo / tick) * tick;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12; v += tick) out.push(v);
  return out;
}

const defaultFormat = (v: number): string => {
  const a = Math.abs(v);
  if (a !== 0 && (a < 1e-3 || a >= 1e5)) return v.toExponential(1);
  return String(Math.round(v * 10000) / 10000);
};

/**
 * Render line series into a container (replacing previous content).
 * Returns the index of the first series' minimum when ``markMin`` is set.
 */
export function renderLineChart(
  container: HTMLElement,
  series: Series[],
  options: ChartOptions = {},
): { minIndex: number | null } {
  const doc = container.ownerDocument;
  const width = options.width ?? 520;
  const height = options.height ?? 240;
  container.replaceChildren();

  const svg = el(doc, "svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart",
    role: "img",
  });
  if (series.length === 0 || series.every((s) => s.x.length === 0)) {
    container.appendChild(svg);
    return { minIndex: null };
  }

  const plotW = width - PAD.left - PAD.right;
  const thinned = series.map((s) => {
    const d = downsampleToWidth(s.x, s.y, plotW);
    return { ...s, x: d.x, y: d.y };
  });
  const scale = makeScale(thinned, width, height);
  const fmt = options.yFormat ?? defaultFormat;

  const xLo = Math.min(...thinned.map((s) => s.x[0]));
  const xHi = Math.max(...thinned.map((s) => s.x[s.x.length - 1]));
  const yLo = Math.min(...thinned.map((s) => Math.min(...s.y)));
  const yHi = Math.max(...thinned.map((s) => Math.max(...s.y)));

  for (const tick of niceTicks(yLo, yHi, 4)) {
    const y = scale.y(tick);
    svg.appendChild(
      el(doc, "line", {
        x1: String(PAD.left),
        x2: String(width - PAD.right),
        y1: y.toFixed(1),
        y2: y.toFixed(1),
        class: "gridline",
      }),
    );
    const label = el(doc, "text", {
      x: String(PAD.left - 6),
      y: (y + 3).toFixed(1),
      class: "tick-label",
      "text-anchor": "end",
    });
    label.textContent = fmt(tick);
    svg.appendChild(label);
  }
  for (const tick of niceTicks(xLo, xHi, 5)) {
    const x = scale.x(tick);
    const label = el(doc, "text", {
      x: x.toFixed(1),
      y: String(height - 8),
      class: "tick-label",
      "text-anchor": "middle",
    });
    label.textContent = defaultFormat(tick);
    svg.appendChild(label);
  }

  for (const s of thinned) {
    svg.appendChild(
      el(doc, "path", {
        d: buildPath(s.x, s.y, scale),
        fill: "none",
        stroke: s.color,
        "stroke-width": "1.6",
        ...(s.dashed ? { "stroke-dasharray": "5 3" } : {}),
        "data-series": s.label,
      }),
    );
  }

  let minIndex: number | null = null;
  if (options.markMin && thinned[0].y.length > 0) {
    const ys = series[0].y;
    minIndex = ys.indexOf(Math.min(...ys));
    svg.appendChild(
      el(doc, "circle", {
        cx: scale.x(series[0].x[minIndex]).toFixed(1),
        cy: scale.y(ys[minIndex]).toFixed(1),
        r: "5",
        class: "argmin-marker",
      }),
    );
    const label = el(doc, "text", {
      x: scale.x(series[0].x[minIndex]).toFixed(1),
      y: (scale.y(ys[minIndex]) - 9).toFixed(1),
      class: "argmin-label",
      "text-anchor": "middle",
    });
    label.textContent = `min @ ${defaultFormat(series[0].x[minIndex])}`;
    svg.appendChild(label);
  }

  if (options.title) {
    const title = el(doc, "text", {
      x: String(PAD.left),
      y: "14",
      class: "chart-title",
    });
    title.textContent = options.title;
    svg.appendChild(title);
  }

  // Legend only when there is more than one series.
  if (series.length > 1) {
    let lx = width - PAD.right;
    for (let i = series.length - 1; i >= 0; i--) {
      const label = el(doc, "text", {
        x: String(lx),
        y: "14",
        class: "legend-label",
        fill: series[i].color,
        "text-anchor": "end",
      });
      label.textContent = series[i].label;
      svg.appendChild(label);
      lx -= series[i].label.length * 7 + 14;
    }
  }

  container.appendChild(svg);
  return { minIndex };
}
