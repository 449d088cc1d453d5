// Hand-rolled SVG charts. Every mark is an aggregate from the server
// (bucket totals, per-MSP bucket means, per-bucket latency means); nothing
// here ever draws one mark per transaction.

import { fmtBytes, fmtClock, fmtNum, LATENCY_SERIES, LatencySeriesKey } from "./format.js";
import type { LatencyBucket, TxBucket } from "./types.js";

export const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

function baseSvg(width: number, height: number, cssClass: string): SVGSVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: "100%",
    preserveAspectRatio: "none",
    class: cssClass,
  });
  svg.style.height = `${height}px`;
  return svg;
}

export interface ChartGeom {
  width: number;
  height: number;
  padBottom?: number;
}

const DEFAULT_GEOM: Required<ChartGeom> = { width: 800, height: 120, padBottom: 14 };

function xScale(range: [number, number], width: number) {
  const span = Math.max(1, range[1] - range[0]);
  return (ts: number) => ((ts - range[0]) / span) * width;
}

/**
 * Full-range navigator bar chart with a horizontal brush. `onBrush(null)`
 * means the brush was cleared (a plain click).
 */
export function navigatorChart(
  buckets: TxBucket[],
  range: [number, number],
  brush: [number, number] | null,
  widthMs: number,
  onBrush: (sel: [number, number] | null) => void,
  geom: ChartGeom = DEFAULT_GEOM,
): SVGSVGElement {
  const { width, height, padBottom } = { ...DEFAULT_GEOM, ...geom };
  const plotH = height - padBottom;
  const svg = baseSvg(width, height, "chart navigator");
  const x = xScale(range, width);
  const maxTotal = Math.max(1, ...buckets.map((b) => b.total));
  for (const bucket of buckets) {
    const h = (bucket.total / maxTotal) * (plotH - 2);
    svg.appendChild(svgEl("rect", {
      class: "nav-bar",
      x: x(bucket.bucket_start),
      y: plotH - h,
      width: Math.max(1, x(bucket.bucket_start + widthMs) - x(bucket.bucket_start) - 0.5),
      height: Math.max(0, h),
      fill: "#7c8da0",
      "data-total": bucket.total,
    }));
  }
  for (const frac of [0, 0.25, 0.5, 0.75, 1]) {
    const ts = range[0] + frac * (range[1] - range[0]);
    const label = svgEl("text", {
      x: Math.min(width - 30, frac * width + 2),
      y: height - 3,
      class: "axis-label",
      "font-size": 10,
    });
    label.textContent = fmtClock(ts);
    svg.appendChild(label);
  }

  const selection = svgEl("rect", {
    class: "brush-selection",
    y: 0,
    height: plotH,
    fill: "rgba(80, 120, 180, 0.25)",
    stroke: "#5078b4",
  });
  const paintSelection = (sel: [number, number] | null) => {
    if (!sel) {
      selection.setAttribute("width", "0");
      return;
    }
    selection.setAttribute("x", String(x(sel[0])));
    selection.setAttribute("width", String(Math.max(0, x(sel[1]) - x(sel[0]))));
  };
  paintSelection(brush);
  svg.appendChild(selection);

  const overlay = svgEl("rect", {
    class: "brush-overlay",
    x: 0, y: 0, width, height: plotH,
    fill: "transparent",
    cursor: "crosshair",
  });
  const tsFromEvent = (event: MouseEvent): number => {
    const rect = svg.getBoundingClientRect();
    const pixelWidth = rect.width || width;
    const px = Math.min(Math.max(event.clientX - rect.left, 0), pixelWidth);
    return range[0] + (px / pixelWidth) * (range[1] - range[0]);
  };
  let anchor: number | null = null;
  overlay.addEventListener("mousedown", (event) => {
    anchor = tsFromEvent(event as MouseEvent);
  });
  overlay.addEventListener("mousemove", (event) => {
    if (anchor === null) return;
    const ts = tsFromEvent(event as MouseEvent);
    paintSelection(ts > anchor ? [anchor, ts] : [ts, anchor]);
  });
  overlay.addEventListener("mouseup", (event) => {
    if (anchor === null) return;
    const ts = tsFromEvent(event as MouseEvent);
    const lo = Math.min(anchor, ts);
    const hi = Math.max(anchor, ts);
    anchor = null;
    // A drag shorter than a bucket is a click: clear the brush.
    onBrush(hi - lo < widthMs ? null : [Math.round(lo), Math.round(hi)]);
  });
  svg.appendChild(overlay);
  return svg;
}

/** Stacked bars: transaction counts per bucket, composed by MSP. */
export function stackedBarChart(
  buckets: TxBucket[],
  range: [number, number],
  widthMs: number,
  colors: Map<string, string>,
  geom: ChartGeom = DEFAULT_GEOM,
): SVGSVGElement {
  const { width, height, padBottom } = { ...DEFAULT_GEOM, ...geom };
  const plotH = height - padBottom;
  const svg = baseSvg(width, height, "chart stacked-bars");
  const x = xScale(range, width);
  const maxTotal = Math.max(1, ...buckets.map((b) => b.total));
  for (const bucket of buckets) {
    let yTop = plotH;
    const barX = x(bucket.bucket_start);
    const barW = Math.max(1, x(bucket.bucket_start + widthMs) - barX - 0.5);
    for (const msp of [...Object.keys(bucket.counts_by_msp)].sort()) {
      const count = bucket.counts_by_msp[msp];
      const h = (count / maxTotal) * (plotH - 2);
      yTop -= h;
      const rect = svgEl("rect", {
        class: "stack-segment",
        x: barX, y: yTop, width: barW, height: h,
        fill: colors.get(msp) ?? "#888",
        "data-msp": msp,
        "data-count": count,
        "data-bucket": bucket.bucket_start,
      });
      const tip = svgEl("title");
      tip.textContent = `${msp}: ${fmtNum(count)} tx at ${fmtClock(bucket.bucket_start)}`;
      rect.appendChild(tip);
      svg.appendChild(rect);
    }
  }
  return svg;
}

/**
 * Mean transaction size per MSP per bucket. One circle per (bucket, MSP)
 * aggregate, log-scaled, so a flood of thousands of transactions still
 * renders a handful of marks.
 */
export function sizeScatterChart(
  buckets: TxBucket[],
  range: [number, number],
  colors: Map<string, string>,
  geom: ChartGeom = DEFAULT_GEOM,
): SVGSVGElement {
  const { width, height, padBottom } = { ...DEFAULT_GEOM, ...geom };
  const plotH = height - padBottom;
  const svg = baseSvg(width, height, "chart size-scatter");
  const x = xScale(range, width);
  const sizes = buckets.flatMap((b) => Object.values(b.avg_size_by_msp));
  const maxLog = Math.log10(Math.max(10, ...sizes)) + 0.2;
  const y = (size: number) => plotH - (Math.log10(Math.max(1, size)) / maxLog) * (plotH - 6);
  for (const bucket of buckets) {
    for (const [msp, avg] of Object.entries(bucket.avg_size_by_msp)) {
      const circle = svgEl("circle", {
        class: "size-mark",
        cx: x(bucket.bucket_start),
        cy: y(avg),
        r: 3,
        fill: colors.get(msp) ?? "#888",
        "fill-opacity": 0.8,
        "data-msp": msp,
        "data-avg": Math.round(avg),
      });
      const tip = svgEl("title");
      tip.textContent = `${msp}: mean ${fmtBytes(avg)} at ${fmtClock(bucket.bucket_start)}`;
      circle.appendChild(tip);
      svg.appendChild(circle);
    }
  }
  return svg;
}

/**
 * Stacked area of the enabled latency series; buckets with no samples leave
 * gaps rather than dropping to zero.
 */
export function latencyAreaChart(
  latency: LatencyBucket[],
  range: [number, number],
  widthMs: number,
  enabled: Set<LatencySeriesKey>,
  geom: ChartGeom = DEFAULT_GEOM,
): SVGSVGElement {
  const { width, height, padBottom } = { ...DEFAULT_GEOM, ...geom };
  const plotH = height - padBottom;
  const svg = baseSvg(width, height, "chart latency-area");
  const x = xScale(range, width);
  const series = LATENCY_SERIES.filter((s) => enabled.has(s.key));

  const stackTop = (bucket: LatencyBucket, upto: number): number | null => {
    let sum = 0;
    for (let i = 0; i <= upto; i++) {
      const value = bucket[series[i].key];
      if (value === null || value === undefined) return null;
      sum += value;
    }
    return sum;
  };
  let maxSum = 0.1;
  for (const bucket of latency) {
    const top = series.length ? stackTop(bucket, series.length - 1) : null;
    if (top !== null && top > maxSum) maxSum = top;
  }
  const y = (value: number) => plotH - (value / maxSum) * (plotH - 4);

  // Split into segments of consecutive buckets where every enabled series
  // has a value; each segment becomes one polygon per series.
  const segments: LatencyBucket[][] = [];
  let current: LatencyBucket[] = [];
  for (const bucket of latency) {
    const complete = series.length > 0 && stackTop(bucket, series.length - 1) !== null;
    if (complete) {
      current.push(bucket);
    } else if (current.length) {
      segments.push(current);
      current = [];
    }
  }
  if (current.length) segments.push(current);

  series.forEach((spec, idx) => {
    for (const segment of segments) {
      const upper = segment.map((b) => [x(b.bucket_start + widthMs / 2), y(stackTop(b, idx)!)]);
      const lower = segment
        .map((b) => [x(b.bucket_start + widthMs / 2),
                     idx === 0 ? plotH : y(stackTop(b, idx - 1)!)])
        .reverse();
      const points = [...upper, ...lower].map(([px, py]) => `${px},${py}`).join(" ");
      svg.appendChild(svgEl("polygon", {
        class: `latency-band latency-${spec.label}`,
        points,
        fill: spec.color,
        "fill-opacity": 0.65,
        "data-series": spec.key,
      }));
    }
  });
  return svg;
}
