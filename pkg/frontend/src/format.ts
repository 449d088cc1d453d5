// Formatting helpers and the shared color scales.

export function fmtTime(ms: number): string {
  const d = new Date(ms);
  const pad = (n: number) => String(n).padStart(2, "0");
  return `${d.getUTCFullYear()}-${pad(d.getUTCMonth() + 1)}-${pad(d.getUTCDate())} ` +
    `${pad(d.getUTCHours())}:${pad(d.getUTCMinutes())}:${pad(d.getUTCSeconds())}`;
}

export function fmtClock(ms: number): string {
  const d = new Date(ms);
  const pad = (n: number) => String(n).padStart(2, "0");
  return `${pad(d.getUTCHours())}:${pad(d.getUTCMinutes())}`;
}

export function fmtBytes(bytes: number): string {
  if (bytes >= 1 << 20) return `${(bytes / (1 << 20)).toFixed(1)} MiB`;
  if (bytes >= 1 << 10) return `${(bytes / (1 << 10)).toFixed(1)} KiB`;
  return `${Math.round(bytes)} B`;
}

export function fmtNum(value: number): string {
  return value >= 1000 ? value.toLocaleString("en-US") : String(Math.round(value * 100) / 100);
}

type Rgb = [number, number, number];

const GREEN: Rgb = [27, 122, 47];
const AMBER: Rgb = [230, 180, 23];
const RED: Rgb = [198, 40, 40];

function mix(a: Rgb, b: Rgb, t: number): Rgb {
  return [0, 1, 2].map((i) => Math.round(a[i] + (b[i] - a[i]) * t)) as Rgb;
}

/**
 * Diverging green -> red scale over |deviation| with its midpoint at 0.5:
 * quiet links render green, fully deviating links render red.
 */
export function deviationColor(deviation: number): string {
  const t = Math.min(1, Math.abs(deviation));
  const [r, g, b] = t <= 0.5 ? mix(GREEN, AMBER, t / 0.5) : mix(AMBER, RED, (t - 0.5) / 0.5);
  return `rgb(${r}, ${g}, ${b})`;
}

// Stable categorical palette for MSPs (assignment by first-seen order).
const MSP_PALETTE = [
  "#3b6fb5", "#b5691c", "#5e9c4f", "#8d5fb0", "#c04f63", "#4f9c97", "#a3843a",
];

export function mspColors(msps: string[]): Map<string, string> {
  const out = new Map<string, string>();
  [...msps].sort().forEach((msp, i) => {
    out.set(msp, MSP_PALETTE[i % MSP_PALETTE.length]);
  });
  return out;
}

export const SEVERITY_COLORS: Record<string, string> = {
  INFO: "#4a7ab5",
  WARNING: "#c98a1b",
  HIGH: "#c62828",
};

export const LATENCY_SERIES = [
  { key: "endorsement_duration", label: "endorsement", color: "#5e9c4f" },
  { key: "ordering_latency", label: "ordering", color: "#3b6fb5" },
  { key: "validation_duration", label: "validation", color: "#b5691c" },
] as const;

export type LatencySeriesKey = (typeof LATENCY_SERIES)[number]["key"];
