/** Linear axis helpers: domain padding, nice tick generation, mapping. */

export interface LinearScale {
  domain: [number, number];
  range: [number, number];
  map(v: number): number;
  ticks: number[];
}

function niceStep(span: number, targetCount: number): number {
  const raw = span / Math.max(targetCount, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 2.5, 5, 10]) {
    if (raw <= m * mag) {
      return m * mag;
    }
  }
  return 10 * mag;
}

export function linearScale(
  values: number[],
  range: [number, number],
  tickCount = 6,
): LinearScale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const step = niceStep(hi - lo, tickCount);
  const ticks: number[] = [];
  for (
    let t = Math.ceil(lo / step) * step;
    t <= hi + 1e-12 * step;
    t += step
  ) {
    ticks.push(Math.abs(t) < 1e-12 * step ? 0 : t);
  }
  const domain: [number, number] = [lo, hi];
  return {
    domain,
    range,
    ticks,
    map: (v: number) =>
      range[0] + ((v - lo) / (hi - lo)) * (range[1] - range[0]),
  };
}

/** Fixed-format numbers so output bytes are reproducible. */
export function fmt(v: number, digits = 2): string {
  const s = v.toFixed(digits);
  return s === "-0.00" || s === "-0" ? s.slice(1) : s;
}

export function tickLabel(v: number): string {
  if (Number.isInteger(v)) {
    return String(v);
  }
  const s = v.toPrecision(4);
  return String(Number(s));
}
