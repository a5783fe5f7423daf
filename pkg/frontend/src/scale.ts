/** Axis scales and tick generation. */

export interface Scale {
  (v: number): number;
  ticks: number[];
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.ticks = linearTicks(d0, d1, 6);
  return f;
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  if (d0 <= 0 || d1 <= 0) {
    throw new Error("log scale needs positive bounds");
  }
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 || 1;
  const f = ((v: number) =>
    r0 + ((Math.log10(Math.max(v, Number.MIN_VALUE)) - l0) / span) * (r1 - r0)) as Scale;
  f.ticks = decadeTicks(d0, d1);
  return f;
}

export function linearTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(v);
  }
  return ticks;
}

/** Powers of ten covering [min, max], thinned to at most ~10 labels. */
export function decadeTicks(min: number, max: number): number[] {
  const lo = Math.ceil(Math.log10(min) - 1e-9);
  const hi = Math.floor(Math.log10(max) + 1e-9);
  const exps: number[] = [];
  for (let e = lo; e <= hi; e++) exps.push(e);
  const stride = Math.max(1, Math.ceil(exps.length / 10));
  return exps.filter((_, i) => i % stride === 0).map((e) => Math.pow(10, e));
}

export function fmtTick(v: number, logAxis: boolean): string {
  if (logAxis) {
    const e = Math.round(Math.log10(v));
    return `1e${e}`;
  }
  if (v === 0) return "0";
  if (Math.abs(v) >= 1e5 || Math.abs(v) < 1e-3) {
    return v.toExponential(0).replace("+", "");
  }
  return String(Math.round(v * 1000) / 1000);
}
