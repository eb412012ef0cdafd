/** Screen-coordinate scales, including the split penalty axis. */

export interface Scale {
  (v: number): number;
  ticks: number[];
}

export function linearScale(lo: number, hi: number, r0: number, r1: number): Scale {
  const span = hi - lo || 1;
  const fn = ((v: number) => r0 + ((v - lo) / span) * (r1 - r0)) as Scale;
  fn.ticks = linearTicks(lo, hi);
  return fn;
}

export function logScale(lo: number, hi: number, r0: number, r1: number): Scale {
  const l0 = Math.log10(lo);
  const l1 = Math.log10(hi);
  const span = l1 - l0 || 1;
  const fn = ((v: number) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0)) as Scale;
  fn.ticks = decadeTicks(lo, hi);
  return fn;
}

/**
 * Penalty axis spanning both regimes: linear left of zero, log to the right.
 * The negative range gets a width share proportional to nothing fancy — a
 * fixed 40/60 split keeps panels comparable across figures.
 */
export function splitLambdaScale(
  min: number,
  max: number,
  posMin: number,
  r0: number,
  r1: number,
): Scale {
  const mid = r0 + 0.4 * (r1 - r0);
  const neg = linearScale(min, 0, r0, mid);
  const pos = logScale(Math.max(posMin, 1e-12), max, mid, r1);
  const fn = ((v: number) => (v <= 0 ? neg(v) : pos(v))) as Scale;
  fn.ticks = [...neg.ticks.filter((t) => t <= 0), ...pos.ticks];
  return fn;
}

function linearTicks(lo: number, hi: number): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / 5;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= 6)!;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step / 1e6; t += step) {
    ticks.push(Math.abs(t) < step / 1e6 ? 0 : t);
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); e <= Math.floor(Math.log10(hi)); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks.length > 0 ? ticks : [lo];
}
