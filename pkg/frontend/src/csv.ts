/**
 * Reader for the optimizer harness summary-CSV contract.
 *
 * Schema (comment lines start with '#'):
 *   round,bits_cum,subopt_mean,subopt_std,trials
 *
 * bits_cum is the cumulative per-worker communication cost at that round,
 * subopt_mean/std aggregate suboptimality across trials.
 */

export interface SummarySeries {
  round: number[];
  bitsCum: number[];
  suboptMean: number[];
  suboptStd: number[];
  trials: number;
}

const REQUIRED = ["round", "bits_cum", "subopt_mean", "subopt_std", "trials"];

export function parseSummaryCsv(text: string, source = "<csv>"): SummarySeries {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0 && !l.startsWith("#"));
  if (lines.length === 0) {
    throw new Error(`${source}: empty summary CSV`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  for (const col of REQUIRED) {
    if (!header.includes(col)) {
      throw new Error(`${source}: summary CSV is missing column '${col}'`);
    }
  }
  const idx = Object.fromEntries(header.map((h, i) => [h, i]));
  const out: SummarySeries = {
    round: [],
    bitsCum: [],
    suboptMean: [],
    suboptStd: [],
    trials: 1,
  };
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length < header.length) {
      throw new Error(`${source}: malformed row ${i + 1}`);
    }
    const num = (col: string) => {
      const v = Number(parts[idx[col]]);
      if (!Number.isFinite(v)) {
        throw new Error(`${source}: non-numeric '${col}' in row ${i + 1}`);
      }
      return v;
    };
    out.round.push(num("round"));
    out.bitsCum.push(num("bits_cum"));
    out.suboptMean.push(num("subopt_mean"));
    out.suboptStd.push(num("subopt_std"));
    out.trials = num("trials");
  }
  return out;
}
