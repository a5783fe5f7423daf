/**
 * Figure specs use the same flat INI dialect as the harness configs:
 *
 *   [figure]
 *   title = suboptimality vs per-worker bits
 *   log_y = true
 *   out = fig1
 *   series = nesterov_summary.csv, uncompressed
 *   series = adiana_id_rand1_summary.csv, adiana id rand-1
 *
 * `series` lines repeat (path, label, optional color); relative CSV paths
 * resolve against the spec file's directory.  Inline comments start with
 * ';' ('#' only opens full-line comments, so hex colors stay usable).
 */

export interface SeriesSpec {
  path: string;
  label: string;
  color?: string;
}

export interface FigureSpec {
  title: string;
  logY: boolean;
  out: string;
  width: number;
  height: number;
  series: SeriesSpec[];
}

export function parseFigureSpec(text: string, source = "<spec>"): FigureSpec {
  const spec: FigureSpec = {
    title: "",
    logY: true,
    out: "figure",
    width: 760,
    height: 480,
    series: [],
  };
  let section = "";
  for (const raw of text.split(/\r?\n/)) {
    let line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    line = line.replace(/;.*$/, "").trim();
    if (!line) continue;
    const sect = line.match(/^\[(.+)\]$/);
    if (sect) {
      section = sect[1].trim().toLowerCase();
      continue;
    }
    const eq = line.indexOf("=");
    if (eq < 0) {
      throw new Error(`${source}: expected 'key = value', got '${line}'`);
    }
    if (section !== "figure") continue;
    const key = line.slice(0, eq).trim().toLowerCase();
    const value = line.slice(eq + 1).trim();
    switch (key) {
      case "title":
        spec.title = value;
        break;
      case "log_y":
        spec.logY = ["1", "true", "yes"].includes(value.toLowerCase());
        break;
      case "out":
        spec.out = value;
        break;
      case "width":
        spec.width = Number(value);
        break;
      case "height":
        spec.height = Number(value);
        break;
      case "series": {
        const parts = value.split(",").map((p) => p.trim());
        if (!parts[0]) {
          throw new Error(`${source}: series needs 'path, label[, color]'`);
        }
        spec.series.push({
          path: parts[0],
          label: parts[1] ?? parts[0],
          color: parts[2] || undefined,
        });
        break;
      }
      default:
        throw new Error(`${source}: unknown figure key '${key}'`);
    }
  }
  if (spec.series.length === 0) {
    throw new Error(`${source}: a figure needs at least one series`);
  }
  return spec;
}
