import { readFileSync, writeFileSync } from "node:fs";
import * as echarts from "echarts";
import { optionFor } from "./charts";
import { loadTable, parseSpec, PlotKind, PlotSpec, SchemaError } from "./schema";

/** Render one spec to an SVG file; pure function of (artifact bytes, spec). */
export function render(spec: PlotSpec): string {
  const table = loadTable(spec.input, spec.kind);
  const chart = echarts.init(null as unknown as HTMLElement, undefined, {
    renderer: "svg",
    ssr: true,
    width: spec.width ?? 800,
    height: spec.height ?? 560,
  });
  chart.setOption(optionFor(spec, table));
  // zrender numbers instances and css classes with process-global counters;
  // renumber by first appearance so the output is a pure function of
  // (artifact bytes, spec)
  let svg = chart.renderToSVGString().replace(/zr\d+-/g, "zr-");
  const seen = new Map<string, number>();
  svg = svg.replace(/cls-(\d+)/g, (_m, n: string) => {
    if (!seen.has(n)) seen.set(n, seen.size);
    return `cls-${seen.get(n)}`;
  });
  chart.dispose();
  writeFileSync(spec.output, svg);
  return svg;
}

function usage(): never {
  process.stderr.write(
    "usage: render --spec SPEC.json\n" +
      "       render KIND INPUT.csv OUTPUT.svg [--overlay-offset X]\n" +
      "kinds: bands | tau-scaling | clusters | thomas\n"
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  try {
    let spec: PlotSpec;
    if (argv[0] === "--spec") {
      if (!argv[1]) usage();
      spec = parseSpec(JSON.parse(readFileSync(argv[1], "utf8")));
    } else {
      if (argv.length < 3) usage();
      const [kind, input, output, ...rest] = argv;
      let overlayOffset: number | undefined;
      const flag = rest.indexOf("--overlay-offset");
      if (flag >= 0 && rest[flag + 1] !== undefined) {
        overlayOffset = Number(rest[flag + 1]);
      }
      spec = parseSpec({ kind: kind as PlotKind, input, output, overlayOffset });
    }
    render(spec);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
