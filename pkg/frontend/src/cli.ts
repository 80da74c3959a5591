#!/usr/bin/env node
/**
 * `plots <csv> [--family auto] [--out fig.svg]` — render a results CSV
 * (with its optional JSON sidecar) to a standalone SVG figure.
 */

import { writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { buildFigure } from "./figures.js";
import { FAMILIES, loadDataset, type Family } from "./schema.js";
import { renderSvg } from "./svg.js";

export interface PlotOptions {
  family?: Family | "auto";
  out?: string;
}

/** Render one CSV to SVG; returns the output path. */
export function renderFile(csvPath: string, opts: PlotOptions = {}): string {
  const ds = loadDataset(csvPath);
  const fig = buildFigure(ds, opts.family ?? "auto");
  const out = opts.out ?? csvPath.replace(/\.csv$/, "") + ".svg";
  writeFileSync(out, renderSvg(fig) + "\n");
  return out;
}

export function main(argv: string[]): number {
  const args = yargs(argv)
    .scriptName("plots")
    .command("$0 <csv>", "render a results CSV to an SVG figure", (y) =>
      y
        .positional("csv", { type: "string", demandOption: true })
        .option("family", {
          type: "string",
          default: "auto",
          choices: ["auto", ...FAMILIES],
          describe: "figure family; auto infers it from the records",
        })
        .option("out", {
          type: "string",
          describe: "output SVG path (default: the CSV path with .svg)",
        }),
    )
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    })
    .parseSync();

  try {
    const out = renderFile(args.csv as string, {
      family: args.family as Family | "auto",
      out: args.out as string | undefined,
    });
    console.log(out);
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plots")) {
  process.exit(main(hideBin(process.argv)));
}
