#!/usr/bin/env node
/**
 * plots — render figures from cmfc harness CSV artifacts.
 *
 * Usage:
 *   plots --figure error_vs_n --in results.csv --out fig.svg
 *   plots --figure cost_vs_n  --in results.csv --out fig.png
 *   plots --figure trace      --in trace.csv   --out trace.svg
 */
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { render, type FigureKind } from "./render";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("plots")
    .option("figure", {
      choices: ["error_vs_n", "cost_vs_n", "trace"] as const,
      demandOption: true,
      describe: "which figure to render",
    })
    .option("in", {
      type: "string",
      demandOption: true,
      describe: "input CSV (results.csv for *_vs_n, trace.csv for trace)",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output image path (.svg, or .png via rasterizer)",
    })
    .option("width", { type: "number", default: 800 })
    .option("height", { type: "number", default: 500 })
    .strict()
    .parse();

  try {
    const result = render({
      figure: args.figure as FigureKind,
      input: args.in,
      output: args.out,
      width: args.width,
      height: args.height,
    });
    console.log(`wrote ${result.output}`);
    return 0;
  } catch (err) {
    console.error(`plots: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

if (require.main === module) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
