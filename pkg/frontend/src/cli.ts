#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { FigureFormat, FigureKind, render } from "./figure";

export function main(argv: string[]): number {
  const args = yargs(argv)
    .command("render", "render a figure from sweep CSVs")
    .option("kind", {
      choices: [
        "sinr_vs_threshold",
        "secrecy_vs_threshold",
        "comparison",
      ] as const,
      demandOption: true,
      describe: "figure kind",
    })
    .option("csv", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "summary CSV path(s); rows are concatenated",
    })
    .option("series", {
      type: "string",
      default: "solver",
      describe: "column that splits rows into curves",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output image path",
    })
    .option("format", {
      choices: ["svg", "png"] as const,
      default: "svg" as const,
    })
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    })
    .parseSync();

  render({
    csvPaths: args.csv,
    kind: args.kind as FigureKind,
    seriesColumn: args.series,
    outPath: args.out,
    format: args.format as FigureFormat,
  });
  console.log(`wrote ${args.out}`);
  return 0;
}

if (require.main === module) {
  try {
    process.exitCode = main(hideBin(process.argv));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exitCode = 1;
  }
}
