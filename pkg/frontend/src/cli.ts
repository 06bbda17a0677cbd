#!/usr/bin/env node
import { readFileSync, writeFileSync } from "fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { KINDS, Kind, render } from "./render.js";
import { parseResults, SchemaError } from "./schema.js";

export function main(argv: string[]): number {
  const parser = yargs(argv)
    .scriptName("mu2plot")
    .usage("$0 <results.csv> --kind <kind> --out <path>")
    .command("$0 <results>", "render a figure from a results CSV", (y) =>
      y.positional("results", { type: "string", demandOption: true }),
    )
    .option("kind", {
      type: "string",
      choices: KINDS,
      demandOption: true,
      describe: "figure to render",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output image path; a <out>.summary.json sidecar is written next to it",
    })
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new SchemaError(msg);
    });

  let args;
  try {
    args = parser.parseSync();
  } catch (err) {
    process.stderr.write(`mu2plot: ${(err as Error).message}\n`);
    return 2;
  }

  try {
    const csvText = readFileSync(args.results as string, "utf-8");
    const rows = parseResults(csvText);
    const { svg, summary } = render(rows, args.kind as Kind);
    writeFileSync(args.out, svg);
    writeFileSync(
      `${args.out}.summary.json`,
      JSON.stringify({ input: args.results, ...summary }, null, 2) + "\n",
    );
    return 0;
  } catch (err) {
    process.stderr.write(`mu2plot: ${(err as Error).message}\n`);
    return 2;
  }
}

const entry = process.argv[1];
if (entry && (entry.endsWith("cli.js") || entry.endsWith("mu2plot"))) {
  process.exit(main(hideBin(process.argv)));
}
