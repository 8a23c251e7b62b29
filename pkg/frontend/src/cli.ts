/**
 * rcs-render: render simulator CSV outputs into SVG figures.
 *
 *   rcs-render render --recipe <recipe.json> --out <figure.svg>
 *
 * Exit codes mirror the simulator CLI: 0 success, 1 I/O error,
 * 2 recipe/schema error, 3 internal rendering failure.
 */

import { readFileSync, writeFileSync } from "fs";

import { SchemaError } from "./csv.js";
import { RecipeError, parseRecipe } from "./recipe.js";
import { render } from "./render.js";

export function main(argv: string[]): number {
  const args = [...argv];
  if (args[0] === "render") args.shift();
  let recipePath: string | undefined;
  let outPath: string | undefined;
  for (let i = 0; i < args.length; i++) {
    if (args[i] === "--recipe") recipePath = args[++i];
    else if (args[i] === "--out") outPath = args[++i];
    else {
      console.error(`unknown argument: ${args[i]}`);
      return 2;
    }
  }
  if (!recipePath || !outPath) {
    console.error("usage: rcs-render render --recipe <recipe.json> --out <figure.svg>");
    return 2;
  }

  let rawText: string;
  try {
    rawText = readFileSync(recipePath, "utf-8");
  } catch (err) {
    console.error(`i/o error: cannot read recipe: ${(err as Error).message}`);
    return 1;
  }

  try {
    const recipe = parseRecipe(JSON.parse(rawText));
    const svg = render(recipe);
    writeFileSync(outPath, svg);
    console.error(`wrote ${outPath}`);
    return 0;
  } catch (err) {
    if (err instanceof SyntaxError || err instanceof RecipeError || err instanceof SchemaError) {
      console.error(`recipe/schema error: ${(err as Error).message}`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code !== undefined) {
      console.error(`i/o error: ${(err as Error).message}`);
      return 1;
    }
    console.error(`rendering failure: ${(err as Error).message}`);
    return 3;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
