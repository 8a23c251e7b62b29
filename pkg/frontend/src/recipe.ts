/**
 * Figure recipes: which CSVs to read and how to lay them out.
 *
 * The four kinds mirror the reference figures:
 *   spectra-waterfall  stacked n_s(raman shift) traces offset by omega_c,
 *                      optional dashed analytic branch overlay
 *   branch-plot        omega_-/omega_+ against a chosen x column
 *   heatmap-triptych   deltaQ2 / deltax2 / Q_over_Q0 over (omega_c, g),
 *                      optional dashed resonance locus from polariton CSVs
 *   stokes-antistokes  n_s(omega_s) traces (e.g. quantum vs thermal run)
 */

export class RecipeError extends Error {}

export type FigureKind =
  | "spectra-waterfall"
  | "branch-plot"
  | "heatmap-triptych"
  | "stokes-antistokes";

export interface SpectrumInput {
  path: string;
  label?: string;
  /** waterfall stacking coordinate (the run's cavity frequency) */
  omega_c?: number;
}

export interface LocusInput {
  path: string;
  /** coupling strength of this polariton CSV (one locus point per CSV) */
  g: number;
}

export interface AxisRange {
  min?: number;
  max?: number;
}

export interface FigureRecipe {
  kind: FigureKind;
  inputs: SpectrumInput[];
  /** polariton-branch CSV for dashed overlays (waterfall, branch-plot) */
  overlay?: string;
  /** per-g polariton CSVs for the triptych resonance locus */
  locus?: LocusInput[];
  title?: string;
  x?: AxisRange;
  y?: AxisRange;
  /** branch-plot abscissa column, default omega_c */
  x_column?: string;
}

const KINDS: FigureKind[] = [
  "spectra-waterfall",
  "branch-plot",
  "heatmap-triptych",
  "stokes-antistokes",
];

export function parseRecipe(raw: unknown): FigureRecipe {
  if (typeof raw !== "object" || raw === null) {
    throw new RecipeError("recipe must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const kind = obj.kind as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new RecipeError(
      `recipe.kind must be one of ${KINDS.join(", ")}, got ${JSON.stringify(obj.kind)}`
    );
  }
  if (!Array.isArray(obj.inputs) || obj.inputs.length === 0) {
    throw new RecipeError("recipe.inputs must be a non-empty array");
  }
  const inputs: SpectrumInput[] = obj.inputs.map((inp, i) => {
    if (typeof inp === "string") return { path: inp };
    const o = inp as Record<string, unknown>;
    if (typeof o.path !== "string") {
      throw new RecipeError(`recipe.inputs[${i}].path must be a string`);
    }
    return {
      path: o.path,
      label: typeof o.label === "string" ? o.label : undefined,
      omega_c: typeof o.omega_c === "number" ? o.omega_c : undefined,
    };
  });
  let locus: LocusInput[] | undefined;
  if (obj.locus !== undefined) {
    if (!Array.isArray(obj.locus)) {
      throw new RecipeError("recipe.locus must be an array of {path, g}");
    }
    locus = obj.locus.map((e, i) => {
      const o = e as Record<string, unknown>;
      if (typeof o.path !== "string" || typeof o.g !== "number") {
        throw new RecipeError(`recipe.locus[${i}] must have string path and numeric g`);
      }
      return { path: o.path, g: o.g };
    });
  }
  return {
    kind,
    inputs,
    overlay: typeof obj.overlay === "string" ? obj.overlay : undefined,
    locus,
    title: typeof obj.title === "string" ? obj.title : undefined,
    x: (obj.x as AxisRange) ?? undefined,
    y: (obj.y as AxisRange) ?? undefined,
    x_column: typeof obj.x_column === "string" ? obj.x_column : undefined,
  };
}
