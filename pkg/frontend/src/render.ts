/**
 * Renderers for the four figure kinds.  Inputs are the simulator's
 * documented CSV schemas; outputs are standalone SVG documents.  Rendering
 * never mutates inputs and a fixed recipe yields byte-identical output.
 */

import { readFileSync } from "fs";

import { parseCsv, column, requireColumns, Table } from "./csv.js";
import { FigureRecipe, RecipeError, SpectrumInput } from "./recipe.js";
import {
  Frame,
  axes,
  divergingColor,
  document as svgDocument,
  esc,
  extent,
  fmt,
  linearScale,
  polyline,
} from "./svg.js";

const SPECTRUM_COLUMNS = ["omega_s", "raman_shift", "n_s_mean", "n_s_stderr"];
const POLARITON_COLUMNS = ["omega_c", "omega_minus", "omega_plus", "omega_c_bar"];
const SWEEP_COLUMNS = ["omega_c", "g", "deltaQ2", "deltax2", "Q_over_Q0"];

const PALETTE = ["#4361ee", "#e63946", "#2d6a4f", "#f77f00", "#7209b7", "#118ab2"];

function loadTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"), path);
}

function sortedBy(xs: number[], ...ys: number[][]): [number[], ...number[][]] {
  const order = xs.map((_, i) => i).sort((a, b) => xs[a] - xs[b]);
  return [order.map((i) => xs[i]), ...ys.map((y) => order.map((i) => y[i]))] as [
    number[],
    ...number[][]
  ];
}

// ---------------------------------------------------------------- waterfall

export function renderWaterfall(recipe: FigureRecipe): string {
  const traces = recipe.inputs.map((inp, i) => {
    const table = loadTable(inp.path);
    requireColumns(table, SPECTRUM_COLUMNS, inp.path);
    const [shift, ns] = sortedBy(
      column(table, "raman_shift", inp.path),
      column(table, "n_s_mean", inp.path)
    );
    const omega_c = inp.omega_c ?? i;
    return { shift, ns, omega_c, label: inp.label ?? `omega_c = ${fmt(omega_c)}` };
  });
  traces.sort((a, b) => a.omega_c - b.omega_c);

  const width = 560;
  const height = 480;
  const frame: Frame = { x0: 70, y0: 40, w: width - 100, h: height - 90 };

  const allShift = traces.flatMap((t) => t.shift);
  const xDom: [number, number] = [
    recipe.x?.min ?? extent(allShift)[0],
    recipe.x?.max ?? extent(allShift)[1],
  ];
  const wcs = traces.map((t) => t.omega_c);
  const wcSpacing =
    wcs.length > 1 ? (wcs[wcs.length - 1] - wcs[0]) / (wcs.length - 1) : 1;
  const yDom: [number, number] = [
    recipe.y?.min ?? wcs[0] - 0.8 * wcSpacing,
    recipe.y?.max ?? wcs[wcs.length - 1] + 1.2 * wcSpacing,
  ];
  const sx = linearScale(xDom, [frame.x0, frame.x0 + frame.w]);
  const sy = linearScale(yDom, [frame.y0 + frame.h, frame.y0]);

  const nsMax = Math.max(...traces.flatMap((t) => t.ns));
  const amp = (1.5 * wcSpacing) / (nsMax || 1);

  const body: string[] = [];
  body.push(axes(frame, sx, sy, "Raman shift (omega_R)", "omega_c (omega_R)",
                 recipe.title ?? "Raman spectra vs cavity frequency"));
  traces.forEach((t, i) => {
    const ys = t.ns.map((v) => t.omega_c + v * amp);
    body.push(polyline(t.shift, ys, sx, sy, { color: PALETTE[i % PALETTE.length] }));
    body.push(
      `<text x="${frame.x0 + frame.w + 4}" y="${(sy(t.omega_c) - 4).toFixed(2)}" font-size="9" fill="${PALETTE[i % PALETTE.length]}">${esc(t.label)}</text>`
    );
  });

  if (recipe.overlay) {
    const pol = loadTable(recipe.overlay);
    requireColumns(pol, POLARITON_COLUMNS, recipe.overlay);
    const [wc, lo, hi] = sortedBy(
      column(pol, "omega_c", recipe.overlay),
      column(pol, "omega_minus", recipe.overlay),
      column(pol, "omega_plus", recipe.overlay)
    );
    // dashed analytic branches in the (shift, omega_c) plane
    body.push(polyline(lo, wc, sx, sy, { color: "#111", width: 1.2, dash: "6,4" }));
    body.push(polyline(hi, wc, sx, sy, { color: "#111", width: 1.2, dash: "6,4" }));
  }
  return svgDocument(width, height, body.join("\n"));
}

// --------------------------------------------------------------- branch plot

export function renderBranchPlot(recipe: FigureRecipe): string {
  const input = recipe.inputs[0];
  const table = loadTable(input.path);
  requireColumns(table, POLARITON_COLUMNS, input.path);
  const xName = recipe.x_column ?? "omega_c";
  const [x, lo, hi] = sortedBy(
    column(table, xName, input.path),
    column(table, "omega_minus", input.path),
    column(table, "omega_plus", input.path)
  );

  const width = 520;
  const height = 400;
  const frame: Frame = { x0: 70, y0: 40, w: width - 100, h: height - 90 };
  const xDom: [number, number] = [recipe.x?.min ?? x[0], recipe.x?.max ?? x[x.length - 1]];
  const yExt = extent([...lo, ...hi]);
  const pad = 0.05 * (yExt[1] - yExt[0]);
  const yDom: [number, number] = [
    recipe.y?.min ?? yExt[0] - pad,
    recipe.y?.max ?? yExt[1] + pad,
  ];
  const sx = linearScale(xDom, [frame.x0, frame.x0 + frame.w]);
  const sy = linearScale(yDom, [frame.y0 + frame.h, frame.y0]);

  const body: string[] = [];
  body.push(axes(frame, sx, sy, xName, "branch frequency (omega_R)",
                 recipe.title ?? "Polariton branches"));
  body.push(polyline(x, lo, sx, sy, { color: PALETTE[0], width: 1.8 }));
  body.push(polyline(x, hi, sx, sy, { color: PALETTE[1], width: 1.8 }));
  body.push(`<text x="${frame.x0 + 8}" y="${frame.y0 + 14}" font-size="10" fill="${PALETTE[1]}">URP</text>`);
  body.push(`<text x="${frame.x0 + 8}" y="${frame.y0 + 26}" font-size="10" fill="${PALETTE[0]}">LRP</text>`);
  return svgDocument(width, height, body.join("\n"));
}

// ----------------------------------------------------------------- triptych

interface GridData {
  omega_cs: number[];
  gs: number[];
  value: (iw: number, ig: number) => number | undefined;
}

function gridFromSweep(table: Table, col: string, path: string): GridData {
  const wc = column(table, "omega_c", path);
  const g = column(table, "g", path);
  const v = column(table, col, path);
  const omega_cs = [...new Set(wc)].sort((a, b) => a - b);
  const gs = [...new Set(g)].sort((a, b) => a - b);
  const key = (a: number, b: number) => `${a}|${b}`;
  const lookup = new Map<string, number>();
  wc.forEach((w, i) => lookup.set(key(w, g[i]), v[i]));
  return {
    omega_cs,
    gs,
    value: (iw, ig) => lookup.get(key(omega_cs[iw], gs[ig])),
  };
}

function resonanceLocus(locus: { path: string; g: number }[]): Array<[number, number]> {
  // one (omega_c*, g) point per polariton CSV: where omega_c_bar crosses 1/2
  const pts: Array<[number, number]> = [];
  for (const entry of locus) {
    const table = loadTable(entry.path);
    requireColumns(table, POLARITON_COLUMNS, entry.path);
    const [wc, wbar] = sortedBy(
      column(table, "omega_c", entry.path),
      column(table, "omega_c_bar", entry.path)
    );
    for (let i = 1; i < wc.length; i++) {
      const a = wbar[i - 1] - 0.5;
      const b = wbar[i] - 0.5;
      if (a === 0 || a * b < 0) {
        const f = a / (a - b);
        pts.push([wc[i - 1] + f * (wc[i] - wc[i - 1]), entry.g]);
        break;
      }
    }
  }
  return pts.sort((p, q) => p[1] - q[1]);
}

export function renderTriptych(recipe: FigureRecipe): string {
  const input = recipe.inputs[0];
  const table = loadTable(input.path);
  requireColumns(table, SWEEP_COLUMNS, input.path);

  const panels: Array<{ col: string; label: string }> = [
    { col: "deltaQ2", label: "deltaQ2" },
    { col: "deltax2", label: "deltax2" },
    { col: "Q_over_Q0", label: "Q/Q0" },
  ];

  const panelW = 250;
  const width = 3 * panelW + 90;
  const height = 330;
  const body: string[] = [];
  const locusPts = recipe.locus ? resonanceLocus(recipe.locus) : [];

  panels.forEach((panel, ip) => {
    const grid = gridFromSweep(table, panel.col, input.path);
    const frame: Frame = { x0: 60 + ip * panelW, y0: 45, w: panelW - 40, h: height - 110 };
    const dx = grid.omega_cs.length > 1
      ? grid.omega_cs[1] - grid.omega_cs[0] : 1;
    const dg = grid.gs.length > 1 ? grid.gs[1] - grid.gs[0] : 1;
    const sx = linearScale(
      [grid.omega_cs[0] - dx / 2, grid.omega_cs[grid.omega_cs.length - 1] + dx / 2],
      [frame.x0, frame.x0 + frame.w]);
    const sy = linearScale(
      [grid.gs[0] - dg / 2, grid.gs[grid.gs.length - 1] + dg / 2],
      [frame.y0 + frame.h, frame.y0]);

    let vmax = 0;
    for (let iw = 0; iw < grid.omega_cs.length; iw++) {
      for (let ig = 0; ig < grid.gs.length; ig++) {
        const v = grid.value(iw, ig);
        if (v !== undefined) vmax = Math.max(vmax, Math.abs(v));
      }
    }
    vmax = vmax || 1;

    for (let iw = 0; iw < grid.omega_cs.length; iw++) {
      for (let ig = 0; ig < grid.gs.length; ig++) {
        const v = grid.value(iw, ig);
        if (v === undefined) continue;
        const x = sx(grid.omega_cs[iw] - dx / 2);
        const y = sy(grid.gs[ig] + dg / 2);
        const w = Math.abs(sx(dx) - sx(0));
        const h = Math.abs(sy(0) - sy(dg));
        body.push(
          `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}" height="${h.toFixed(2)}" fill="${divergingColor(v / vmax)}"/>`
        );
      }
    }
    body.push(axes(frame, sx, sy, "omega_c (omega_R)", ip === 0 ? "g (omega_R)" : "",
                   `${panel.label} (|max| ${fmt(vmax)})`));
    if (locusPts.length >= 2) {
      body.push(
        polyline(locusPts.map((p) => p[0]), locusPts.map((p) => p[1]), sx, sy,
                 { color: "#111", width: 1.4, dash: "6,4" })
      );
    }
  });
  if (recipe.title) {
    body.push(
      `<text x="${width / 2}" y="${height - 12}" font-size="13" text-anchor="middle">${esc(recipe.title)}</text>`
    );
  }
  return svgDocument(width, height, body.join("\n"));
}

// --------------------------------------------------------- stokes/anti-stokes

export function renderStokesAntiStokes(recipe: FigureRecipe): string {
  const traces = recipe.inputs.map((inp: SpectrumInput, i) => {
    const table = loadTable(inp.path);
    requireColumns(table, SPECTRUM_COLUMNS, inp.path);
    const [ws, ns] = sortedBy(
      column(table, "omega_s", inp.path),
      column(table, "n_s_mean", inp.path)
    );
    return { ws, ns, label: inp.label ?? `trace ${i + 1}` };
  });

  const width = 520;
  const height = 380;
  const frame: Frame = { x0: 70, y0: 40, w: width - 100, h: height - 90 };
  const xExt = extent(traces.flatMap((t) => t.ws));
  const yExt = extent(traces.flatMap((t) => t.ns));
  const sx = linearScale(
    [recipe.x?.min ?? xExt[0], recipe.x?.max ?? xExt[1]],
    [frame.x0, frame.x0 + frame.w]);
  const sy = linearScale(
    [recipe.y?.min ?? 0, recipe.y?.max ?? yExt[1] * 1.05],
    [frame.y0 + frame.h, frame.y0]);

  const body: string[] = [];
  body.push(axes(frame, sx, sy, "omega_s (omega_R)", "n_s",
                 recipe.title ?? "Scattered-photon spectra"));
  traces.forEach((t, i) => {
    body.push(polyline(t.ws, t.ns, sx, sy, { color: PALETTE[i % PALETTE.length] }));
    body.push(
      `<text x="${frame.x0 + 8}" y="${frame.y0 + 14 + 12 * i}" font-size="10" fill="${PALETTE[i % PALETTE.length]}">${esc(t.label)}</text>`
    );
  });
  return svgDocument(width, height, body.join("\n"));
}

// ------------------------------------------------------------------ dispatch

export function render(recipe: FigureRecipe): string {
  switch (recipe.kind) {
    case "spectra-waterfall":
      return renderWaterfall(recipe);
    case "branch-plot":
      return renderBranchPlot(recipe);
    case "heatmap-triptych":
      return renderTriptych(recipe);
    case "stokes-antistokes":
      return renderStokesAntiStokes(recipe);
    default:
      throw new RecipeError(`unknown figure kind ${(recipe as FigureRecipe).kind}`);
  }
}
