/** Small deterministic SVG builders: scales, axes, polylines, heat cells. */

export interface LinearScale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as LinearScale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.001) return v.toExponential(1);
  return String(Math.round(v * 1000) / 1000);
}

export function ticks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const raw = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12; v += step) out.push(Math.round(v / step) * step);
  return out;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function polyline(
  xs: number[], ys: number[], sx: LinearScale, sy: LinearScale,
  style: { color: string; width?: number; dash?: string; opacity?: number }
): string {
  const pts = xs
    .map((x, i) => `${sx(x).toFixed(2)},${sy(ys[i]).toFixed(2)}`)
    .join(" ");
  const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
  const op = style.opacity !== undefined ? ` stroke-opacity="${style.opacity}"` : "";
  return `<polyline fill="none" stroke="${style.color}" stroke-width="${style.width ?? 1.4}"${dash}${op} points="${pts}"/>`;
}

export interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

export function axes(
  frame: Frame, sx: LinearScale, sy: LinearScale,
  xLabel: string, yLabel: string, title?: string
): string {
  const { x0, y0, w, h } = frame;
  const parts: string[] = [];
  parts.push(
    `<rect x="${x0}" y="${y0}" width="${w}" height="${h}" fill="none" stroke="#333" stroke-width="1"/>`
  );
  for (const t of ticks(sx.domain[0], sx.domain[1])) {
    const px = sx(t);
    if (px < x0 - 0.5 || px > x0 + w + 0.5) continue;
    parts.push(`<line x1="${px.toFixed(2)}" y1="${y0 + h}" x2="${px.toFixed(2)}" y2="${y0 + h + 4}" stroke="#333"/>`);
    parts.push(`<text x="${px.toFixed(2)}" y="${y0 + h + 16}" font-size="10" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of ticks(sy.domain[0], sy.domain[1])) {
    const py = sy(t);
    if (py < y0 - 0.5 || py > y0 + h + 0.5) continue;
    parts.push(`<line x1="${x0 - 4}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="#333"/>`);
    parts.push(`<text x="${x0 - 7}" y="${(py + 3).toFixed(2)}" font-size="10" text-anchor="end">${fmt(t)}</text>`);
  }
  parts.push(
    `<text x="${x0 + w / 2}" y="${y0 + h + 30}" font-size="12" text-anchor="middle">${esc(xLabel)}</text>`
  );
  parts.push(
    `<text x="${x0 - 38}" y="${y0 + h / 2}" font-size="12" text-anchor="middle" transform="rotate(-90 ${x0 - 38} ${y0 + h / 2})">${esc(yLabel)}</text>`
  );
  if (title) {
    parts.push(
      `<text x="${x0 + w / 2}" y="${y0 - 8}" font-size="13" font-weight="bold" text-anchor="middle">${esc(title)}</text>`
    );
  }
  return parts.join("\n");
}

/** Blue-white-red diverging colormap on [-1, 1]. */
export function divergingColor(v: number): string {
  const t = Math.max(-1, Math.min(1, v));
  let r: number, g: number, b: number;
  if (t < 0) {
    const u = 1 + t; // 0..1
    r = Math.round(40 + 215 * u);
    g = Math.round(60 + 195 * u);
    b = 255;
  } else {
    const u = 1 - t;
    r = 255;
    g = Math.round(60 + 195 * u);
    b = Math.round(40 + 215 * u);
  }
  return `rgb(${r},${g},${b})`;
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    body +
    "\n</svg>\n"
  );
}
