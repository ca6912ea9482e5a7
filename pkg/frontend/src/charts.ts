/** SVG contour overlays and canvas spectrogram rendering. */

import type { GraphPair, SpectrogramMatrix } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 360;
const HEIGHT = 90;

function polylinePoints(values: number[], lo: number, hi: number): string {
  const span = hi - lo || 1;
  return values
    .map((v, i) => {
      const x = (i / Math.max(values.length - 1, 1)) * WIDTH;
      const y = HEIGHT - ((v - lo) / span) * (HEIGHT - 4) - 2;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

/** Patient and reference contours overlaid on a shared scale. */
export function contourOverlay(pair: GraphPair, label: string): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("width", String(WIDTH));
  svg.setAttribute("height", String(HEIGHT));
  svg.setAttribute("class", "contour-overlay");
  svg.setAttribute("data-label", label);

  const all = [...pair.patient, ...pair.reference];
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  for (const [values, cls] of [
    [pair.reference, "contour-reference"],
    [pair.patient, "contour-patient"],
  ] as const) {
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", polylinePoints(values, lo, hi));
    line.setAttribute("fill", "none");
    line.setAttribute("class", cls);
    svg.appendChild(line);
  }
  const title = document.createElementNS(SVG_NS, "title");
  title.textContent = label;
  svg.appendChild(title);
  return svg;
}

/** Spectrogram matrix -> canvas, dB mapped to a perceptual-ish ramp. */
export function renderSpectrogram(matrix: SpectrogramMatrix, canvas: HTMLCanvasElement): void {
  const rows = matrix.db.length;
  const cols = rows > 0 ? matrix.db[0]!.length : 0;
  canvas.width = cols;
  canvas.height = rows;
  canvas.dataset.bins = String(rows);
  canvas.dataset.frames = String(cols);
  const ctx = canvas.getContext("2d");
  if (!ctx || rows === 0 || cols === 0) return; // headless test DOMs have no 2D context

  let top = -Infinity;
  for (const row of matrix.db) for (const v of row) top = Math.max(top, v);
  const floor = top - 80;
  const image = ctx.createImageData(cols, rows);
  for (let r = 0; r < rows; r++) {
    const row = matrix.db[r]!;
    // row 0 is DC; draw low frequencies at the bottom
    const y = rows - 1 - r;
    for (let c = 0; c < cols; c++) {
      const t = Math.min(1, Math.max(0, (row[c]! - floor) / 80));
      const offset = (y * cols + c) * 4;
      image.data[offset] = Math.round(255 * Math.sqrt(t));
      image.data[offset + 1] = Math.round(200 * t * t);
      image.data[offset + 2] = Math.round(90 * (1 - t));
      image.data[offset + 3] = 255;
    }
  }
  ctx.putImageData(image, 0, 0);
}
