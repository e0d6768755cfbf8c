/**
 * Dashboard charts, built as SVG strings from the stats payload.
 *
 * The client does no counting of its own. Slice sweeps come from the
 * server's percentage fraction and bar heights from its percentile, so
 * the charts here agree with the reports the pipeline writes to disk.
 * Zero-count rows stay in the table but are left out of both charts.
 */

import { DistributionRow } from "./api.js";

function sliceColor(i: number, n: number): string {
  const hue = (i * 360.0) / Math.max(n, 1);
  return `hsl(${hue.toFixed(1)}, 62%, 52%)`;
}

function polar(cx: number, cy: number, radius: number, deg: number): [number, number] {
  const rad = (deg * Math.PI) / 180.0;
  return [cx + radius * Math.cos(rad), cy + radius * Math.sin(rad)];
}

export function pieSvg(rows: DistributionRow[], total: number): string {
  const drawn = rows
    .filter((r) => r.count > 0)
    .sort((a, b) => b.count - a.count || a.pos.localeCompare(b.pos));
  const cx = 210.0;
  const cy = 230.0;
  const radius = 170.0;
  const legendW = 170;
  const width = Math.trunc(cx * 2) + legendW;
  const height = Math.max(Math.trunc(cy * 2), 40 + 16 * drawn.length);
  const out: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    `<title>tag distribution, ${total} entries</title>`,
    '<rect width="100%" height="100%" fill="white"/>',
  ];
  if (drawn.length === 1) {
    const r = drawn[0]!;
    out.push(
      `<circle cx="${cx}" cy="${cy}" r="${radius}" fill="${sliceColor(0, 1)}" ` +
        `data-tag="${r.pos}" data-count="${r.count}" data-angle="360.000"/>`,
    );
  } else {
    let angle = -90.0; // 12 o'clock, clockwise
    drawn.forEach((r, i) => {
      const sweep = (r.percentage ?? 0) * 360.0;
      const [x0, y0] = polar(cx, cy, radius, angle);
      const [x1, y1] = polar(cx, cy, radius, angle + sweep);
      const large = sweep > 180.0 ? 1 : 0;
      out.push(
        `<path d="M${cx.toFixed(3)},${cy.toFixed(3)} L${x0.toFixed(3)},${y0.toFixed(3)} ` +
          `A${radius.toFixed(3)},${radius.toFixed(3)} 0 ${large} 1 ${x1.toFixed(3)},${y1.toFixed(3)} Z" ` +
          `fill="${sliceColor(i, drawn.length)}" stroke="white" stroke-width="1" ` +
          `data-tag="${r.pos}" data-count="${r.count}" data-angle="${sweep.toFixed(3)}"/>`,
      );
      angle += sweep;
    });
  }
  const lx = Math.trunc(cx * 2) + 10;
  drawn.forEach((r, i) => {
    const ly = 30 + 16 * i;
    out.push(
      `<rect x="${lx}" y="${ly - 10}" width="12" height="12" fill="${sliceColor(i, drawn.length)}"/>`,
    );
    out.push(`<text x="${lx + 18}" y="${ly}" font-size="12">${r.pos} (${r.count})</text>`);
  });
  out.push("</svg>");
  return out.join("\n") + "\n";
}

export function percentileBarsSvg(rows: DistributionRow[]): string {
  const drawn = rows.filter((r) => r.count > 0);
  const barW = 18;
  const gap = 6;
  const chartH = 300;
  const left = 40;
  const top = 20;
  const bottom = 70;
  const width = left + drawn.length * (barW + gap) + 20;
  const height = top + chartH + bottom;
  const out: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    "<title>tag percentiles</title>",
    '<rect width="100%" height="100%" fill="white"/>',
    `<line x1="${left}" y1="${top + chartH}" x2="${width - 10}" y2="${top + chartH}" stroke="black"/>`,
    `<line x1="${left}" y1="${top}" x2="${left}" y2="${top + chartH}" stroke="black"/>`,
  ];
  for (const frac of [0.25, 0.5, 0.75, 1.0]) {
    const y = top + chartH * (1 - frac);
    out.push(`<text x="${left - 6}" y="${y + 4}" font-size="10" text-anchor="end">${frac}</text>`);
    out.push(`<line x1="${left - 3}" y1="${y}" x2="${left}" y2="${y}" stroke="black"/>`);
  }
  drawn.forEach((r, i) => {
    const pctl = r.percentile ?? 0.0;
    const h = chartH * pctl;
    const x = left + i * (barW + gap) + gap;
    const y = top + chartH - h;
    out.push(
      `<rect x="${x.toFixed(2)}" y="${y.toFixed(3)}" width="${barW}" height="${h.toFixed(3)}" ` +
        `fill="hsl(210, 55%, 50%)" data-tag="${r.pos}" data-percentile="${pctl.toFixed(6)}"/>`,
    );
    const tx = x + barW / 2;
    const ty = top + chartH + 8;
    out.push(
      `<text x="${tx.toFixed(2)}" y="${ty}" font-size="9" text-anchor="end" ` +
        `transform="rotate(-60 ${tx.toFixed(2)} ${ty})">${r.pos}</text>`,
    );
  });
  out.push("</svg>");
  return out.join("\n") + "\n";
}
