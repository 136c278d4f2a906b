/**
 * Figure renderers.  These never compute physics: every number on a
 * figure, including dip markers and splitting annotations, comes from the
 * CSV inputs (splittings from the dip report's meta block).
 */

import { DipReport, DirectionMap, Scan, Trace } from "./csv.js";
import { SvgBuilder, colormap, linearScale, ticks } from "./svg.js";

const MARGIN = { left: 58, right: 16, top: 30, bottom: 44 };

interface Frame {
  svg: SvgBuilder;
  x: ReturnType<typeof linearScale>;
  y: ReturnType<typeof linearScale>;
}

function frame(
  svg: SvgBuilder,
  box: { x0: number; y0: number; w: number; h: number },
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  title: string,
): Frame {
  const x = linearScale(xDomain, [box.x0 + MARGIN.left, box.x0 + box.w - MARGIN.right]);
  const y = linearScale(yDomain, [box.y0 + box.h - MARGIN.bottom, box.y0 + MARGIN.top]);
  svg.line(x.range[0], y.range[0], x.range[1], y.range[0]);
  svg.line(x.range[0], y.range[0], x.range[0], y.range[1]);
  for (const t of ticks(xDomain)) {
    svg.line(x(t), y.range[0], x(t), y.range[0] + 4);
    svg.text(x(t), y.range[0] + 17, String(t), "middle", 10);
  }
  for (const t of ticks(yDomain, 4)) {
    svg.line(x.range[0] - 4, y(t), x.range[0], y(t));
    svg.text(x.range[0] - 7, y(t) + 3, String(t), "end", 10);
  }
  svg.text((x.range[0] + x.range[1]) / 2, y.range[0] + 34, xLabel);
  svg.raw(
    `<text x="${box.x0 + 14}" y="${(y.range[0] + y.range[1]) / 2}" ` +
      `text-anchor="middle" font-family="sans-serif" font-size="12" ` +
      `fill="#202020" transform="rotate(-90 ${box.x0 + 14} ` +
      `${(y.range[0] + y.range[1]) / 2})">${yLabel}</text>`,
  );
  if (title) {
    svg.text((x.range[0] + x.range[1]) / 2, box.y0 + 16, title, "middle", 13);
  }
  return { svg, x, y };
}

function valueDomain(values: number[]): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const pad = Math.max(0.02, (hi - lo) * 0.08);
  return [Math.max(0, lo - pad), Math.min(1.001, hi + pad)];
}

function drawCurve(f: Frame, xs: number[], ys: number[], stroke = "#1f77b4"): void {
  f.svg.polyline(xs.map((v, i) => [f.x(v), f.y(ys[i])] as [number, number]), stroke);
}

function annotateDips(f: Frame, scan: Scan, report: DipReport,
                      splittingKey = "main_splitting"): void {
  if (report.unit && report.unit !== scan.unit) {
    throw new Error(
      `dip report unit ${report.unit} does not match scan unit ${scan.unit}`,
    );
  }
  for (const dip of report.dips) {
    f.svg.marker(f.x(dip.center), f.y.range[1] + 6);
  }
  const splitting = report.meta[splittingKey];
  if (typeof splitting === "number" && report.dips.length >= 2) {
    const byDepth = [...report.dips].sort((a, b) => b.depth - a.depth).slice(0, 2);
    const pair = byDepth.sort((a, b) => a.center - b.center);
    const yArrow = f.y.range[1] + 24;
    const x1 = f.x(pair[0].center);
    const x2 = f.x(pair[1].center);
    f.svg.line(x1, yArrow, x2, yArrow, "#d62728", 1);
    f.svg.line(x1, yArrow - 4, x1, yArrow + 4, "#d62728", 1);
    f.svg.line(x2, yArrow - 4, x2, yArrow + 4, "#d62728", 1);
    f.svg.text((x1 + x2) / 2, yArrow - 6,
               `delta = ${Number(splitting.toFixed(3))} ${scan.unit}`,
               "middle", 11, "#d62728");
  }
}

export function renderTrace(trace: Trace, title = ""): string {
  const svg = new SvgBuilder(560, 360);
  const f = frame(
    svg, { x0: 0, y0: 0, w: 560, h: 360 },
    [Math.min(...trace.times), Math.max(...trace.times)],
    valueDomain(trace.values),
    `t (${trace.unit})`, "survival", title,
  );
  drawCurve(f, trace.times, trace.values);
  return svg.render();
}

export function renderScan(scan: Scan, report: DipReport | null,
                           title = ""): string {
  const svg = new SvgBuilder(560, 360);
  const f = frame(
    svg, { x0: 0, y0: 0, w: 560, h: 360 },
    [Math.min(...scan.grid), Math.max(...scan.grid)],
    valueDomain(scan.values),
    `drive (${scan.unit})`, "survival", title,
  );
  drawCurve(f, scan.grid, scan.values);
  if (report) annotateDips(f, scan, report);
  return svg.render();
}

export function renderScanOverlay(scans: Scan[], labels: string[],
                                  report: DipReport | null,
                                  title = ""): string {
  const svg = new SvgBuilder(560, 360);
  const allValues = scans.flatMap((s) => s.values);
  const unit = scans[0].unit;
  for (const scan of scans) {
    if (scan.unit !== unit) {
      throw new Error("overlayed scans carry different units");
    }
  }
  const f = frame(
    svg, { x0: 0, y0: 0, w: 560, h: 360 },
    [Math.min(...scans[0].grid), Math.max(...scans[0].grid)],
    valueDomain(allValues),
    `drive (${unit})`, "survival", title,
  );
  const palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
  scans.forEach((scan, k) => {
    drawCurve(f, scan.grid, scan.values, palette[k % palette.length]);
    svg.text(f.x.range[1] - 6, f.y.range[1] + 14 + 14 * k, labels[k] ?? "",
             "end", 11, palette[k % palette.length]);
  });
  if (report) annotateDips(f, scans[0], report, "satellite_splitting");
  return svg.render();
}

export function renderTraceOverlay(traces: Trace[], labels: string[],
                                   title = ""): string {
  const svg = new SvgBuilder(560, 360);
  const unit = traces[0].unit;
  for (const trace of traces) {
    if (trace.unit !== unit) {
      throw new Error("overlayed traces carry different time units");
    }
  }
  const f = frame(
    svg, { x0: 0, y0: 0, w: 560, h: 360 },
    [Math.min(...traces[0].times), Math.max(...traces[0].times)],
    valueDomain(traces.flatMap((t) => t.values)),
    `t (${unit})`, "survival", title,
  );
  const palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
  traces.forEach((trace, k) => {
    drawCurve(f, trace.times, trace.values, palette[k % palette.length]);
    svg.text(f.x.range[1] - 6, f.y.range[1] + 14 + 14 * k, labels[k] ?? "",
             "end", 11, palette[k % palette.length]);
  });
  return svg.render();
}

export function renderDirectionMap(map: DirectionMap, title = ""): string {
  const width = 620;
  const height = 430;
  const svg = new SvgBuilder(width, height);
  const x = linearScale([0, 360], [MARGIN.left, width - 90]);
  const y = linearScale([180, 0], [height - MARGIN.bottom, MARGIN.top]);
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of map.values) {
    for (const v of row) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  const span = hi - lo || 1;
  const dTheta = map.theta.length > 1 ? map.theta[1] - map.theta[0] : 180;
  const dPhi = map.phi.length > 1 ? map.phi[1] - map.phi[0] : 360;
  const cellW = x(dPhi) - x(0);
  const cellH = y(dTheta) - y(0); // theta grows downward on screen
  for (let i = 0; i < map.theta.length; i++) {
    for (let j = 0; j < map.phi.length; j++) {
      const fill = colormap((map.values[i][j] - lo) / span);
      svg.rect(x(map.phi[j]), y(map.theta[i]), cellW, cellH, fill);
    }
  }
  for (const t of ticks([0, 360], 6)) {
    svg.text(x(t), height - MARGIN.bottom + 17, String(t), "middle", 10);
  }
  for (const t of ticks([0, 180], 4)) {
    svg.text(MARGIN.left - 7, y(t) + 3, String(t), "end", 10);
  }
  svg.text((MARGIN.left + width - 90) / 2, height - 12, "phi (deg)");
  svg.raw(
    `<text x="16" y="${height / 2}" text-anchor="middle" ` +
      `font-family="sans-serif" font-size="12" fill="#202020" ` +
      `transform="rotate(-90 16 ${height / 2})">theta (deg)</text>`,
  );
  if (title) svg.text(width / 2, 16, title, "middle", 13);
  // colour bar, highest value at the top
  const barX = width - 62;
  const barTop = y(0);
  const barHeight = y(180) - y(0);
  const steps = 40;
  for (let k = 0; k < steps; k++) {
    svg.rect(barX, barTop + (k * barHeight) / steps, 14,
             barHeight / steps + 0.5, colormap(1 - k / (steps - 1)));
  }
  svg.text(barX + 30, barTop + 4, Number(hi.toFixed(3)).toString(), "start", 10);
  svg.text(barX + 30, barTop + barHeight + 4,
           Number(lo.toFixed(3)).toString(), "start", 10);
  return svg.render();
}

export function renderMultiPanel(
  scans: Scan[], reports: Array<DipReport | null>, titles: string[],
  columns = 3,
): string {
  const cellW = 380;
  const cellH = 280;
  const rows = Math.ceil(scans.length / columns);
  const svg = new SvgBuilder(cellW * columns, cellH * rows);
  scans.forEach((scan, k) => {
    const col = k % columns;
    const row = Math.floor(k / columns);
    const box = { x0: col * cellW, y0: row * cellH, w: cellW, h: cellH };
    const f = frame(
      svg, box,
      [Math.min(...scan.grid), Math.max(...scan.grid)],
      valueDomain(scan.values),
      `drive (${scan.unit})`, "survival", titles[k] ?? "",
    );
    drawCurve(f, scan.grid, scan.values);
    const report = reports[k];
    if (report) annotateDips(f, scan, report);
  });
  return svg.render();
}
