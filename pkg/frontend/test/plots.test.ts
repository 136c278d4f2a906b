import { describe, expect, it } from "vitest";

import { parseDips, parseDirectionMap, parseScan, parseTrace } from "../src/csv.js";
import {
  renderDirectionMap,
  renderMultiPanel,
  renderScan,
  renderScanOverlay,
  renderTrace,
} from "../src/plots.js";
import { colormap, linearScale, ticks } from "../src/svg.js";

function traceCsv(unit = "ms"): string {
  const rows = Array.from({ length: 21 }, (_, k) => {
    const t = k * 0.1;
    return `${t},${unit},${(0.75 + 0.25 * Math.cos(t)).toFixed(6)}`;
  }).join("\n");
  return `# kind: trace\n# columns: t,${unit},S\nt,${unit},S\n${rows}\n`;
}

function scanCsv(direction = "z"): string {
  const rows = Array.from({ length: 41 }, (_, k) => {
    const x = 480 + k;
    const dip = (c: number) => 0.3 / (1 + ((x - c) / 2) ** 2);
    return `${x},kHz,${(1 - dip(490) - dip(510)).toFixed(6)}`;
  }).join("\n");
  return (
    `# kind: scan\n# meta: {"direction":"${direction}"}\n` +
    `# columns: param,kHz,S\nparam,kHz,S\n${rows}\n`
  );
}

const DIPS = `# kind: dips
# meta: {"unit":"kHz","main_splitting":20.0}
# columns: center,depth,width
center,depth,width
490,0.3,4
510,0.3,4
`;

function mapCsv(): string {
  const lines: string[] = [];
  for (let i = 0; i < 6; i++) {
    for (let j = 0; j < 8; j++) {
      lines.push(`${i * 36},deg,${j * 45},deg,${(0.5 + 0.05 * i + 0.01 * j).toFixed(4)}`);
    }
  }
  return `# kind: direction-map\n# columns: theta,deg,phi,deg,S\n` +
    `theta,deg,phi,deg,S\n${lines.join("\n")}\n`;
}

describe("svg primitives", () => {
  it("linear scale maps domain ends to range ends", () => {
    const s = linearScale([0, 10], [100, 200]);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(200);
  });

  it("ticks cover the domain at round values", () => {
    const t = ticks([0, 360], 6);
    expect(t[0]).toBeGreaterThanOrEqual(0);
    expect(t[t.length - 1]).toBeLessThanOrEqual(360);
    expect(t).toContain(100);
  });

  it("colormap endpoints", () => {
    expect(colormap(0)).toBe("rgb(68,1,84)");
    expect(colormap(1)).toBe("rgb(253,231,37)");
  });
});

describe("renderers", () => {
  it("trace render is deterministic", () => {
    const trace = parseTrace(traceCsv());
    const a = renderTrace(trace, "demo");
    const b = renderTrace(parseTrace(traceCsv()), "demo");
    expect(a).toBe(b);
    expect(a.startsWith("<svg")).toBe(true);
    expect(a).toContain("t (ms)");
  });

  it("scan render marks dips and annotates the splitting from the report", () => {
    const svg = renderScan(parseScan(scanCsv()), parseDips(DIPS), "scan");
    expect(svg).toContain("delta = 20 kHz");
    // one triangular marker per reported dip
    expect(svg.match(/<path d="M /g)).toHaveLength(2);
  });

  it("scan render refuses a dip report in different units", () => {
    const other = DIPS.replace('"unit":"kHz"', '"unit":"MHz"');
    expect(() =>
      renderScan(parseScan(scanCsv()), parseDips(other)),
    ).toThrow(/does not match/);
  });

  it("direction map paints every grid cell", () => {
    const svg = renderDirectionMap(parseDirectionMap(mapCsv()), "map");
    const cells = svg.match(/<rect /g) ?? [];
    // background + 6x8 cells + colour bar steps
    expect(cells.length).toBeGreaterThanOrEqual(1 + 48 + 40);
    expect(svg).toContain("phi (deg)");
    // every rect must be drawable
    expect(svg).not.toMatch(/width="-/);
    expect(svg).not.toMatch(/height="-/);
  });

  it("direction map places the hottest cell at the hottest datum", () => {
    // single bright cell at theta=108, phi=90 in an otherwise flat map
    const lines: string[] = [];
    for (let i = 0; i < 6; i++) {
      for (let j = 0; j < 8; j++) {
        const v = i === 3 && j === 2 ? 1.0 : 0.5;
        lines.push(`${i * 36},deg,${j * 45},deg,${v}`);
      }
    }
    const csv = `# kind: direction-map\n# columns: theta,deg,phi,deg,S\n` +
      `theta,deg,phi,deg,S\n${lines.join("\n")}\n`;
    const svg = renderDirectionMap(parseDirectionMap(csv));
    const hot: Array<[number, number]> = [];
    for (const m of svg.matchAll(
      /<rect x="([\d.]+)" y="([\d.]+)" width="[\d.]+" height="[\d.]+" fill="rgb\(253,231,37\)"\/>/g,
    )) {
      if (Number(m[1]) < 500) hot.push([Number(m[1]), Number(m[2])]);
    }
    expect(hot).toHaveLength(1);
    const [hx, hy] = hot[0];
    // invert the axes: x spans phi over [58, 530], y spans theta over [30, 386]
    const phi = ((hx - 58) / (530 - 58)) * 360;
    const theta = ((hy - 30) / (386 - 30)) * 180;
    expect(phi).toBeCloseTo(90, 0);
    expect(theta).toBeCloseTo(108, 0);
  });

  it("multi panel lays out one frame per scan", () => {
    const scans = ["x", "y", "z"].map((d) => parseScan(scanCsv(d)));
    const svg = renderMultiPanel(scans, [null, null, null], ["x", "y", "z"]);
    expect(svg.match(/survival/g)).toHaveLength(3);
  });

  it("overlay refuses mixed units", () => {
    const a = parseScan(scanCsv());
    const b = parseScan(scanCsv().replace(/kHz/g, "MHz"));
    expect(() => renderScanOverlay([a, b], ["a", "b"], null)).toThrow(
      /different units/,
    );
  });
});
