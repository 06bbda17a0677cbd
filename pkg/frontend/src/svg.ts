/** Minimal self-contained SVG chart builder (line charts and bars). */

export interface Series {
  label: string;
  xs: number[];
  ys: number[];
  /** optional per-x min/max envelope drawn as a translucent band */
  band?: { lo: number[]; hi: number[] };
  dashed?: boolean;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  xLog: boolean;
  yLog: boolean;
  width?: number;
  height?: number;
}

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
];

const MARGIN = { top: 40, right: 24, bottom: 48, left: 64 };

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(Number(v.toPrecision(4)));
}

interface Scale {
  (v: number): number;
  ticks: number[];
}

function makeScale(
  values: number[],
  log: boolean,
  rangeLo: number,
  rangeHi: number,
): Scale {
  const usable = values.filter((v) => Number.isFinite(v) && (!log || v > 0));
  let lo = Math.min(...usable);
  let hi = Math.max(...usable);
  if (usable.length === 0) {
    lo = log ? 0.1 : 0;
    hi = 1;
  }
  if (lo === hi) {
    lo = log ? lo / 2 : lo - 1;
    hi = log ? hi * 2 : hi + 1;
  }
  const tlo = log ? Math.log10(lo) : lo;
  const thi = log ? Math.log10(hi) : hi;
  const scale = ((v: number) => {
    const tv = log ? Math.log10(v) : v;
    return rangeLo + ((tv - tlo) / (thi - tlo)) * (rangeHi - rangeLo);
  }) as Scale;
  const ticks: number[] = [];
  if (log) {
    for (let e = Math.ceil(tlo); e <= Math.floor(thi); e++) ticks.push(10 ** e);
    if (ticks.length < 2) ticks.push(lo, hi);
  } else {
    const n = 5;
    for (let i = 0; i <= n; i++) ticks.push(lo + ((hi - lo) * i) / n);
  }
  scale.ticks = ticks;
  return scale;
}

export function renderChart(series: Series[], opts: ChartOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const allX: number[] = [];
  const allY: number[] = [];
  for (const s of series) {
    allX.push(...s.xs);
    allY.push(...s.ys);
    if (s.band) allY.push(...s.band.lo, ...s.band.hi);
  }
  const sx = makeScale(allX, opts.xLog, MARGIN.left, MARGIN.left + plotW);
  const sy = makeScale(allY, opts.yLog, MARGIN.top + plotH, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" font-family="sans-serif" font-size="12">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`,
  );

  for (const tv of sx.ticks) {
    const px = sx(tv);
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${MARGIN.top + plotH}" stroke="#eee"/>`,
      `<text x="${px}" y="${MARGIN.top + plotH + 16}" text-anchor="middle">${esc(fmtTick(tv))}</text>`,
    );
  }
  for (const tv of sy.ticks) {
    const py = sy(tv);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + plotW}" y2="${py}" stroke="#eee"/>`,
      `<text x="${MARGIN.left - 6}" y="${py + 4}" text-anchor="end">${esc(fmtTick(tv))}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle">${esc(opts.xLabel)}</text>`,
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${esc(opts.yLabel)}</text>`,
  );

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const ok = (x: number, y: number) =>
      Number.isFinite(y) && (!opts.yLog || y > 0) && (!opts.xLog || x > 0);
    if (s.band) {
      const fwd = s.xs
        .map((x, j) => (ok(x, s.band!.hi[j]) ? `${sx(x)},${sy(s.band!.hi[j])}` : null))
        .filter((p): p is string => p !== null);
      const back = s.xs
        .map((x, j) => (ok(x, s.band!.lo[j]) ? `${sx(x)},${sy(s.band!.lo[j])}` : null))
        .filter((p): p is string => p !== null)
        .reverse();
      if (fwd.length > 1 && back.length > 1) {
        parts.push(
          `<polygon points="${[...fwd, ...back].join(" ")}" fill="${color}" opacity="0.15"/>`,
        );
      }
    }
    const pts = s.xs
      .map((x, j) => (ok(x, s.ys[j]) ? `${sx(x)},${sy(s.ys[j])}` : null))
      .filter((p): p is string => p !== null);
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    if (pts.length > 1) {
      parts.push(
        `<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="1.8"${dash}/>`,
      );
    }
    for (const p of pts) {
      const [px, py] = p.split(",");
      parts.push(`<circle cx="${px}" cy="${py}" r="2.4" fill="${color}"/>`);
    }
    const ly = MARGIN.top + 10 + i * 18;
    const lx = MARGIN.left + plotW - 160;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${color}" stroke-width="2"${dash}/>`,
      `<text class="legend" x="${lx + 28}" y="${ly + 4}">${esc(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

export interface Bar {
  label: string;
  value: number;
  annotation?: string;
}

export function renderBars(bars: Bar[], opts: { title: string; yLabel: string }): string {
  const width = 720;
  const height = 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const finite = bars.map((b) => (Number.isFinite(b.value) ? b.value : 0));
  const maxV = Math.max(1e-12, ...finite);
  const bw = plotW / Math.max(1, bars.length);
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" font-family="sans-serif" font-size="12">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`,
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`,
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${esc(opts.yLabel)}</text>`,
  ];
  bars.forEach((b, i) => {
    const color = PALETTE[i % PALETTE.length];
    const v = Number.isFinite(b.value) ? b.value : 0;
    const h = (v / maxV) * (plotH - 20);
    const x = MARGIN.left + i * bw + bw * 0.2;
    const y = MARGIN.top + plotH - h;
    parts.push(
      `<rect x="${x}" y="${y}" width="${bw * 0.6}" height="${h}" fill="${color}"/>`,
      `<text class="legend" x="${x + bw * 0.3}" y="${MARGIN.top + plotH + 16}" text-anchor="middle">${esc(b.label)}</text>`,
      `<text x="${x + bw * 0.3}" y="${y - 6}" text-anchor="middle">${esc(b.annotation ?? fmtTick(b.value))}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}
