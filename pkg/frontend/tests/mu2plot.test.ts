import { mkdtempSync, readFileSync, statSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { main } from "../src/cli.js";
import { render } from "../src/render.js";
import { parseResults, SchemaError } from "../src/schema.js";
import { logLogSlope } from "../src/stats.js";

const HEADER = "algo,lr,seed,t,f_gap,eps_sq,iterate_norm,samples_used,diverged";

function decayFixture(): string {
  // exact power law eps_sq = 1/t for a single run
  const lines = [HEADER];
  for (let t = 1; t <= 100; t++) {
    lines.push(`mu2_sgd,0.01,0,${t},${1 / t},${1 / t},1.0,${2 * t},false`);
  }
  return lines.join("\n") + "\n";
}

function sweepFixture(): string {
  // two algorithms x three learning rates x two seeds, one logged step each
  const lines = [HEADER];
  const gaps: Record<string, number[]> = {
    sgd: [0.5, 0.1, 0.4],
    mu2_sgd: [0.3, 0.05, 0.2],
  };
  for (const algo of ["sgd", "mu2_sgd"]) {
    [0.01, 0.1, 1.0].forEach((lr, i) => {
      for (const seed of [0, 1]) {
        const gap = gaps[algo][i] * (seed === 0 ? 0.9 : 1.1);
        lines.push(`${algo},${lr},${seed},10,${gap},0.01,1.0,20,false`);
      }
    });
  }
  return lines.join("\n") + "\n";
}

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "mu2plot-"));
}

describe("schema", () => {
  it("parses a valid file", () => {
    const rows = parseResults(decayFixture());
    expect(rows).toHaveLength(100);
    expect(rows[0]).toMatchObject({ algo: "mu2_sgd", lr: 0.01, t: 1 });
  });

  it("names the first offending column on mismatch", () => {
    const bad = "algo,lr,seed,step,f_gap,eps_sq,iterate_norm,samples_used,diverged\n";
    expect(() => parseResults(bad + "sgd,0.1,0,1,0,0,0,1,false\n")).toThrow(
      /expected column 't' at position 4, found 'step'/,
    );
  });

  it("rejects missing and extra columns", () => {
    expect(() => parseResults("algo,lr,seed\nsgd,0.1,0\n")).toThrow(
      /missing column 't'/,
    );
    expect(() => parseResults(HEADER + ",extra\n")).toThrow(
      /unexpected column 'extra'/,
    );
  });

  it("raises 'no rows' on a header-only file", () => {
    expect(() => parseResults(HEADER + "\n")).toThrow(/no rows/);
  });

  it("parses inf and boolean fields", () => {
    const rows = parseResults(HEADER + "\nsgd,0.1,0,5,inf,nan,1.0,10,true\n");
    expect(rows[0].f_gap).toBe(Infinity);
    expect(Number.isNaN(rows[0].eps_sq)).toBe(true);
    expect(rows[0].diverged).toBe(true);
  });
});

describe("log-log slope fit", () => {
  it("recovers exact power laws", () => {
    const ts = Array.from({ length: 50 }, (_, i) => i + 1);
    expect(logLogSlope(ts, ts.map((t) => 3 / t))).toBeCloseTo(-1, 9);
    expect(logLogSlope(ts, ts.map((t) => 7 / t ** 2))).toBeCloseTo(-2, 9);
  });

  it("returns null without enough positive points", () => {
    expect(logLogSlope([1, 2], [0, -1])).toBeNull();
  });
});

describe("decay_loglog", () => {
  it("reports slope -1.00 +/- 0.01 on the exact 1/t fixture", () => {
    const rows = parseResults(decayFixture());
    const { summary } = render(rows, "decay_loglog");
    const slopes = summary.fitted_slopes as Record<string, number>;
    expect(Math.abs(slopes.mu2_sgd - -1.0)).toBeLessThanOrEqual(0.01);
    expect(summary.reference_slope).toBe(-1);
  });

  it("includes the reference guide as a legend entry", () => {
    const rows = parseResults(decayFixture());
    const { summary, svg } = render(rows, "decay_loglog");
    expect(summary.legend_entries).toContain("slope -1 reference");
    expect(svg).toContain("stroke-dasharray");
  });
});

describe("sweep_curve", () => {
  it("renders two legend entries with correct mean values", () => {
    const rows = parseResults(sweepFixture());
    const { summary, svg } = render(rows, "sweep_curve");
    expect(summary.legend_entries).toEqual(["sgd", "mu2_sgd"]);
    const series = summary.series as Array<Record<string, unknown>>;
    const sgd = series.find((s) => s.algo === "sgd")!;
    // mean over the two seeds: gap * (0.9 + 1.1) / 2 = gap
    expect(sgd.learning_rates).toEqual([0.01, 0.1, 1.0]);
    const close = (got: unknown, want: number[]) => {
      const arr = got as number[];
      expect(arr).toHaveLength(want.length);
      arr.forEach((v, i) => expect(v).toBeCloseTo(want[i], 12));
    };
    close(sgd.mean_final_f_gap, [0.5, 0.1, 0.4]);
    const mu2 = series.find((s) => s.algo === "mu2_sgd")!;
    close(mu2.mean_final_f_gap, [0.3, 0.05, 0.2]);
    // one legend text element per algorithm in the figure itself
    expect((svg.match(/class="legend"/g) ?? []).length).toBe(2);
  });

  it("marks diverged runs as infinite means", () => {
    const csv =
      HEADER +
      "\nsgd,0.1,0,10,2.0,0.1,1.0,20,true\nsgd,0.1,1,10,0.5,0.1,1.0,20,false\n";
    const { summary } = render(parseResults(csv), "sweep_curve");
    const series = summary.series as Array<Record<string, unknown>>;
    expect((series[0].mean_final_f_gap as unknown[])[0]).toBe("Infinity");
  });
});

describe("trajectory and stability_bars", () => {
  it("trajectory reports per-step means", () => {
    const rows = parseResults(decayFixture());
    const { summary } = render(rows, "trajectory");
    const series = summary.series as Array<Record<string, unknown>>;
    expect((series[0].mean_f_gap as number[])[0]).toBeCloseTo(1.0, 12);
  });

  it("stability ratio is the factor-2 contiguous grid width", () => {
    // means 0.5 / 0.1 / 0.4: only 0.1 is within 2x of the best, so the
    // sgd range collapses to one point; mu2 spans 0.05..0.1 only
    const rows = parseResults(sweepFixture());
    const { summary } = render(rows, "stability_bars");
    const entries = summary.stability as Array<Record<string, unknown>>;
    const sgd = entries.find((e) => e.algo === "sgd")!;
    expect(sgd.ratio).toBe(1);
    expect(sgd.eta_star).toBe(0.1);
  });
});

describe("cli", () => {
  it("writes image and sidecar, exit 0", () => {
    const dir = tmp();
    const csv = join(dir, "results.csv");
    writeFileSync(csv, decayFixture());
    const out = join(dir, "decay.svg");
    expect(main([csv, "--kind", "decay_loglog", "--out", out])).toBe(0);
    expect(statSync(out).size).toBeGreaterThan(0);
    const sidecar = JSON.parse(readFileSync(out + ".summary.json", "utf-8"));
    expect(sidecar.kind).toBe("decay_loglog");
    expect(Math.abs(sidecar.fitted_slopes.mu2_sgd - -1.0)).toBeLessThanOrEqual(0.01);
  });

  it("exits 2 on schema mismatch and on empty data", () => {
    const dir = tmp();
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "algo,lr\nsgd,0.1\n");
    expect(main([bad, "--kind", "sweep_curve", "--out", join(dir, "o.svg")])).toBe(2);
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, HEADER + "\n");
    expect(main([empty, "--kind", "sweep_curve", "--out", join(dir, "o.svg")])).toBe(2);
  });

  it("exits 2 on unknown kind or missing file", () => {
    const dir = tmp();
    const csv = join(dir, "results.csv");
    writeFileSync(csv, decayFixture());
    expect(main([csv, "--kind", "pie", "--out", join(dir, "o.svg")])).toBe(2);
    expect(
      main([join(dir, "nope.csv"), "--kind", "sweep_curve", "--out", join(dir, "o.svg")]),
    ).toBe(2);
  });
});
