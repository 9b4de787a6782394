/**
 * Headless figure rendering (no display, no DOM).
 *
 * Charts are laid out with echarts in SSR mode and written as SVG; a .png
 * output path rasterizes the SVG via resvg.  Three figures:
 *
 *   error_vs_n — mean percentage error vs population size with a
 *                mean +/- std band across seeds;
 *   cost_vs_n  — finite-N cost value (band) against the mean-field cost
 *                value and the constraint level;
 *   trace      — estimated constraint value and dual variable per solver
 *                iteration.
 */
import { writeFileSync } from "node:fs";
import * as echarts from "echarts";

import { bandByN, constantColumn, type BandPoint } from "./aggregate";
import { readResults, readTrace } from "./schema";

export type FigureKind = "error_vs_n" | "cost_vs_n" | "trace";

export interface PlotSpec {
  figure: FigureKind;
  input: string;
  output: string;
  width?: number;
  height?: number;
}

export interface RenderResult {
  output: string;
  /** echarts option actually rendered; tests compare its data to the CSV. */
  option: echarts.EChartsOption;
}

const BAND_COLOR = "rgba(31, 119, 180, 0.25)";
const LINE_COLOR = "#1f77b4";
const ALT_COLOR = "#ff7f0e";

function bandSeries(points: BandPoint[], name: string): echarts.SeriesOption[] {
  // Shaded band drawn as two stacked lines: invisible lower edge plus a
  // filled span of height 2*std.
  return [
    {
      name: `${name} band lower`,
      type: "line",
      data: points.map((p) => [p.n, p.mean - p.std]),
      stack: `${name}-band`,
      lineStyle: { opacity: 0 },
      symbol: "none",
      silent: true,
    },
    {
      name: `${name} band`,
      type: "line",
      data: points.map((p) => [p.n, 2 * p.std]),
      stack: `${name}-band`,
      lineStyle: { opacity: 0 },
      areaStyle: { color: BAND_COLOR },
      symbol: "none",
      silent: true,
    },
    {
      name,
      type: "line",
      data: points.map((p) => [p.n, p.mean]),
      color: LINE_COLOR,
      symbol: "circle",
    },
  ];
}

function errorVsNOption(input: string): echarts.EChartsOption {
  const rows = readResults(input);
  const points = bandByN(rows, "error_pct");
  return {
    animation: false,
    title: { text: "Relative value error vs population size" },
    xAxis: { type: "log", name: "N (agents)" },
    yAxis: { type: "value", name: "error (%)" },
    legend: { data: ["mean error"] },
    series: bandSeries(points, "mean error"),
  };
}

function costVsNOption(input: string): echarts.EChartsOption {
  const rows = readResults(input);
  const points = bandByN(rows, "v_n_c");
  const vInfC = constantColumn(rows, "v_inf_c");
  const zeta = constantColumn(rows, "zeta");
  const ns = points.map((p) => p.n);
  return {
    animation: false,
    title: { text: "Cost values vs population size" },
    xAxis: { type: "log", name: "N (agents)" },
    yAxis: { type: "value", name: "discounted cost value" },
    legend: { data: ["finite-N cost", "mean-field cost", "constraint"] },
    series: [
      ...bandSeries(points, "finite-N cost"),
      {
        name: "mean-field cost",
        type: "line",
        data: ns.map((n) => [n, vInfC]),
        color: ALT_COLOR,
        symbol: "none",
      },
      {
        name: "constraint",
        type: "line",
        data: ns.map((n) => [n, zeta]),
        color: "#2ca02c",
        lineStyle: { type: "dashed" },
        symbol: "none",
      },
    ],
  };
}

function traceOption(input: string): echarts.EChartsOption {
  const rows = readTrace(input);
  return {
    animation: false,
    title: { text: "Training trace" },
    xAxis: { type: "value", name: "iteration" },
    yAxis: [
      { type: "value", name: "estimated cost value" },
      { type: "value", name: "dual variable" },
    ],
    legend: { data: ["estimated cost value", "dual variable"] },
    series: [
      {
        name: "estimated cost value",
        type: "line",
        data: rows.map((r) => [r.iter, r.v_c_hat]),
        color: LINE_COLOR,
        symbol: "none",
      },
      {
        name: "dual variable",
        type: "line",
        yAxisIndex: 1,
        data: rows.map((r) => [r.iter, r.lambda]),
        color: ALT_COLOR,
        symbol: "none",
      },
    ],
  };
}

export function buildOption(spec: PlotSpec): echarts.EChartsOption {
  switch (spec.figure) {
    case "error_vs_n":
      return errorVsNOption(spec.input);
    case "cost_vs_n":
      return costVsNOption(spec.input);
    case "trace":
      return traceOption(spec.input);
    default:
      throw new Error(`unknown figure "${spec.figure satisfies never}"`);
  }
}

export function renderSvg(spec: PlotSpec): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width ?? 800,
    height: spec.height ?? 500,
  });
  try {
    chart.setOption(buildOption(spec));
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}

export function render(spec: PlotSpec): RenderResult {
  const svg = renderSvg(spec);
  if (spec.output.toLowerCase().endsWith(".png")) {
    // Lazy import: SVG output must not require the native rasterizer.
    // eslint-disable-next-line @typescript-eslint/no-var-requires
    const { Resvg } = require("@resvg/resvg-js");
    writeFileSync(spec.output, new Resvg(svg).render().asPng());
  } else {
    writeFileSync(spec.output, svg, "utf-8");
  }
  return { output: spec.output, option: buildOption(spec) };
}
