import type { EChartsOption, SeriesOption } from "echarts";
import { PlotSpec, Table } from "./schema";

const PALETTE = [
  "#4063d8",
  "#c93c3c",
  "#2e9e62",
  "#b07c22",
  "#7b4fa8",
  "#3391a5",
  "#a04f7c",
  "#5a6b2f",
];

function base(title: string): EChartsOption {
  return {
    animation: false,
    backgroundColor: "#ffffff",
    title: { text: title, left: "center", textStyle: { fontSize: 15 } },
    grid: { left: 70, right: 30, top: 52, bottom: 52 },
    legend: { bottom: 4, type: "plain" },
    color: PALETTE,
  };
}

/** Band diagram: one polyline per band over the varying theta component. */
export function bandsOption(table: Table): EChartsOption {
  const thetaCols = table.columns.filter((c) => c.startsWith("theta_"));
  // pick the axis that actually varies (falls back to theta_1)
  let axisCol = "theta_1";
  for (const col of thetaCols) {
    const vals = table.rows.map((r) => r[col]);
    if (Math.max(...vals) - Math.min(...vals) > 0) {
      axisCol = col;
      break;
    }
  }
  const bands = [...new Set(table.rows.map((r) => r.band_index))].sort((a, b) => a - b);
  const series: SeriesOption[] = bands.map((b) => ({
    name: `band ${b}`,
    type: "line",
    showSymbol: false,
    data: table.rows
      .filter((r) => r.band_index === b)
      .map((r) => [r[axisCol], r.re_lambda] as [number, number])
      .sort((p, q) => p[0] - q[0]),
  }));
  return {
    ...base("Floquet bands"),
    xAxis: { type: "value", name: axisCol, nameLocation: "middle", nameGap: 28 },
    yAxis: { type: "value", name: "Re lambda", nameLocation: "middle", nameGap: 48 },
    series,
  };
}

/** Log-log tau decay with a slope -1 reference line anchored at the first point. */
export function tauScalingOption(table: Table): EChartsOption {
  const pts = table.rows
    .map((r) => [r.tau, r.value] as [number, number])
    .sort((p, q) => p[0] - q[0]);
  const anchor = pts[0];
  const reference = pts.map(([t]) => [t, (anchor[1] * anchor[0]) / t] as [number, number]);
  return {
    ...base("S(tau) decay"),
    xAxis: { type: "log", name: "tau", nameLocation: "middle", nameGap: 28 },
    yAxis: { type: "log", name: "S", nameLocation: "middle", nameGap: 48 },
    series: [
      { name: "S(tau)", type: "line", data: pts, showSymbol: true, symbolSize: 6 },
      {
        name: "slope -1 reference",
        type: "line",
        data: reference,
        showSymbol: false,
        lineStyle: { type: "dashed" },
      },
    ],
  };
}

/** Cluster constants as bars, with the dual measurement overlaid when present. */
export function clustersOption(table: Table): EChartsOption {
  const rows = [...table.rows].sort((a, b) => a.m - b.m);
  const series: SeriesOption[] = [
    { name: "C_m", type: "bar", data: rows.map((r) => r.constant) },
  ];
  if (table.columns.includes("dual_constant")) {
    series.push({
      name: "dual",
      type: "scatter",
      symbolSize: 7,
      data: rows.map((r, i) => [i, r.dual_constant] as [number, number]),
    });
  }
  return {
    ...base("Spectral cluster constants"),
    xAxis: { type: "category", name: "m", nameLocation: "middle", nameGap: 28,
             data: rows.map((r) => String(r.m)) },
    yAxis: { type: "value", name: "C_m", nameLocation: "middle", nameGap: 48 },
    series,
  };
}

/** Thomas scan sigma_min(tau), optionally with the sigma = tau - offset line. */
export function thomasOption(table: Table, spec: PlotSpec): EChartsOption {
  const pts = table.rows
    .map((r) => [r.tau, r.sigma_min] as [number, number])
    .sort((p, q) => p[0] - q[0]);
  const series: SeriesOption[] = [
    { name: "sigma_min", type: "line", data: pts, showSymbol: true, symbolSize: 6 },
  ];
  if (spec.overlayOffset !== undefined) {
    series.push({
      name: `tau - ${spec.overlayOffset}`,
      type: "line",
      showSymbol: false,
      lineStyle: { type: "dashed" },
      data: pts.map(([t]) => [t, t - (spec.overlayOffset as number)] as [number, number]),
    });
  }
  return {
    ...base("Thomas scan"),
    xAxis: { type: "value", name: "tau", nameLocation: "middle", nameGap: 28 },
    yAxis: { type: "value", name: "sigma_min", nameLocation: "middle", nameGap: 48 },
    series,
  };
}

export function optionFor(spec: PlotSpec, table: Table): EChartsOption {
  switch (spec.kind) {
    case "bands":
      return bandsOption(table);
    case "tau-scaling":
      return tauScalingOption(table);
    case "clusters":
      return clustersOption(table);
    case "thomas":
      return thomasOption(table, spec);
  }
}
