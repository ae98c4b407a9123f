// Experience chart: cumulative level-basis points over time, bucketed by day.
// The grants list is fetched; this only aggregates it for plotting.

import type { Grant } from "./types";

export interface ChartPoint {
  day: string;
  cumulative: number;
}

export function cumulativeByDay(grants: Grant[], pointType: string): ChartPoint[] {
  const perDay = new Map<string, number>();
  for (const grant of grants) {
    if (grant.achievementType !== pointType) continue;
    const day = grant.grantedAt.slice(0, 10);
    perDay.set(day, (perDay.get(day) ?? 0) + grant.amount);
  }
  const days = [...perDay.keys()].sort();
  let running = 0;
  return days.map((day) => {
    running += perDay.get(day) ?? 0;
    return { day, cumulative: running };
  });
}

export function renderChart(points: ChartPoint[], width = 360, height = 120): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("class", "xp-chart");
  if (points.length === 0) return svg;

  const max = Math.max(...points.map((p) => p.cumulative), 1);
  const min = Math.min(...points.map((p) => p.cumulative), 0);
  const span = max - min || 1;
  const step = points.length > 1 ? width / (points.length - 1) : 0;
  const coords = points.map((p, i) => {
    const x = points.length > 1 ? i * step : width / 2;
    const y = height - ((p.cumulative - min) / span) * (height - 10) - 5;
    return `${x.toFixed(1)},${y.toFixed(1)}`;
  });
  const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
  line.setAttribute("points", coords.join(" "));
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", "#2c7");
  line.setAttribute("stroke-width", "2");
  svg.append(line);
  return svg;
}
