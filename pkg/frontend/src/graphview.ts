// Community view: node-link drawing with one color per community.

import type { GraphExport, Partition } from "./types";

const PALETTE = ["#7b68ee", "#3cb371", "#ff8c42", "#4aa3df", "#e05697", "#b6b645"];

export function renderCommunities(
  partition: Partition,
  graph: GraphExport | null,
  size = 360,
): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", String(size));
  svg.setAttribute("height", String(size));
  svg.setAttribute("class", "community-graph");

  const communityOf = new Map<string, number>();
  partition.communities.forEach((community, index) => {
    for (const node of community) communityOf.set(node, index);
  });

  // Nodes sit on a circle per community; communities on an outer circle.
  const position = new Map<string, { x: number; y: number }>();
  const groups = partition.communities.length;
  partition.communities.forEach((community, index) => {
    const groupAngle = (2 * Math.PI * index) / Math.max(groups, 1);
    const radius = groups > 1 ? size / 3.2 : 0;
    const cx = size / 2 + radius * Math.cos(groupAngle);
    const cy = size / 2 + radius * Math.sin(groupAngle);
    community.forEach((node, nodeIndex) => {
      const angle = (2 * Math.PI * nodeIndex) / Math.max(community.length, 1);
      const r = community.length > 1 ? size / 9 : 0;
      position.set(node, { x: cx + r * Math.cos(angle), y: cy + r * Math.sin(angle) });
    });
  });

  for (const edge of graph?.edges ?? []) {
    const from = position.get(edge.source);
    const to = position.get(edge.target);
    if (!from || !to) continue;
    const line = document.createElementNS("http://www.w3.org/2000/svg", "line");
    line.setAttribute("x1", from.x.toFixed(1));
    line.setAttribute("y1", from.y.toFixed(1));
    line.setAttribute("x2", to.x.toFixed(1));
    line.setAttribute("y2", to.y.toFixed(1));
    line.setAttribute("stroke", "#bbb");
    svg.append(line);
  }

  for (const [node, point] of position) {
    const group = communityOf.get(node) ?? 0;
    const circle = document.createElementNS("http://www.w3.org/2000/svg", "circle");
    circle.setAttribute("cx", point.x.toFixed(1));
    circle.setAttribute("cy", point.y.toFixed(1));
    circle.setAttribute("r", "10");
    circle.setAttribute("fill", PALETTE[group % PALETTE.length]);
    circle.setAttribute("data-player", node);
    circle.setAttribute("data-community", String(group));
    svg.append(circle);
    const label = document.createElementNS("http://www.w3.org/2000/svg", "text");
    label.setAttribute("x", point.x.toFixed(1));
    label.setAttribute("y", (point.y + 22).toFixed(1));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("font-size", "10");
    label.textContent = node;
    svg.append(label);
  }
  return svg;
}
