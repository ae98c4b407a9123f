// Communities: colored node-link rendering of the detected partition.

import { fetchCommunities, fetchGraphExport } from "../api";
import { guard } from "../banner";
import type { SiteConfig } from "../config";
import { renderCommunities } from "../graphview";

export async function renderCommunitiesView(
  root: HTMLElement, config: SiteConfig, algorithm = "louvain"): Promise<void> {
  root.innerHTML = "";
  await guard(root, async () => {
    const [partition, graph] = await Promise.all([
      fetchCommunities(config, algorithm),
      fetchGraphExport(config),
    ]);
    const heading = document.createElement("h3");
    heading.textContent =
      `${partition.communities.length} communities ` +
      `(${partition.algorithm}, modularity ${partition.modularity.toFixed(3)})`;
    root.append(heading);
    root.append(renderCommunities(partition, graph));
    const legend = document.createElement("ol");
    legend.className = "community-legend";
    for (const community of partition.communities) {
      const item = document.createElement("li");
      item.textContent = community.join(", ");
      legend.append(item);
    }
    root.append(legend);
  });
}
