// Home: profile, level and server-computed progress, badges, the experience
// chart, and the global + neighborhood rankings.

import {
  fetchAchievements,
  fetchGlobalRanking,
  fetchNeighborhoodRanking,
  fetchProfile,
} from "../api";
import { guard } from "../banner";
import { cumulativeByDay, renderChart } from "../chart";
import type { SiteConfig } from "../config";
import type { RankingEntry } from "../types";

function rankingTable(title: string, entries: RankingEntry[], me: string): HTMLElement {
  const section = document.createElement("section");
  section.className = `ranking ${title.toLowerCase().replace(/\s+/g, "-")}`;
  const heading = document.createElement("h3");
  heading.textContent = title;
  section.append(heading);
  const table = document.createElement("table");
  for (const entry of entries) {
    const row = table.insertRow();
    if (entry.player === me) row.className = "me";
    row.insertCell().textContent = String(entry.rank);
    row.insertCell().textContent = entry.player;
    row.insertCell().textContent = String(entry.total);
  }
  section.append(table);
  return section;
}

export async function renderHome(root: HTMLElement, config: SiteConfig): Promise<void> {
  root.innerHTML = "";
  await guard(root, async () => {
    const profile = await fetchProfile(config);

    const header = document.createElement("section");
    header.className = "profile-header";
    const name = document.createElement("h2");
    name.textContent = profile.player.name || profile.player.id;
    header.append(name);

    const points = document.createElement("p");
    points.className = "points";
    const basis = profile.levelBasis ?? "points";
    points.textContent = `${profile.progress?.points ?? 0} ${basis}`;
    header.append(points);

    const level = document.createElement("p");
    level.className = "level";
    level.textContent = `Level ${profile.level}`;
    header.append(level);

    if (profile.progress) {
      const progress = document.createElement("p");
      progress.className = "progress";
      // the percentage is server-computed; only format it here
      progress.textContent =
        `${profile.progress.percentToNextLevel.toFixed(0)}% to next level ` +
        `(${profile.progress.points} / ${profile.progress.nextLevelAt})`;
      const bar = document.createElement("div");
      bar.className = "progress-bar";
      const fill = document.createElement("div");
      fill.className = "progress-fill";
      fill.style.width = `${profile.progress.percentToNextLevel}%`;
      bar.append(fill);
      header.append(progress, bar);
    }

    const badges = document.createElement("ul");
    badges.className = "badges";
    for (const [badge, count] of Object.entries(profile.badges)) {
      const item = document.createElement("li");
      item.textContent = count > 1 ? `${badge} x${count}` : badge;
      badges.append(item);
    }
    header.append(badges);
    root.append(header);

    if (profile.levelBasis) {
      const grants = await fetchAchievements(config);
      const chartSection = document.createElement("section");
      chartSection.className = "experience-chart";
      chartSection.append(renderChart(cumulativeByDay(grants, profile.levelBasis)));
      root.append(chartSection);
    }

    const pointType = profile.levelBasis ?? "XP";
    const [globalRanking, neighborhood] = await Promise.all([
      fetchGlobalRanking(config, pointType, 10),
      fetchNeighborhoodRanking(config, pointType, 1),
    ]);
    root.append(rankingTable("All players", globalRanking, config.playerId));
    root.append(rankingTable("Around you", neighborhood, config.playerId));
  });
}
