// Quests: list the player's quests with their server-derived status and
// submit new challenges (opponent, achievement type, amount, period).

import { createQuest, fetchGlobalRanking, fetchProfile, fetchQuests } from "../api";
import { guard } from "../banner";
import type { SiteConfig } from "../config";

export async function renderQuests(root: HTMLElement, config: SiteConfig): Promise<void> {
  root.innerHTML = "";
  await guard(root, async () => {
    const [profile, quests] = await Promise.all([fetchProfile(config), fetchQuests(config)]);

    const list = document.createElement("section");
    list.className = "quest-list";
    const heading = document.createElement("h3");
    heading.textContent = "Your quests";
    list.append(heading);
    const table = document.createElement("table");
    for (const quest of quests) {
      const row = table.insertRow();
      row.dataset.questId = quest.id;
      row.insertCell().textContent = `${quest.challenger} vs ${quest.challenged}`;
      row.insertCell().textContent =
        `${quest.goal.amount} ${quest.goal.achievementType}`;
      row.insertCell().textContent = `${quest.period.start.slice(0, 10)} to ${quest.period.end.slice(0, 10)}`;
      row.insertCell().textContent = quest.status ?? "Open";
    }
    list.append(table);
    root.append(list);

    const form = document.createElement("form");
    form.className = "quest-form";

    const opponent = document.createElement("select");
    opponent.name = "challenged";
    const ranking = await fetchGlobalRanking(config, profile.levelBasis ?? "XP");
    for (const entry of ranking) {
      const option = document.createElement("option");
      option.value = entry.player;
      option.textContent = entry.player;
      opponent.append(option);
    }

    const achievementType = document.createElement("select");
    achievementType.name = "achievementType";
    for (const typeName of Object.keys(profile.totals).sort()) {
      const option = document.createElement("option");
      option.value = typeName;
      option.textContent = typeName;
      achievementType.append(option);
    }

    const amount = document.createElement("input");
    amount.name = "amount";
    amount.type = "number";
    amount.min = "0";
    amount.value = "10";

    const start = document.createElement("input");
    start.name = "start";
    start.type = "date";
    const end = document.createElement("input");
    end.name = "end";
    end.type = "date";

    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Challenge";

    form.append(opponent, achievementType, amount, start, end, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void guard(root, async () => {
        await createQuest(
          config,
          opponent.value,
          { achievementType: achievementType.value, amount: Number(amount.value) },
          {
            start: `${start.value}T00:00:00Z`,
            end: `${end.value}T23:59:59Z`,
          },
        );
        await renderQuests(root, config);
      });
    });
    root.append(form);
  });
}
