// Entry point: navigation between views plus a polling refresh of the
// currently visible one.

import { loadConfig, saveConfig, type SiteConfig } from "./config";
import { renderAssistant } from "./views/assistant";
import { renderCommunitiesView } from "./views/communities";
import { renderHome } from "./views/home";
import { renderQuests } from "./views/quests";
import { renderFriends, renderMessages, renderNotifications } from "./views/social";

type ViewName =
  | "home" | "friends" | "messages" | "notifications"
  | "quests" | "communities" | "assistant";

const VIEWS: Record<ViewName, (root: HTMLElement, config: SiteConfig) => unknown> = {
  home: renderHome,
  friends: renderFriends,
  messages: renderMessages,
  notifications: renderNotifications,
  quests: renderQuests,
  communities: renderCommunitiesView,
  assistant: renderAssistant,
};

export function boot(root: HTMLElement, overrides: Partial<SiteConfig> = {}): void {
  const config = loadConfig(overrides);
  saveConfig(config);

  const nav = document.createElement("nav");
  const stage = document.createElement("main");
  stage.id = "stage";
  root.append(nav, stage);

  let active: ViewName = "home";
  let timer: ReturnType<typeof setInterval> | undefined;

  const show = (view: ViewName) => {
    active = view;
    for (const button of nav.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.view === view);
    }
    void VIEWS[view](stage, config);
    if (timer !== undefined) clearInterval(timer);
    if (view !== "assistant" && config.pollMs > 0) {
      timer = setInterval(() => void VIEWS[active](stage, config), config.pollMs);
    }
  };

  for (const view of Object.keys(VIEWS) as ViewName[]) {
    const button = document.createElement("button");
    button.dataset.view = view;
    button.textContent = view[0].toUpperCase() + view.slice(1);
    button.addEventListener("click", () => show(view));
    nav.append(button);
  }
  show("home");
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document.getElementById("app") as HTMLElement);
}
