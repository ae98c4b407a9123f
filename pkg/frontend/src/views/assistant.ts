// Assistant: a chat pane round-tripping each input through the engine.

import { askAssistant } from "../api";
import { guard } from "../banner";
import type { SiteConfig } from "../config";

export function renderAssistant(root: HTMLElement, config: SiteConfig): void {
  root.innerHTML = "";
  const pane = document.createElement("div");
  pane.className = "chat-pane";
  const log = document.createElement("ul");
  log.className = "chat-log";
  pane.append(log);

  const form = document.createElement("form");
  form.className = "chat-form";
  const input = document.createElement("input");
  input.name = "text";
  input.placeholder = "Ask about points, levels, quests...";
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Ask";
  form.append(input, submit);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text) return;
    const mine = document.createElement("li");
    mine.className = "chat-me";
    mine.textContent = text;
    log.append(mine);
    input.value = "";
    void guard(root, async () => {
      const reply = await askAssistant(config, text);
      const theirs = document.createElement("li");
      theirs.className = "chat-assistant";
      theirs.textContent = reply;
      log.append(theirs);
    });
  });

  pane.append(form);
  root.append(pane);
}
