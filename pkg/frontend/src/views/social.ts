// Friends, Messages, and Notifications views.

import {
  addFriend,
  fetchFriends,
  fetchMessages,
  fetchNotifications,
  markNotificationRead,
  sendMessage,
} from "../api";
import { guard } from "../banner";
import type { SiteConfig } from "../config";

export async function renderFriends(root: HTMLElement, config: SiteConfig): Promise<void> {
  root.innerHTML = "";
  await guard(root, async () => {
    const friends = await fetchFriends(config);
    const list = document.createElement("ul");
    list.className = "friends";
    for (const friend of friends) {
      const item = document.createElement("li");
      item.textContent = friend;
      list.append(item);
    }
    root.append(list);

    const form = document.createElement("form");
    form.className = "friend-form";
    const who = document.createElement("input");
    who.name = "player";
    who.placeholder = "player id";
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Add friend";
    form.append(who, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void guard(root, async () => {
        await addFriend(config, who.value);
        await renderFriends(root, config);
      });
    });
    root.append(form);
  });
}

export async function renderMessages(root: HTMLElement, config: SiteConfig): Promise<void> {
  root.innerHTML = "";
  await guard(root, async () => {
    const messages = await fetchMessages(config);
    const list = document.createElement("ul");
    list.className = "messages";
    for (const message of messages) {
      const item = document.createElement("li");
      item.textContent = `${message.from} -> ${message.to}: ${message.body}`;
      list.append(item);
    }
    root.append(list);

    const form = document.createElement("form");
    form.className = "message-form";
    const to = document.createElement("input");
    to.name = "to";
    to.placeholder = "recipient";
    const body = document.createElement("input");
    body.name = "body";
    body.placeholder = "message";
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Send";
    form.append(to, body, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void guard(root, async () => {
        await sendMessage(config, to.value, body.value);
        await renderMessages(root, config);
      });
    });
    root.append(form);
  });
}

export async function renderNotifications(root: HTMLElement, config: SiteConfig): Promise<void> {
  root.innerHTML = "";
  await guard(root, async () => {
    const notifications = await fetchNotifications(config);
    const list = document.createElement("ul");
    list.className = "notifications";
    for (const notification of notifications) {
      const item = document.createElement("li");
      item.className = notification.read ? "read" : "unread";
      item.textContent = `[${notification.kind}] ${notification.body}`;
      if (!notification.read) {
        const button = document.createElement("button");
        button.textContent = "mark read";
        button.addEventListener("click", () => {
          void guard(root, async () => {
            await markNotificationRead(config, notification.id);
            await renderNotifications(root, config);
          });
        });
        item.append(button);
      }
      list.append(item);
    }
    root.append(list);
  });
}
