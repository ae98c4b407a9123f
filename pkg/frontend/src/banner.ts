// Non-blocking error banners: API failures surface here with the server's
// machine-readable code and never take a view down.

import { ApiError } from "./api";

export function showError(root: HTMLElement, err: unknown): void {
  let host = root.querySelector<HTMLElement>(".banners");
  if (!host) {
    host = document.createElement("div");
    host.className = "banners";
    root.prepend(host);
  }
  const banner = document.createElement("div");
  banner.className = "banner banner-error";
  const code = err instanceof ApiError ? err.code : "client_error";
  const message = err instanceof Error ? err.message : String(err);
  banner.dataset.code = code;
  banner.textContent = `[${code}] ${message}`;
  const dismiss = document.createElement("button");
  dismiss.textContent = "x";
  dismiss.addEventListener("click", () => banner.remove());
  banner.append(dismiss);
  host.append(banner);
}

export async function guard<T>(root: HTMLElement, work: () => Promise<T>): Promise<T | undefined> {
  try {
    return await work();
  } catch (err) {
    showError(root, err);
    return undefined;
  }
}
