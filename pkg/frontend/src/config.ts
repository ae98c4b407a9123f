// Site configuration: where the engine lives and who the player is.
// Resolution order: explicit overrides (tests), URL query parameters
// (?api=...&token=...&player=...), then localStorage.

export interface SiteConfig {
  baseUrl: string;
  playerId: string;
  playerToken: string;
  pollMs: number;
}

const STORAGE_KEY = "gamify-site-config";

export function loadConfig(overrides: Partial<SiteConfig> = {}): SiteConfig {
  let stored: Partial<SiteConfig> = {};
  try {
    stored = JSON.parse(window.localStorage.getItem(STORAGE_KEY) ?? "{}");
  } catch {
    stored = {};
  }
  const params = new URLSearchParams(window.location.search);
  const config: SiteConfig = {
    baseUrl: overrides.baseUrl ?? params.get("api") ?? stored.baseUrl ?? "",
    playerId: overrides.playerId ?? params.get("player") ?? stored.playerId ?? "",
    playerToken: overrides.playerToken ?? params.get("token") ?? stored.playerToken ?? "",
    pollMs: overrides.pollMs ?? stored.pollMs ?? 15000,
  };
  return config;
}

export function saveConfig(config: SiteConfig): void {
  window.localStorage.setItem(STORAGE_KEY, JSON.stringify(config));
}
