// Thin typed client over the engine API. All persistence flows through these
// documented endpoints; errors carry the server's machine-readable code.

import type { SiteConfig } from "./config";
import type {
  GraphExport,
  Grant,
  Message,
  Notification,
  Partition,
  Profile,
  Quest,
  RankingEntry,
} from "./types";

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

async function request<T>(config: SiteConfig, path: string, init: RequestInit = {}): Promise<T> {
  const headers: Record<string, string> = {
    "X-Player-Token": config.playerToken,
    ...(init.body ? { "Content-Type": "application/json" } : {}),
  };
  const response = await fetch(`${config.baseUrl}${path}`, { ...init, headers });
  if (!response.ok) {
    let code = "http_error";
    let message = `request failed with status ${response.status}`;
    try {
      const body = await response.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep defaults
    }
    throw new ApiError(code, message, response.status);
  }
  return (await response.json()) as T;
}

export function fetchProfile(config: SiteConfig): Promise<Profile> {
  return request(config, `/api/players/${config.playerId}/profile`);
}

export async function fetchAchievements(config: SiteConfig): Promise<Grant[]> {
  const body = await request<{ grants: Grant[] }>(
    config, `/api/players/${config.playerId}/achievements`);
  return body.grants;
}

export async function fetchGlobalRanking(
  config: SiteConfig, pointType: string, limit?: number): Promise<RankingEntry[]> {
  const params = new URLSearchParams({ pointType });
  if (limit !== undefined) params.set("limit", String(limit));
  const body = await request<{ ranking: RankingEntry[] }>(
    config, `/api/rankings/global?${params}`);
  return body.ranking;
}

export async function fetchNeighborhoodRanking(
  config: SiteConfig, pointType: string, k = 1): Promise<RankingEntry[]> {
  const params = new URLSearchParams({ player: config.playerId, pointType, k: String(k) });
  const body = await request<{ ranking: RankingEntry[] }>(
    config, `/api/rankings/neighborhood?${params}`);
  return body.ranking;
}

export async function fetchFriends(config: SiteConfig): Promise<string[]> {
  const body = await request<{ friends: string[] }>(
    config, `/api/players/${config.playerId}/friends`);
  return body.friends;
}

export function addFriend(config: SiteConfig, player: string): Promise<unknown> {
  return request(config, `/api/players/${config.playerId}/friends`, {
    method: "POST",
    body: JSON.stringify({ player }),
  });
}

export async function fetchMessages(config: SiteConfig): Promise<Message[]> {
  const body = await request<{ messages: Message[] }>(
    config, `/api/players/${config.playerId}/messages`);
  return body.messages;
}

export function sendMessage(config: SiteConfig, to: string, text: string): Promise<unknown> {
  return request(config, `/api/players/${config.playerId}/messages`, {
    method: "POST",
    body: JSON.stringify({ to, body: text }),
  });
}

export async function fetchNotifications(config: SiteConfig): Promise<Notification[]> {
  const body = await request<{ notifications: Notification[] }>(
    config, `/api/players/${config.playerId}/notifications`);
  return body.notifications;
}

export function markNotificationRead(config: SiteConfig, id: number): Promise<unknown> {
  return request(config, `/api/players/${config.playerId}/notifications/${id}/read`, {
    method: "POST",
    body: JSON.stringify({}),
  });
}

export async function fetchQuests(config: SiteConfig): Promise<Quest[]> {
  const body = await request<{ quests: Quest[] }>(
    config, `/api/players/${config.playerId}/quests`);
  return body.quests;
}

export function createQuest(
  config: SiteConfig,
  challenged: string,
  goal: { achievementType: string; amount: number },
  period: { start: string; end: string },
): Promise<Quest> {
  return request(config, `/api/players/${config.playerId}/quests`, {
    method: "POST",
    body: JSON.stringify({ challenged, goal, period }),
  });
}

export function fetchCommunities(config: SiteConfig, algorithm = "louvain"): Promise<Partition> {
  return request(config, `/api/analysis/communities?algorithm=${algorithm}`);
}

export function fetchGraphExport(config: SiteConfig): Promise<GraphExport> {
  return request(config, `/api/graph/export`);
}

export async function askAssistant(config: SiteConfig, text: string): Promise<string> {
  const body = await request<{ reply: string }>(
    config, `/api/assistant/${config.playerId}/messages`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  return body.reply;
}
