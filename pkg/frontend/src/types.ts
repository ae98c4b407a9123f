// Mirrors of the engine's API response shapes. Pure data: every displayed
// number comes from these, never from client-side recomputation (percentage
// formatting excepted).

export interface Progress {
  points: number;
  currentLevelAt: number;
  nextLevelAt: number;
  percentToNextLevel: number;
}

export interface Profile {
  player: { id: string; name: string; joinedAt?: string };
  totals: Record<string, number>;
  level: number;
  levelBasis: string | null;
  progress: Progress | null;
  badges: Record<string, number>;
  resources: Record<string, number>;
  friends: string[];
}

export interface Grant {
  id: number;
  playerId: string;
  achievementType: string;
  amount: number;
  message: string;
  triggeringEventId: string;
  ruleId: string;
  outcomeIndex: number;
  grantedAt: string;
}

export interface RankingEntry {
  player: string;
  total: number;
  rank: number;
}

export interface Message {
  id: number;
  from: string;
  to: string;
  body: string;
  sentAt: string;
}

export interface Notification {
  id: number;
  playerId: string;
  kind: string;
  body: string;
  createdAt: string;
  read: boolean;
}

export interface Quest {
  id: string;
  challenger: string;
  challenged: string;
  goal: { achievementType: string; amount: number };
  period: { start: string; end: string };
  status?: string;
}

export interface Partition {
  communities: string[][];
  modularity: number;
  algorithm: string;
}

export interface GraphExport {
  nodes: { id: string }[];
  edges: { source: string; target: string; label: string; eventId: string; at: string }[];
}
