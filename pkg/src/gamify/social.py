"""Friendships, messaging, notifications, quests, and rankings.

Friendship is mutual and immediate (no request/accept handshake).  Quest
status is never stored: it is derived from the quest, the grant log, and the
clock, so recomputation from scratch always matches incremental reads.
Rankings order by descending total, then earlier first grant of the ranked
type, then player id; they include every registered player.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import (
    AlreadyFriends,
    EventValidationError,
    InvalidPeriod,
    SelfFriendship,
)
from .model import Registry
from .rules import AchievementGrant
from .timeutil import format_utc

QUEST_OPEN = "Open"
QUEST_ACHIEVED = "Achieved"
QUEST_EXPIRED = "Expired"


@dataclass
class Friendship:
    a: str
    b: str
    created_at: dt.datetime

    def pair(self) -> frozenset:
        return frozenset((self.a, self.b))

    def to_dict(self) -> dict:
        return {"players": sorted((self.a, self.b)), "createdAt": format_utc(self.created_at)}


@dataclass
class Message:
    id: int
    sender: str
    recipient: str
    body: str
    sent_at: dt.datetime

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "from": self.sender,
            "to": self.recipient,
            "body": self.body,
            "sentAt": format_utc(self.sent_at),
        }


@dataclass
class Quest:
    id: str
    challenger: str
    challenged: str
    achievement_type: str
    amount: int
    start: dt.datetime
    end: dt.datetime

    def to_dict(self, status: Optional[str] = None) -> dict:
        out = {
            "id": self.id,
            "challenger": self.challenger,
            "challenged": self.challenged,
            "goal": {"achievementType": self.achievement_type, "amount": self.amount},
            "period": {"start": format_utc(self.start), "end": format_utc(self.end)},
        }
        if status is not None:
            out["status"] = status
        return out


@dataclass
class Notification:
    id: int
    player_id: str
    kind: str
    body: str
    created_at: dt.datetime
    read: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "playerId": self.player_id,
            "kind": self.kind,
            "body": self.body,
            "createdAt": format_utc(self.created_at),
            "read": self.read,
        }


class SocialState:
    """Social graph, messages, quests, and the append-only notification feed."""

    def __init__(self, registry: Registry):
        self.registry = registry
        self.friendships: dict[frozenset, Friendship] = {}
        self.messages: list[Message] = []
        self.quests: dict[str, Quest] = {}
        self.notifications: list[Notification] = []

    # -- friendships --------------------------------------------------------

    def befriend(self, a: str, b: str, at: dt.datetime) -> Friendship:
        self.registry.require_player(a)
        self.registry.require_player(b)
        if a == b:
            raise SelfFriendship(f"player {a} cannot befriend themselves")
        pair = frozenset((a, b))
        if pair in self.friendships:
            raise AlreadyFriends(f"{a} and {b} are already friends")
        friendship = Friendship(a=a, b=b, created_at=at)
        self.friendships[pair] = friendship
        self._notify(a, "friendship", f"You are now friends with {b}.", at)
        self._notify(b, "friendship", f"You are now friends with {a}.", at)
        return friendship

    def friends_of(self, player_id: str) -> list[str]:
        self.registry.require_player(player_id)
        friends = set()
        for pair in self.friendships:
            if player_id in pair:
                friends |= pair - {player_id}
        return sorted(friends)

    # -- messages -----------------------------------------------------------

    def send_message(self, sender: str, recipient: str, body: str, at: dt.datetime) -> Message:
        self.registry.require_player(sender)
        self.registry.require_player(recipient)
        if sender == recipient:
            raise EventValidationError("message sender and recipient must differ")
        if not body:
            raise EventValidationError("message body is empty")
        message = Message(id=len(self.messages) + 1, sender=sender,
                          recipient=recipient, body=body, sent_at=at)
        self.messages.append(message)
        self._notify(recipient, "message", f"New message from {sender}.", at)
        return message

    def messages_for(self, player_id: str) -> list[Message]:
        self.registry.require_player(player_id)
        return [m for m in self.messages if player_id in (m.sender, m.recipient)]

    # -- notifications --------------------------------------------------------

    def _notify(self, player_id: str, kind: str, body: str, at: dt.datetime) -> Notification:
        notification = Notification(
            id=len(self.notifications) + 1,
            player_id=player_id, kind=kind, body=body, created_at=at,
        )
        self.notifications.append(notification)
        return notification

    def notifications_for(self, player_id: str) -> list[Notification]:
        self.registry.require_player(player_id)
        return [n for n in self.notifications if n.player_id == player_id]

    def mark_notification_read(self, notification_id: int) -> None:
        for notification in self.notifications:
            if notification.id == notification_id:
                notification.read = True
                return
        raise EventValidationError(f"unknown notification {notification_id}")

    # -- quests ----------------------------------------------------------------

    def create_quest(self, challenger: str, challenged: str, achievement_type: str,
                     amount: int, start: dt.datetime, end: dt.datetime,
                     now: dt.datetime) -> Quest:
        self.registry.require_player(challenger)
        self.registry.require_player(challenged)
        self.registry.require_achievement_type(achievement_type)
        if end <= start:
            raise InvalidPeriod("quest period end must be after start")
        if end <= now:
            raise InvalidPeriod("quest period ends in the past")
        if amount < 0:
            raise EventValidationError("quest goal amount must be >= 0")
        quest = Quest(
            id=f"q{len(self.quests) + 1}",
            challenger=challenger, challenged=challenged,
            achievement_type=achievement_type, amount=int(amount),
            start=start, end=end,
        )
        self.quests[quest.id] = quest
        self._notify(challenged, "quest",
                     f"{challenger} challenged you: earn {amount} {achievement_type}.", now)
        return quest

    def quest_status(self, quest: Quest, grants: Iterable[AchievementGrant],
                     now: dt.datetime) -> str:
        """Derived status: a pure function of (quest, grant log, now)."""
        horizon = min(now, quest.end)
        earned = sum(
            g.amount for g in grants
            if g.player_id == quest.challenged
            and g.achievement_type == quest.achievement_type
            and quest.start <= g.granted_at <= horizon
        )
        if earned >= quest.amount:
            return QUEST_ACHIEVED
        if now > quest.end:
            return QUEST_EXPIRED
        return QUEST_OPEN

    def evaluate_quests(self, grants: Iterable[AchievementGrant],
                        now: dt.datetime) -> list[dict]:
        """Status changes: every quest whose derived status left Open."""
        grants = list(grants)
        changes = []
        for quest_id in sorted(self.quests):
            status = self.quest_status(self.quests[quest_id], grants, now)
            if status != QUEST_OPEN:
                changes.append({"questId": quest_id, "status": status})
        return changes

    def quests_for(self, player_id: str, grants: Iterable[AchievementGrant],
                   now: dt.datetime) -> list[dict]:
        self.registry.require_player(player_id)
        grants = list(grants)
        return [
            q.to_dict(status=self.quest_status(q, grants, now))
            for q in self.quests.values()
            if player_id in (q.challenger, q.challenged)
        ]


# --- rankings ---------------------------------------------------------------------

def global_ranking(registry: Registry, grants: Iterable[AchievementGrant],
                   point_type: str, limit: Optional[int] = None) -> list[dict]:
    registry.require_achievement_type(point_type)
    totals: dict[str, int] = {p: 0 for p in registry.players}
    first_grant: dict[str, dt.datetime] = {}
    for g in grants:
        if g.achievement_type != point_type or g.player_id not in totals:
            continue
        totals[g.player_id] += g.amount
        if g.player_id not in first_grant or g.granted_at < first_grant[g.player_id]:
            first_grant[g.player_id] = g.granted_at

    far_future = dt.datetime.max.replace(tzinfo=dt.timezone.utc)
    ordered = sorted(
        totals,
        key=lambda p: (-totals[p], first_grant.get(p, far_future), p),
    )
    ranking = [{"player": p, "total": totals[p], "rank": i + 1}
               for i, p in enumerate(ordered)]
    return ranking[:limit] if limit is not None else ranking


def friends_ranking(registry: Registry, social: SocialState,
                    grants: Iterable[AchievementGrant], player_id: str,
                    point_type: str) -> list[dict]:
    keep = set(social.friends_of(player_id)) | {player_id}
    return [entry for entry in global_ranking(registry, list(grants), point_type)
            if entry["player"] in keep]


def neighborhood_ranking(registry: Registry, grants: Iterable[AchievementGrant],
                         player_id: str, point_type: str, k: int = 1) -> list[dict]:
    """The player plus up to ``k`` players immediately above and below."""
    registry.require_player(player_id)
    ranking = global_ranking(registry, list(grants), point_type)
    index = next(i for i, entry in enumerate(ranking) if entry["player"] == player_id)
    return ranking[max(0, index - k): index + k + 1]
