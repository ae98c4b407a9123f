import datetime as dt
import random

import pytest

from gamify import model as M
from gamify import social as S
from gamify.errors import (
    AlreadyFriends,
    EventValidationError,
    InvalidPeriod,
    SelfFriendship,
    UnknownAchievementType,
    UnknownPlayer,
)
from gamify.rules import AchievementGrant

UTC = dt.timezone.utc
NOW = dt.datetime(2021, 4, 15, 12, 0, tzinfo=UTC)


def registry_with_players(*player_ids):
    reg = M.Registry()
    reg.define_achievement_type(M.AchievementType("XP", M.POINTS, is_level_basis=True))
    for pid in player_ids:
        reg.define_player(M.Player(pid))
    return reg


def grant(player, amount, at, gid=1, atype="XP"):
    return AchievementGrant(
        id=gid, player_id=player, achievement_type=atype, amount=amount,
        message="", triggering_event_id=f"e{gid}", rule_id="r", outcome_index=0,
        granted_at=at,
    )


class TestFriendships:
    def test_symmetric(self):
        social = S.SocialState(registry_with_players("p1", "p2"))
        social.befriend("p1", "p2", NOW)
        assert social.friends_of("p1") == ["p2"]
        assert social.friends_of("p2") == ["p1"]

    def test_self_friendship_rejected(self):
        social = S.SocialState(registry_with_players("p1"))
        with pytest.raises(SelfFriendship):
            social.befriend("p1", "p1", NOW)

    def test_duplicate_rejected_either_direction(self):
        social = S.SocialState(registry_with_players("p1", "p2"))
        social.befriend("p1", "p2", NOW)
        with pytest.raises(AlreadyFriends):
            social.befriend("p2", "p1", NOW)

    def test_both_players_notified(self):
        social = S.SocialState(registry_with_players("p1", "p2"))
        social.befriend("p1", "p2", NOW)
        assert [n.player_id for n in social.notifications] == ["p1", "p2"]

    def test_unknown_player(self):
        social = S.SocialState(registry_with_players("p1"))
        with pytest.raises(UnknownPlayer):
            social.befriend("p1", "ghost", NOW)


class TestMessages:
    def test_send_and_list(self):
        social = S.SocialState(registry_with_players("p1", "p2", "p3"))
        social.send_message("p1", "p2", "hi there", NOW)
        assert [m.body for m in social.messages_for("p2")] == ["hi there"]
        assert social.messages_for("p3") == []

    def test_recipient_notified(self):
        social = S.SocialState(registry_with_players("p1", "p2"))
        social.send_message("p1", "p2", "hi", NOW)
        assert social.notifications_for("p2")[0].kind == "message"

    def test_empty_body_rejected(self):
        social = S.SocialState(registry_with_players("p1", "p2"))
        with pytest.raises(EventValidationError):
            social.send_message("p1", "p2", "", NOW)

    def test_self_message_rejected(self):
        social = S.SocialState(registry_with_players("p1"))
        with pytest.raises(EventValidationError):
            social.send_message("p1", "p1", "hi", NOW)


class TestNotifications:
    def test_mark_read_never_deletes(self):
        social = S.SocialState(registry_with_players("p1", "p2"))
        social.befriend("p1", "p2", NOW)
        count = len(social.notifications)
        social.mark_notification_read(1)
        assert len(social.notifications) == count
        assert social.notifications[0].read is True
        assert social.notifications[1].read is False


class TestQuests:
    def _social(self):
        return S.SocialState(registry_with_players("p1", "p2"))

    def test_create_open_quest_and_notify(self):
        social = self._social()
        quest = social.create_quest("p1", "p2", "XP", 50, NOW,
                                    NOW + dt.timedelta(days=30), now=NOW)
        assert social.quest_status(quest, [], NOW) == S.QUEST_OPEN
        assert social.notifications_for("p2")[0].kind == "quest"

    def test_zero_amount_achieved_immediately(self):
        social = self._social()
        quest = social.create_quest("p1", "p2", "XP", 0, NOW,
                                    NOW + dt.timedelta(days=1), now=NOW)
        assert social.quest_status(quest, [], NOW) == S.QUEST_ACHIEVED

    def test_period_end_in_past_rejected(self):
        social = self._social()
        with pytest.raises(InvalidPeriod):
            social.create_quest("p1", "p2", "XP", 10,
                                NOW - dt.timedelta(days=10),
                                NOW - dt.timedelta(days=1), now=NOW)

    def test_unknown_achievement_type(self):
        social = self._social()
        with pytest.raises(UnknownAchievementType):
            social.create_quest("p1", "p2", "GOLD", 10, NOW,
                                NOW + dt.timedelta(days=1), now=NOW)

    def test_achieved_by_grant_inside_period(self):
        social = self._social()
        quest = social.create_quest("p1", "p2", "XP", 20, NOW,
                                    NOW + dt.timedelta(days=30), now=NOW)
        grants = [grant("p2", 20, NOW + dt.timedelta(days=2))]
        assert social.quest_status(quest, grants, NOW + dt.timedelta(days=3)) == S.QUEST_ACHIEVED

    def test_grants_before_start_do_not_count(self):
        social = self._social()
        quest = social.create_quest("p1", "p2", "XP", 20, NOW,
                                    NOW + dt.timedelta(days=30), now=NOW)
        grants = [grant("p2", 20, NOW - dt.timedelta(days=1))]
        assert social.quest_status(quest, grants, NOW + dt.timedelta(days=3)) == S.QUEST_OPEN

    def test_expires_without_grants(self):
        social = self._social()
        quest = social.create_quest("p1", "p2", "XP", 20, NOW,
                                    NOW + dt.timedelta(days=30), now=NOW)
        assert social.quest_status(quest, [], NOW + dt.timedelta(days=31)) == S.QUEST_EXPIRED

    def test_achieved_before_end_stays_achieved_after(self):
        social = self._social()
        quest = social.create_quest("p1", "p2", "XP", 20, NOW,
                                    NOW + dt.timedelta(days=30), now=NOW)
        grants = [grant("p2", 20, NOW + dt.timedelta(days=2))]
        assert social.quest_status(quest, grants, NOW + dt.timedelta(days=60)) == S.QUEST_ACHIEVED

    def test_self_quest_permitted(self):
        social = self._social()
        quest = social.create_quest("p1", "p1", "XP", 5, NOW,
                                    NOW + dt.timedelta(days=5), now=NOW)
        assert quest.challenger == quest.challenged == "p1"

    def test_status_is_pure_recomputation(self):
        social = self._social()
        quest = social.create_quest("p1", "p2", "XP", 20, NOW,
                                    NOW + dt.timedelta(days=30), now=NOW)
        grants = [grant("p2", 12, NOW + dt.timedelta(days=1)),
                  grant("p2", 8, NOW + dt.timedelta(days=2), gid=2)]
        at = NOW + dt.timedelta(days=3)
        first = social.quest_status(quest, grants, at)
        assert first == social.quest_status(quest, list(reversed(grants)), at) == S.QUEST_ACHIEVED

    def test_evaluate_quests_lists_changes(self):
        social = self._social()
        social.create_quest("p1", "p2", "XP", 0, NOW, NOW + dt.timedelta(days=1), now=NOW)
        social.create_quest("p1", "p2", "XP", 99, NOW, NOW + dt.timedelta(days=1), now=NOW)
        changes = social.evaluate_quests([], NOW + dt.timedelta(hours=1))
        assert changes == [{"questId": "q1", "status": S.QUEST_ACHIEVED}]
        changes = social.evaluate_quests([], NOW + dt.timedelta(days=2))
        assert {c["questId"]: c["status"] for c in changes} == {
            "q1": S.QUEST_ACHIEVED, "q2": S.QUEST_EXPIRED,
        }


class TestRankings:
    def _setup(self):
        reg = registry_with_players("A", "B", "C")
        grants = [
            grant("A", 58, NOW, gid=1),
            grant("B", 20, NOW + dt.timedelta(hours=1), gid=2),
        ]
        return reg, grants

    def test_descending_totals(self):
        reg, grants = self._setup()
        ranking = S.global_ranking(reg, grants, "XP")
        assert [(e["player"], e["total"]) for e in ranking] == [("A", 58), ("B", 20), ("C", 0)]

    def test_limit(self):
        reg, grants = self._setup()
        assert len(S.global_ranking(reg, grants, "XP", limit=2)) == 2

    def test_tie_break_first_grant_then_id(self):
        reg = registry_with_players("A", "B", "C")
        grants = [
            grant("B", 10, NOW, gid=1),
            grant("A", 10, NOW + dt.timedelta(hours=1), gid=2),
            grant("C", 10, NOW + dt.timedelta(hours=1), gid=3),
        ]
        ranking = S.global_ranking(reg, grants, "XP")
        assert [e["player"] for e in ranking] == ["B", "A", "C"]

    def test_unknown_point_type(self):
        reg, grants = self._setup()
        with pytest.raises(UnknownAchievementType):
            S.global_ranking(reg, grants, "GOLD")

    def test_neighborhood_window(self):
        reg, grants = self._setup()
        ranking = S.neighborhood_ranking(reg, grants, "B", "XP", k=1)
        assert [e["player"] for e in ranking] == ["A", "B", "C"]
        top = S.neighborhood_ranking(reg, grants, "A", "XP", k=1)
        assert [e["player"] for e in top] == ["A", "B"]

    def test_friends_ranking_is_global_subsequence(self):
        rng = random.Random(8)
        for _ in range(20):
            players = [f"p{i}" for i in range(rng.randint(2, 6))]
            reg = registry_with_players(*players)
            social = S.SocialState(reg)
            for a in players:
                for b in players:
                    if a < b and rng.random() < 0.4:
                        social.befriend(a, b, NOW)
            grants = [
                grant(rng.choice(players), rng.randint(-5, 30),
                      NOW + dt.timedelta(hours=i), gid=i + 1)
                for i in range(rng.randint(0, 12))
            ]
            me = rng.choice(players)
            friends = S.friends_ranking(reg, social, grants, me, "XP")
            global_order = [e["player"] for e in S.global_ranking(reg, grants, "XP")]
            keep = set(social.friends_of(me)) | {me}
            assert [e["player"] for e in friends] == [p for p in global_order if p in keep]
