"""The engine: one object folding the append-only log into registries, rule
state, social state, and sentiment state, guarded by a single writer lock.

Every mutation follows the same path: validate and apply against in-memory
state, append the record to the log, then acknowledge.  Recovery loads the
newest snapshot (if any) and replays the log tail through the same apply
code, so a recovered engine answers every read identically to one that never
stopped.  Reads take the lock briefly and only ever see fully applied
records.
"""

from __future__ import annotations

import datetime as dt
import logging
import threading
import uuid
from pathlib import Path
from typing import Callable, Optional

from . import assistant, customize, graph, model, rules, sentiment, social, store
from .errors import EventValidationError, GamifyError
from .timeutil import format_utc, parse_utc, utc_now

logger = logging.getLogger(__name__)

DEFAULT_BRAIN = Path(__file__).parent / "data" / "help.aiml"


class Engine:
    def __init__(
        self,
        data_dir: Path,
        clock: Callable[[], dt.datetime] = utc_now,
        fsync: bool = True,
        brain_files: Optional[list[Path]] = None,
        classifier: str = "lexicon",
        assistant_fallback: str = assistant.DEFAULT_FALLBACK,
    ):
        self.data_dir = Path(data_dir)
        self.clock = clock
        self.lock = threading.RLock()
        self.brain = assistant.load(brain_files or [DEFAULT_BRAIN],
                                    fallback=assistant_fallback)
        self.classifier_name = classifier
        self.recovery_warnings: list[str] = []
        self._halted = False

        self._reset_state()
        self._log = store.EventLog(self.data_dir, fsync=fsync)
        self._recover()

    def _reset_state(self) -> None:
        self.registry = model.Registry()
        self.rule_engine = rules.RuleEngine(self.registry)
        self.social = social.SocialState(self.registry)
        self.sentiment = sentiment.SentimentLog(
            classifier=sentiment.get_classifier(self.classifier_name)
        )
        self.customize = customize.CustomizeState()
        self.first_event_at: dict[str, dt.datetime] = {}
        self.seq = 0

    # -- recovery -------------------------------------------------------------

    def _recover(self) -> None:
        records, warnings = self._log.read_all()
        self.recovery_warnings = warnings
        if warnings:
            # physically drop the torn tail so future appends start clean
            self._log.truncate_to(len(records))

        snapshot = store.load_latest_snapshot(self.data_dir)
        start = 0
        if snapshot is not None:
            snap_seq, state = snapshot
            if snap_seq <= len(records):
                self._restore_state(state)
                self.seq = snap_seq
                start = snap_seq
            else:
                logger.warning(
                    "snapshot covers %d records but log has %d; rebuilding from log",
                    snap_seq, len(records),
                )
        for record in records[start:]:
            self._apply(record)
            self.seq = record["seq"]

    def close(self) -> None:
        self._log.close()

    def now(self) -> dt.datetime:
        return self.clock()

    # -- the single-writer commit path ------------------------------------------

    def _commit(self, kind: str, data: dict):
        """Apply a new mutation and make it durable; returns the apply result.

        If the log append itself fails, in-memory state is ahead of the
        durable log, so the engine halts (fail-stop): recovery from the log
        is then the only safe path.
        """
        with self.lock:
            if self._halted:
                raise GamifyError("engine halted after a log write failure; restart to recover")
            record = {
                "seq": self.seq + 1,
                "at": format_utc(self.now()),
                "kind": kind,
                "data": data,
            }
            result = self._apply(record)
            try:
                self._log.append(record)
            except OSError as err:
                self._halted = True
                logger.critical("log append failed at seq %d: %s", record["seq"], err)
                raise GamifyError(f"log write failed: {err}") from err
            self.seq = record["seq"]
            return result

    def _apply(self, record: dict):
        kind = record["kind"]
        data = record["data"]
        at = parse_utc(record["at"])
        if kind == "behavior_type":
            return self.registry.define_behavior_type(model.BehaviorTypeDef.from_dict(data))
        if kind == "achievement_type":
            return self.registry.define_achievement_type(model.AchievementType.from_dict(data))
        if kind == "level_policy":
            return self.registry.set_level_policy(model.LevelPolicy.from_dict(data))
        if kind == "game":
            return self.registry.define_game(model.Game(id=data.get("id", ""),
                                                        name=data.get("name", "")))
        if kind == "project":
            return self.registry.define_project(model.Project(
                id=data.get("id", ""), name=data.get("name", ""),
                active_game_ids=set(data.get("activeGameIds", [])),
            ))
        if kind == "tool":
            return self.registry.define_tool(model.Tool(
                id=data.get("id", ""), name=data.get("name", ""),
                secret=data.get("secret", ""),
            ))
        if kind == "player":
            joined = parse_utc(data["joinedAt"]) if data.get("joinedAt") else at
            return self.registry.define_player(model.Player(
                id=data.get("id", ""), name=data.get("name", ""),
                joined_at=joined, token=data.get("token", ""),
            ))
        if kind == "rule":
            return self.rule_engine.define_rule(rules.GameRule.from_dict(data))
        if kind == "customization_rule":
            return self.customize.define(customize.CustomizationRule.from_dict(data))
        if kind == "event":
            event = self.registry.validate_event(data)
            grants = self.rule_engine.evaluate_event(event)
            if event.player not in self.first_event_at:
                self.first_event_at[event.player] = event.occurred_at
            return grants
        if kind == "friendship":
            return self.social.befriend(data["a"], data["b"], at)
        if kind == "message":
            message = self.social.send_message(data["from"], data["to"], data["body"], at)
            self.sentiment.record(data["from"], data["body"], at)
            return message
        if kind == "quest":
            return self.social.create_quest(
                challenger=data["challenger"], challenged=data["challenged"],
                achievement_type=data["goal"]["achievementType"],
                amount=int(data["goal"]["amount"]),
                start=parse_utc(data["period"]["start"]),
                end=parse_utc(data["period"]["end"]),
                now=at,
            )
        if kind == "notification_read":
            return self.social.mark_notification_read(int(data["id"]))
        if kind == "assistant_message":
            return self.sentiment.record(data["playerId"], data["text"], at)
        raise GamifyError(f"unknown log record kind {kind!r}")

    # -- mutations ----------------------------------------------------------------

    def define_behavior_type(self, data: dict) -> dict:
        return self._commit("behavior_type", dict(data)).to_dict()

    def define_achievement_type(self, data: dict) -> dict:
        return self._commit("achievement_type", dict(data)).to_dict()

    def set_level_policy(self, data: dict) -> dict:
        return self._commit("level_policy", dict(data)).to_dict()

    def define_game(self, data: dict) -> dict:
        return self._commit("game", dict(data)).to_dict()

    def define_project(self, data: dict) -> dict:
        return self._commit("project", dict(data)).to_dict()

    def define_tool(self, data: dict) -> dict:
        data = dict(data)
        if not data.get("secret"):
            data["secret"] = uuid.uuid4().hex
        return self._commit("tool", data).to_dict(include_secret=True)

    def define_player(self, data: dict) -> dict:
        data = dict(data)
        if not data.get("token"):
            data["token"] = uuid.uuid4().hex
        return self._commit("player", data).to_dict(include_token=True)

    def define_rule(self, data: dict) -> dict:
        return self._commit("rule", dict(data)).to_dict()

    def define_customization_rule(self, data: dict) -> dict:
        return self._commit("customization_rule", dict(data)).to_dict()

    def ingest_event(self, data: dict) -> dict:
        """Validate and evaluate one behavior event.

        Duplicate event ids are idempotent: the previously produced grants
        come back with a replay marker and nothing is logged or re-applied.
        """
        with self.lock:
            event_id = data.get("eventId")
            previous = self.rule_engine.grants_for_event(event_id) if event_id else None
            if previous is not None:
                return {"grants": [g.to_dict() for g in previous], "replay": True}
            self.registry.validate_event(data)  # reject before logging
            grants = self._commit("event", dict(data))
            return {"grants": [g.to_dict() for g in grants], "replay": False}

    def befriend(self, a: str, b: str) -> dict:
        return self._commit("friendship", {"a": a, "b": b}).to_dict()

    def send_message(self, sender: str, recipient: str, body: str) -> dict:
        return self._commit("message", {"from": sender, "to": recipient, "body": body}).to_dict()

    def create_quest(self, challenger: str, challenged: str, goal: dict, period: dict) -> dict:
        data = {
            "challenger": challenger,
            "challenged": challenged,
            "goal": {"achievementType": goal.get("achievementType", ""),
                     "amount": int(goal.get("amount", 0))},
            "period": {"start": period.get("start", ""), "end": period.get("end", "")},
        }
        quest = self._commit("quest", data)
        with self.lock:
            status = self.social.quest_status(quest, self.rule_engine.grants, self.now())
        return quest.to_dict(status=status)

    def mark_notification_read(self, notification_id: int) -> None:
        self._commit("notification_read", {"id": int(notification_id)})

    def assistant_message(self, player_id: str, text: str) -> dict:
        with self.lock:
            self.registry.require_player(player_id)
            if not isinstance(text, str) or not text.strip():
                raise EventValidationError("assistant message text is empty")
            self._commit("assistant_message", {"playerId": player_id, "text": text})
            return {"reply": assistant.respond(self.brain, text)}

    # -- reads ------------------------------------------------------------------------

    def profile(self, player_id: str) -> dict:
        with self.lock:
            player = self.registry.require_player(player_id)
            totals_and_level = self.rule_engine.player_totals(player_id)
            totals = totals_and_level["totals"]
            level = totals_and_level["level"]
            basis = self.registry.level_basis_type()
            policy = self.registry.level_policy

            points = totals.get(basis.identifier, 0) if basis else 0
            progress = None
            if basis is not None and policy is not None:
                lower = model.level_threshold(policy, level) if level >= 1 else 0
                upper = model.level_threshold(policy, level + 1)
                fraction = (points - lower) / (upper - lower)
                progress = {
                    "points": points,
                    "currentLevelAt": lower,
                    "nextLevelAt": upper,
                    "percentToNextLevel": round(max(0.0, min(1.0, fraction)) * 100.0, 2),
                }

            badges = {}
            resources = {}
            for ident, total in totals.items():
                klass = self.registry.achievement_types[ident].achievement_class
                if klass == model.BADGE and total:
                    badges[ident] = total
                elif klass == model.RESOURCE and total:
                    resources[ident] = total
            return {
                "player": player.to_dict(),
                "totals": totals,
                "level": level,
                "levelBasis": basis.identifier if basis else None,
                "progress": progress,
                "badges": badges,
                "resources": resources,
                "friends": self.social.friends_of(player_id),
            }

    def achievements(self, player_id: str) -> list[dict]:
        with self.lock:
            self.registry.require_player(player_id)
            return [g.to_dict() for g in self.rule_engine.grants if g.player_id == player_id]

    def grants_export(self) -> list[dict]:
        with self.lock:
            return [g.to_dict() for g in self.rule_engine.grants]

    def player_totals(self, player_id: str) -> dict:
        with self.lock:
            return self.rule_engine.player_totals(player_id)

    def customization(self, player_id: str, now: Optional[dt.datetime] = None) -> dict:
        with self.lock:
            self.registry.require_player(player_id)
            now = now or self.now()
            g = self._graph()
            deg = graph.degrees(g, player_id)
            basis = self.registry.level_basis_type()
            totals_and_level = self.rule_engine.player_totals(player_id)
            bindings: dict = {
                "Date": now.date(),
                "Points": float(totals_and_level["totals"].get(basis.identifier, 0)) if basis else 0.0,
                "Level": float(totals_and_level["level"]),
                "Followers": float(deg["followers"]),
                "Following": float(deg["following"]),
                "Polarity": self.sentiment.rolling_polarity(player_id, now),
            }
            if player_id in self.first_event_at:
                bindings["firstBehaviorDate"] = self.first_event_at[player_id].date()
            return self.customize.evaluate(bindings)

    def ranking_global(self, point_type: str, limit: Optional[int] = None) -> list[dict]:
        with self.lock:
            return social.global_ranking(self.registry, self.rule_engine.grants,
                                         point_type, limit)

    def ranking_friends(self, player_id: str, point_type: str) -> list[dict]:
        with self.lock:
            return social.friends_ranking(self.registry, self.social,
                                          self.rule_engine.grants, player_id, point_type)

    def ranking_neighborhood(self, player_id: str, point_type: str, k: int = 1) -> list[dict]:
        with self.lock:
            return social.neighborhood_ranking(self.registry, self.rule_engine.grants,
                                               player_id, point_type, k)

    def _graph(self, labels=None, time_range=None, project=None) -> graph.InteractionGraph:
        return graph.build_graph(self.registry.players, self.rule_engine.events,
                                 labels=labels, time_range=time_range, project=project)

    def graph_export(self, labels=None, project=None) -> dict:
        with self.lock:
            return self._graph(labels=labels, project=project).to_dict()

    def communities(self, algorithm: str = "louvain", labels=None, project=None,
                    target_communities: Optional[int] = None) -> dict:
        with self.lock:
            g = self._graph(labels=labels, project=project)
            if algorithm == "louvain":
                partition = graph.louvain(g)
            elif algorithm in ("girvan-newman", "girvan_newman"):
                partition = graph.girvan_newman(g, target_communities=target_communities)
            else:
                raise EventValidationError(
                    f"unknown community algorithm {algorithm!r}; use louvain or girvan-newman"
                )
            out = partition.to_dict()
            out["algorithm"] = "louvain" if algorithm == "louvain" else "girvan-newman"
            return out

    def scc(self) -> dict:
        with self.lock:
            return {"components": graph.tarjan_scc(self._graph())}

    def maxflow(self, source: str, sink: str) -> dict:
        with self.lock:
            result = graph.edmonds_karp(self._graph(), source, sink)
            return {"maxFlow": result["maxFlow"],
                    "minCut": [list(pair) for pair in result["minCut"]]}

    def degrees(self, player_id: str) -> dict:
        with self.lock:
            return graph.degrees(self._graph(), player_id)

    def notifications(self, player_id: str) -> list[dict]:
        with self.lock:
            return [n.to_dict() for n in self.social.notifications_for(player_id)]

    def messages(self, player_id: str) -> list[dict]:
        with self.lock:
            return [m.to_dict() for m in self.social.messages_for(player_id)]

    def quests(self, player_id: str, now: Optional[dt.datetime] = None) -> list[dict]:
        with self.lock:
            return self.social.quests_for(player_id, self.rule_engine.grants,
                                          now or self.now())

    def evaluate_quests(self, now: Optional[dt.datetime] = None) -> list[dict]:
        with self.lock:
            return self.social.evaluate_quests(self.rule_engine.grants, now or self.now())

    def sentiment_texts(self, player_id: str) -> list[dict]:
        with self.lock:
            self.registry.require_player(player_id)
            return [t.to_dict() for t in self.sentiment.texts_for(player_id)]

    def classify_text(self, text: str) -> dict:
        return self.sentiment.classifier(text).to_dict()

    def find_player_by_token(self, token: str) -> Optional[str]:
        if not token:
            return None
        with self.lock:
            for player in self.registry.players.values():
                if player.token and player.token == token:
                    return player.id
        return None

    def check_tool_credentials(self, tool_id: str, secret: str) -> bool:
        with self.lock:
            tool = self.registry.tools.get(tool_id)
            return tool is not None and bool(secret) and tool.secret == secret

    # -- snapshots ----------------------------------------------------------------------

    def snapshot(self) -> Path:
        with self.lock:
            path = store.save_snapshot(self.data_dir, self.seq, self._state_dict())
            logger.info("snapshot written: %s", path.name)
            return path

    def _state_dict(self) -> dict:
        reg = self.registry
        re_ = self.rule_engine
        return {
            "registry": {
                "behaviorTypes": [b.to_dict() for b in reg.behavior_types.values()],
                "achievementTypes": [a.to_dict() for a in reg.achievement_types.values()],
                "levelPolicy": reg.level_policy.to_dict() if reg.level_policy else None,
                "games": [g.to_dict() for g in reg.games.values()],
                "projects": [p.to_dict() for p in reg.projects.values()],
                "tools": [t.to_dict(include_secret=True) for t in reg.tools.values()],
                "players": [p.to_dict(include_token=True) for p in reg.players.values()],
            },
            "rules": {
                "defs": [r.to_dict() for r in re_.rules.values()],
                "counters": [[list(k), v] for k, v in re_.counters.items()],
                "firstGranted": [list(k) for k in re_.first_granted],
                "grants": [g.to_dict() for g in re_.grants],
                "totals": re_.totals,
                "warnings": re_.warnings,
                "events": [e.to_dict() for e in re_.events],
                "grantsByEvent": re_.grants_by_event,
            },
            "social": {
                "friendships": [f.to_dict() for f in self.social.friendships.values()],
                "messages": [m.to_dict() for m in self.social.messages],
                "quests": [q.to_dict() for q in self.social.quests.values()],
                "notifications": [n.to_dict() for n in self.social.notifications],
            },
            "sentiment": [t.to_dict() for t in self.sentiment.texts],
            "customize": [r.to_dict() for r in self.customize.rules.values()],
            "firstEventAt": {p: format_utc(t) for p, t in self.first_event_at.items()},
        }

    def _restore_state(self, state: dict) -> None:
        self._reset_state()
        reg_state = state["registry"]
        for d in reg_state["behaviorTypes"]:
            self.registry.define_behavior_type(model.BehaviorTypeDef.from_dict(d))
        for d in reg_state["achievementTypes"]:
            self.registry.define_achievement_type(model.AchievementType.from_dict(d))
        if reg_state.get("levelPolicy"):
            self.registry.set_level_policy(model.LevelPolicy.from_dict(reg_state["levelPolicy"]))
        for d in reg_state["games"]:
            self.registry.define_game(model.Game(id=d["id"], name=d.get("name", "")))
        for d in reg_state["projects"]:
            self.registry.define_project(model.Project(
                id=d["id"], name=d.get("name", ""),
                active_game_ids=set(d.get("activeGameIds", [])),
            ))
        for d in reg_state["tools"]:
            self.registry.define_tool(model.Tool(id=d["id"], name=d.get("name", ""),
                                                 secret=d.get("secret", "")))
        for d in reg_state["players"]:
            joined = parse_utc(d["joinedAt"]) if d.get("joinedAt") else None
            self.registry.define_player(model.Player(
                id=d["id"], name=d.get("name", ""), joined_at=joined,
                token=d.get("token", ""),
            ))

        rules_state = state["rules"]
        for d in rules_state["defs"]:
            self.rule_engine.define_rule(rules.GameRule.from_dict(d))
        self.rule_engine.counters = {tuple(k): v for k, v in rules_state["counters"]}
        self.rule_engine.first_granted = {tuple(k) for k in rules_state["firstGranted"]}
        self.rule_engine.grants = [rules.AchievementGrant.from_dict(d)
                                   for d in rules_state["grants"]]
        self.rule_engine.totals = {p: dict(t) for p, t in rules_state["totals"].items()}
        self.rule_engine.warnings = list(rules_state["warnings"])
        self.rule_engine.events = [model.BehaviorEvent.from_dict(d)
                                   for d in rules_state["events"]]
        self.rule_engine.grants_by_event = {k: list(v) for k, v in
                                            rules_state["grantsByEvent"].items()}

        social_state = state["social"]
        for d in social_state["friendships"]:
            a, b = d["players"]
            friendship = social.Friendship(a=a, b=b, created_at=parse_utc(d["createdAt"]))
            self.social.friendships[friendship.pair()] = friendship
        self.social.messages = [
            social.Message(id=d["id"], sender=d["from"], recipient=d["to"],
                           body=d["body"], sent_at=parse_utc(d["sentAt"]))
            for d in social_state["messages"]
        ]
        for d in social_state["quests"]:
            quest = social.Quest(
                id=d["id"], challenger=d["challenger"], challenged=d["challenged"],
                achievement_type=d["goal"]["achievementType"],
                amount=int(d["goal"]["amount"]),
                start=parse_utc(d["period"]["start"]),
                end=parse_utc(d["period"]["end"]),
            )
            self.social.quests[quest.id] = quest
        self.social.notifications = [
            social.Notification(id=d["id"], player_id=d["playerId"], kind=d["kind"],
                                body=d["body"], created_at=parse_utc(d["createdAt"]),
                                read=bool(d["read"]))
            for d in social_state["notifications"]
        ]

        self.sentiment.texts = [sentiment.ClassifiedText.from_dict(d)
                                for d in state["sentiment"]]
        for d in state["customize"]:
            self.customize.define(customize.CustomizationRule.from_dict(d))
        self.first_event_at = {p: parse_utc(t)
                               for p, t in state.get("firstEventAt", {}).items()}
