"""Game-rule evaluation: maps incoming behavior events to achievement grants.

Rules come in three kinds.  Simple rules grant on every event whose outcome
condition holds.  Repetitive rules count condition-satisfying events (optionally
inside a fixed start/end window) and grant once the count reaches
``repetition_count``, then reset and count again.  Interval-repetitive rules do
the same but count within calendar-aligned UTC buckets (day, ISO week, month);
counts never carry across buckets.

Counting and the first-time-only gate are keyed by the player who would
receive the grant: the acting player by default, or the interaction target
when an outcome says so.  The first-time gate suppresses the grant only;
counters still advance.

Outcomes are independent: each has its own condition, counter state, and
first-time gate, so several can fire for one event and removing one never
affects the others.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from . import expr
from .errors import (
    EmptyIdentifier,
    DuplicateIdentifier,
    ExpressionError,
    InvalidDefinition,
    UnknownAchievementType,
    UnknownBehaviorType,
    UnknownGame,
)
from .model import (
    BADGE,
    BehaviorEvent,
    Registry,
    level_for_points,
    render_message,
)
from .timeutil import format_utc, parse_utc

logger = logging.getLogger(__name__)

SIMPLE_RULE = "Simple"
REPETITIVE = "Repetitive"
INTERVAL_REPETITIVE = "IntervalRepetitive"
RULE_KINDS = (SIMPLE_RULE, REPETITIVE, INTERVAL_REPETITIVE)

DAY = "Day"
WEEK = "Week"
MONTH = "Month"
INTERVALS = (DAY, WEEK, MONTH)

ACTOR = "Actor"
INTERACTION_TARGET = "InteractionTarget"


def round_half_away_from_zero(value: float) -> int:
    if value >= 0:
        return math.floor(value + 0.5)
    return math.ceil(value - 0.5)


def interval_bucket(interval: str, at: dt.datetime) -> str:
    """Calendar-aligned UTC bucket label for an interval-repetitive rule."""
    at = at.astimezone(dt.timezone.utc)
    if interval == DAY:
        return at.date().isoformat()
    if interval == WEEK:
        iso = at.isocalendar()
        return f"{iso[0]}-W{iso[1]:02d}"
    return f"{at.year:04d}-{at.month:02d}"


@dataclass
class AchievementOutcome:
    achievement_type: str
    condition_source: str
    message_template: str = ""
    modifier_source: Optional[str] = None
    first_time_only: bool = False
    grant_target: str = ACTOR
    condition: expr.Expr = None
    modifier: Optional[expr.Expr] = None

    def to_dict(self) -> dict:
        out = {
            "achievementType": self.achievement_type,
            "condition": self.condition_source,
            "messageTemplate": self.message_template,
            "firstTimeOnly": self.first_time_only,
            "grantTarget": self.grant_target,
        }
        if self.modifier_source is not None:
            out["modifier"] = self.modifier_source
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "AchievementOutcome":
        return cls(
            achievement_type=d.get("achievementType", ""),
            condition_source=d.get("condition", ""),
            message_template=d.get("messageTemplate", ""),
            modifier_source=d.get("modifier"),
            first_time_only=bool(d.get("firstTimeOnly", False)),
            grant_target=d.get("grantTarget", ACTOR),
        )


@dataclass
class GameRule:
    id: str
    name: str
    game_id: str
    source_behavior_type: str
    kind: str = SIMPLE_RULE
    repetition_count: int = 1
    window: Optional[tuple[dt.datetime, dt.datetime]] = None
    interval: Optional[str] = None
    outcomes: list[AchievementOutcome] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "name": self.name,
            "gameId": self.game_id,
            "sourceBehaviorType": self.source_behavior_type,
            "kind": self.kind,
            "outcomes": [o.to_dict() for o in self.outcomes],
        }
        if self.kind in (REPETITIVE, INTERVAL_REPETITIVE):
            out["repetitionCount"] = self.repetition_count
        if self.window is not None:
            out["window"] = {"start": format_utc(self.window[0]), "end": format_utc(self.window[1])}
        if self.interval is not None:
            out["interval"] = self.interval
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GameRule":
        window = None
        if d.get("window") is not None:
            window = (parse_utc(d["window"]["start"]), parse_utc(d["window"]["end"]))
        return cls(
            id=d.get("id", ""),
            name=d.get("name", ""),
            game_id=d.get("gameId", ""),
            source_behavior_type=d.get("sourceBehaviorType", ""),
            kind=d.get("kind", SIMPLE_RULE),
            repetition_count=int(d.get("repetitionCount", 1)),
            window=window,
            interval=d.get("interval"),
            outcomes=[AchievementOutcome.from_dict(o) for o in d.get("outcomes", [])],
        )


@dataclass
class AchievementGrant:
    id: int
    player_id: str
    achievement_type: str
    amount: int
    message: str
    triggering_event_id: str
    rule_id: str
    outcome_index: int
    granted_at: dt.datetime

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "playerId": self.player_id,
            "achievementType": self.achievement_type,
            "amount": self.amount,
            "message": self.message,
            "triggeringEventId": self.triggering_event_id,
            "ruleId": self.rule_id,
            "outcomeIndex": self.outcome_index,
            "grantedAt": format_utc(self.granted_at),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AchievementGrant":
        return cls(
            id=d["id"],
            player_id=d["playerId"],
            achievement_type=d["achievementType"],
            amount=d["amount"],
            message=d["message"],
            triggering_event_id=d["triggeringEventId"],
            rule_id=d["ruleId"],
            outcome_index=d["outcomeIndex"],
            granted_at=parse_utc(d["grantedAt"]),
        )


class RuleEngine:
    """Stores rules and folds behavior events into grants and player totals."""

    def __init__(self, registry: Registry):
        self.registry = registry
        self.rules: dict[str, GameRule] = {}
        self.events: list[BehaviorEvent] = []
        self.grants: list[AchievementGrant] = []
        self.totals: dict[str, dict[str, int]] = {}
        self.warnings: list[dict] = []
        # eventId -> grant ids, for idempotent replay of duplicates
        self.grants_by_event: dict[str, list[int]] = {}
        # (ruleId, outcomeIndex, playerId, bucket) -> count
        self.counters: dict[tuple, int] = {}
        self.first_granted: set[tuple] = set()

    # -- rule definition ---------------------------------------------------

    def define_rule(self, rule: GameRule) -> GameRule:
        if not rule.id:
            raise EmptyIdentifier("rule id is empty")
        if rule.id in self.rules:
            raise DuplicateIdentifier(f"rule {rule.id} already defined")
        if rule.game_id not in self.registry.games:
            raise UnknownGame(f"rule {rule.id} references unknown game {rule.game_id}")
        if rule.source_behavior_type not in self.registry.behavior_types:
            raise UnknownBehaviorType(
                f"rule {rule.id} references unknown behavior type {rule.source_behavior_type}"
            )
        if rule.kind not in RULE_KINDS:
            raise InvalidDefinition(f"rule kind must be one of {RULE_KINDS}, got {rule.kind!r}")
        if rule.kind in (REPETITIVE, INTERVAL_REPETITIVE) and rule.repetition_count < 1:
            raise InvalidDefinition("repetitionCount must be >= 1")
        if rule.kind == INTERVAL_REPETITIVE and rule.interval not in INTERVALS:
            raise InvalidDefinition(f"interval must be one of {INTERVALS}, got {rule.interval!r}")
        if rule.kind != INTERVAL_REPETITIVE and rule.interval is not None:
            raise InvalidDefinition("interval is only valid on IntervalRepetitive rules")
        if rule.window is not None and rule.kind != REPETITIVE:
            raise InvalidDefinition("window is only valid on Repetitive rules")
        if not rule.outcomes:
            raise InvalidDefinition(f"rule {rule.id} has no outcomes")

        signature = self.registry.scope_signature(rule.source_behavior_type)
        for index, outcome in enumerate(rule.outcomes):
            achievement = self.registry.require_achievement_type(outcome.achievement_type)
            if outcome.grant_target not in (ACTOR, INTERACTION_TARGET):
                raise InvalidDefinition(f"bad grantTarget {outcome.grant_target!r}")
            outcome.condition = expr.parse(outcome.condition_source, signature)
            if expr.infer_type(outcome.condition, signature) != expr.BOOLEAN:
                raise InvalidDefinition(
                    f"outcome {index} condition is not boolean: {outcome.condition_source!r}"
                )
            if achievement.achievement_class == BADGE:
                if outcome.modifier_source is not None:
                    raise InvalidDefinition(f"outcome {index}: badges take no modifier")
                outcome.modifier = None
            else:
                if outcome.modifier_source is None:
                    raise InvalidDefinition(
                        f"outcome {index}: {achievement.achievement_class} needs a modifier"
                    )
                outcome.modifier = expr.parse(outcome.modifier_source, signature)
                if expr.infer_type(outcome.modifier, signature) != expr.NUMBER:
                    raise InvalidDefinition(
                        f"outcome {index} modifier is not numeric: {outcome.modifier_source!r}"
                    )

        self.rules[rule.id] = rule
        self.registry.games[rule.game_id].rule_ids.add(rule.id)
        return rule

    # -- evaluation ---------------------------------------------------------

    def evaluate_event(self, event: BehaviorEvent) -> list[AchievementGrant]:
        """Evaluate one validated event against all matching active rules.

        The caller guarantees the event id is fresh; duplicates never reach
        this method.  Events are processed strictly in arrival order.
        """
        self.events.append(event)
        self.grants_by_event[event.event_id] = []
        project = self.registry.projects[event.project]

        produced: list[AchievementGrant] = []
        for rule in self.rules.values():
            if rule.source_behavior_type != event.behavior_type:
                continue
            if rule.game_id not in project.active_game_ids:
                continue
            produced.extend(self._evaluate_rule(rule, event))
        return produced

    def _evaluate_rule(self, rule: GameRule, event: BehaviorEvent) -> list[AchievementGrant]:
        scope = event.scope()
        produced = []
        for index, outcome in enumerate(rule.outcomes):
            grantee = event.player
            if outcome.grant_target == INTERACTION_TARGET:
                if event.interaction is None:
                    continue
                grantee = event.interaction.target_player
            try:
                satisfied = expr.eval_bool(outcome.condition, scope)
            except ExpressionError as err:
                self._warn(event, rule, index, err)
                continue
            if not satisfied:
                continue

            if rule.kind == SIMPLE_RULE:
                due = True
            else:
                bucket = self._bucket(rule, event)
                if bucket is None:
                    continue  # outside the rule's window
                key = (rule.id, index, grantee, bucket)
                count = self.counters.get(key, 0) + 1
                if count >= rule.repetition_count:
                    self.counters[key] = 0
                    due = True
                else:
                    self.counters[key] = count
                    due = False
            if not due:
                continue

            first_key = (rule.id, index, grantee)
            if outcome.first_time_only and first_key in self.first_granted:
                continue

            if outcome.modifier is None:
                amount = 1
            else:
                try:
                    amount = round_half_away_from_zero(expr.eval_number(outcome.modifier, scope))
                except ExpressionError as err:
                    self._warn(event, rule, index, err)
                    continue

            grant = AchievementGrant(
                id=len(self.grants) + 1,
                player_id=grantee,
                achievement_type=outcome.achievement_type,
                amount=amount,
                message=render_message(outcome.message_template, event),
                triggering_event_id=event.event_id,
                rule_id=rule.id,
                outcome_index=index,
                granted_at=event.occurred_at,
            )
            self._apply_grant(grant)
            self.first_granted.add(first_key)
            produced.append(grant)
        return produced

    def _bucket(self, rule: GameRule, event: BehaviorEvent) -> Optional[str]:
        if rule.kind == REPETITIVE:
            if rule.window is not None:
                start, end = rule.window
                if not start <= event.occurred_at <= end:
                    return None
                return "window"
            return "all"
        return interval_bucket(rule.interval, event.occurred_at)

    def _apply_grant(self, grant: AchievementGrant) -> None:
        self.grants.append(grant)
        self.grants_by_event[grant.triggering_event_id].append(grant.id)
        per_player = self.totals.setdefault(grant.player_id, {})
        per_player[grant.achievement_type] = per_player.get(grant.achievement_type, 0) + grant.amount

    def _warn(self, event: BehaviorEvent, rule: GameRule, index: int, err: Exception) -> None:
        entry = {
            "eventId": event.event_id,
            "ruleId": rule.id,
            "outcomeIndex": index,
            "code": getattr(err, "code", "error"),
            "message": str(err),
        }
        self.warnings.append(entry)
        logger.warning("outcome skipped: %s", entry)

    # -- read side -----------------------------------------------------------

    def player_totals(self, player_id: str) -> dict:
        """Per-type totals over the full grant log plus the derived level."""
        self.registry.require_player(player_id)
        per_player = self.totals.get(player_id, {})
        totals = {ident: per_player.get(ident, 0) for ident in self.registry.achievement_types}
        basis = self.registry.level_basis_type()
        level = 0
        if basis is not None and self.registry.level_policy is not None:
            level = level_for_points(self.registry.level_policy, totals.get(basis.identifier, 0))
        return {"totals": totals, "level": level}

    def grants_for_event(self, event_id: str) -> Optional[list[AchievementGrant]]:
        """Previously produced grants for a stored event id, else None."""
        ids = self.grants_by_event.get(event_id)
        if ids is None:
            return None
        by_id = {g.id: g for g in self.grants}
        return [by_id[i] for i in ids]
