"""Domain model: behavior and achievement registries, environment entities,
the exponential level policy, and reward message templating.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
import re
import uuid
from dataclasses import dataclass, field
from typing import Optional

from . import expr
from .errors import (
    DuplicateIdentifier,
    EmptyIdentifier,
    EventValidationError,
    InvalidDefinition,
    InvalidLevel,
    UnknownAchievementType,
    UnknownBehaviorType,
    UnknownPlayer,
    UnknownProject,
    UnknownTool,
)
from .timeutil import format_utc, parse_date, parse_utc

logger = logging.getLogger(__name__)

SIMPLE = "Simple"
TASK = "Task"
INTERACTION = "Interaction"
BEHAVIOR_KINDS = (SIMPLE, TASK, INTERACTION)

POINTS = "Points"
BADGE = "Badge"
RESOURCE = "Resource"
ACHIEVEMENT_CLASSES = (POINTS, BADGE, RESOURCE)

#: DSL-visible task attributes and their types.  ``unitType`` is text and the
#: DSL has no strings, so it stays out of the expression scope.
TASK_ATTR_TYPES = {
    "plannedCompletionDate": expr.DATE,
    "realCompletionDate": expr.DATE,
    "estimatedEffort": expr.NUMBER,
    "realEffort": expr.NUMBER,
    "estimatedWorkUnits": expr.NUMBER,
    "realWorkUnits": expr.NUMBER,
    "grade": expr.NUMBER,
}


@dataclass
class BehaviorTypeDef:
    identifier: str
    kind: str
    name: str = ""
    description: str = ""
    category: str = ""

    def to_dict(self) -> dict:
        return {
            "identifier": self.identifier,
            "kind": self.kind,
            "name": self.name,
            "description": self.description,
            "category": self.category,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BehaviorTypeDef":
        return cls(
            identifier=d.get("identifier", ""),
            kind=d.get("kind", ""),
            name=d.get("name", ""),
            description=d.get("description", ""),
            category=d.get("category", ""),
        )


@dataclass
class TaskAttrs:
    planned_completion_date: Optional[dt.date] = None
    real_completion_date: Optional[dt.date] = None
    estimated_effort: Optional[float] = None
    real_effort: Optional[float] = None
    estimated_work_units: Optional[float] = None
    real_work_units: Optional[float] = None
    unit_type: Optional[str] = None
    grade: Optional[float] = None

    _WIRE = {
        "plannedCompletionDate": "planned_completion_date",
        "realCompletionDate": "real_completion_date",
        "estimatedEffort": "estimated_effort",
        "realEffort": "real_effort",
        "estimatedWorkUnits": "estimated_work_units",
        "realWorkUnits": "real_work_units",
        "unitType": "unit_type",
        "grade": "grade",
    }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskAttrs":
        attrs = cls()
        for wire, attr in cls._WIRE.items():
            if wire not in d or d[wire] is None:
                continue
            value = d[wire]
            if attr.endswith("_date"):
                value = parse_date(value)
            elif attr == "unit_type":
                value = str(value)
            else:
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise EventValidationError(f"taskAttrs.{wire} must be a number")
                value = float(value)
            setattr(attrs, attr, value)
        unknown = set(d) - set(cls._WIRE)
        if unknown:
            raise EventValidationError(f"unknown taskAttrs fields: {sorted(unknown)}")
        attrs.validate()
        return attrs

    def validate(self) -> None:
        for name in ("estimated_effort", "real_effort",
                     "estimated_work_units", "real_work_units"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise EventValidationError(f"{name} must be >= 0, got {value}")
        if self.grade is not None and not 0 <= self.grade <= 100:
            raise EventValidationError(f"grade must be in [0, 100], got {self.grade}")

    def to_dict(self) -> dict:
        out = {}
        for wire, attr in self._WIRE.items():
            value = getattr(self, attr)
            if value is None:
                continue
            out[wire] = value.isoformat() if isinstance(value, dt.date) else value
        return out

    def scope(self) -> dict:
        """Expression-scope bindings; absent attributes are simply unbound."""
        bindings = {}
        for wire, attr in self._WIRE.items():
            if wire not in TASK_ATTR_TYPES:
                continue
            value = getattr(self, attr)
            if value is not None:
                bindings[wire] = value
        return bindings


@dataclass
class Interaction:
    target_player: str
    label: str

    def to_dict(self) -> dict:
        return {"targetPlayer": self.target_player, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "Interaction":
        target = d.get("targetPlayer")
        if not target or not isinstance(target, str):
            raise EventValidationError("interaction.targetPlayer is required")
        return cls(target_player=target, label=str(d.get("label", "")))


@dataclass
class BehaviorEvent:
    event_id: str
    behavior_type: str
    player: str
    tool: str
    project: str
    occurred_at: dt.datetime
    artifact_id: Optional[str] = None
    artifact_name: Optional[str] = None
    task_attrs: Optional[TaskAttrs] = None
    interaction: Optional[Interaction] = None

    @classmethod
    def from_dict(cls, d: dict) -> "BehaviorEvent":
        for name in ("eventId", "behaviorType", "player", "tool", "project", "occurredAt"):
            if not d.get(name):
                raise EventValidationError(f"{name} is required")
        artifact_id = d.get("artifactId")
        artifact_name = d.get("artifactName")
        return cls(
            event_id=str(d["eventId"]),
            behavior_type=str(d["behaviorType"]),
            player=str(d["player"]),
            tool=str(d["tool"]),
            project=str(d["project"]),
            occurred_at=parse_utc(d["occurredAt"]),
            artifact_id=None if artifact_id is None else str(artifact_id),
            artifact_name=None if artifact_name is None else str(artifact_name),
            task_attrs=TaskAttrs.from_dict(d["taskAttrs"]) if d.get("taskAttrs") is not None else None,
            interaction=Interaction.from_dict(d["interaction"]) if d.get("interaction") is not None else None,
        )

    def to_dict(self) -> dict:
        out = {
            "eventId": self.event_id,
            "behaviorType": self.behavior_type,
            "player": self.player,
            "tool": self.tool,
            "project": self.project,
            "occurredAt": format_utc(self.occurred_at),
        }
        if self.artifact_id is not None:
            out["artifactId"] = self.artifact_id
        if self.artifact_name is not None:
            out["artifactName"] = self.artifact_name
        if self.task_attrs is not None:
            out["taskAttrs"] = self.task_attrs.to_dict()
        if self.interaction is not None:
            out["interaction"] = self.interaction.to_dict()
        return out

    def scope(self) -> dict:
        return self.task_attrs.scope() if self.task_attrs is not None else {}


@dataclass
class AchievementType:
    identifier: str
    achievement_class: str
    name: str = ""
    is_level_basis: bool = False

    def to_dict(self) -> dict:
        return {
            "identifier": self.identifier,
            "class": self.achievement_class,
            "name": self.name,
            "isLevelBasis": self.is_level_basis,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AchievementType":
        return cls(
            identifier=d.get("identifier", ""),
            achievement_class=d.get("class", ""),
            name=d.get("name", ""),
            is_level_basis=bool(d.get("isLevelBasis", False)),
        )


@dataclass
class LevelPolicy:
    """Exponential level curve: reaching level l needs floor(a * b^(l*c)) points."""

    a: float
    b: float
    c: float

    def validate(self) -> None:
        if not (self.a > 0 and self.b > 1 and self.c > 0):
            raise InvalidDefinition(
                f"level policy needs a > 0, b > 1, c > 0; got a={self.a} b={self.b} c={self.c}"
            )
        # Floor rounding can plateau when the per-level growth is tiny; a valid
        # policy must yield strictly increasing integer thresholds.  The gap
        # a*b^(lc)*(b^c - 1) grows with l, so once it reaches 1 every later
        # floor strictly increases.
        level = 1
        while True:
            here = math.floor(self.a * self.b ** (level * self.c))
            after = math.floor(self.a * self.b ** ((level + 1) * self.c))
            if after <= here:
                raise InvalidDefinition(
                    f"level policy plateaus: threshold({level}) = threshold({level + 1}) = {here}"
                )
            gap = self.a * self.b ** (level * self.c) * (self.b ** self.c - 1)
            if gap >= 1.0:
                break
            level += 1

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c}

    @classmethod
    def from_dict(cls, d: dict) -> "LevelPolicy":
        policy = cls(a=float(d["a"]), b=float(d["b"]), c=float(d["c"]))
        policy.validate()
        return policy


def level_threshold(policy: LevelPolicy, level: int) -> int:
    """Points needed to reach ``level``; truncation reproduces the reference
    curve (a=1, b=1.4, c=2 gives 1, 3, 7, 14, 28, 56, 111, 217, 426)."""
    if level < 1:
        raise InvalidLevel(f"level must be >= 1, got {level}")
    return math.floor(policy.a * policy.b ** (level * policy.c))


def level_for_points(policy: LevelPolicy, points: float) -> int:
    """Largest level whose threshold is covered by ``points`` (0 below level 1)."""
    if points < level_threshold(policy, 1):
        return 0
    level = 1
    while level_threshold(policy, level + 1) <= points:
        level += 1
    return level


@dataclass
class Game:
    id: str
    name: str = ""
    rule_ids: set = field(default_factory=set)

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "ruleIds": sorted(self.rule_ids)}


@dataclass
class Project:
    id: str
    name: str = ""
    active_game_ids: set = field(default_factory=set)

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "activeGameIds": sorted(self.active_game_ids)}


@dataclass
class Tool:
    id: str
    name: str = ""
    secret: str = ""

    def to_dict(self, include_secret: bool = False) -> dict:
        out = {"id": self.id, "name": self.name}
        if include_secret:
            out["secret"] = self.secret
        return out


@dataclass
class Player:
    id: str
    name: str = ""
    joined_at: Optional[dt.datetime] = None
    token: str = ""

    def to_dict(self, include_token: bool = False) -> dict:
        out = {"id": self.id, "name": self.name}
        if self.joined_at is not None:
            out["joinedAt"] = format_utc(self.joined_at)
        if include_token:
            out["token"] = self.token
        return out


class Registry:
    """All environment definitions: behavior and achievement types, the level
    policy, games, projects, tools, and players.

    Read-mostly; mutations are serialized by the owning engine.
    """

    def __init__(self):
        self.behavior_types: dict[str, BehaviorTypeDef] = {}
        self.achievement_types: dict[str, AchievementType] = {}
        self.level_policy: Optional[LevelPolicy] = None
        self.games: dict[str, Game] = {}
        self.projects: dict[str, Project] = {}
        self.tools: dict[str, Tool] = {}
        self.players: dict[str, Player] = {}

    # -- definitions -----------------------------------------------------

    def define_behavior_type(self, definition: BehaviorTypeDef) -> BehaviorTypeDef:
        if not definition.identifier:
            raise EmptyIdentifier("behavior type identifier is empty")
        if definition.identifier in self.behavior_types:
            raise DuplicateIdentifier(f"behavior type {definition.identifier} already registered")
        if definition.kind not in BEHAVIOR_KINDS:
            raise InvalidDefinition(f"behavior kind must be one of {BEHAVIOR_KINDS}, got {definition.kind!r}")
        self.behavior_types[definition.identifier] = definition
        return definition

    def define_achievement_type(self, definition: AchievementType) -> AchievementType:
        if not definition.identifier:
            raise EmptyIdentifier("achievement type identifier is empty")
        if definition.identifier in self.achievement_types:
            raise DuplicateIdentifier(f"achievement type {definition.identifier} already registered")
        if definition.achievement_class not in ACHIEVEMENT_CLASSES:
            raise InvalidDefinition(
                f"achievement class must be one of {ACHIEVEMENT_CLASSES}, got {definition.achievement_class!r}"
            )
        if definition.is_level_basis and definition.achievement_class != POINTS:
            raise InvalidDefinition("only a Points achievement type can be the level basis")
        if definition.is_level_basis and self.level_basis_type() is not None:
            raise InvalidDefinition("a level-basis point type is already defined")
        self.achievement_types[definition.identifier] = definition
        return definition

    def set_level_policy(self, policy: LevelPolicy) -> LevelPolicy:
        policy.validate()
        self.level_policy = policy
        return policy

    def define_game(self, game: Game) -> Game:
        if not game.id:
            raise EmptyIdentifier("game id is empty")
        if game.id in self.games:
            raise DuplicateIdentifier(f"game {game.id} already registered")
        self.games[game.id] = game
        return game

    def define_project(self, project: Project) -> Project:
        if not project.id:
            raise EmptyIdentifier("project id is empty")
        if project.id in self.projects:
            raise DuplicateIdentifier(f"project {project.id} already registered")
        for game_id in project.active_game_ids:
            if game_id not in self.games:
                raise InvalidDefinition(f"project {project.id} activates unknown game {game_id}")
        self.projects[project.id] = project
        return project

    def define_tool(self, tool: Tool) -> Tool:
        if not tool.id:
            raise EmptyIdentifier("tool id is empty")
        if tool.id in self.tools:
            raise DuplicateIdentifier(f"tool {tool.id} already registered")
        if not tool.secret:
            tool.secret = uuid.uuid4().hex
        self.tools[tool.id] = tool
        return tool

    def define_player(self, player: Player) -> Player:
        if not player.id:
            raise EmptyIdentifier("player id is empty")
        if player.id in self.players:
            raise DuplicateIdentifier(f"player {player.id} already registered")
        if not player.token:
            player.token = uuid.uuid4().hex
        self.players[player.id] = player
        return player

    # -- lookups -----------------------------------------------------------

    def level_basis_type(self) -> Optional[AchievementType]:
        for at in self.achievement_types.values():
            if at.is_level_basis:
                return at
        return None

    def require_achievement_type(self, identifier: str) -> AchievementType:
        try:
            return self.achievement_types[identifier]
        except KeyError:
            raise UnknownAchievementType(f"unknown achievement type {identifier}") from None

    def require_player(self, player_id: str) -> Player:
        try:
            return self.players[player_id]
        except KeyError:
            raise UnknownPlayer(f"unknown player {player_id}") from None

    def scope_signature(self, behavior_type: str) -> dict:
        """Identifier -> type map legal in expressions for rules on this type."""
        definition = self.behavior_types.get(behavior_type)
        if definition is None:
            raise UnknownBehaviorType(f"unknown behavior type {behavior_type}")
        return dict(TASK_ATTR_TYPES) if definition.kind == TASK else {}

    # -- event validation -----------------------------------------------------

    def validate_event(self, data: dict) -> BehaviorEvent:
        """Check a wire-shaped event against the registries and its declared
        behavior kind; returns the parsed event."""
        event = BehaviorEvent.from_dict(data)
        definition = self.behavior_types.get(event.behavior_type)
        if definition is None:
            raise EventValidationError(f"unknown behavior type {event.behavior_type}")
        if event.player not in self.players:
            raise EventValidationError(f"unknown player {event.player}")
        if event.tool not in self.tools:
            raise EventValidationError(f"unknown tool {event.tool}")
        if event.project not in self.projects:
            raise EventValidationError(f"unknown project {event.project}")
        if (event.task_attrs is not None) != (definition.kind == TASK):
            raise EventValidationError(
                f"taskAttrs must be present exactly when the behavior kind is Task "
                f"({event.behavior_type} is {definition.kind})"
            )
        if (event.interaction is not None) != (definition.kind == INTERACTION):
            raise EventValidationError(
                f"interaction must be present exactly when the behavior kind is Interaction "
                f"({event.behavior_type} is {definition.kind})"
            )
        if event.interaction is not None and event.interaction.target_player not in self.players:
            raise EventValidationError(
                f"unknown interaction target {event.interaction.target_player}"
            )
        return event


_PLACEHOLDER = re.compile(r"#(id|name)\b")


def render_message(template: str, event: BehaviorEvent) -> str:
    """Substitute ``#id``/``#name`` with the event's artifact fields.

    Unknown ``#`` tokens pass through; a missing artifact field renders as the
    empty string with a warning.
    """

    def substitute(match: re.Match) -> str:
        value = event.artifact_id if match.group(1) == "id" else event.artifact_name
        if value is None:
            logger.warning(
                "message template references #%s but event %s has no artifact %s",
                match.group(1), event.event_id, match.group(1),
            )
            return ""
        return str(value)

    return _PLACEHOLDER.sub(substitute, template)
