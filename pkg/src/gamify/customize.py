"""Administrator-defined personalization variables.

Each variable is a named boolean predicate over a player's profile scope
(today's date, first-behavior date, points, level, follower counts, rolling
polarity).  Evaluation is read-only and recomputed on demand; consumers
receive the boolean map and decide presentation themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import expr
from .errors import DuplicateIdentifier, EmptyIdentifier, InvalidDefinition

#: Identifier types legal in customization conditions.
PROFILE_SCOPE_TYPES = {
    "Date": expr.DATE,
    "firstBehaviorDate": expr.DATE,
    "Points": expr.NUMBER,
    "Level": expr.NUMBER,
    "Followers": expr.NUMBER,
    "Following": expr.NUMBER,
    "Polarity": expr.NUMBER,
}


@dataclass
class CustomizationRule:
    variable_name: str
    condition_source: str
    condition: expr.Expr = None

    def to_dict(self) -> dict:
        return {"variableName": self.variable_name, "condition": self.condition_source}

    @classmethod
    def from_dict(cls, d: dict) -> "CustomizationRule":
        return cls(variable_name=d.get("variableName", ""),
                   condition_source=d.get("condition", ""))


class CustomizeState:
    def __init__(self):
        self.rules: dict[str, CustomizationRule] = {}

    def define(self, rule: CustomizationRule) -> CustomizationRule:
        if not rule.variable_name:
            raise EmptyIdentifier("customization variable name is empty")
        if rule.variable_name in self.rules:
            raise DuplicateIdentifier(
                f"customization variable {rule.variable_name} already defined"
            )
        rule.condition = expr.parse(rule.condition_source, PROFILE_SCOPE_TYPES)
        if expr.infer_type(rule.condition, PROFILE_SCOPE_TYPES) != expr.BOOLEAN:
            raise InvalidDefinition(
                f"customization condition is not boolean: {rule.condition_source!r}"
            )
        self.rules[rule.variable_name] = rule
        return rule

    def evaluate(self, bindings: Mapping[str, object]) -> dict[str, bool]:
        """Evaluate every variable under a player's profile bindings.

        Absent bindings (e.g. firstBehaviorDate for a player with no events)
        fail any comparison touching them, per the expression semantics.
        """
        return {
            name: expr.eval_bool(rule.condition, bindings)
            for name, rule in sorted(self.rules.items())
        }
