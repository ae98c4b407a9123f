"""Exception hierarchy shared by all engine modules.

Every error carries a stable machine-readable ``code`` used verbatim in API
error bodies, plus a human message.
"""

from __future__ import annotations


class GamifyError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


# --- registry / referential integrity ---------------------------------------

class DuplicateIdentifier(GamifyError):
    code = "duplicate_identifier"


class EmptyIdentifier(GamifyError):
    code = "empty_identifier"


class InvalidDefinition(GamifyError):
    code = "invalid_definition"


class UnknownBehaviorType(GamifyError):
    code = "unknown_behavior_type"


class UnknownAchievementType(GamifyError):
    code = "unknown_achievement_type"


class UnknownGame(GamifyError):
    code = "unknown_game"


class UnknownProject(GamifyError):
    code = "unknown_project"


class UnknownTool(GamifyError):
    code = "unknown_tool"


class UnknownPlayer(GamifyError):
    code = "unknown_player"


class InvalidLevel(GamifyError):
    code = "invalid_level"


class EventValidationError(GamifyError):
    code = "invalid_event"


# --- expression language ------------------------------------------------------

class ExpressionError(GamifyError):
    code = "expression_error"


class ExprSyntaxError(ExpressionError):
    code = "syntax_error"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifier(ExpressionError):
    code = "unknown_identifier"

    def __init__(self, name: str):
        super().__init__(f"unknown identifier: {name}")
        self.name = name


class TypeMismatch(ExpressionError):
    code = "type_mismatch"


class AbsentOperand(ExpressionError):
    code = "absent_operand"


class DivisionByZero(ExpressionError):
    code = "division_by_zero"


# --- social -------------------------------------------------------------------

class SelfFriendship(GamifyError):
    code = "self_friendship"


class AlreadyFriends(GamifyError):
    code = "already_friends"


class InvalidPeriod(GamifyError):
    code = "invalid_period"


# --- graph analytics ----------------------------------------------------------

class SameSourceSink(GamifyError):
    code = "same_source_sink"


# --- assistant ----------------------------------------------------------------

class BrainParseError(GamifyError):
    code = "brain_parse_error"


class DuplicatePattern(GamifyError):
    code = "duplicate_pattern"


# --- persistence --------------------------------------------------------------

class CorruptLog(GamifyError):
    code = "corrupt_log"

    def __init__(self, message: str, sequence: int):
        super().__init__(f"{message} (sequence {sequence})")
        self.sequence = sequence


class AuthError(GamifyError):
    code = "unauthorized"
