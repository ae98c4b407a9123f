"""Polarity classification of player-authored texts.

The default classifier is a deterministic lexicon baseline: tokens are
compared against bundled positive/negative word lists and the score is
(P - N) / max(1, P + N), always in [-1, 1].  Scores above +0.1 are Positive,
below -0.1 Negative, otherwise Neutral.  Classifiers are a named plug-in
point so a learned model can replace the baseline without touching callers.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Optional

from .timeutil import format_utc, parse_utc

POSITIVE = "Positive"
NEGATIVE = "Negative"
NEUTRAL = "Neutral"

NEUTRAL_BAND = 0.1

WINDOW = dt.timedelta(days=5)

_TOKEN = re.compile(r"[a-z]+")


@dataclass(frozen=True)
class PolarityResult:
    label: str
    score: float

    def to_dict(self) -> dict:
        return {"label": self.label, "score": self.score}


def label_for_score(score: float) -> str:
    if score > NEUTRAL_BAND:
        return POSITIVE
    if score < -NEUTRAL_BAND:
        return NEGATIVE
    return NEUTRAL


def _load_lexicon(name: str) -> frozenset:
    text = resources.files("gamify").joinpath(f"data/{name}").read_text(encoding="utf-8")
    return frozenset(word.strip() for word in text.splitlines() if word.strip())


_lexicons: Optional[tuple[frozenset, frozenset]] = None


def _get_lexicons() -> tuple[frozenset, frozenset]:
    global _lexicons
    if _lexicons is None:
        _lexicons = (_load_lexicon("lexicon_positive.txt"), _load_lexicon("lexicon_negative.txt"))
    return _lexicons


def classify(text: str) -> PolarityResult:
    """Deterministic lexicon baseline classifier."""
    positive_words, negative_words = _get_lexicons()
    tokens = _TOKEN.findall(text.lower())
    p = sum(1 for t in tokens if t in positive_words)
    n = sum(1 for t in tokens if t in negative_words)
    score = (p - n) / max(1, p + n)
    return PolarityResult(label=label_for_score(score), score=score)


#: Named classifier plug-in point; configuration selects one by name.
CLASSIFIERS: dict[str, Callable[[str], PolarityResult]] = {"lexicon": classify}


def register_classifier(name: str, fn: Callable[[str], PolarityResult]) -> None:
    CLASSIFIERS[name] = fn


def get_classifier(name: str) -> Callable[[str], PolarityResult]:
    try:
        return CLASSIFIERS[name]
    except KeyError:
        raise KeyError(f"unknown sentiment classifier {name!r}; "
                       f"registered: {sorted(CLASSIFIERS)}") from None


@dataclass
class ClassifiedText:
    player_id: str
    text: str
    result: PolarityResult
    at: dt.datetime

    def to_dict(self) -> dict:
        return {
            "playerId": self.player_id,
            "text": self.text,
            "result": self.result.to_dict(),
            "at": format_utc(self.at),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifiedText":
        return cls(
            player_id=d["playerId"],
            text=d["text"],
            result=PolarityResult(label=d["result"]["label"], score=d["result"]["score"]),
            at=parse_utc(d["at"]),
        )


class SentimentLog:
    """Append-only list of classified texts per author."""

    def __init__(self, classifier: Callable[[str], PolarityResult] = classify):
        self.classifier = classifier
        self.texts: list[ClassifiedText] = []

    def record(self, player_id: str, text: str, at: dt.datetime) -> ClassifiedText:
        entry = ClassifiedText(player_id=player_id, text=text,
                               result=self.classifier(text), at=at)
        self.texts.append(entry)
        return entry

    def rolling_polarity(self, player_id: str, now: dt.datetime) -> float:
        """Mean score over the last five days (0 when the window is empty)."""
        scores = [
            entry.result.score for entry in self.texts
            if entry.player_id == player_id and now - WINDOW < entry.at <= now
        ]
        if not scores:
            return 0.0
        return sum(scores) / len(scores)

    def texts_for(self, player_id: str) -> list[ClassifiedText]:
        return [t for t in self.texts if t.player_id == player_id]
