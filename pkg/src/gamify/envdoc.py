"""Versioned environment-definition document: one JSON file carrying every
definition (behavior types, achievement types, level policy, games, projects,
tools, players, rules, customization variables).

The exporter sorts every section by identifier and serializes with sorted
keys, so exporting, importing into a fresh environment, and exporting again
is byte-identical.  Tool secrets and player tokens are included: this is an
administrator backup format and the round-trip guarantee needs them (entity
read endpoints still never return them).
"""

from __future__ import annotations

import json

from .errors import GamifyError

VERSION = 1

SECTION_ORDER = (
    "behaviorTypes",
    "achievementTypes",
    "games",
    "projects",
    "tools",
    "players",
    "rules",
    "customizationRules",
)


def export_environment(engine) -> dict:
    reg = engine.registry
    return {
        "version": VERSION,
        "behaviorTypes": sorted((b.to_dict() for b in reg.behavior_types.values()),
                                key=lambda d: d["identifier"]),
        "achievementTypes": sorted((a.to_dict() for a in reg.achievement_types.values()),
                                   key=lambda d: d["identifier"]),
        "levelPolicy": reg.level_policy.to_dict() if reg.level_policy else None,
        "games": sorted((g.to_dict() for g in reg.games.values()), key=lambda d: d["id"]),
        "projects": sorted((p.to_dict() for p in reg.projects.values()), key=lambda d: d["id"]),
        "tools": sorted((t.to_dict(include_secret=True) for t in reg.tools.values()),
                        key=lambda d: d["id"]),
        "players": sorted((p.to_dict(include_token=True) for p in reg.players.values()),
                          key=lambda d: d["id"]),
        "rules": sorted((r.to_dict() for r in engine.rule_engine.rules.values()),
                        key=lambda d: d["id"]),
        "customizationRules": sorted((c.to_dict() for c in engine.customize.rules.values()),
                                     key=lambda d: d["variableName"]),
    }


def dump_environment(engine) -> str:
    return json.dumps(export_environment(engine), indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"


def import_environment(engine, document: dict) -> dict:
    """Apply a document's definitions through the engine's logged mutators.

    Returns per-section counts.  Definitions collide with existing ones the
    usual way (DuplicateIdentifier), so imports normally target a fresh
    environment.
    """
    if document.get("version") != VERSION:
        raise GamifyError(f"unsupported environment document version {document.get('version')!r}")
    counts = {}
    appliers = {
        "behaviorTypes": engine.define_behavior_type,
        "achievementTypes": engine.define_achievement_type,
        "games": lambda d: engine.define_game({"id": d["id"], "name": d.get("name", "")}),
        "projects": engine.define_project,
        "tools": engine.define_tool,
        "players": engine.define_player,
        "rules": engine.define_rule,
        "customizationRules": engine.define_customization_rule,
    }
    if document.get("levelPolicy"):
        engine.set_level_policy(document["levelPolicy"])
        counts["levelPolicy"] = 1
    for section in SECTION_ORDER:
        entries = document.get(section) or []
        for entry in entries:
            appliers[section](entry)
        counts[section] = len(entries)
    return counts
