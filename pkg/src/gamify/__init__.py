"""Centralized gamification engine for multi-tool work environments.

External tools report player behaviors over an authenticated HTTP API; the
engine evaluates administrator-defined rules and grants achievements,
maintaining profiles, levels, rankings, a social layer, interaction-graph
analytics, sentiment polarity, customization predicates, and a
pattern-matching assistant.
"""

from .engine import Engine
from .service import create_app

__version__ = "0.1.0"

__all__ = ["Engine", "create_app", "__version__"]
