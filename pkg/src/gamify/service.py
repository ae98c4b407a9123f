"""HTTP API over the engine.

Authentication is header-based: tools send ``X-Tool-Id``/``X-Tool-Key``,
administrators ``X-Admin-Key``, and players an ``X-Player-Token`` issued at
player creation.  Behavior ingestion requires tool credentials; reads accept
any valid credential; player-scoped writes require that player's token (or
the admin key); everything under /api/admin requires the admin key.

Error bodies are ``{"code": <machine readable>, "message": <human text>}``.
"""

from __future__ import annotations

import logging
from typing import Optional

from fastapi import Depends, FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .engine import Engine
from .errors import (
    AlreadyFriends,
    AuthError,
    CorruptLog,
    DuplicateIdentifier,
    DuplicatePattern,
    EventValidationError,
    ExpressionError,
    GamifyError,
    EmptyIdentifier,
    InvalidDefinition,
    InvalidLevel,
    InvalidPeriod,
    SameSourceSink,
    SelfFriendship,
    UnknownAchievementType,
    UnknownBehaviorType,
    UnknownGame,
    UnknownPlayer,
    UnknownProject,
    UnknownTool,
)
from . import envdoc

logger = logging.getLogger(__name__)

_STATUS_BY_ERROR = [
    (AuthError, 401),
    (EventValidationError, 422),
    ((UnknownPlayer, UnknownTool, UnknownGame, UnknownProject,
      UnknownBehaviorType, UnknownAchievementType), 404),
    ((DuplicateIdentifier, AlreadyFriends, DuplicatePattern), 409),
    ((InvalidDefinition, InvalidPeriod, InvalidLevel, SelfFriendship,
      EmptyIdentifier, ExpressionError, SameSourceSink), 400),
    (CorruptLog, 500),
]


def _status_for(err: GamifyError) -> int:
    for types, status in _STATUS_BY_ERROR:
        if isinstance(err, types):
            return status
    return 400


def create_app(engine: Engine, admin_key: str,
               cors_origins: Optional[list[str]] = None) -> FastAPI:
    app = FastAPI(title="gamify", docs_url=None, redoc_url=None, openapi_url=None)
    # the player site runs in a browser on another origin; auth rides custom
    # headers, not cookies, so a permissive default is fine at desk scale
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins if cors_origins is not None else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(GamifyError)
    async def gamify_error_handler(request: Request, err: GamifyError):
        return JSONResponse(status_code=_status_for(err), content=err.to_dict())

    # -- credentials ---------------------------------------------------------

    def is_admin(request: Request) -> bool:
        return bool(admin_key) and request.headers.get("X-Admin-Key") == admin_key

    def is_tool(request: Request) -> bool:
        return engine.check_tool_credentials(
            request.headers.get("X-Tool-Id", ""),
            request.headers.get("X-Tool-Key", ""),
        )

    def token_player(request: Request) -> Optional[str]:
        return engine.find_player_by_token(request.headers.get("X-Player-Token", ""))

    def require_tool(request: Request) -> str:
        if not is_tool(request):
            raise AuthError("valid X-Tool-Id / X-Tool-Key headers required")
        return request.headers.get("X-Tool-Id", "")

    def require_admin(request: Request) -> None:
        if not is_admin(request):
            raise AuthError("valid X-Admin-Key header required")

    @app.middleware("http")
    async def authentication_gate(request: Request, call_next):
        """Every /api route except the health probe needs some credential
        before any routing or parameter validation happens.  CORS preflights
        pass through: browsers send them without credentials."""
        path = request.url.path
        if request.method != "OPTIONS" and path.startswith("/api") and path != "/api/health":
            if not (is_admin(request) or is_tool(request) or token_player(request)):
                return JSONResponse(
                    status_code=401,
                    content={"code": "unauthorized",
                             "message": "credentials required (tool, admin, or player token)"},
                )
        return await call_next(request)

    def require_player(request: Request, player_id: str) -> None:
        """The player themselves (by token) or the admin."""
        if is_admin(request):
            return
        if token_player(request) == player_id:
            return
        raise AuthError(f"X-Player-Token for {player_id} or X-Admin-Key required")

    # -- health ---------------------------------------------------------------

    @app.get("/api/health")
    def health():
        return {"status": "ok", "seq": engine.seq}

    # -- ingestion --------------------------------------------------------------

    @app.post("/api/behaviors")
    async def post_behavior(request: Request, tool_id: str = Depends(require_tool)):
        body = await request.json()
        if not isinstance(body, dict):
            raise EventValidationError("event body must be a JSON object")
        body.setdefault("tool", tool_id)
        if body["tool"] != tool_id:
            raise AuthError(f"tool {tool_id} cannot submit events for {body['tool']}")
        return engine.ingest_event(body)

    # -- player reads ---------------------------------------------------------------

    @app.get("/api/players/{player_id}/profile")
    def get_profile(player_id: str, request: Request):
        return engine.profile(player_id)

    @app.get("/api/players/{player_id}/achievements")
    def get_achievements(player_id: str, request: Request):
        return {"grants": engine.achievements(player_id)}

    @app.get("/api/players/{player_id}/customization")
    def get_customization(player_id: str, request: Request):
        return {"variables": engine.customization(player_id)}

    @app.get("/api/players/{player_id}/friends")
    def get_friends(player_id: str, request: Request):
        return {"friends": engine.profile(player_id)["friends"]}

    @app.get("/api/players/{player_id}/messages")
    def get_messages(player_id: str, request: Request):
        return {"messages": engine.messages(player_id)}

    @app.get("/api/players/{player_id}/notifications")
    def get_notifications(player_id: str, request: Request):
        return {"notifications": engine.notifications(player_id)}

    @app.get("/api/players/{player_id}/quests")
    def get_quests(player_id: str, request: Request):
        return {"quests": engine.quests(player_id)}

    @app.get("/api/players/{player_id}/sentiment")
    def get_sentiment(player_id: str, request: Request):
        return {
            "texts": engine.sentiment_texts(player_id),
            "rollingPolarity": engine.sentiment.rolling_polarity(player_id, engine.now()),
        }

    # -- player writes -----------------------------------------------------------------

    @app.post("/api/players/{player_id}/friends")
    async def post_friend(player_id: str, request: Request):
        require_player(request, player_id)
        body = await request.json()
        return engine.befriend(player_id, body.get("player", ""))

    @app.post("/api/players/{player_id}/messages")
    async def post_message(player_id: str, request: Request):
        require_player(request, player_id)
        body = await request.json()
        return engine.send_message(player_id, body.get("to", ""), body.get("body", ""))

    @app.post("/api/players/{player_id}/quests")
    async def post_quest(player_id: str, request: Request):
        require_player(request, player_id)
        body = await request.json()
        return engine.create_quest(player_id, body.get("challenged", ""),
                                   body.get("goal", {}), body.get("period", {}))

    @app.post("/api/players/{player_id}/notifications/{notification_id}/read")
    def post_notification_read(player_id: str, notification_id: int, request: Request):
        require_player(request, player_id)
        engine.mark_notification_read(notification_id)
        return {"ok": True}

    @app.post("/api/assistant/{player_id}/messages")
    async def post_assistant(player_id: str, request: Request):
        require_player(request, player_id)
        body = await request.json()
        return engine.assistant_message(player_id, body.get("text", ""))

    # -- rankings -------------------------------------------------------------------------

    @app.get("/api/rankings/global")
    def get_ranking_global(request: Request, pointType: str = Query(...),
                           limit: Optional[int] = Query(None)):
        return {"ranking": engine.ranking_global(pointType, limit)}

    @app.get("/api/rankings/friends")
    def get_ranking_friends(request: Request, player: str = Query(...),
                            pointType: str = Query(...)):
        return {"ranking": engine.ranking_friends(player, pointType)}

    @app.get("/api/rankings/neighborhood")
    def get_ranking_neighborhood(request: Request, player: str = Query(...),
                                 pointType: str = Query(...), k: int = Query(1)):
        return {"ranking": engine.ranking_neighborhood(player, pointType, k)}

    # -- analytics ---------------------------------------------------------------------------

    def parse_labels(labels: Optional[str]) -> Optional[set[str]]:
        if labels is None:
            return None
        return {piece for piece in (p.strip() for p in labels.split(",")) if piece}

    @app.get("/api/analysis/communities")
    def get_communities(request: Request, algorithm: str = Query("louvain"),
                        project: Optional[str] = Query(None),
                        labels: Optional[str] = Query(None),
                        targetCommunities: Optional[int] = Query(None)):
        return engine.communities(algorithm=algorithm, project=project,
                                  labels=parse_labels(labels),
                                  target_communities=targetCommunities)

    @app.get("/api/analysis/scc")
    def get_scc(request: Request):
        return engine.scc()

    @app.get("/api/analysis/maxflow")
    def get_maxflow(request: Request, source: str = Query(...), sink: str = Query(...)):
        return engine.maxflow(source, sink)

    @app.get("/api/graph/export")
    def get_graph_export(request: Request, project: Optional[str] = Query(None),
                         labels: Optional[str] = Query(None)):
        return engine.graph_export(project=project, labels=parse_labels(labels))

    # -- admin ------------------------------------------------------------------------------------

    admin_resources = {
        "behavior-types": (engine.define_behavior_type,
                           lambda: [b.to_dict() for b in engine.registry.behavior_types.values()]),
        "achievement-types": (engine.define_achievement_type,
                              lambda: [a.to_dict() for a in engine.registry.achievement_types.values()]),
        "rules": (engine.define_rule,
                  lambda: [r.to_dict() for r in engine.rule_engine.rules.values()]),
        "games": (engine.define_game,
                  lambda: [g.to_dict() for g in engine.registry.games.values()]),
        "projects": (engine.define_project,
                     lambda: [p.to_dict() for p in engine.registry.projects.values()]),
        "tools": (engine.define_tool,
                  lambda: [t.to_dict() for t in engine.registry.tools.values()]),
        "players": (engine.define_player,
                    lambda: [p.to_dict() for p in engine.registry.players.values()]),
        "customization-rules": (engine.define_customization_rule,
                                lambda: [c.to_dict() for c in engine.customize.rules.values()]),
    }

    def register_admin_resource(name: str, create, list_all):
        @app.post(f"/api/admin/{name}", name=f"create_{name}")
        async def create_resource(request: Request):
            require_admin(request)
            return create(await request.json())

        @app.get(f"/api/admin/{name}", name=f"list_{name}")
        def list_resource(request: Request):
            require_admin(request)
            return {"items": list_all()}

    for name, (create, list_all) in admin_resources.items():
        register_admin_resource(name, create, list_all)

    @app.put("/api/admin/level-policy")
    async def put_level_policy(request: Request):
        require_admin(request)
        return engine.set_level_policy(await request.json())

    @app.get("/api/admin/level-policy")
    def get_level_policy(request: Request):
        require_admin(request)
        policy = engine.registry.level_policy
        return policy.to_dict() if policy else None

    @app.get("/api/admin/environment")
    def get_environment(request: Request):
        require_admin(request)
        return envdoc.export_environment(engine)

    @app.put("/api/admin/environment")
    async def put_environment(request: Request):
        require_admin(request)
        return {"imported": envdoc.import_environment(engine, await request.json())}

    @app.post("/api/admin/snapshot")
    def post_snapshot(request: Request):
        require_admin(request)
        path = engine.snapshot()
        return {"snapshot": path.name, "seq": engine.seq}

    @app.post("/api/admin/quests/evaluate")
    def post_evaluate_quests(request: Request):
        require_admin(request)
        return {"changes": engine.evaluate_quests()}

    return app
