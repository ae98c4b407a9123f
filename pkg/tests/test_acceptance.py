"""Acceptance gate: one test per criterion, at the stated tolerances.

Each criterion prints a single [PASS] line when it holds (a failure shows up
as an ordinary test failure for that criterion).  Run with ``pytest -v -s
tests/test_acceptance.py`` to see the lines.
"""

import datetime as dt
import json
import random
import time
from pathlib import Path

import pytest
from click.testing import CliRunner

from gamify import expr as E
from gamify import graph as G
from gamify import model as M
from gamify import rules as R
from gamify import sentiment as SE
from gamify.cli import main as cli_main
from gamify.engine import Engine

from conftest import (
    ADMIN,
    FIXTURES,
    TOOL_PM,
    load_fixture_doc,
    load_fixture_events,
    make_cases_engine,
    make_client,
    make_engine,
)
from _oracles import (
    aiml_best_pattern,
    best_partition_bruteforce,
    community_structured_graph,
    min_cut_bruteforce,
    oracle_replay,
    random_scope,
    random_typed_expr,
    ref_outcome,
    sccs_by_closure,
)

UTC = dt.timezone.utc


def report(line: str, started: float) -> None:
    print(f"\n[PASS] {line} ({time.monotonic() - started:.2f}s)")


# ---------------------------------------------------------------------------
# Criterion 1: the level table
# ---------------------------------------------------------------------------

def test_c1_level_table():
    started = time.monotonic()
    policy = M.LevelPolicy(a=1, b=1.4, c=2)
    got = [M.level_threshold(policy, level) for level in range(1, 10)]
    assert got == [1, 3, 7, 14, 28, 56, 111, 217, 426]
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    report("C1 level table: thresholds 1..9 match the exponential curve exactly", started)


# ---------------------------------------------------------------------------
# Criterion 2: reference rule end-to-end over the API
# ---------------------------------------------------------------------------

def test_c2_reference_rule_end_to_end(tmp_path):
    started = time.monotonic()
    engine = make_cases_engine(tmp_path)
    client = make_client(engine)

    def submit(n, est, real):
        body = {
            "eventId": f"case-{n}", "behaviorType": "GSE_TASK_COMPLETED",
            "player": "john", "tool": "tool-pm", "project": "proj-alpha",
            "occurredAt": f"2021-04-1{n}T10:00:00Z",
            "artifactId": "45", "artifactName": "User authentication",
            "taskAttrs": {"estimatedEffort": est, "realEffort": real},
        }
        response = client.post("/api/behaviors", json=body, headers=TOOL_PM)
        assert response.status_code == 200
        return response.json()["grants"]

    grants1 = submit(1, 20, 18)
    assert [(g["achievementType"], g["amount"]) for g in grants1] == [("XP", 20)]
    grants2 = submit(2, 20, 22)
    assert [(g["achievementType"], g["amount"]) for g in grants2] == [("XP", 18)]
    grants3 = submit(3, 20, 8)
    assert [(g["achievementType"], g["amount"]) for g in grants3] == [
        ("XP", 20), ("STAR_PERFORMER", 1),
    ]
    assert len(grants3) == 2
    expected_message = "Congrats! You've completed a task! (Task 45, User authentication)"
    assert grants1[0]["message"] == expected_message
    report("C2 reference rule: grants 20 / 18 / 20+badge with the exact message", started)


# ---------------------------------------------------------------------------
# Criterion 3: cross-tool accumulation on the behavior-catalog fixture
# ---------------------------------------------------------------------------

def test_c3_cross_tool_accumulation(tmp_path):
    started = time.monotonic()
    data = tmp_path / "data"
    runner = CliRunner()
    result = runner.invoke(cli_main, ["--data-dir", str(data), "import",
                                      str(FIXTURES / "catalog_environment.json")])
    assert result.exit_code == 0, result.output
    result = runner.invoke(cli_main, ["--data-dir", str(data), "replay",
                                      str(FIXTURES / "catalog_events.jsonl"), "--fresh"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(cli_main, ["--data-dir", str(data), "report", "grants"])
    assert result.exit_code == 0, result.output

    grant_log = [json.loads(line) for line in result.output.strip().splitlines()]
    events = load_fixture_events("catalog_events.jsonl")
    tool_of_event = {e["eventId"]: e["tool"] for e in events}
    assert len({tool_of_event[e["eventId"]] for e in events}) == 4

    # independent summation of the grant log
    independent: dict = {}
    contributing_tools: dict = {}
    for grant in grant_log:
        player = grant["playerId"]
        independent.setdefault(player, {})
        independent[player][grant["achievementType"]] = (
            independent[player].get(grant["achievementType"], 0) + grant["amount"]
        )
        contributing_tools.setdefault(player, set()).add(
            tool_of_event[grant["triggeringEventId"]]
        )

    engine = Engine(data, fsync=False)
    try:
        for player_id in engine.registry.players:
            expected = independent.get(player_id, {})
            totals = engine.player_totals(player_id)["totals"]
            for achievement_type, total in totals.items():
                assert total == expected.get(achievement_type, 0), (player_id, achievement_type)
    finally:
        engine.close()

    # rewards genuinely mount up across tools
    assert all(len(tools) >= 2 for tools in contributing_tools.values())
    elapsed = time.monotonic() - started
    assert elapsed < 60
    report("C3 cross-tool accumulation: totals equal the independently summed "
           "grant log across 4 tools", started)


# ---------------------------------------------------------------------------
# Criterion 4: expression DSL differential + the customization predicates
# ---------------------------------------------------------------------------

def test_c4_expression_dsl():
    started = time.monotonic()
    rng = random.Random(20210412)
    for _ in range(1000):
        want = rng.choice(["num", "bool"])
        ast = random_typed_expr(rng, want)
        scope = random_scope(rng)
        expected = ref_outcome(ast, scope, want)
        try:
            got = ("ok", E.eval_bool(ast, scope) if want == "bool" else E.eval_number(ast, scope))
        except Exception as err:  # noqa: BLE001 - compared against oracle outcome
            got = ("err", type(err).__name__)
        assert got == expected

    suggest = E.parse("Level <5 & Following <20")
    assert E.eval_bool(suggest, {"Level": 3, "Following": 10}) is True
    tour = E.parse("Level <2")
    assert E.eval_bool(tour, {"Level": 2}) is False
    elapsed = time.monotonic() - started
    assert elapsed < 30
    report("C4 expression DSL: 1000 random expressions match the reference "
           "interpreter; customization predicates reproduce their outcomes", started)


# ---------------------------------------------------------------------------
# Criterion 5: graph analytics against brute-force oracles
# ---------------------------------------------------------------------------

def _graph_from_pairs(nodes, pairs):
    at = dt.datetime(2021, 4, 1, tzinfo=UTC)
    edges = [G.Edge(source=u, target=v, label="Helps", event_id=f"e{i}", at=at)
             for i, (u, v) in enumerate(pairs)]
    return G.InteractionGraph(nodes=sorted(nodes), edges=edges)


def test_c5_graph_oracles():
    started = time.monotonic()
    rng = random.Random(7)

    # community detection on 200 structured random graphs
    for _ in range(200):
        nodes, pairs = community_structured_graph(rng)
        g = _graph_from_pairs(nodes, pairs)
        weights = {frozenset(p): w for p, w in g.undirected_weights().items()}
        best_q, _ = best_partition_bruteforce(g.nodes, weights)
        gn = G.girvan_newman(g)
        assert abs(gn.modularity - best_q) < 1e-9
        assert G.louvain(g).modularity >= 0.9 * best_q - 1e-9

    # Tarjan on 200 random digraphs vs the transitive-closure oracle
    for _ in range(200):
        n = rng.randint(1, 7)
        nodes = [f"p{i}" for i in range(n)]
        pairs = [(u, v) for u in nodes for v in nodes if u != v and rng.random() < 0.3]
        got = G.tarjan_scc(_graph_from_pairs(nodes, pairs))
        expected = sccs_by_closure(nodes, pairs)
        assert sorted(map(tuple, got)) == sorted(tuple(sorted(c)) for c in expected)

    # Edmonds-Karp on 200 random capacity networks vs cut enumeration
    for _ in range(200):
        n = rng.randint(2, 7)
        nodes = [f"p{i}" for i in range(n)]
        capacities = {(u, v): float(rng.randint(1, 9))
                      for u in nodes for v in nodes if u != v and rng.random() < 0.35}
        g = _graph_from_pairs(nodes, sorted(capacities))
        result = G.edmonds_karp(g, "p0", f"p{n - 1}", capacity=dict(capacities))
        assert result["maxFlow"] == min_cut_bruteforce(nodes, capacities, "p0", f"p{n - 1}")

    two_triangles = _graph_from_pairs(
        "ABCDEF",
        [("A", "B"), ("B", "C"), ("C", "A"), ("D", "E"), ("E", "F"), ("F", "D")],
    )
    for algorithm in (G.louvain, G.girvan_newman):
        partition = algorithm(two_triangles)
        assert partition.communities == [["A", "B", "C"], ["D", "E", "F"]]
        assert abs(partition.modularity - 0.5) < 1e-9

    elapsed = time.monotonic() - started
    assert elapsed < 120
    report("C5 graph oracles: GN = brute-force optimum, Louvain >= 0.9x, "
           "Tarjan = closure oracle, max flow = min cut, triangles at Q=0.5", started)


# ---------------------------------------------------------------------------
# Criterion 6: rule-kind counting semantics over random event streams
# ---------------------------------------------------------------------------

def _counting_environment():
    registry = M.Registry()
    registry.define_behavior_type(M.BehaviorTypeDef("GSE_ERROR_DETECTED", M.SIMPLE))
    registry.define_achievement_type(M.AchievementType("XP", M.POINTS, is_level_basis=True))
    registry.set_level_policy(M.LevelPolicy(a=1, b=1.4, c=2))
    registry.define_game(M.Game("game-1"))
    registry.define_project(M.Project("proj-1", active_game_ids={"game-1"}))
    registry.define_tool(M.Tool("tool-1", secret="s"))
    for player in ("ana", "bruno", "carla"):
        registry.define_player(M.Player(player))
    return registry


def test_c6_rule_kind_properties():
    started = time.monotonic()
    rng = random.Random(31415)
    for _ in range(500):
        registry = _counting_environment()
        engine = R.RuleEngine(registry)
        engine.define_rule(R.GameRule(
            id="r-rep", name="", game_id="game-1",
            source_behavior_type="GSE_ERROR_DETECTED",
            kind=R.REPETITIVE, repetition_count=3,
            outcomes=[R.AchievementOutcome("XP", "true", modifier_source="5")],
        ))
        engine.define_rule(R.GameRule(
            id="r-week", name="", game_id="game-1",
            source_behavior_type="GSE_ERROR_DETECTED",
            kind=R.INTERVAL_REPETITIVE, repetition_count=2, interval=R.WEEK,
            outcomes=[R.AchievementOutcome("XP", "true", modifier_source="2",
                                           first_time_only=True)],
        ))
        oracle_rules = [
            {"id": "r-rep", "source_type": "GSE_ERROR_DETECTED", "game_id": "game-1",
             "kind": "Repetitive", "n": 3, "interval": None, "window": None,
             "outcomes": [{"atype": "XP", "cond": lambda s: True,
                           "modifier": lambda s: 5.0}]},
            {"id": "r-week", "source_type": "GSE_ERROR_DETECTED", "game_id": "game-1",
             "kind": "IntervalRepetitive", "n": 2, "interval": "Week", "window": None,
             "outcomes": [{"atype": "XP", "cond": lambda s: True,
                           "modifier": lambda s: 2.0, "first_time_only": True}]},
        ]

        base = dt.datetime(2021, 3, 1, tzinfo=UTC)
        got = []
        oracle_events = []
        for i in range(rng.randint(5, 25)):
            player = rng.choice(["ana", "bruno", "carla"])
            at = base + dt.timedelta(hours=rng.randint(0, 24 * 45))
            event = M.BehaviorEvent(
                event_id=f"e{i}", behavior_type="GSE_ERROR_DETECTED",
                player=player, tool="tool-1", project="proj-1", occurred_at=at,
            )
            for g in engine.evaluate_event(event):
                got.append((g.player_id, g.achievement_type, g.amount,
                            g.triggering_event_id, g.rule_id, g.outcome_index))
            oracle_events.append({
                "event_id": f"e{i}", "type": "GSE_ERROR_DETECTED", "player": player,
                "target": None, "active_games": {"game-1"}, "at": at, "scope": {},
            })
        assert got == oracle_replay(oracle_rules, oracle_events)

        first_time_counts: dict = {}
        for player, atype, amount, event_id, rule_id, outcome_i in got:
            if rule_id == "r-week":
                key = player
                first_time_counts[key] = first_time_counts.get(key, 0) + 1
        assert all(count <= 1 for count in first_time_counts.values())

    elapsed = time.monotonic() - started
    assert elapsed < 60
    report("C6 rule kinds: repetitive N=3 and weekly N=2 rules match the "
           "log-replay oracle over 500 random streams; first-time gate holds", started)


# ---------------------------------------------------------------------------
# Criterion 7: durability (kill and recover at random prefixes)
# ---------------------------------------------------------------------------

def _durability_events(count=1000):
    rng = random.Random(99)
    events = []
    base = dt.datetime(2021, 4, 5, 8, 0, tzinfo=UTC)
    task_types = {"GSE_REPORT_EFFORT": "effort", "GSE_TASK_COMPLETED": "task",
                  "GSE_RUN_UNIT_TESTS": "grade"}
    types = ["GSE_CREATE_TASK", "GSE_REPORT_EFFORT", "GSE_TASK_COMPLETED",
             "GSE_REGISTER_REQ", "GSE_CLOSE_ISSUE", "GSE_ADD_ATTACHMENT_REQ",
             "GSE_RUN_UNIT_TESTS", "GSE_SERIOUS_BUG_PROD", "GSE_CLOSE_REQ_BOOK"]
    tools = {"GSE_CREATE_TASK": "tool-project-mgmt", "GSE_REPORT_EFFORT": "tool-project-mgmt",
             "GSE_TASK_COMPLETED": "tool-project-mgmt", "GSE_REGISTER_REQ": "tool-project-mgmt",
             "GSE_CLOSE_ISSUE": "tool-testplans", "GSE_ADD_ATTACHMENT_REQ": "tool-issues",
             "GSE_RUN_UNIT_TESTS": "tool-unittests", "GSE_SERIOUS_BUG_PROD": "tool-issues",
             "GSE_CLOSE_REQ_BOOK": "tool-issues"}
    for i in range(count):
        btype = rng.choice(types)
        at = base + dt.timedelta(minutes=i * 17 + rng.randint(0, 9))
        event = {
            "eventId": f"d{i:05d}", "behaviorType": btype,
            "player": rng.choice(["ana", "bruno", "carla", "diego", "eva"]),
            "tool": tools[btype], "project": rng.choice(["proj-main", "proj-side"]),
            "occurredAt": at.isoformat().replace("+00:00", "Z"),
            "artifactId": str(100 + i), "artifactName": f"Artifact {i}",
        }
        shape = task_types.get(btype)
        if shape == "effort":
            event["taskAttrs"] = {"realEffort": rng.randint(1, 9)}
        elif shape == "task":
            event["taskAttrs"] = {"estimatedEffort": rng.choice([8, 16, 24]),
                                  "realEffort": rng.randint(4, 30)}
        elif shape == "grade":
            event["taskAttrs"] = {"grade": rng.choice([60, 80, 90, 100])}
        events.append(event)
    return events


def _read_endpoint_bytes(engine) -> dict:
    client = make_client(engine)
    captures = {}
    for player in sorted(engine.registry.players):
        for endpoint in ("profile", "achievements", "customization"):
            response = client.get(f"/api/players/{player}/{endpoint}", headers=ADMIN)
            assert response.status_code == 200
            captures[f"{player}/{endpoint}"] = response.content
    for url, params in [
        ("/api/rankings/global", {"pointType": "XP"}),
        ("/api/analysis/communities", {"algorithm": "louvain"}),
        ("/api/analysis/scc", {}),
        ("/api/admin/environment", {}),
    ]:
        response = client.get(url, params=params, headers=ADMIN)
        assert response.status_code == 200
        captures[url] = response.content
    return captures


def test_c7_durability(tmp_path):
    started = time.monotonic()
    events = _durability_events(1000)
    doc = load_fixture_doc("catalog_environment.json")

    def build(subdir, cut=None, torn=False):
        from gamify import envdoc

        directory = Path(tmp_path) / subdir
        engine = make_engine(tmp_path, subdir=subdir)
        envdoc.import_environment(engine, doc)
        for event in events[: cut if cut is not None else len(events)]:
            engine.ingest_event(event)
        if cut is None:
            return engine, directory
        engine.close()  # kill
        if torn:
            with open(directory / "log.jsonl", "a", encoding="utf-8") as fh:
                fh.write('{"seq": 999999, "at": "2021-04-')  # torn final write
        recovered = Engine(directory, fsync=False)
        if torn:
            assert recovered.recovery_warnings
        for event in events[cut:]:
            recovered.ingest_event(event)
        return recovered, directory

    uninterrupted, _ = build("full")
    expected = _read_endpoint_bytes(uninterrupted)
    uninterrupted.close()

    rng = random.Random(5)
    cuts = [rng.randint(1, 999) for _ in range(3)]
    for index, cut in enumerate(cuts):
        engine, _ = build(f"cut{index}", cut=cut, torn=(index == 0))
        got = _read_endpoint_bytes(engine)
        engine.close()
        assert got == expected, f"divergence after recovery at prefix {cut}"

    elapsed = time.monotonic() - started
    assert elapsed < 120
    report(f"C7 durability: recovery at prefixes {cuts} (one with a torn tail) "
           "answers byte-identical to the uninterrupted run", started)


# ---------------------------------------------------------------------------
# Criterion 8: desk-scale substitutions for the unreproducible claims
# ---------------------------------------------------------------------------

def test_c8_sentiment_substitute_suite():
    started = time.monotonic()
    rng = random.Random(2718)
    vocabulary = ["great", "awful", "fixed", "broken", "meeting", "deploy", "ok",
                  "thanks", "bug", "love", "hate", "the", "a", "xyzzy"]

    # determinism and score range
    for _ in range(300):
        text = " ".join(rng.choice(vocabulary) for _ in range(rng.randint(0, 15)))
        first = SE.classify(text)
        assert first == SE.classify(text)
        assert -1.0 <= first.score <= 1.0
        assert first.label == SE.label_for_score(first.score)

    # five-day window arithmetic
    now = dt.datetime(2021, 4, 15, 12, 0, tzinfo=UTC)
    log = SE.SentimentLog()
    log.record("p", "great", now - dt.timedelta(days=1))     # +1, inside
    log.record("p", "awful", now - dt.timedelta(days=2))     # -1, inside
    log.record("p", "meeting", now - dt.timedelta(days=3))   # 0, inside
    log.record("p", "awful", now - dt.timedelta(days=6))     # outside
    assert log.rolling_polarity("p", now) == 0.0
    assert SE.SentimentLog().rolling_polarity("p", now) == 0.0

    # shift invariance
    for delta in (dt.timedelta(days=11), dt.timedelta(days=-3)):
        shifted = SE.SentimentLog()
        shifted.record("p", "great", now - dt.timedelta(days=1) + delta)
        shifted.record("p", "awful", now - dt.timedelta(days=2) + delta)
        assert shifted.rolling_polarity("p", now + delta) == log.rolling_polarity(
            "p", now
        ) == 0.0

    report("C8 desk-scale substitution: the private-corpus SVM precision claim and "
           "the case-study effort figure are out of reproducible scope; the "
           "deterministic sentiment property suite passes instead", started)
