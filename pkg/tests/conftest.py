import datetime as dt
import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from gamify import envdoc
from gamify.engine import Engine
from gamify.service import create_app

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "gamify" / "data" / "fixtures"

ADMIN_KEY = "test-admin-key"
ADMIN = {"X-Admin-Key": ADMIN_KEY}
TOOL_PM = {"X-Tool-Id": "tool-pm", "X-Tool-Key": "pm-secret"}
TOOL_TESTS = {"X-Tool-Id": "tool-tests", "X-Tool-Key": "tests-secret"}
JOHN = {"X-Player-Token": "john-token"}
ANA = {"X-Player-Token": "ana-token"}


class FrozenClock:
    """Deterministic, manually advanced clock for engines under test."""

    def __init__(self, start="2021-04-12T09:00:00Z"):
        from gamify.timeutil import parse_utc

        self.current = parse_utc(start)

    def __call__(self):
        return self.current

    def advance(self, **kwargs):
        self.current += dt.timedelta(**kwargs)


def load_fixture_doc(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


def load_fixture_events(name: str) -> list[dict]:
    lines = (FIXTURES / name).read_text(encoding="utf-8").splitlines()
    return [json.loads(line) for line in lines if line.strip()]


def make_engine(tmp_path, subdir="data", clock=None, **kwargs) -> Engine:
    kwargs.setdefault("fsync", False)  # tests: same bytes, faster
    return Engine(Path(tmp_path) / subdir, clock=clock or FrozenClock(), **kwargs)


def make_cases_engine(tmp_path, subdir="data", clock=None) -> Engine:
    engine = make_engine(tmp_path, subdir=subdir, clock=clock)
    envdoc.import_environment(engine, load_fixture_doc("cases_environment.json"))
    return engine


def make_client(engine: Engine) -> TestClient:
    return TestClient(create_app(engine, admin_key=ADMIN_KEY))


@pytest.fixture
def cases_engine(tmp_path):
    engine = make_cases_engine(tmp_path)
    yield engine
    engine.close()


@pytest.fixture
def cases_client(cases_engine):
    return make_client(cases_engine)
