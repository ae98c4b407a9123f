"""Administrator command line: serve the API, define entities, import/export
environments, replay event fixtures, and print reports.

Replay pushes a line-delimited event file through the exact ingestion path
the API uses, so a replayed environment answers queries identically to one
fed over HTTP.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import envdoc
from .engine import Engine
from .errors import GamifyError
from .service import create_app

ENTITY_KINDS = {
    "behavior-type": "define_behavior_type",
    "achievement-type": "define_achievement_type",
    "level-policy": "set_level_policy",
    "game": "define_game",
    "project": "define_project",
    "tool": "define_tool",
    "player": "define_player",
    "rule": "define_rule",
    "customization-rule": "define_customization_rule",
}


@click.group()
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("./gamify-data"),
              show_default=True, help="Directory holding the log and snapshots.")
@click.pass_context
def main(ctx: click.Context, data_dir: Path):
    """Gamification engine administration."""
    ctx.obj = data_dir


def _open_engine(data_dir: Path) -> Engine:
    try:
        return Engine(data_dir)
    except GamifyError as err:
        raise click.ClickException(err.message)




@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--admin-key", envvar="GAMIFY_ADMIN_KEY", required=True,
              help="Key for /api/admin endpoints (or env GAMIFY_ADMIN_KEY).")
@click.pass_obj
def serve(data_dir: Path, port: int, host: str, admin_key: str):
    """Run the HTTP API over the environment in --data-dir."""
    import uvicorn

    engine = _open_engine(data_dir)
    for warning in engine.recovery_warnings:
        click.echo(f"recovery: {warning}", err=True)
    click.echo(f"serving environment from {data_dir} on http://{host}:{port}")
    uvicorn.run(create_app(engine, admin_key=admin_key), host=host, port=port,
                log_level="warning")


@main.command()
@click.argument("entity", type=click.Choice(sorted(ENTITY_KINDS)))
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.pass_obj
def define(data_dir: Path, entity: str, file: Path):
    """Define one entity (or a JSON list of them) from FILE."""
    engine = _open_engine(data_dir)
    try:
        payload = json.loads(file.read_text(encoding="utf-8"))
    except ValueError as err:
        raise click.ClickException(f"{file}: invalid JSON: {err}")
    entries = payload if isinstance(payload, list) else [payload]
    method = getattr(engine, ENTITY_KINDS[entity])
    try:
        for entry in entries:
            method(entry)
    except GamifyError as err:
        raise click.ClickException(err.message)
    click.echo(f"defined {len(entries)} {entity}(s)")


@main.command(name="import")
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.pass_obj
def import_cmd(data_dir: Path, file: Path):
    """Import a full environment-definition document."""
    engine = _open_engine(data_dir)
    try:
        document = json.loads(file.read_text(encoding="utf-8"))
    except ValueError as err:
        raise click.ClickException(f"{file}: invalid JSON: {err}")
    try:
        counts = envdoc.import_environment(engine, document)
    except GamifyError as err:
        raise click.ClickException(err.message)
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    click.echo(f"imported: {summary}")


@main.command()
@click.argument("file", type=click.Path(path_type=Path))
@click.pass_obj
def export(data_dir: Path, file: Path):
    """Export the environment definition to FILE ('-' for stdout)."""
    engine = _open_engine(data_dir)
    text = envdoc.dump_environment(engine)
    if str(file) == "-":
        click.echo(text, nl=False)
    else:
        file.write_text(text, encoding="utf-8")
        click.echo(f"exported environment to {file}")


@main.command()
@click.argument("events_file", type=click.Path(exists=True, path_type=Path))
@click.option("--fresh", is_flag=True,
              help="Require an empty data directory (fail if events were already applied).")
@click.pass_obj
def replay(data_dir: Path, events_file: Path, fresh: bool):
    """Feed a line-delimited event file through the ingestion path."""
    engine = _open_engine(data_dir)
    if fresh and engine.rule_engine.events:
        engine.close()
        raise click.ClickException(
            f"--fresh requires an environment with no applied events, but {data_dir} "
            f"already holds {len(engine.rule_engine.events)}"
        )
    events = 0
    grants = 0
    duplicates = 0
    try:
        with open(events_file, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                except ValueError as err:
                    raise click.ClickException(
                        f"{events_file}:{line_no}: invalid JSON: {err}"
                    )
                try:
                    result = engine.ingest_event(data)
                except GamifyError as err:
                    raise click.ClickException(f"{events_file}:{line_no}: {err.message}")
                events += 1
                grants += len(result["grants"]) if not result["replay"] else 0
                duplicates += 1 if result["replay"] else 0
    finally:
        engine.close()
    click.echo(f"replayed {events} events -> {grants} grants ({duplicates} duplicates ignored)")


@main.command()
@click.argument("kind", type=click.Choice(["totals", "rankings", "communities", "grants"]))
@click.option("--point-type", default=None,
              help="Achievement type for rankings (default: the level basis).")
@click.option("--algorithm", default="louvain", show_default=True,
              type=click.Choice(["louvain", "girvan-newman"]))
@click.pass_obj
def report(data_dir: Path, kind: str, point_type: str, algorithm: str):
    """Print a deterministic report over the stored environment."""
    engine = _open_engine(data_dir)
    try:
        if kind == "totals":
            _report_totals(engine)
        elif kind == "rankings":
            _report_rankings(engine, point_type)
        elif kind == "communities":
            result = engine.communities(algorithm=algorithm)
            for index, community in enumerate(result["communities"], start=1):
                click.echo(f"community {index}: {' '.join(community)}")
            click.echo(f"modularity: {result['modularity']:.6f}")
        else:
            for grant in engine.grants_export():
                click.echo(json.dumps(grant, separators=(",", ":"), ensure_ascii=False))
    except GamifyError as err:
        raise click.ClickException(err.message)
    finally:
        engine.close()


def _report_totals(engine: Engine) -> None:
    types = sorted(engine.registry.achievement_types)
    header = ["player"] + types + ["level"]
    click.echo("\t".join(header))
    for player_id in sorted(engine.registry.players):
        result = engine.player_totals(player_id)
        row = [player_id] + [str(result["totals"][t]) for t in types] + [str(result["level"])]
        click.echo("\t".join(row))


def _report_rankings(engine: Engine, point_type: str) -> None:
    if point_type is None:
        basis = engine.registry.level_basis_type()
        if basis is None:
            raise click.ClickException("no level-basis point type; use --point-type")
        point_type = basis.identifier
    click.echo(f"ranking by {point_type}")
    for entry in engine.ranking_global(point_type):
        click.echo(f"{entry['rank']}\t{entry['player']}\t{entry['total']}")


if __name__ == "__main__":
    main()
