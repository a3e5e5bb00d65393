"""Command-line client: local KB management plus a thin HTTP client.

The KB directory comes from --kb or the COKB_KB environment variable.
`repl` and `submit` talk to a running server when --server is given and
fall back to an in-process engine otherwise.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from .engine import Engine, CommandResponse
from .notation.kif import KifUnsupported, render_kif
from .notation.lexer import ParseError, split_units
from .store import snapshot as kb_snapshot


def _kb_dir(kb: str | None) -> Path:
    path = kb or os.environ.get("COKB_KB") or "."
    return Path(path)


def _describe(response: CommandResponse) -> str:
    o = response.outcome
    if o is None:
        if response.tree_text is not None:
            return response.tree_text
        return "\n".join(response.results)
    parts = [o.status.value]
    if o.reason:
        parts.append(o.reason.value)
    if o.conflicts:
        parts.append("conflicts=" + ",".join(c.render() for c in o.conflicts))
    if o.created:
        parts.append("created=" + ",".join(i.render() for i in o.created))
    if o.removed:
        parts.append("removed=" + ",".join(i.render() for i in o.removed))
    if o.clone_report and o.clone_report.clones:
        parts.append("clones=" + ",".join(
            c.new_term.render() for c in o.clone_report.clones))
    if o.warnings:
        parts.append("warnings=" + ",".join(o.warnings))
    return " ".join(parts)


@click.group()
def main():
    """Collaborative knowledge-base server and client."""


@main.command()
@click.argument("directory", type=click.Path(path_type=Path))
def init(directory: Path):
    """Create a KB directory with an empty journal."""
    directory.mkdir(parents=True, exist_ok=True)
    Engine.open(directory)
    click.echo(f"initialized KB at {directory}")


@main.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.option("--kb", type=click.Path(path_type=Path), default=None)
@click.option("--as", "agent", default="pm", help="agent for headerless commands")
def load(file: Path, kb: Path | None, agent: str):
    """Run a command file against the KB, printing one outcome per command."""
    engine = Engine.open(_kb_dir(kb))
    for response in engine.load(file, default_agent=agent):
        click.echo(_describe(response))


@main.command()
@click.option("--kb", type=click.Path(path_type=Path), default=None)
@click.option("--port", default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--frontend", type=click.Path(path_type=Path), default=None,
              help="directory with built web client assets")
def serve(kb: Path | None, port: int, host: str, frontend: Path | None):
    """Serve the HTTP API."""
    import uvicorn

    from .service import create_app

    engine = Engine.open(_kb_dir(kb))
    app = create_app(engine, frontend_dir=frontend)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--as", "agent", required=True, help="acting user")
@click.option("--kb", type=click.Path(path_type=Path), default=None)
@click.option("--server", default=None, help="server URL (thin-client mode)")
def repl(agent: str, kb: Path | None, server: str | None):
    """Interactive command loop (`;`-terminated commands)."""
    runner = _make_runner(agent, kb, server)
    click.echo(f"acting as {agent}; end commands with ';', Ctrl-D to quit")
    buffer = ""
    while True:
        try:
            prompt = "... " if buffer else "kb> "
            buffer += input(prompt)
        except EOFError:
            break
        if ";" not in buffer:
            buffer += "\n"
            continue
        try:
            for unit in split_units(buffer):
                click.echo(runner(unit + ";"))
        except ParseError as exc:
            click.echo(f"parse error: {exc}")
        buffer = ""


@main.command()
@click.argument("command")
@click.option("--as", "agent", required=True)
@click.option("--kb", type=click.Path(path_type=Path), default=None)
@click.option("--server", default=None)
def submit(command: str, agent: str, kb: Path | None, server: str | None):
    """Submit a single command."""
    runner = _make_runner(agent, kb, server)
    click.echo(runner(command))


def _make_runner(agent: str, kb: Path | None, server: str | None):
    if server:
        import httpx

        def run(text: str) -> str:
            response = httpx.post(f"{server.rstrip('/')}/commands",
                                  json={"text": text},
                                  headers={"X-User": agent})
            body = response.json()
            if "error" in body:
                return f"{body['error']}: {body.get('detail', '')}"
            outcome = body.get("outcome")
            if outcome is None:
                return body.get("tree_text") or "\n".join(body.get("results", []))
            parts = [outcome["status"]]
            if outcome.get("reason"):
                parts.append(outcome["reason"])
            if outcome.get("conflicts"):
                parts.append("conflicts=" + ",".join(
                    f"{c['object']}:{c['kind']}" for c in outcome["conflicts"]))
            if outcome.get("created"):
                parts.append("created=" + ",".join(outcome["created"]))
            return " ".join(parts)

        return run

    engine = Engine.open(_kb_dir(kb))

    def run_local(text: str) -> str:
        return _describe(engine.execute(agent, text))

    return run_local


@main.command()
@click.option("--kb", type=click.Path(path_type=Path), default=None)
@click.option("--no-replay", is_flag=True, help="skip the journal replay check")
def check(kb: Path | None, no_replay: bool):
    """Run the invariant suite against the KB."""
    engine = Engine.open(_kb_dir(kb))
    problems = engine.check_invariants(include_replay=not no_replay)
    if problems:
        for p in problems:
            click.echo(f"FAIL {p}")
        sys.exit(1)
    click.echo("ok: all invariants hold")


@main.command()
@click.option("--kb", type=click.Path(path_type=Path), default=None)
@click.option("--kif", "fmt", flag_value="kif")
@click.option("--snapshot", "fmt", flag_value="snapshot", default=True)
def export(kb: Path | None, fmt: str):
    """Export the KB as KIF statements or a canonical snapshot."""
    engine = Engine.open(_kb_dir(kb))
    if fmt == "snapshot":
        click.echo(kb_snapshot(engine.kb), nl=False)
        return
    for key in sorted(engine.kb.statements):
        stmt = engine.kb.statements[key]
        try:
            click.echo(render_kif(stmt))
        except (KifUnsupported, ValueError):
            continue


if __name__ == "__main__":
    main()
