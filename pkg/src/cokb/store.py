"""Durable state: an append-only journal of accepted commands.

The journal doubles as a human-readable import file: one command per
line, prefixed by a `#seq|timestamp|agent|digest|` header.  Rejected
commands never reach the journal.  Snapshots are canonical sorted
renderings of the whole KB; equal hashes mean equal state.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass
from pathlib import Path

from .kb import KnowledgeBase
from .model import EditOutcome
from .notation.parser import format_fraction
from .notation.render import render_fe, render_sexpr


class StoreError(ValueError):
    pass


class GapInSequenceError(StoreError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"journal sequence gap: expected {expected}, got {got}")


class CorruptEntryError(StoreError):
    def __init__(self, sequence: int, detail: str):
        self.sequence = sequence
        super().__init__(f"corrupt journal entry at sequence {sequence}: {detail}")


@dataclass(frozen=True)
class JournalEntry:
    sequence: int
    timestamp: str
    agent: str
    command_text: str
    outcome_digest: str

    def render(self) -> str:
        return (f"#{self.sequence}|{self.timestamp}|{self.agent}|"
                f"{self.outcome_digest}| {self.command_text}")


_HEADER_RE = re.compile(r"^#(\d+)\|([^|]+)\|([^|]+)\|([0-9a-f]*)\| (.*)$")


def outcome_digest(outcome: EditOutcome) -> str:
    parts = [
        outcome.status.value,
        outcome.reason.value if outcome.reason else "",
        ",".join(sorted(c.render() for c in outcome.conflicts)),
        ",".join(i.render() for i in outcome.created),
        ",".join(i.render() for i in outcome.removed),
    ]
    if outcome.clone_report:
        r = outcome.clone_report
        parts.append(r.original_term.render() if r.original_term else "")
        parts.append(",".join(f"{c.new_term.render()}:{c.for_user}" for c in r.clones))
        parts.append(",".join(i.render() for i in r.rewritten_statements))
        parts.append(",".join(f"{x.old_statement.render()}>{x.new_statement.render()}"
                              for x in r.reattributed))
    blob = "|".join(parts).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


class Journal:
    """Append-only command log; entries are durable before acknowledgement."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._last = 0
        if self.path.exists():
            entries = self.read()
            if entries:
                self._last = entries[-1].sequence
        else:
            self.path.touch()

    @property
    def last_sequence(self) -> int:
        return self._last

    def append(self, entry: JournalEntry) -> None:
        if entry.sequence != self._last + 1:
            raise GapInSequenceError(self._last + 1, entry.sequence)
        line = entry.render() + "\n"
        fd = os.open(self.path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
        try:
            os.write(fd, line.encode("utf-8"))
            os.fsync(fd)
        finally:
            os.close(fd)
        self._last = entry.sequence

    def read(self) -> list[JournalEntry]:
        entries: list[JournalEntry] = []
        expected = 1
        for raw in self.path.read_text("utf-8").splitlines():
            if not raw.strip():
                continue
            m = _HEADER_RE.match(raw)
            if m is None:
                raise CorruptEntryError(expected, f"unparsable line: {raw[:60]!r}")
            seq = int(m.group(1))
            if seq != expected:
                raise GapInSequenceError(expected, seq)
            command = m.group(5)
            if not command.rstrip().endswith(";"):
                raise CorruptEntryError(seq, "command not ';'-terminated")
            entries.append(JournalEntry(seq, m.group(2), m.group(3), command.strip(),
                                        m.group(4)))
            expected += 1
        return entries


# --- snapshots -----------------------------------------------------------------

def snapshot(kb: KnowledgeBase) -> str:
    """Canonical sorted rendering of every object in the KB."""
    lines: list[str] = []
    for name in sorted(kb.sources):
        s = kb.sources[name]
        lines.append(f"source {name} {s.kind.value}")
    for key in sorted(kb.terms):
        t = kb.terms[key]
        names = ",".join(sorted(t.names))
        defs = ",".join(sorted(d.render() for d in t.definitions))
        process = " process" if t.is_process else ""
        lines.append(f"term {key} names={names} defs={defs}{process}")
    for key in sorted(kb.informal):
        lines.append(f"informal {key}")
    for link in sorted(kb.hierarchy.links(),
                       key=lambda l: (l.kind.value, l.frm, l.to, l.creator)):
        origin = link.origin.render() if link.origin else "-"
        lines.append(f"link {link.kind.value} {link.frm} -> {link.to} "
                     f"({link.creator}, {origin})")
    for key in sorted(kb.statements):
        s = kb.statements[key]
        lines.append(f"stmt {key} {s.kind.value} {s.creator} {s.created} "
                     f"{_render_statement(s)}")
    for slot in sorted(kb.ratings):
        r = kb.ratings[slot]
        lines.append(f"rating {r.id.render()} {r.rater} {r.obj.render()} "
                     f"{r.criterion} {format_fraction(r.value)}")
    for name in sorted(kb.measures):
        lines.append(f"measure {name} {render_sexpr(kb.measures[name])}")
    for name in sorted(kb.filters):
        f = kb.filters[name]
        lines.append(f"filter {name} {f.action} {render_sexpr(f.expr)}")
    for key in sorted(kb.clone_origin):
        lines.append(f"clone-origin {key} <- {kb.clone_origin[key]}")
    return "\n".join(lines) + "\n"


def _render_statement(s) -> str:
    from .model import LinkBody

    if isinstance(s.body, LinkBody):
        b = s.body
        return f"{b.source_term.render()} {b.relation.render()}: {b.target_term.render()}"
    return render_fe(s)


def snapshot_hash(kb: KnowledgeBase) -> str:
    return hashlib.sha256(snapshot(kb).encode("utf-8")).hexdigest()


def replay(journal_path: Path):
    """Rebuild a KB by re-executing the journal; returns the engine.

    Digest mismatches mean the journal no longer reproduces the state it
    recorded and abort with the offending sequence number.
    """
    from .engine import Engine

    return Engine.replay(Path(journal_path))
