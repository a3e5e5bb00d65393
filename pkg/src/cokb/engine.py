"""Command execution: the single serialized writer over the shared KB.

Every mutating command runs against a deep copy of the state; the copy
replaces the live KB only when the outcome is accepted, so a rejected
command leaves the state bit-identical.  Accepted commands append one
journal entry; replaying the journal reproduces the state exactly
(timestamps and identifier counters come from the journal).
"""

from __future__ import annotations

import copy
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .evaluation import submit_rating
from .hierarchy import TreeNode, UnknownObjectError
from .kb import FilterDef, KnowledgeBase
from .matcher import CompareKind, compare
from .model import (
    Conflict,
    ConflictKind,
    EditOutcome,
    OutcomeStatus,
    RejectReason,
    rejected,
)
from .notation.lexer import ParseError, split_units
from .notation.parser import Command, CommandKind, parse_command
from .notation.render import render_command, render_fe, render_tree
from .store import CorruptEntryError, Journal, JournalEntry, outcome_digest, snapshot, snapshot_hash
from . import protocol

JOURNAL_FILE = "journal.cokb"

_MUTATING = {
    CommandKind.ASSERT, CommandKind.ASSERT_LINKS, CommandKind.REMOVE,
    CommandKind.RATE, CommandKind.REGISTER, CommandKind.DEF_MEASURE,
    CommandKind.SET_FILTER,
}

CORRECTIVE_FOR_CONFLICT = {
    ConflictKind.GENERALIZATION: "corrective_generalization",
    ConflictKind.SPECIALIZATION: "corrective_restriction",
    ConflictKind.EQUIVALENCE: "equivalence",
    ConflictKind.EXCLUSION: "corrective_restriction",
}


def utcnow() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class ConflictView:
    conflict: Conflict
    rendered: str
    corrective_template: str | None


@dataclass
class CommandResponse:
    command: Command
    outcome: EditOutcome | None = None
    conflicts: list[ConflictView] = field(default_factory=list)
    tree: TreeNode | None = None
    tree_text: str | None = None
    results: list[str] = field(default_factory=list)
    sequence: int | None = None


class Engine:
    def __init__(self, kb: KnowledgeBase | None = None, journal: Journal | None = None):
        self.kb = kb or KnowledgeBase()
        self.journal = journal
        self._lock = threading.RLock()

    # -- construction -----------------------------------------------------

    @classmethod
    def open(cls, kb_dir: Path) -> "Engine":
        """Open (or initialize) a KB directory, replaying any journal."""
        kb_dir = Path(kb_dir)
        path = kb_dir / JOURNAL_FILE
        if path.exists() and path.stat().st_size > 0:
            engine = cls.replay(path)
        else:
            engine = cls()
        engine.journal = Journal(path)
        return engine

    @classmethod
    def replay(cls, journal_path: Path) -> "Engine":
        """Rebuild state by re-executing every journal entry."""
        entries = Journal(Path(journal_path)).read()
        engine = cls()
        for entry in entries:
            response = engine.execute(entry.agent, entry.command_text,
                                      timestamp=entry.timestamp)
            outcome = response.outcome
            if outcome is None or not outcome.accepted:
                raise CorruptEntryError(entry.sequence, "journaled command rejected on replay")
            if entry.outcome_digest and outcome_digest(outcome) != entry.outcome_digest:
                raise CorruptEntryError(entry.sequence, "outcome digest mismatch")
        return engine

    # -- command execution ---------------------------------------------------

    def execute(self, agent: str, text: str, timestamp: str | None = None) -> CommandResponse:
        with self._lock:
            cmd = parse_command(text.strip().rstrip(";"), default_creator=agent)
            now = timestamp or utcnow()
            if cmd.kind in _MUTATING:
                return self._execute_mutation(agent, cmd, now)
            if cmd.kind is CommandKind.SPEC_OF:
                return self._spec_of(cmd)
            if cmd.kind is CommandKind.QUERY_GRAPH:
                return self._query_graph(agent, cmd)
            raise ParseError(f"unsupported command kind {cmd.kind}")

    def load(self, path: Path, default_agent: str = "pm") -> list[CommandResponse]:
        """Run a command file; journal headers set agent and timestamp."""
        responses = []
        for agent, timestamp, unit in read_command_file(Path(path), default_agent):
            responses.append(self.execute(agent, unit, timestamp=timestamp))
        return responses

    def _execute_mutation(self, agent: str, cmd: Command, now: str) -> CommandResponse:
        work = copy.deepcopy(self.kb)
        outcome = self._apply(work, agent, cmd, now)
        response = CommandResponse(cmd, outcome)
        if outcome.accepted:
            self.kb = work
            if self.journal is not None:
                entry = JournalEntry(self.journal.last_sequence + 1, now, agent,
                                     render_command(cmd), outcome_digest(outcome))
                self.journal.append(entry)
                response.sequence = entry.sequence
        else:
            response.conflicts = self._conflict_views(agent, cmd, outcome)
        return response

    def _apply(self, kb: KnowledgeBase, agent: str, cmd: Command, now: str) -> EditOutcome:
        if cmd.kind is CommandKind.ASSERT:
            return protocol.add_statement(kb, agent, cmd.statement, now)
        if cmd.kind is CommandKind.ASSERT_LINKS:
            return protocol.add_links(kb, agent, cmd.links, now)
        if cmd.kind is CommandKind.REMOVE:
            return protocol.remove_statement(kb, agent, cmd.target, now)
        if cmd.kind is CommandKind.RATE:
            return submit_rating(kb, agent, cmd.target, cmd.criterion, cmd.value, now)
        if cmd.kind is CommandKind.REGISTER:
            if cmd.name in kb.sources:
                return rejected(RejectReason.OWN_REDUNDANCY)
            source = kb.register_source(cmd.name, cmd.source_kind)
            return EditOutcome(OutcomeStatus.ACCEPTED, created=(source.id,))
        if cmd.kind is CommandKind.DEF_MEASURE:
            kb.measures[cmd.name] = cmd.expr
            return EditOutcome(OutcomeStatus.ACCEPTED)
        if cmd.kind is CommandKind.SET_FILTER:
            kb.filters[cmd.name] = FilterDef(cmd.name, cmd.action, cmd.expr)
            return EditOutcome(OutcomeStatus.ACCEPTED)
        raise ParseError(f"not a mutation: {cmd.kind}")

    # -- reads ------------------------------------------------------------------

    def _resolve_object_key(self, text_or_ref) -> str:
        if hasattr(text_or_ref, "ident"):
            ref = text_or_ref
            if ref.ident is not None:
                return ref.ident.render()
            named = self.kb.terms_named(ref.name)
            if len(named) == 1:
                return named[0].id.render()
            informal = f'"{ref.name}"'
            if self.kb.hierarchy.has(informal):
                return informal
            raise UnknownObjectError(ref.name)
        return str(text_or_ref)

    def _spec_of(self, cmd: Command) -> CommandResponse:
        with self._lock:
            key = self._resolve_object_key(cmd.term)
            tree = self.kb.hierarchy.specializations_of(key, cmd.depth)
            return CommandResponse(cmd, tree=tree, tree_text=render_tree(tree))

    def _query_graph(self, agent: str, cmd: Command) -> CommandResponse:
        query = cmd.statement
        hits = []
        for stored in self.kb.graph_statements():
            kind = compare(query, stored, self.kb).kind
            if kind in (CompareKind.GENERALIZES, CompareKind.EQUIVALENT,
                        CompareKind.INSTANTIATED_BY):
                hits.append(stored.id.render())
        return CommandResponse(cmd, results=sorted(hits))

    # -- dry run -------------------------------------------------------------------

    def dry_run(self, agent: str, text: str) -> CommandResponse:
        """Evaluate a draft command without touching the KB."""
        with self._lock:
            cmd = parse_command(text.strip().rstrip(";"), default_creator=agent)
            if cmd.kind not in _MUTATING:
                raise ParseError("only mutating commands can be dry-run")
            work = copy.deepcopy(self.kb)
            outcome = self._apply(work, agent, cmd, utcnow())
            response = CommandResponse(cmd, outcome)
            response.conflicts = self._conflict_views(agent, cmd, outcome)
            return response

    def _conflict_views(self, agent: str, cmd: Command, outcome: EditOutcome) -> list[ConflictView]:
        views = []
        for conflict in outcome.conflicts:
            stored = self.kb.get_statement(conflict.obj)
            rendered = render_fe(stored) if stored else conflict.obj.render()
            template = None
            rel = CORRECTIVE_FOR_CONFLICT.get(conflict.kind)
            if rel and cmd.kind is CommandKind.ASSERT and cmd.statement is not None \
                    and outcome.reason is RejectReason.IMPLICIT_CONFLICT:
                draft = render_fe(cmd.statement)
                template = (f"{agent}#`{conflict.obj.render()} has for {rel} "
                            f"{draft}´;")
            views.append(ConflictView(conflict, rendered, template))
        return views

    # -- state inspection ---------------------------------------------------------

    def snapshot(self) -> str:
        with self._lock:
            return snapshot(self.kb)

    def snapshot_hash(self) -> str:
        with self._lock:
            return snapshot_hash(self.kb)

    def check_invariants(self, include_replay: bool = True) -> list[str]:
        """Invariant suite: DAG, anchoring, organization, replay fidelity."""
        from .model import check_well_formed

        problems: list[str] = []
        with self._lock:
            kb = self.kb
            if not kb.hierarchy.is_dag():
                problems.append("strict specialization links contain a cycle")
            roots = {"pm#thing"}
            for key, term in kb.terms.items():
                if key in roots:
                    continue
                if not kb.hierarchy.anchored(key, roots):
                    problems.append(f"term {key} is not anchored under the root")
            for key, stmt in kb.statements.items():
                violations = check_well_formed(stmt)
                if violations:
                    problems.append(f"statement {key}: {', '.join(violations)}")
            problems.extend(self.organization_violations())
            if include_replay and self.journal is not None:
                live = snapshot_hash(kb)
                replayed = Engine.replay(self.journal.path)
                if snapshot_hash(replayed.kb) != live:
                    problems.append("journal replay does not reproduce the live state")
        return problems

    def organization_violations(self) -> list[str]:
        """Cross-creator statement pairs the matcher flags that are not
        explicitly related (the at-least-minimally-well-organized test)."""
        problems = []
        kb = self.kb
        stmts = kb.graph_statements()
        for i, a in enumerate(stmts):
            for b in stmts[i + 1:]:
                if a.creator == b.creator:
                    continue
                kind = compare(a, b, kb).kind
                if kind in (CompareKind.EQUIVALENT, CompareKind.SPECIALIZES,
                            CompareKind.GENERALIZES, CompareKind.EXCLUSIVE):
                    if not kb.explicitly_related_ids(a.id, b.id):
                        problems.append(
                            f"implicit {kind.value} between {a.id.render()} "
                            f"and {b.id.render()}")
        return problems


_SCRIPT_HEADER_RE = re.compile(
    r"^#(\d+)\|([^|]+)\|([^|]+)\|(?:([0-9a-f]*)\|)?\s*(.*)$")


def read_command_file(path: Path, default_agent: str):
    """Yield (agent, timestamp, command) triples from a command file.

    Lines may carry the journal header (`#seq|ts|agent|[digest|]`);
    headerless units run as the default agent at the current time.
    """
    text = path.read_text("utf-8")
    lines = [l.strip() for l in text.splitlines()]
    headered = any(_SCRIPT_HEADER_RE.match(l) for l in lines if l)
    if not headered:
        for unit in split_units(text):
            yield default_agent, None, unit
        return
    for line in lines:
        if not line or line.startswith("//"):
            continue
        m = _SCRIPT_HEADER_RE.match(line)
        if m is None:
            continue
        agent, timestamp, command = m.group(3), m.group(2), m.group(5)
        for unit in split_units(command):
            yield agent, timestamp, unit
