"""Core domain model for the shared knowledge base.

Everything in the KB is an *object*: a source (user, file, vocabulary),
a term (formal identifier or informal name) or a statement.  Statements
carry their attribution (creator, believer, interpreted source), a kind
(definition, belief or informal) and a body, which is either a small
conjunctive relation graph over quantified concept nodes, a meta relation
between two statements, a term-link declaration, or plain quoted text.

These are pure value types; all mutation happens in the protocol layer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction


class _Immutable:
    """Frozen value types are shared, not copied, across KB snapshots."""

    def __deepcopy__(self, memo):
        return self


class MalformedNameError(ValueError):
    """Raised when an identifier name contains an illegal character."""

    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        if name:
            detail = f"illegal character {name[position]!r} at position {position}"
        else:
            detail = "empty name"
        super().__init__(f"malformed name {name!r}: {detail}")


_NAME_RE = re.compile(r"[A-Za-z0-9_.\-]+")


@dataclass(frozen=True, order=True)
class Ident(_Immutable):
    """Globally unique identifier, rendered `creator#name` or bare `name`.

    Sources (users, vocabularies) have no creator prefix of their own.
    Clone-collision suffixes are folded into `name` at mint time.
    """

    creator: str | None
    name: str

    def render(self) -> str:
        if self.creator is None:
            return self.name
        return f"{self.creator}#{self.name}"

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.render()


def parse_ident(text: str) -> Ident:
    """Parse `creator#name` or bare `name` into an Ident."""
    if "#" in text:
        creator, _, name = text.partition("#")
        check_token(creator)
        check_token(name)
        return Ident(creator, name)
    check_token(text)
    return Ident(None, text)


def check_token(name: str) -> None:
    """Validate a token-shaped name (letters, digits, `_`, `-`, `.`)."""
    if not name:
        raise MalformedNameError(name, 0)
    m = _NAME_RE.match(name)
    if m is None or m.end() != len(name):
        raise MalformedNameError(name, 0 if m is None else m.end())


def mint_identifier(creator: str, name: str, taken: set[str]) -> Ident:
    """Mint `creator#name`, suffixing `-k` (k >= 2) on collision.

    `taken` holds rendered identifiers already in use.  Minting is
    deterministic: the lowest free suffix wins.
    """
    check_token(creator)
    check_token(name)
    candidate = Ident(creator, name)
    if candidate.render() not in taken:
        return candidate
    k = 2
    while True:
        candidate = Ident(creator, f"{name}-{k}")
        if candidate.render() not in taken:
            return candidate
        k += 1


class SourceKind(str, Enum):
    USER = "user"
    FILE = "file"
    LANGUAGE = "language"
    EXTERNAL_VOCABULARY = "external-vocabulary"


@dataclass(frozen=True)
class Source(_Immutable):
    """A provenance anchor: every object references at least one source."""

    id: Ident
    kind: SourceKind


@dataclass(frozen=True, order=True)
class TermRef(_Immutable):
    """Reference to a term: formal (has an Ident) or informal (name only)."""

    name: str
    ident: Ident | None = None

    @property
    def formal(self) -> bool:
        return self.ident is not None

    def render(self) -> str:
        return self.ident.render() if self.ident else self.name

    @staticmethod
    def parse(text: str) -> "TermRef":
        if "#" in text:
            ident = parse_ident(text)
            return TermRef(ident.name, ident)
        return TermRef(text)


class QTag(str, Enum):
    INDIVIDUAL = "individual"
    EXACT = "exact"
    AT_LEAST = "at-least"
    AT_LEAST_PERCENT = "at-least-percent"
    MOST = "most"
    UNIVERSAL = "universal"
    NO = "no"


@dataclass(frozen=True)
class Quantifier(_Immutable):
    """Element of the quantifier subsumption lattice."""

    tag: QTag
    n: int | None = None
    p: Fraction | None = None

    @staticmethod
    def individual() -> "Quantifier":
        return Quantifier(QTag.INDIVIDUAL)

    @staticmethod
    def exact(n: int) -> "Quantifier":
        return Quantifier(QTag.EXACT, n=n)

    @staticmethod
    def at_least(n: int) -> "Quantifier":
        return Quantifier(QTag.AT_LEAST, n=n)

    @staticmethod
    def at_least_percent(p: Fraction | int) -> "Quantifier":
        return Quantifier(QTag.AT_LEAST_PERCENT, p=Fraction(p))

    @staticmethod
    def most() -> "Quantifier":
        return Quantifier(QTag.MOST)

    @staticmethod
    def universal() -> "Quantifier":
        return Quantifier(QTag.UNIVERSAL)

    @staticmethod
    def no() -> "Quantifier":
        return Quantifier(QTag.NO)


class Comparator(str, Enum):
    GE = ">="
    LE = "<="
    EQ = "="


@dataclass(frozen=True)
class Measure(_Immutable):
    """A `with <relation> [at least|at most] <n> <unit>` node restriction."""

    relation: TermRef
    comparator: Comparator
    magnitude: Fraction
    unit: str


@dataclass(frozen=True)
class ConceptNode(_Immutable):
    """Quantified concept occurrence inside a statement graph."""

    term: TermRef
    quantifier: Quantifier
    referent: Ident | None = None
    measure: Measure | None = None


@dataclass(frozen=True)
class Edge(_Immutable):
    subject: ConceptNode
    relation: TermRef
    obj: ConceptNode


@dataclass(frozen=True)
class GraphBody(_Immutable):
    edges: tuple[Edge, ...]


@dataclass(frozen=True)
class MetaBody(_Immutable):
    """Relation between two statements; operands are ids once stored.

    The parser may produce embedded Statement operands, which the protocol
    resolves to ids before storage.
    """

    relation: TermRef
    first: object  # Ident | Statement
    second: object  # Ident | Statement


@dataclass(frozen=True)
class LinkBody(_Immutable):
    """A term-relation declaration (FL line): subtype/instance/... link."""

    relation: TermRef
    source_term: TermRef
    target_term: TermRef


@dataclass(frozen=True)
class TextBody(_Immutable):
    text: str


class ContextKind(str, Enum):
    MODALITY_POSSIBLE = "modality-possible"
    PLACE = "place"
    PERIOD = "period"


@dataclass(frozen=True)
class Context(_Immutable):
    kind: ContextKind
    place: TermRef | None = None
    start: str | None = None
    end: str | None = None

    @staticmethod
    def possible() -> "Context":
        return Context(ContextKind.MODALITY_POSSIBLE)


class StatementKind(str, Enum):
    DEFINITION = "definition"
    BELIEF = "belief"
    INFORMAL = "informal"


@dataclass(frozen=True)
class Statement(_Immutable):
    """An attributed, kinded sentence; the unit of all KB edits."""

    creator: str
    kind: StatementKind
    body: GraphBody | MetaBody | LinkBody | TextBody
    id: Ident | None = None
    believer: str | None = None
    interpreted_source: str | None = None
    contexts: tuple[Context, ...] = ()
    created: str = ""

    def with_id(self, ident: Ident, created: str) -> "Statement":
        return replace(self, id=ident, created=created)

    def is_graph(self) -> bool:
        return isinstance(self.body, GraphBody)

    def is_meta(self) -> bool:
        return isinstance(self.body, MetaBody)

    def is_link(self) -> bool:
        return isinstance(self.body, LinkBody)

    def has_modality_possible(self) -> bool:
        return any(c.kind is ContextKind.MODALITY_POSSIBLE for c in self.contexts)


@dataclass
class Term:
    """A formal term: unique identifier plus its defining statements."""

    id: Ident
    names: set[str]
    definitions: list[Ident] = field(default_factory=list)
    created: str = ""
    is_process: bool = False

    @property
    def creator(self) -> str | None:
        return self.id.creator


class ConflictKind(str, Enum):
    EXCLUSION = "exclusion"
    SPECIALIZATION = "specialization"
    GENERALIZATION = "generalization"
    EQUIVALENCE = "equivalence"
    INSTANTIATION = "instantiation"


@dataclass(frozen=True)
class Conflict(_Immutable):
    """A detected overlap between a candidate and a stored statement."""

    obj: Ident
    kind: ConflictKind
    via_measure: bool = False
    advisory: bool = False

    def render(self) -> str:
        text = f"{self.obj.render()}:{self.kind.value}"
        if self.via_measure:
            text += "(measure)"
        return text


class OutcomeStatus(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    ACCEPTED_WITH_CLONING = "accepted-with-cloning"


class RejectReason(str, Enum):
    NOT_CREATOR = "not-creator"
    OWN_INCONSISTENCY = "own-inconsistency"
    OWN_REDUNDANCY = "own-redundancy"
    IMPLICIT_CONFLICT = "implicit-conflict"
    INFORMAL_UNLINKED = "informal-unlinked"
    TERM_DEF_INCONSISTENT = "term-def-inconsistent"
    UNKNOWN_OBJECT = "unknown-object"


@dataclass(frozen=True)
class CloneEntry(_Immutable):
    new_term: Ident
    for_user: str
    dropped_definition: Ident | None = None


@dataclass(frozen=True)
class Reattribution(_Immutable):
    old_statement: Ident
    new_statement: Ident
    for_user: str


@dataclass(frozen=True)
class CloneReport(_Immutable):
    original_term: Ident | None
    clones: tuple[CloneEntry, ...] = ()
    rewritten_statements: tuple[Ident, ...] = ()
    reattributed: tuple[Reattribution, ...] = ()


@dataclass(frozen=True)
class EditOutcome(_Immutable):
    status: OutcomeStatus
    reason: RejectReason | None = None
    conflicts: tuple[Conflict, ...] = ()
    clone_report: CloneReport | None = None
    created: tuple[Ident, ...] = ()
    removed: tuple[Ident, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.status is not OutcomeStatus.REJECTED


def rejected(reason: RejectReason, conflicts: tuple[Conflict, ...] = ()) -> EditOutcome:
    return EditOutcome(OutcomeStatus.REJECTED, reason=reason, conflicts=conflicts)


# --- well-formedness ---------------------------------------------------

def check_well_formed(stmt: Statement) -> list[str]:
    """Return the structural invariants a statement violates (empty if none).

    Total and pure: never raises.  Protocol-level requirements that need
    KB context (informal statements must be anchored) live in the protocol.
    """
    violations: list[str] = []
    if stmt.kind is StatementKind.DEFINITION:
        if stmt.believer is not None:
            violations.append("definition-has-believer")
        if not isinstance(stmt.body, GraphBody):
            violations.append("definition-body-not-graph")
    elif stmt.kind is StatementKind.BELIEF:
        if stmt.believer is None and stmt.interpreted_source is None:
            violations.append("belief-missing-believer")
        if isinstance(stmt.body, TextBody):
            violations.append("belief-body-text")
    elif stmt.kind is StatementKind.INFORMAL:
        if not isinstance(stmt.body, TextBody):
            violations.append("informal-body-not-text")
    if isinstance(stmt.body, GraphBody):
        for edge in stmt.body.edges:
            for node in (edge.subject, edge.obj):
                if node.referent is not None and node.quantifier.tag is not QTag.INDIVIDUAL:
                    violations.append("referent-without-individual-quantifier")
    return violations


def statement_warnings(stmt: Statement) -> list[str]:
    """Advisory issues: flagged in the outcome, never grounds for rejection."""
    warnings: list[str] = []
    if stmt.kind is StatementKind.BELIEF and isinstance(stmt.body, GraphBody):
        broad = any(
            e.subject.quantifier.tag in (QTag.UNIVERSAL, QTag.AT_LEAST_PERCENT, QTag.MOST)
            for e in stmt.body.edges
        )
        if broad:
            kinds = {c.kind for c in stmt.contexts}
            if ContextKind.PLACE not in kinds or ContextKind.PERIOD not in kinds:
                warnings.append("uncontextualized-broad-belief")
    return warnings


# --- structural equality ----------------------------------------------

def _node_key(node: ConceptNode):
    q = node.quantifier
    m = node.measure
    return (
        node.term.render(),
        q.tag.value,
        q.n,
        q.p,
        node.referent.render() if node.referent else None,
        (m.relation.render(), m.comparator.value, m.magnitude, m.unit) if m else None,
    )


def _context_key(ctx: Context):
    return (
        ctx.kind.value,
        ctx.place.render() if ctx.place else None,
        ctx.start,
        ctx.end,
    )


def body_key(body) -> tuple:
    if isinstance(body, GraphBody):
        edges = sorted(
            (_node_key(e.subject), e.relation.render(), _node_key(e.obj))
            for e in body.edges
        )
        return ("graph", tuple(edges))
    if isinstance(body, MetaBody):
        def op_key(op):
            if isinstance(op, Ident):
                return ("id", op.render())
            return ("stmt", statement_key(op))
        return ("meta", body.relation.render(), op_key(body.first), op_key(body.second))
    if isinstance(body, LinkBody):
        return ("link", body.relation.render(), body.source_term.render(), body.target_term.render())
    return ("text", body.text)


def statement_key(stmt: Statement) -> tuple:
    """Structural identity modulo id and creation date."""
    return (
        stmt.creator,
        stmt.believer,
        stmt.interpreted_source,
        stmt.kind.value,
        body_key(stmt.body),
        tuple(sorted(_context_key(c) for c in stmt.contexts)),
    )


def structurally_equal(a: Statement, b: Statement) -> bool:
    return statement_key(a) == statement_key(b)
