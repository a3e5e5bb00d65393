"""In-memory knowledge base state: sources, terms, statements, ratings.

A minimal upper ontology is preloaded at construction (root `pm#thing`,
process/relation-type branches and the built-in relation types), so an
empty journal replays to a usable KB.  All mutation goes through the
protocol module; reads never mutate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .hierarchy import Hierarchy, HierarchyLink, LinkKind, ref_key
from .model import (
    GraphBody,
    Ident,
    LinkBody,
    MetaBody,
    Source,
    SourceKind,
    Statement,
    Term,
    TermRef,
    mint_identifier,
)

DEFAULT_CREATOR = "pm"
ROOT = "pm#thing"

_UPPER_TYPES = ["process", "relation_type", "source"]
_RELATION_TYPES = [
    "subtype", "instance", "part", "agent", "duration",
    "corrective_restriction", "corrective_generalization",
    "corrective_specialization", "argument", "objection",
    "equivalence", "example", "subprocess", "informal_generalization",
]


@dataclass(frozen=True)
class Rating:
    id: Ident
    rater: str
    obj: Ident
    criterion: str
    value: Fraction
    date: str

    def __deepcopy__(self, memo):
        return self


@dataclass(frozen=True)
class FilterDef:
    name: str
    action: str  # hide | small-font
    expr: object

    def __deepcopy__(self, memo):
        return self


class KnowledgeBase:
    def __init__(self):
        self.sources: dict[str, Source] = {}
        self.terms: dict[str, Term] = {}
        self.informal: set[str] = set()
        self.statements: dict[str, Statement] = {}
        self.hierarchy = Hierarchy()
        self.ratings: dict[tuple[str, str, str], Rating] = {}
        self.measures: dict[str, object] = {}
        self.filters: dict[str, FilterDef] = {}
        self.clone_origin: dict[str, str] = {}
        self._stmt_seq: dict[str, int] = {}
        self._rating_seq: dict[str, int] = {}
        self._closure_cache: dict = {}
        self._bootstrap()

    # -- bootstrap ---------------------------------------------------------

    def _bootstrap(self) -> None:
        pm = Source(Ident(None, DEFAULT_CREATOR), SourceKind.USER)
        self.sources[DEFAULT_CREATOR] = pm
        self.hierarchy.add_object(DEFAULT_CREATOR)
        root = Term(Ident(DEFAULT_CREATOR, "thing"), names={"thing"})
        self.terms[ROOT] = root
        self.hierarchy.add_object(ROOT)
        for name in _UPPER_TYPES:
            self._preload_term(name, ROOT, is_process=(name == "process"))
        for name in _RELATION_TYPES:
            self._preload_term(name, "pm#relation_type")
        self.hierarchy.add_link(HierarchyLink(
            LinkKind.INSTANCE, DEFAULT_CREATOR, "pm#source", DEFAULT_CREATOR))

    def _preload_term(self, name: str, parent: str, is_process: bool = False) -> None:
        ident = Ident(DEFAULT_CREATOR, name)
        term = Term(ident, names={name}, is_process=is_process)
        key = ident.render()
        self.terms[key] = term
        self.hierarchy.add_object(key)
        self.hierarchy.add_link(HierarchyLink(LinkKind.SUBTYPE, key, parent, DEFAULT_CREATOR))

    # -- ontology view (matcher protocol) -----------------------------------

    def up_closure_of(self, key: str) -> set[str]:
        cached = self._closure_cache
        if cached.get("version") != self.hierarchy.version:
            self._closure_cache = cached = {"version": self.hierarchy.version}
        hit = cached.get(key)
        if hit is None:
            if not self.hierarchy.has(key):
                hit = {key}
            else:
                hit = self.hierarchy.up_closure(key)
            cached[key] = hit
        return hit

    def names_of(self, key: str) -> set[str]:
        term = self.terms.get(key)
        return set(term.names) if term else set()

    # -- registries ----------------------------------------------------------

    def taken_identifiers(self) -> set[str]:
        taken = set(self.terms) | set(self.statements) | set(self.sources)
        taken |= {r.id.render() for r in self.ratings.values()}
        return taken

    def register_source(self, name: str, kind: SourceKind) -> Source:
        source = Source(Ident(None, name), kind)
        self.sources[name] = source
        self.hierarchy.add_object(name)
        self.hierarchy.add_link(HierarchyLink(
            LinkKind.INSTANCE, name, "pm#source", name))
        return source

    def ensure_informal(self, name: str) -> str:
        key = f'"{name}"'
        if key not in self.informal:
            self.informal.add(key)
            self.hierarchy.add_object(key)
        return key

    def add_term(self, term: Term, anchors: list[HierarchyLink]) -> None:
        key = term.id.render()
        self.terms[key] = term
        try:
            self.hierarchy.add_term(key, anchors, is_process=term.is_process)
        except Exception:
            del self.terms[key]
            raise

    def term_for_ref(self, ref: TermRef) -> Term | None:
        if ref.ident is None:
            return None
        return self.terms.get(ref.ident.render())

    def terms_named(self, name: str) -> list[Term]:
        return [t for t in self.terms.values() if name in t.names]

    def next_statement_id(self, creator: str) -> Ident:
        taken = self.taken_identifiers()
        n = self._stmt_seq.get(creator, 0)
        while True:
            n += 1
            ident = Ident(creator, f"s{n}")
            if ident.render() not in taken:
                self._stmt_seq[creator] = n
                return ident

    def next_rating_id(self, rater: str) -> Ident:
        taken = self.taken_identifiers()
        n = self._rating_seq.get(rater, 0)
        while True:
            n += 1
            ident = Ident(rater, f"r{n}")
            if ident.render() not in taken:
                self._rating_seq[rater] = n
                return ident

    def store_statement(self, stmt: Statement) -> None:
        key = stmt.id.render()
        self.statements[key] = stmt
        self.hierarchy.add_object(key)
        for name in self.informal_names_used(stmt):
            self.ensure_informal(name)

    def drop_statement(self, sid: Ident) -> None:
        key = sid.render()
        self.hierarchy.remove_links_of_origin(sid)
        self.hierarchy.remove_object(key)
        self.statements.pop(key, None)

    def replace_statement(self, stmt: Statement) -> None:
        self.statements[stmt.id.render()] = stmt

    # -- queries ---------------------------------------------------------------

    def graph_statements(self) -> list[Statement]:
        return [s for s in self.statements.values() if isinstance(s.body, GraphBody)]

    def statements_by(self, creator: str) -> list[Statement]:
        return [s for s in self.statements.values() if s.creator == creator]

    def get_statement(self, sid: Ident) -> Statement | None:
        return self.statements.get(sid.render())

    def explicitly_related_ids(self, a: Ident, b: Ident) -> bool:
        ka, kb_ = a.render(), b.render()
        if not (self.hierarchy.has(ka) and self.hierarchy.has(kb_)):
            return False
        return self.hierarchy.explicitly_related(ka, kb_)

    def statement_uses_term(self, stmt: Statement, key: str) -> bool:
        return key in self.term_keys_used(stmt)

    @staticmethod
    def term_keys_used(stmt: Statement) -> set[str]:
        keys: set[str] = set()
        if isinstance(stmt.body, GraphBody):
            for e in stmt.body.edges:
                keys.add(ref_key(e.subject.term))
                keys.add(ref_key(e.obj.term))
                keys.add(ref_key(e.relation))
                for node in (e.subject, e.obj):
                    if node.measure:
                        keys.add(ref_key(node.measure.relation))
        elif isinstance(stmt.body, LinkBody):
            keys.add(ref_key(stmt.body.source_term))
            keys.add(ref_key(stmt.body.target_term))
        return keys

    @staticmethod
    def informal_names_used(stmt: Statement) -> set[str]:
        names: set[str] = set()
        if isinstance(stmt.body, GraphBody):
            for e in stmt.body.edges:
                for ref in (e.subject.term, e.obj.term, e.relation):
                    if ref.ident is None:
                        names.add(ref.name)
        elif isinstance(stmt.body, LinkBody):
            for ref in (stmt.body.source_term, stmt.body.target_term):
                if ref.ident is None:
                    names.add(ref.name)
        return names

    def meta_statements_referencing(self, sid: Ident) -> list[Statement]:
        out = []
        for s in self.statements.values():
            if isinstance(s.body, MetaBody) and sid in (s.body.first, s.body.second):
                out.append(s)
        return out

    def mint_term(self, creator: str, name: str) -> Ident:
        return mint_identifier(creator, name, self.taken_identifiers())
