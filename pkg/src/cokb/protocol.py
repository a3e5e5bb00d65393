"""The collaborative editing protocol: add/remove with automatic repair.

Adding a statement walks, in order: anchoring of informal statements,
consistency/redundancy against the agent's own statements, definitional
checks (rejection for new terms, term cloning for shared ones), and
implicit-conflict detection against other users' statements, which a
corrective meta statement can cover (loss-less correction).

Removal is creator-only and repairs dangling dependencies by cloning a
defined term for its other users or re-attributing a copied belief.

Callers run these functions against a working copy of the KB and keep
the copy only when the outcome is accepted; rejection never mutates the
live state.
"""

from __future__ import annotations

from dataclasses import replace

from .hierarchy import (
    CycleIntroducedError,
    HierarchyError,
    HierarchyLink,
    LinkKind,
    ref_key,
)
from .kb import ROOT, KnowledgeBase
from .matcher import CompareKind, compare, detect_conflicts, placement_detail
from .model import (
    CloneEntry,
    CloneReport,
    ConceptNode,
    Conflict,
    ConflictKind,
    Edge,
    EditOutcome,
    GraphBody,
    Ident,
    LinkBody,
    Measure,
    MetaBody,
    OutcomeStatus,
    Quantifier,
    Reattribution,
    RejectReason,
    Statement,
    StatementKind,
    Term,
    TermRef,
    check_well_formed,
    rejected,
    statement_warnings,
    structurally_equal,
)
from .notation.parser import FlLink

# Meta relations that make a conflict explicit / anchor an informal statement.
COVERING_RELATIONS = {
    "corrective_restriction": LinkKind.CORRECTIVE_RESTRICTION,
    "corrective_generalization": LinkKind.CORRECTIVE_GENERALIZATION,
    "corrective_specialization": LinkKind.CORRECTIVE_SPECIALIZATION,
    "equivalence": LinkKind.EQUIVALENCE,
    "example": LinkKind.EXAMPLE,
    "argument": LinkKind.ARGUMENT,
    "objection": LinkKind.OBJECTION,
}

# Term-relation lines that declare hierarchy links rather than beliefs.
ANCHOR_RELATIONS = {
    "subtype": LinkKind.SUBTYPE,
    "instance": LinkKind.INSTANCE,
    "equivalence": LinkKind.EQUIVALENCE,
    "subprocess": LinkKind.SUBPROCESS,
    "informal_generalization": LinkKind.INFORMAL_GENERALIZATION,
}

class ProtocolError(ValueError):
    pass


def relation_name(kb: KnowledgeBase, ref: TermRef) -> str:
    """Resolve a relation reference to its builtin name when possible."""
    if ref.ident is not None and ref.ident.creator == "pm":
        return ref.ident.name
    return ref.name


# --- reference resolution -------------------------------------------------

def _unknown_formal_refs(kb: KnowledgeBase, stmt: Statement) -> list[str]:
    unknown = []
    for key in kb.term_keys_used(stmt):
        if key.startswith('"'):
            continue
        if key in kb.terms or key in kb.sources:
            continue
        unknown.append(key)
    return sorted(unknown)


def _rewrite_ref(ref: TermRef, mapping: dict[str, Ident]) -> TermRef:
    new = mapping.get(ref_key(ref))
    if new is None:
        return ref
    return TermRef(new.name, new)


def rewrite_statement_terms(stmt: Statement, mapping: dict[str, Ident]) -> Statement:
    """Substitute term references (the value identity of ids is preserved)."""
    if isinstance(stmt.body, GraphBody):
        edges = []
        for e in stmt.body.edges:
            def fix(node: ConceptNode) -> ConceptNode:
                term = _rewrite_ref(node.term, mapping)
                measure = node.measure
                if measure is not None:
                    measure = Measure(_rewrite_ref(measure.relation, mapping),
                                      measure.comparator, measure.magnitude, measure.unit)
                referent = node.referent
                if referent is not None and referent.render() in mapping:
                    referent = mapping[referent.render()]
                return ConceptNode(term, node.quantifier, referent, measure)
            edges.append(Edge(fix(e.subject), _rewrite_ref(e.relation, mapping), fix(e.obj)))
        return replace(stmt, body=GraphBody(tuple(edges)))
    if isinstance(stmt.body, LinkBody):
        b = stmt.body
        return replace(stmt, body=LinkBody(
            _rewrite_ref(b.relation, mapping),
            _rewrite_ref(b.source_term, mapping),
            _rewrite_ref(b.target_term, mapping)))
    return stmt


# --- placement --------------------------------------------------------------

_PLACEMENT_LINK_KINDS = {
    CompareKind.INSTANTIATION_OF: LinkKind.EXAMPLE,
    CompareKind.SPECIALIZES: LinkKind.LOGICAL_DEDUCTION_OF,
    CompareKind.INSTANTIATED_BY: LinkKind.EXAMPLE,
    CompareKind.GENERALIZES: LinkKind.LOGICAL_DEDUCTION_OF,
}


def place_statement(kb: KnowledgeBase, stmt: Statement) -> None:
    """Materialize the statement's position in the specialization order."""
    detail = placement_detail(stmt, kb)
    key = stmt.id.render()
    for general, kind in detail.generalizations:
        kb.hierarchy.add_link(HierarchyLink(
            _PLACEMENT_LINK_KINDS[kind], key, general.id.render(),
            stmt.creator, origin=stmt.id))
    for specific, kind in detail.specializations:
        kb.hierarchy.add_link(HierarchyLink(
            _PLACEMENT_LINK_KINDS[kind], specific.id.render(), key,
            stmt.creator, origin=stmt.id))
    for equivalent in detail.equivalents:
        kb.hierarchy.add_link(HierarchyLink(
            LinkKind.EQUIVALENCE, key, equivalent.id.render(),
            stmt.creator, origin=stmt.id))


def _replace_statement_everywhere(kb: KnowledgeBase, stmt: Statement) -> None:
    """Swap a rewritten statement in and rebuild its derived hierarchy links."""
    kb.replace_statement(stmt)
    kb.hierarchy.remove_links_of_origin(stmt.id)
    if isinstance(stmt.body, LinkBody):
        _materialize_link_body(kb, stmt)
    elif isinstance(stmt.body, GraphBody):
        place_statement(kb, stmt)


# --- own-statement checks ----------------------------------------------------

def _own_conflicts(kb: KnowledgeBase, agent: str, stmt: Statement) -> tuple[list[Conflict], list[Conflict]]:
    """Inconsistencies/redundancies with the agent's own statements of the
    same kind (definitions against definitions, beliefs against beliefs)."""
    inconsistent: list[Conflict] = []
    redundant: list[Conflict] = []
    if not isinstance(stmt.body, GraphBody):
        return inconsistent, redundant
    for own in kb.statements_by(agent):
        if own.kind is not stmt.kind or not isinstance(own.body, GraphBody):
            continue
        if stmt.id is not None and own.id == stmt.id:
            continue
        result = compare(stmt, own, kb)
        if result.kind is CompareKind.EXCLUSIVE:
            inconsistent.append(Conflict(own.id, ConflictKind.EXCLUSION,
                                         via_measure=result.via_measure))
        elif result.kind in (CompareKind.EQUIVALENT, CompareKind.SPECIALIZES,
                             CompareKind.GENERALIZES):
            redundant.append(Conflict(own.id, {
                CompareKind.EQUIVALENT: ConflictKind.EQUIVALENCE,
                CompareKind.SPECIALIZES: ConflictKind.SPECIALIZATION,
                CompareKind.GENERALIZES: ConflictKind.GENERALIZATION,
            }[result.kind]))
    return inconsistent, redundant


def _cross_user_conflicts(kb: KnowledgeBase, agent: str, stmt: Statement,
                          covered: frozenset[str]) -> tuple[list[Conflict], list[Conflict]]:
    """(uncovered, all) conflicts against statements by other creators.

    Coverage extends through explicit chains from the covered statements:
    corrective relations are transitive, so correcting a statement also
    covers what that statement is already explicitly related to.
    """
    all_conflicts = []
    uncovered = []
    for c in detect_conflicts(stmt, kb):
        stored = kb.statements.get(c.obj.render())
        if stored is None or stored.creator == agent:
            continue
        all_conflicts.append(c)
        key = c.obj.render()
        reached = key in covered or any(
            kb.hierarchy.has(key) and kb.hierarchy.has(cov)
            and kb.hierarchy.explicitly_related(key, cov)
            for cov in covered)
        if not reached:
            uncovered.append(c)
    return uncovered, all_conflicts


# --- statement addition -------------------------------------------------------

def add_statement(kb: KnowledgeBase, agent: str, stmt: Statement, now: str,
                  covered: frozenset[str] = frozenset(),
                  anchored: bool = False) -> EditOutcome:
    """The adding algorithm; mutates `kb` only toward an accepted outcome."""
    if not stmt.creator:
        stmt = replace(stmt, creator=agent,
                       believer=agent if (stmt.kind is StatementKind.BELIEF
                                          and stmt.interpreted_source is None) else stmt.believer)
    if agent not in kb.sources:
        return rejected(RejectReason.UNKNOWN_OBJECT)
    if stmt.creator != agent:
        return rejected(RejectReason.NOT_CREATOR)
    violations = check_well_formed(stmt)
    if violations:
        raise ProtocolError(f"malformed statement: {', '.join(violations)}")

    if isinstance(stmt.body, MetaBody):
        return _add_meta(kb, agent, stmt, now)

    if stmt.kind is StatementKind.INFORMAL:
        if not anchored:
            return rejected(RejectReason.INFORMAL_UNLINKED)
        sid = kb.next_statement_id(agent)
        stored = stmt.with_id(sid, now)
        kb.store_statement(stored)
        return EditOutcome(OutcomeStatus.ACCEPTED, created=(sid,))

    unknown = _unknown_formal_refs(kb, stmt)
    if stmt.kind is StatementKind.DEFINITION:
        subject_key = ref_key(stmt.body.edges[0].subject.term)
        unknown = [k for k in unknown if k != subject_key]
    if unknown:
        return rejected(RejectReason.UNKNOWN_OBJECT)

    inconsistent, redundant = _own_conflicts(kb, agent, stmt)
    if inconsistent:
        return rejected(RejectReason.OWN_INCONSISTENCY, tuple(inconsistent))
    if redundant:
        return rejected(RejectReason.OWN_REDUNDANCY, tuple(redundant))

    if stmt.kind is StatementKind.DEFINITION:
        return _add_definition(kb, agent, stmt, now)

    uncovered, _ = _cross_user_conflicts(kb, agent, stmt, covered)
    if uncovered:
        return rejected(RejectReason.IMPLICIT_CONFLICT, tuple(uncovered))

    sid = kb.next_statement_id(agent)
    stored = stmt.with_id(sid, now)
    kb.store_statement(stored)
    place_statement(kb, stored)
    return EditOutcome(OutcomeStatus.ACCEPTED, created=(sid,),
                       warnings=tuple(statement_warnings(stored)))


def _resolve_defined_term(kb: KnowledgeBase, agent: str, stmt: Statement):
    """Find or name the term a definition defines.

    Returns (stmt, term-or-None, ident, outcome-or-None); `term` is None
    for a brand-new term.
    """
    subject = stmt.body.edges[0].subject
    ref = subject.term
    if ref.ident is not None:
        term = kb.term_for_ref(ref)
        if term is None and ref.ident.creator != agent:
            return stmt, None, ref.ident, rejected(RejectReason.NOT_CREATOR)
        return stmt, term, ref.ident, None
    named = kb.terms_named(ref.name)
    if len(named) > 1:
        return stmt, None, None, rejected(RejectReason.UNKNOWN_OBJECT)
    if len(named) == 1:
        term = named[0]
        stmt = rewrite_statement_terms(stmt, {ref_key(ref): term.id})
        return stmt, term, term.id, None
    ident = kb.mint_term(agent, ref.name)
    stmt = rewrite_statement_terms(stmt, {ref_key(ref): ident})
    return stmt, None, ident, None


def _add_definition(kb: KnowledgeBase, agent: str, stmt: Statement, now: str) -> EditOutcome:
    stmt, term, ident, failure = _resolve_defined_term(kb, agent, stmt)
    if failure is not None:
        return failure

    if term is None:
        # A definition creating a new term (Rule 2 anchor: the definition).
        # The term is registered before conflict detection so name bridging
        # sees it; a rejection discards the working copy anyway.
        sid = kb.next_statement_id(agent)
        stored = stmt.with_id(sid, now)
        new_term = Term(ident, names={ident.name}, definitions=[sid], created=now)
        kb.add_term(new_term, [HierarchyLink(LinkKind.SUBTYPE, ident.render(), ROOT,
                                             agent, origin=sid)])
        uncovered, _ = _cross_user_conflicts(kb, agent, stmt, frozenset())
        if uncovered:
            return rejected(RejectReason.TERM_DEF_INCONSISTENT, tuple(uncovered))
        kb.store_statement(stored)
        place_statement(kb, stored)
        return EditOutcome(OutcomeStatus.ACCEPTED, created=(sid,),
                           warnings=tuple(statement_warnings(stored)))

    uncovered, _ = _cross_user_conflicts(kb, agent, stmt, frozenset())

    if uncovered:
        owner = term.creator
        conflict_creators = {kb.statements[c.obj.render()].creator for c in uncovered}
        if owner is not None and owner != agent and owner in conflict_creators:
            # the definer misread the term owner's meaning
            return rejected(RejectReason.TERM_DEF_INCONSISTENT, tuple(uncovered))
        return _clone_on_definition(kb, agent, stmt, term, uncovered, now)

    sid = kb.next_statement_id(agent)
    stored = stmt.with_id(sid, now)
    kb.store_statement(stored)
    term.definitions.append(sid)
    place_statement(kb, stored)
    return EditOutcome(OutcomeStatus.ACCEPTED, created=(sid,),
                       warnings=tuple(statement_warnings(stored)))


def clone_term(kb: KnowledgeBase, original: Term, users: list[str]) -> dict[str, Term]:
    """Mint per-user subtype clones of `original` (suffixing on collision)."""
    clones: dict[str, Term] = {}
    original_key = original.id.render()
    for user in sorted(users):
        ident = kb.mint_term(user, original.id.name)
        clone = Term(ident, names=set(original.names), is_process=original.is_process)
        kb.add_term(clone, [HierarchyLink(LinkKind.SUBTYPE, ident.render(),
                                          original_key, user)])
        kb.clone_origin[ident.render()] = kb.clone_origin.get(original_key, original_key)
        clones[user] = clone
    return clones


def _rewrite_user_statements(kb: KnowledgeBase, user: str, old_key: str,
                             new_ident: Ident, skip: set[str] = frozenset()) -> list[Ident]:
    """Point one user's statements at their clone of a term."""
    rewritten = []
    old_term = kb.terms.get(old_key)
    for s in kb.statements_by(user):
        if s.id.render() in skip or not kb.statement_uses_term(s, old_key):
            continue
        s2 = rewrite_statement_terms(s, {old_key: new_ident})
        _replace_statement_everywhere(kb, s2)
        rewritten.append(s.id)
        if old_term is not None and s.id in old_term.definitions:
            old_term.definitions.remove(s.id)
            kb.terms[new_ident.render()].definitions.append(s.id)
    return rewritten


def _clone_on_definition(kb: KnowledgeBase, agent: str, stmt: Statement,
                         term: Term, conflicts: list[Conflict], now: str) -> EditOutcome:
    """Point 5/6 repair: a new definition of a shared term conflicts with
    other users' statements, so each involved user gets a clone."""
    term_key = term.id.render()
    involved = sorted({agent} | {kb.statements[c.obj.render()].creator for c in conflicts})
    clones = clone_term(kb, term, involved)

    stmt = rewrite_statement_terms(stmt, {term_key: clones[agent].id})
    sid = kb.next_statement_id(agent)
    stored = stmt.with_id(sid, now)
    kb.store_statement(stored)
    clones[agent].definitions.append(sid)

    rewritten: list[Ident] = []
    for user in involved:
        rewritten.extend(_rewrite_user_statements(kb, user, term_key, clones[user].id))
    place_statement(kb, stored)

    # cloning must actually resolve the conflicts; informal-name bridges can
    # survive the term split, and then the definition is simply rejected
    remaining, _ = _cross_user_conflicts(kb, agent, stored, frozenset())
    if remaining:
        return rejected(RejectReason.TERM_DEF_INCONSISTENT, tuple(remaining))

    entries = tuple(
        CloneEntry(clones[u].id, u, dropped_definition=None if u == agent else sid)
        for u in involved)
    report = CloneReport(term.id, entries, tuple(sorted(rewritten, key=str)))
    return EditOutcome(OutcomeStatus.ACCEPTED_WITH_CLONING, clone_report=report,
                       created=(sid,), warnings=tuple(statement_warnings(stored)))


# --- meta statements -----------------------------------------------------------

def _add_meta(kb: KnowledgeBase, agent: str, stmt: Statement, now: str) -> EditOutcome:
    body = stmt.body
    rel = relation_name(kb, body.relation)
    link_kind = COVERING_RELATIONS.get(rel)

    resolved: list[Ident] = []
    created: list[Ident] = []
    operands = [body.first, body.second]
    id_operands = [op for op in operands if isinstance(op, Ident)]
    for op in id_operands:
        if kb.get_statement(op) is None:
            return rejected(RejectReason.UNKNOWN_OBJECT)
    coverage = frozenset(op.render() for op in id_operands)

    for op in operands:
        if isinstance(op, Ident):
            resolved.append(op)
            continue
        existing = _find_structural(kb, op)
        if existing is not None:
            resolved.append(existing.id)
            coverage = coverage | {existing.id.render()}
            continue
        if op.creator and op.creator != agent:
            return rejected(RejectReason.NOT_CREATOR)
        sub_outcome = add_statement(kb, agent, op, now, covered=coverage,
                                    anchored=link_kind is not None)
        if not sub_outcome.accepted:
            return sub_outcome
        created.extend(sub_outcome.created)
        resolved.append(sub_outcome.created[-1])
        coverage = coverage | {i.render() for i in sub_outcome.created}

    meta = replace(stmt, body=MetaBody(body.relation, resolved[0], resolved[1]))
    sid = kb.next_statement_id(agent)
    stored = meta.with_id(sid, now)
    kb.store_statement(stored)
    if link_kind is not None:
        # `S1 has for <relation> S2`: S2 corrects/argues about S1
        kb.hierarchy.add_link(HierarchyLink(
            link_kind, resolved[1].render(), resolved[0].render(),
            agent, origin=sid))
    created.append(sid)
    return EditOutcome(OutcomeStatus.ACCEPTED, created=tuple(created))


def _find_structural(kb: KnowledgeBase, stmt: Statement) -> Statement | None:
    for stored in kb.statements.values():
        if stored.creator == stmt.creator and structurally_equal(stored, stmt):
            return stored
    return None


# --- term-relation lines ----------------------------------------------------------

def _materialize_link_body(kb: KnowledgeBase, stmt: Statement) -> None:
    body = stmt.body
    rel = relation_name(kb, body.relation)
    kind = ANCHOR_RELATIONS[rel]
    if kind is LinkKind.INFORMAL_GENERALIZATION:
        frm, to = ref_key(body.source_term), ref_key(body.target_term)
    else:
        frm, to = ref_key(body.target_term), ref_key(body.source_term)
    kb.hierarchy.add_link(HierarchyLink(kind, frm, to, stmt.creator, origin=stmt.id))


def add_links(kb: KnowledgeBase, agent: str, links: list[FlLink], now: str) -> EditOutcome:
    """Apply one term-relation line: anchoring relations declare hierarchy
    links (and may introduce terms, Rule 2); other relations assert
    one universal-possible belief per pair."""
    created: list[Ident] = []
    warnings: list[str] = []
    for link in links:
        creator = link.source or agent
        if creator not in kb.sources:
            return rejected(RejectReason.UNKNOWN_OBJECT)
        rel = link.relation
        obj = link.objects[0]
        if rel in ANCHOR_RELATIONS:
            outcome = _add_anchor_link(kb, creator, rel, link.subject, obj, now)
        else:
            stmt = _fl_belief(kb, creator, rel, link.subject, obj)
            outcome = add_statement(kb, creator, stmt, now)
        if not outcome.accepted:
            return outcome
        created.extend(outcome.created)
        warnings.extend(outcome.warnings)
    return EditOutcome(OutcomeStatus.ACCEPTED, created=tuple(created),
                       warnings=tuple(warnings))


def _fl_belief(kb: KnowledgeBase, creator: str, rel: str,
               subject: TermRef, obj: TermRef) -> Statement:
    from .model import Context

    edge = Edge(
        ConceptNode(subject, Quantifier.universal()),
        TermRef(rel),
        ConceptNode(obj, Quantifier.at_least(1)),
    )
    return Statement(creator=creator, kind=StatementKind.BELIEF,
                     body=GraphBody((edge,)), believer=creator,
                     contexts=(Context.possible(),))


def _add_anchor_link(kb: KnowledgeBase, creator: str, rel: str,
                     subject: TermRef, obj: TermRef, now: str) -> EditOutcome:
    kind = ANCHOR_RELATIONS[rel]
    stmt = Statement(creator=creator, kind=StatementKind.BELIEF,
                     body=LinkBody(TermRef(rel), subject, obj),
                     believer=creator)
    if _find_structural(kb, stmt) is not None:
        return rejected(RejectReason.OWN_REDUNDANCY)

    # the generalizing endpoint must exist; the specializing one may be new
    if kind is LinkKind.INFORMAL_GENERALIZATION:
        anchor_end, new_end = obj, subject
    else:
        anchor_end, new_end = subject, obj
    for ref in (anchor_end, new_end):
        if ref.ident is None:
            kb.ensure_informal(ref.name)
    if anchor_end.ident is not None and not kb.hierarchy.has(ref_key(anchor_end)):
        return rejected(RejectReason.UNKNOWN_OBJECT)

    sid = kb.next_statement_id(creator)
    stored = stmt.with_id(sid, now)
    new_term: Term | None = None
    if new_end.ident is not None and kb.term_for_ref(new_end) is None:
        if new_end.ident.creator != creator:
            return rejected(RejectReason.NOT_CREATOR)
        new_term = Term(new_end.ident, names={new_end.ident.name}, created=now,
                        is_process=(kind is LinkKind.SUBPROCESS))
    try:
        if new_term is not None:
            anchor = HierarchyLink(kind, ref_key(new_end), ref_key(anchor_end),
                                   creator, origin=sid)
            kb.add_term(new_term, [anchor])
            kb.store_statement(stored)
        else:
            kb.store_statement(stored)
            _materialize_link_body(kb, stored)
    except CycleIntroducedError:
        return rejected(RejectReason.OWN_INCONSISTENCY)
    except HierarchyError:
        return rejected(RejectReason.UNKNOWN_OBJECT)
    # connecting terms can make previously incomparable statements conflict;
    # such an implicit conflict rejects the link like any other addition
    uncovered = _conflicts_below(kb, ref_key(new_end), skip=stored.id)
    if uncovered:
        return rejected(RejectReason.IMPLICIT_CONFLICT, tuple(uncovered))
    return EditOutcome(OutcomeStatus.ACCEPTED, created=(sid,))


def _conflicts_below(kb: KnowledgeBase, key: str, skip: Ident) -> list[Conflict]:
    """Uncovered cross-creator conflicts among statements using `key` or a
    term below it (checked after a hierarchy link lands)."""
    affected_keys = kb.hierarchy.down_closure(key)
    out: list[Conflict] = []
    for stmt in kb.graph_statements():
        if stmt.id == skip:
            continue
        if not (kb.term_keys_used(stmt) & affected_keys):
            continue
        for c in detect_conflicts(stmt, kb):
            other = kb.statements.get(c.obj.render())
            if other is not None and other.creator != stmt.creator:
                out.append(c)
    return out


# --- removal --------------------------------------------------------------------

def remove_statement(kb: KnowledgeBase, agent: str, sid: Ident, now: str) -> EditOutcome:
    """The removal algorithm; creator-only, with loss-preserving repairs."""
    stmt = kb.get_statement(sid)
    if stmt is None:
        return rejected(RejectReason.UNKNOWN_OBJECT)
    if stmt.creator != agent:
        return rejected(RejectReason.NOT_CREATOR)

    referencing = [m for m in kb.meta_statements_referencing(sid) if m.id != sid]
    if any(m.creator == agent for m in referencing):
        return rejected(RejectReason.OWN_INCONSISTENCY)
    other_meta = [m for m in referencing if m.creator != agent]

    clones: list[CloneEntry] = []
    reattributed: list[Reattribution] = []
    rewritten: list[Ident] = []
    affected: list[Ident] = []

    if isinstance(stmt.body, MetaBody):
        affected.extend(op for op in (stmt.body.first, stmt.body.second)
                        if isinstance(op, Ident))

    if stmt.kind is StatementKind.DEFINITION:
        term = kb.term_for_ref(stmt.body.edges[0].subject.term)
        if term is not None:
            term_key = term.id.render()
            dependents = sorted({
                s.creator for s in kb.statements.values()
                if s.creator != agent and s.id != sid
                and kb.statement_uses_term(s, term_key)})
            new_clones = clone_term(kb, term, dependents) if dependents else {}
            for user, clone in new_clones.items():
                def_copy = rewrite_statement_terms(stmt, {term_key: clone.id})
                def_copy = replace(def_copy, creator=user, believer=None,
                                   interpreted_source=agent)
                cid = kb.next_statement_id(user)
                def_copy = def_copy.with_id(cid, now)
                kb.store_statement(def_copy)
                clone.definitions.append(cid)
                reattributed.append(Reattribution(sid, cid, user))
                rewritten.extend(_rewrite_user_statements(kb, user, term_key, clone.id))
                clones.append(CloneEntry(clone.id, user))
                affected.append(cid)
            affected.extend(rewritten)
            if sid in term.definitions:
                term.definitions.remove(sid)
        if other_meta:
            _repoint_metas(kb, agent, stmt, sid, other_meta, now,
                           reattributed, rewritten, affected)

    elif other_meta:
        _repoint_metas(kb, agent, stmt, sid, other_meta, now,
                       reattributed, rewritten, affected)

    if isinstance(stmt.body, LinkBody):
        failure = _reanchor_after_link_removal(kb, agent, stmt, now, clones,
                                               reattributed, rewritten)
        if failure is not None:
            return failure

    kb.drop_statement(sid)

    # the removal must not leave uncovered conflicts behind
    for aid in affected:
        target = kb.get_statement(aid)
        if target is None:
            continue
        for c in detect_conflicts(target, kb):
            stored = kb.statements.get(c.obj.render())
            if stored is not None and stored.creator != target.creator:
                return rejected(RejectReason.OWN_INCONSISTENCY, (c,))

    status = (OutcomeStatus.ACCEPTED_WITH_CLONING
              if clones or reattributed else OutcomeStatus.ACCEPTED)
    report = None
    if clones or reattributed or rewritten:
        original = None
        if stmt.kind is StatementKind.DEFINITION and isinstance(stmt.body, GraphBody):
            ref = stmt.body.edges[0].subject.term
            original = ref.ident
        report = CloneReport(original, tuple(clones),
                             tuple(sorted(rewritten, key=str)), tuple(reattributed))
    return EditOutcome(status, clone_report=report, removed=(sid,))


def _repoint_metas(kb: KnowledgeBase, agent: str, stmt: Statement, sid: Ident,
                   other_meta: list[Statement], now: str,
                   reattributed: list[Reattribution], rewritten: list[Ident],
                   affected: list[Ident]) -> None:
    """Other users' meta statements depend on the removed statement:
    re-attribute a copy to one of them and re-point their links at it."""
    user = sorted({m.creator for m in other_meta})[0]
    copy = replace(stmt, creator=user, believer=None, interpreted_source=agent)
    cid = kb.next_statement_id(user)
    copy = copy.with_id(cid, now)
    kb.store_statement(copy)
    if isinstance(copy.body, GraphBody):
        place_statement(kb, copy)
    if copy.kind is StatementKind.DEFINITION and isinstance(copy.body, GraphBody):
        term = kb.term_for_ref(copy.body.edges[0].subject.term)
        if term is not None:
            term.definitions.append(cid)
    reattributed.append(Reattribution(sid, cid, user))
    for m in other_meta:
        body = m.body
        first = cid if body.first == sid else body.first
        second = cid if body.second == sid else body.second
        m2 = replace(m, body=MetaBody(body.relation, first, second))
        kb.replace_statement(m2)
        kb.hierarchy.remove_links_of_origin(m.id)
        rel = relation_name(kb, body.relation)
        link_kind = COVERING_RELATIONS.get(rel)
        if link_kind is not None:
            kb.hierarchy.add_link(HierarchyLink(
                link_kind, second.render(), first.render(), m.creator, origin=m.id))
        rewritten.append(m.id)
    affected.append(cid)


def _reanchor_after_link_removal(kb: KnowledgeBase, agent: str, stmt: Statement,
                                 now: str, clones: list[CloneEntry],
                                 reattributed: list[Reattribution],
                                 rewritten: list[Ident]) -> EditOutcome | None:
    """Removing an anchoring line may orphan a term; re-attribute or drop it."""
    body = stmt.body
    rel = relation_name(kb, body.relation)
    kind = ANCHOR_RELATIONS.get(rel)
    if kind is None or kind is LinkKind.EQUIVALENCE:
        return None
    anchored_ref = body.source_term if kind is LinkKind.INFORMAL_GENERALIZATION \
        else body.target_term
    if anchored_ref.ident is None:
        return None
    term = kb.term_for_ref(anchored_ref)
    if term is None:
        return None
    key = term.id.render()
    remaining = [l for l in kb.hierarchy.links()
                 if l.frm == key and l.origin != stmt.id
                 and l.kind in (LinkKind.SUBTYPE, LinkKind.INSTANCE,
                                LinkKind.EQUIVALENCE, LinkKind.SUBPROCESS,
                                LinkKind.INFORMAL_GENERALIZATION)]
    if remaining:
        return None
    users = sorted({s.creator for s in kb.statements.values()
                    if s.id != stmt.id and kb.statement_uses_term(s, key)})
    others = [u for u in users if u != agent]
    if others:
        # rename the term to one of its other users (suffix when taken)
        user = others[0]
        new_ident = kb.mint_term(user, term.id.name)
        anchor_copy = replace(stmt, creator=user, believer=None, interpreted_source=agent)
        anchor_copy = rewrite_statement_terms(anchor_copy, {key: new_ident})
        cid = kb.next_statement_id(user)
        anchor_copy = anchor_copy.with_id(cid, now)
        renamed = Term(new_ident, names=set(term.names),
                       definitions=list(term.definitions), created=term.created,
                       is_process=term.is_process)
        kb.terms[new_ident.render()] = renamed
        kb.hierarchy.add_object(new_ident.render())
        kb.store_statement(anchor_copy)
        _materialize_link_body(kb, anchor_copy)
        for s in list(kb.statements.values()):
            if s.id in (stmt.id, cid):
                continue
            if kb.statement_uses_term(s, key):
                s2 = rewrite_statement_terms(s, {key: new_ident})
                _replace_statement_everywhere(kb, s2)
                rewritten.append(s.id)
        kb.clone_origin[new_ident.render()] = kb.clone_origin.get(key, key)
        reattributed.append(Reattribution(stmt.id, cid, user))
        clones.append(CloneEntry(new_ident, user))
        del kb.terms[key]
        kb.hierarchy.remove_object(key)
        return None
    if any(s.id != stmt.id and kb.statement_uses_term(s, key)
           for s in kb.statements_by(agent)):
        return rejected(RejectReason.OWN_INCONSISTENCY)
    if not term.definitions:
        del kb.terms[key]
        kb.hierarchy.remove_object(key)
    return None
