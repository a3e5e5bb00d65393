"""Extended-specialization detection between statements.

A statement Y specializes a statement X when X's graph structurally
matches a part of Y's with compatible terms, quantifiers, measures and
contexts; Y then includes X's information and either contradicts it or
makes it redundant.  Matching is quantifier-aware:

- counting quantifiers are monotone in their restrictor, so the target
  term may narrow ("2 penguins fly" entails "at least 1 bird flies");
- universal (and `no`) restrictors are anti-monotone, so the direction
  reverses ("every animal flies" entails "every bird flies");
- exact-n claims pin their whole scope: a match may not narrow any term
  or tighten any measure, or the entailment breaks;
- percentage claims relate to universals in either term direction and to
  other percentages only over the same restrictor; `most` is read as
  "at least 50%" and flagged advisory.

Projection runs a tree-order dynamic program when the query graph is
acyclic and falls back to backtracking otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Protocol

from .hierarchy import ref_key
from .model import (
    Comparator,
    ConceptNode,
    Conflict,
    ConflictKind,
    ContextKind,
    Edge,
    GraphBody,
    Measure,
    Quantifier,
    QTag,
    Statement,
    TermRef,
    statement_key,
)


class OntologyView(Protocol):
    """What the matcher needs to know about stored terms."""

    def up_closure_of(self, key: str) -> set[str]:
        """Keys reachable upward via subtype/instance/equivalence/
        informal-generalization links, including the key itself."""
        ...

    def names_of(self, key: str) -> set[str]:
        """Names attached to a formal term (empty for unknown keys)."""
        ...


class QRel(str, Enum):
    EQUAL = "equal"
    SUBSUMES = "subsumes"
    INSTANTIATES = "instantiates"
    NONE = "none"


_POSITIVE_TAGS = {QTag.INDIVIDUAL, QTag.UNIVERSAL, QTag.EXACT, QTag.AT_LEAST,
                  QTag.AT_LEAST_PERCENT, QTag.MOST}


def _effective(q: Quantifier) -> Quantifier:
    """`most` participates in the lattice as at-least-50%."""
    if q.tag is QTag.MOST:
        return Quantifier.at_least_percent(50)
    return q


def _is_positive_witness(q: Quantifier) -> bool:
    q = _effective(q)
    if q.tag not in _POSITIVE_TAGS:
        return False
    if q.tag is QTag.EXACT or q.tag is QTag.AT_LEAST:
        return (q.n or 0) > 0
    if q.tag is QTag.AT_LEAST_PERCENT:
        return (q.p or 0) > 0
    return True


def quantifier_relation(general: Quantifier, specific: Quantifier) -> QRel:
    g, s = _effective(general), _effective(specific)
    if g == s:
        return QRel.EQUAL
    if s.tag is QTag.INDIVIDUAL and g.tag in (
            QTag.UNIVERSAL, QTag.EXACT, QTag.AT_LEAST, QTag.AT_LEAST_PERCENT):
        return QRel.INSTANTIATES
    if g.tag is QTag.AT_LEAST:
        if s.tag is QTag.EXACT and s.n >= g.n:
            return QRel.SUBSUMES
        if s.tag is QTag.AT_LEAST and s.n > g.n:
            return QRel.SUBSUMES
    if g.tag is QTag.AT_LEAST_PERCENT:
        if s.tag is QTag.UNIVERSAL:
            return QRel.SUBSUMES
        if s.tag is QTag.AT_LEAST_PERCENT and s.p > g.p:
            return QRel.SUBSUMES
    return QRel.NONE


def quantifier_subsumes(general: Quantifier, specific: Quantifier) -> bool:
    """True iff `specific` entails `general` in the quantifier lattice.

    Instantiation (individual under a broader quantifier) is flagged
    separately by `quantifier_relation` and does not count here.
    """
    return quantifier_relation(general, specific) in (QRel.EQUAL, QRel.SUBSUMES)


def term_subsumes(general: TermRef, specific: TermRef, onto: OntologyView) -> bool:
    """Identical, linked by a subtype/instance/equivalence chain, or
    bridged by an informal generalization (name of the specific or of one
    of its ancestors)."""
    g_key, s_key = ref_key(general), ref_key(specific)
    if g_key == s_key:
        return True
    closure = onto.up_closure_of(s_key)
    if g_key in closure:
        return True
    if general.ident is None:
        for key in closure:
            if general.name in onto.names_of(key):
                return True
    return False


def _terms_equivalent(a: TermRef, b: TermRef, onto: OntologyView) -> bool:
    return term_subsumes(a, b, onto) and term_subsumes(b, a, onto)


def _measure_refines(general: Measure, specific: Measure, onto: OntologyView) -> bool:
    """The specific measure is equal or more restrictive."""
    if not term_subsumes(general.relation, specific.relation, onto):
        return False
    if general.unit != specific.unit:
        return False
    g, s = general, specific
    if g.comparator is Comparator.GE:
        return s.comparator in (Comparator.GE, Comparator.EQ) and s.magnitude >= g.magnitude
    if g.comparator is Comparator.LE:
        return s.comparator in (Comparator.LE, Comparator.EQ) and s.magnitude <= g.magnitude
    return s.comparator is Comparator.EQ and s.magnitude == g.magnitude


def _measures_disjoint(a: Measure, b: Measure, onto: OntologyView) -> bool:
    if a.unit != b.unit:
        return False
    comparable = (term_subsumes(a.relation, b.relation, onto)
                  or term_subsumes(b.relation, a.relation, onto))
    if not comparable:
        return False
    lo, hi = None, None
    for m in (a, b):
        if m.comparator is Comparator.GE:
            lo = m.magnitude if lo is None else max(lo, m.magnitude)
        elif m.comparator is Comparator.LE:
            hi = m.magnitude if hi is None else min(hi, m.magnitude)
        else:
            lo = m.magnitude if lo is None else max(lo, m.magnitude)
            hi = m.magnitude if hi is None else min(hi, m.magnitude)
    return lo is not None and hi is not None and lo > hi


@dataclass(frozen=True)
class NodeMatch:
    qrel: QRel
    narrowed: bool  # target term strictly narrower, or measure added/tightened


def node_match(qn: ConceptNode, tn: ConceptNode, onto: OntologyView) -> NodeMatch | None:
    """Can target node `tn` serve as the image of query node `qn`?"""
    qq, tq = _effective(qn.quantifier), _effective(tn.quantifier)
    qrel = quantifier_relation(qq, tq)
    if qrel is QRel.NONE:
        return None

    anti_monotone = qq.tag in (QTag.UNIVERSAL, QTag.NO) and tq.tag == qq.tag
    if anti_monotone:
        ok = term_subsumes(tn.term, qn.term, onto)
    elif qq.tag is QTag.EXACT and qrel is not QRel.INSTANTIATES:
        ok = _terms_equivalent(qn.term, tn.term, onto)
    elif qq.tag is QTag.AT_LEAST_PERCENT and tq.tag is QTag.UNIVERSAL:
        ok = (term_subsumes(qn.term, tn.term, onto)
              or term_subsumes(tn.term, qn.term, onto))
    elif qq.tag is QTag.AT_LEAST_PERCENT and tq.tag is QTag.AT_LEAST_PERCENT:
        ok = _terms_equivalent(qn.term, tn.term, onto)
    else:
        ok = term_subsumes(qn.term, tn.term, onto)
    if not ok:
        return None

    narrowed = not _terms_equivalent(qn.term, tn.term, onto)
    if qn.measure is None:
        if tn.measure is not None:
            narrowed = True
    else:
        if tn.measure is None or not _measure_refines(qn.measure, tn.measure, onto):
            return None
        if (tn.measure.comparator != qn.measure.comparator
                or tn.measure.magnitude != qn.measure.magnitude):
            narrowed = True
    return NodeMatch(qrel, narrowed)


@dataclass
class Mapping:
    """Structure-preserving map from query nodes/edges into the target."""

    node_map: dict[ConceptNode, ConceptNode]
    edge_map: dict[Edge, Edge]
    matches: dict[ConceptNode, NodeMatch] = field(default_factory=dict)

    def qrels(self) -> Iterable[QRel]:
        return (m.qrel for m in self.matches.values())

    def narrowed(self) -> bool:
        return any(m.narrowed for m in self.matches.values())


def _graph_nodes(edges: tuple[Edge, ...]) -> list[ConceptNode]:
    seen: dict[ConceptNode, None] = {}
    for e in edges:
        seen.setdefault(e.subject)
        seen.setdefault(e.obj)
    return list(seen)


def _is_acyclic(edges: tuple[Edge, ...], nodes: list[ConceptNode]) -> bool:
    index = {n: i for i, n in enumerate(nodes)}
    parent = list(range(len(nodes)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in edges:
        a, b = find(index[e.subject]), find(index[e.obj])
        if a == b:
            return False
        parent[a] = b
    return True


def project_graph(query: GraphBody, target: GraphBody, onto: OntologyView,
                  node_ok=None) -> Mapping | None:
    """Find a homomorphism from the query graph into the target graph.

    Acyclic queries run a leaf-up dynamic program over a spanning tree;
    cyclic ones fall back to backtracking over node assignments.
    """
    node_ok = node_ok or (lambda qn, tn: node_match(qn, tn, onto))
    qnodes = _graph_nodes(query.edges)
    tnodes = _graph_nodes(target.edges)
    if not qnodes:
        return Mapping({}, {})
    if not tnodes:
        return None

    candidates: dict[ConceptNode, dict[ConceptNode, NodeMatch]] = {}
    for qn in qnodes:
        cands = {}
        for tn in tnodes:
            m = node_ok(qn, tn)
            if m is not None:
                cands[tn] = m
        if not cands:
            return None
        candidates[qn] = cands

    # target edge index by (subject, object)
    t_index: dict[tuple[ConceptNode, ConceptNode], list[Edge]] = {}
    for te in target.edges:
        t_index.setdefault((te.subject, te.obj), []).append(te)
    rel_cache: dict[tuple[TermRef, TermRef], bool] = {}

    def edge_ok(qe: Edge, te: Edge) -> bool:
        pair = (qe.relation, te.relation)
        hit = rel_cache.get(pair)
        if hit is None:
            hit = term_subsumes(qe.relation, te.relation, onto)
            rel_cache[pair] = hit
        return hit

    def edge_image(qe: Edge, ts: ConceptNode, to: ConceptNode) -> Edge | None:
        for te in t_index.get((ts, to), ()):
            if edge_ok(qe, te):
                return te
        return None

    if _is_acyclic(query.edges, qnodes):
        mapping = _project_tree(query, qnodes, candidates, edge_ok, edge_image, target)
    else:
        mapping = _project_backtrack(query, qnodes, candidates, edge_image)
    if mapping is None:
        return None
    mapping.matches = {qn: candidates[qn][tn] for qn, tn in mapping.node_map.items()}
    return mapping


def _project_tree(query: GraphBody, qnodes, candidates, edge_ok, edge_image,
                  target: GraphBody) -> Mapping | None:
    # adjacency: (neighbor, edge, node_is_subject)
    adj: dict[ConceptNode, list[tuple[ConceptNode, Edge, bool]]] = {n: [] for n in qnodes}
    for e in query.edges:
        adj[e.subject].append((e.obj, e, True))
        adj[e.obj].append((e.subject, e, False))
    out_index: dict[ConceptNode, list[Edge]] = {}
    in_index: dict[ConceptNode, list[Edge]] = {}
    for te in target.edges:
        out_index.setdefault(te.subject, []).append(te)
        in_index.setdefault(te.obj, []).append(te)

    feasible = {qn: set(candidates[qn]) for qn in qnodes}
    node_map: dict[ConceptNode, ConceptNode] = {}
    edge_map: dict[Edge, Edge] = {}

    visited: set[ConceptNode] = set()
    for root in qnodes:
        if root in visited:
            continue
        order: list[tuple[ConceptNode, ConceptNode | None, Edge | None, bool]] = []
        stack = [(root, None, None, True)]
        visited.add(root)
        while stack:
            node, par, via, as_subj = stack.pop()
            order.append((node, par, via, as_subj))
            for nxt, e, is_subj in adj[node]:
                if nxt not in visited:
                    visited.add(nxt)
                    stack.append((nxt, node, e, is_subj))
        # leaf-up filtering: one pass over the target edges per tree edge
        for node, par, via, is_subj in reversed(order):
            if par is None:
                continue
            keep = set()
            for te in target.edges:
                tp, tc = (te.subject, te.obj) if is_subj else (te.obj, te.subject)
                if tp in feasible[par] and tc in feasible[node] and edge_ok(via, te):
                    keep.add(tp)
            feasible[par] &= keep
            if not feasible[par]:
                return None
        # top-down assignment
        for node, par, via, is_subj in order:
            if par is None:
                node_map[node] = next(iter(sorted(feasible[node], key=str)))
                continue
            tp = node_map[par]
            pool = out_index.get(tp, ()) if is_subj else in_index.get(tp, ())
            chosen = None
            for te in pool:
                tc = te.obj if is_subj else te.subject
                if tc in feasible[node] and edge_ok(via, te):
                    chosen = (tc, te)
                    break
            if chosen is None:
                return None
            node_map[node] = chosen[0]
            edge_map[via] = chosen[1]
    # parallel edges between an already-mapped pair still need images
    for e in query.edges:
        if e not in edge_map:
            te = edge_image(e, node_map[e.subject], node_map[e.obj])
            if te is None:
                return None
            edge_map[e] = te
    return Mapping(node_map, edge_map)


def _project_backtrack(query: GraphBody, qnodes, candidates, edge_image) -> Mapping | None:
    order = sorted(qnodes, key=lambda n: len(candidates[n]))
    node_map: dict[ConceptNode, ConceptNode] = {}

    def consistent(qn: ConceptNode, tn: ConceptNode) -> bool:
        for e in query.edges:
            if e.subject == qn and e.obj in node_map:
                if edge_image(e, tn, node_map[e.obj]) is None:
                    return False
            if e.obj == qn and e.subject in node_map:
                if edge_image(e, node_map[e.subject], tn) is None:
                    return False
            if e.subject == qn and e.obj == qn:
                if edge_image(e, tn, tn) is None:
                    return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        qn = order[i]
        for tn in candidates[qn]:
            if consistent(qn, tn):
                node_map[qn] = tn
                if search(i + 1):
                    return True
                del node_map[qn]
        return False

    if not search(0):
        return None
    edge_map = {}
    for e in query.edges:
        te = edge_image(e, node_map[e.subject], node_map[e.obj])
        if te is None:
            return None
        edge_map[e] = te
    return Mapping(dict(node_map), edge_map)


# --- statement-level projection and comparison ---------------------------

def _context_places(stmt: Statement) -> list[TermRef]:
    return [c.place for c in stmt.contexts if c.kind is ContextKind.PLACE and c.place]


def _context_periods(stmt: Statement) -> list[tuple[str, str]]:
    return [(c.start, c.end) for c in stmt.contexts if c.kind is ContextKind.PERIOD]


def _contexts_refine(x: Statement, y: Statement, onto: OntologyView) -> bool:
    """y's contexts must be within x's; missing context means anywhere/anytime."""
    if not x.has_modality_possible() and y.has_modality_possible():
        return False  # a mere possibility does not refine a plain claim
    for place in _context_places(x):
        y_places = _context_places(y)
        if not y_places:
            return False
        if not all(term_subsumes(place, yp, onto) for yp in y_places):
            return False
    for start, end in _context_periods(x):
        y_periods = _context_periods(y)
        if not y_periods:
            return False
        if not all(start <= ys and ye <= end for ys, ye in y_periods):
            return False
    return True


def _contexts_overlap(x: Statement, y: Statement, onto: OntologyView) -> bool:
    """Loose compatibility used for exclusion (modality ignored)."""
    xp, yp = _context_places(x), _context_places(y)
    if xp and yp:
        compatible = any(
            term_subsumes(a, b, onto) or term_subsumes(b, a, onto)
            for a in xp for b in yp)
        if not compatible:
            return False
    xt, yt = _context_periods(x), _context_periods(y)
    if xt and yt:
        if not any(a_start <= b_end and b_start <= a_end
                   for a_start, a_end in xt for b_start, b_end in yt):
            return False
    return True


def project(x: Statement, y: Statement, onto: OntologyView) -> Mapping | None:
    """Project statement x (the query) into statement y (the target)."""
    if not isinstance(x.body, GraphBody) or not isinstance(y.body, GraphBody):
        return None
    if not _contexts_refine(x, y, onto):
        return None
    return project_graph(x.body, y.body, onto)


class CompareKind(str, Enum):
    EQUIVALENT = "equivalent"
    SPECIALIZES = "specializes"
    GENERALIZES = "generalizes"
    INSTANTIATION_OF = "instantiation-of"
    INSTANTIATED_BY = "instantiated-by"
    EXCLUSIVE = "exclusive"
    UNRELATED = "unrelated"


@dataclass(frozen=True)
class CompareResult:
    kind: CompareKind
    mapping: Mapping | None = None
    via_measure: bool = False
    advisory: bool = False


def _has_no_node(stmt: Statement) -> bool:
    return any(n.quantifier.tag is QTag.NO
               for e in stmt.body.edges for n in (e.subject, e.obj))


def _exclusion_node_ok(onto: OntologyView):
    def ok(qn: ConceptNode, tn: ConceptNode) -> NodeMatch | None:
        comparable = (term_subsumes(qn.term, tn.term, onto)
                      or term_subsumes(tn.term, qn.term, onto))
        if not comparable:
            return None
        if qn.quantifier.tag is QTag.NO:
            if not _is_positive_witness(tn.quantifier):
                return None
            if qn.measure is not None:
                if tn.measure is None or not _measure_refines(qn.measure, tn.measure, onto):
                    return None
            return NodeMatch(QRel.NONE, False)
        if tn.quantifier.tag is QTag.NO:
            if not _is_positive_witness(qn.quantifier):
                return None
            if tn.measure is not None:
                if qn.measure is None or not _measure_refines(tn.measure, qn.measure, onto):
                    return None
            return NodeMatch(QRel.NONE, False)
        if quantifier_relation(qn.quantifier, tn.quantifier) is QRel.NONE and \
                quantifier_relation(tn.quantifier, qn.quantifier) is QRel.NONE:
            return None
        return NodeMatch(QRel.NONE, False)
    return ok


def _exclusion_edge_relation(qe_rel: TermRef, te_rel: TermRef, onto: OntologyView) -> bool:
    return (term_subsumes(qe_rel, te_rel, onto)
            or term_subsumes(te_rel, qe_rel, onto))


def _check_exclusion(x: Statement, y: Statement, onto: OntologyView,
                     measure_exclusion: bool) -> CompareResult | None:
    if not _contexts_overlap(x, y, onto):
        return None
    x_no, y_no = _has_no_node(x), _has_no_node(y)
    if x_no != y_no:
        neg, pos = (x, y) if x_no else (y, x)
        mapping = _project_loose(neg, pos, onto)
        if mapping is not None:
            return CompareResult(CompareKind.EXCLUSIVE, mapping)
        mapping = _project_loose(pos, neg, onto)
        if mapping is not None:
            return CompareResult(CompareKind.EXCLUSIVE, mapping)
        return None
    if measure_exclusion and not x_no and not y_no:
        mapping = _project_loose(x, y, onto)
        if mapping is not None:
            for qn, tn in mapping.node_map.items():
                if qn.measure and tn.measure and _measures_disjoint(qn.measure, tn.measure, onto):
                    return CompareResult(CompareKind.EXCLUSIVE, mapping, via_measure=True)
    return None


def _project_loose(a: Statement, b: Statement, onto: OntologyView) -> Mapping | None:
    """Structural projection for the exclusion check (quantifier-polarity
    and either-direction term/relation comparability)."""
    if not isinstance(a.body, GraphBody) or not isinstance(b.body, GraphBody):
        return None

    index: dict[tuple[ConceptNode, ConceptNode], list[Edge]] = {}
    for te in b.body.edges:
        index.setdefault((te.subject, te.obj), []).append(te)
    node_ok = _exclusion_node_ok(onto)
    qnodes = _graph_nodes(a.body.edges)
    tnodes = _graph_nodes(b.body.edges)
    candidates = {}
    for qn in qnodes:
        cands = {tn: m for tn in tnodes if (m := node_ok(qn, tn)) is not None}
        if not cands:
            return None
        candidates[qn] = cands

    def edge_ok(qe: Edge, te: Edge) -> bool:
        return _exclusion_edge_relation(qe.relation, te.relation, onto)

    def edge_image(qe: Edge, ts: ConceptNode, to: ConceptNode) -> Edge | None:
        for te in index.get((ts, to), ()):
            if edge_ok(qe, te):
                return te
        return None

    if _is_acyclic(a.body.edges, qnodes):
        return _project_tree(a.body, qnodes, candidates, edge_ok, edge_image, b.body)
    return _project_backtrack(a.body, qnodes, candidates, edge_image)


def _classify_mapping(mapping: Mapping, query: Statement) -> str:
    """'equal' | 'instantiation' | 'specialization' | 'blocked'."""
    rels = set(mapping.qrels())
    if rels <= {QRel.EQUAL} and not mapping.narrowed():
        return "equal"
    if QRel.INSTANTIATES in rels and rels <= {QRel.EQUAL, QRel.INSTANTIATES}:
        return "instantiation"
    has_exact_query = any(
        n.quantifier.tag is QTag.EXACT
        for e in query.body.edges for n in (e.subject, e.obj))
    if has_exact_query and (mapping.narrowed() or rels != {QRel.EQUAL}):
        return "blocked"
    return "specialization"


def _advisory(x: Statement, y: Statement) -> bool:
    return any(
        n.quantifier.tag is QTag.MOST
        for s in (x, y) if isinstance(s.body, GraphBody)
        for e in s.body.edges for n in (e.subject, e.obj))


def compare(x: Statement, y: Statement, onto: OntologyView,
            measure_exclusion: bool = True) -> CompareResult:
    """Relate two graph-bodied statements (see CompareKind)."""
    if not isinstance(x.body, GraphBody) or not isinstance(y.body, GraphBody):
        return CompareResult(CompareKind.UNRELATED)
    advisory = _advisory(x, y)
    if statement_key(x)[3:] == statement_key(y)[3:]:
        # same kind, body and contexts regardless of attribution
        identity = project(x, y, onto)
        return CompareResult(CompareKind.EQUIVALENT, identity, advisory=advisory)

    exclusion = _check_exclusion(x, y, onto, measure_exclusion)
    if exclusion is not None:
        return replace(exclusion, advisory=advisory)

    p_xy = project(x, y, onto)   # y specializes x when this exists
    p_yx = project(y, x, onto)   # x specializes y when this exists
    cls_xy = _classify_mapping(p_xy, x) if p_xy else None
    cls_yx = _classify_mapping(p_yx, y) if p_yx else None

    if cls_xy == "equal" and cls_yx == "equal":
        return CompareResult(CompareKind.EQUIVALENT, p_xy, advisory=advisory)
    if cls_xy == "instantiation":
        return CompareResult(CompareKind.INSTANTIATED_BY, p_xy, advisory=advisory)
    if cls_yx == "instantiation":
        return CompareResult(CompareKind.INSTANTIATION_OF, p_yx, advisory=advisory)
    if cls_yx in ("specialization", "equal"):
        return CompareResult(CompareKind.SPECIALIZES, p_yx, advisory=advisory)
    if cls_xy in ("specialization", "equal"):
        return CompareResult(CompareKind.GENERALIZES, p_xy, advisory=advisory)
    return CompareResult(CompareKind.UNRELATED)


_CONFLICT_KINDS = {
    CompareKind.EQUIVALENT: ConflictKind.EQUIVALENCE,
    CompareKind.SPECIALIZES: ConflictKind.SPECIALIZATION,
    CompareKind.GENERALIZES: ConflictKind.GENERALIZATION,
    CompareKind.EXCLUSIVE: ConflictKind.EXCLUSION,
}


@dataclass
class PlacementDetail:
    """Direct neighbours of a statement in the specialization order."""

    generalizations: list[tuple[Statement, CompareKind]] = field(default_factory=list)
    specializations: list[tuple[Statement, CompareKind]] = field(default_factory=list)
    equivalents: list[Statement] = field(default_factory=list)


def placement_detail(stmt: Statement, kb) -> PlacementDetail:
    """Minimal generalizations / maximal specializations among stored
    statements, with the compare kind that established each edge."""
    detail = PlacementDetail()
    if not isinstance(stmt.body, GraphBody):
        return detail
    gens: list[tuple[Statement, CompareKind]] = []
    specs: list[tuple[Statement, CompareKind]] = []
    for stored in kb.graph_statements():
        if stmt.id is not None and stored.id == stmt.id:
            continue
        r = compare(stmt, stored, kb)
        if r.kind in (CompareKind.SPECIALIZES, CompareKind.INSTANTIATION_OF):
            gens.append((stored, r.kind))
        elif r.kind in (CompareKind.GENERALIZES, CompareKind.INSTANTIATED_BY):
            specs.append((stored, r.kind))
        elif r.kind is CompareKind.EQUIVALENT:
            detail.equivalents.append(stored)

    def strictly_below(a: Statement, b: Statement) -> bool:
        return compare(a, b, kb).kind is CompareKind.SPECIALIZES

    for stored, kind in gens:
        if not any(strictly_below(other, stored)
                   for other, _ in gens if other.id != stored.id):
            detail.generalizations.append((stored, kind))
    for stored, kind in specs:
        if not any(strictly_below(stored, other)
                   for other, _ in specs if other.id != stored.id):
            detail.specializations.append((stored, kind))
    return detail


def detect_conflicts(new: Statement, kb, measure_exclusion: bool = True) -> list[Conflict]:
    """Conflicts of `new` against every stored graph statement.

    Instantiations are exceptions (adding an example needs no link);
    statements already explicitly related to `new` are skipped.
    """
    if not isinstance(new.body, GraphBody):
        return []
    conflicts: list[Conflict] = []
    for stored in kb.graph_statements():
        if new.id is not None and stored.id == new.id:
            continue
        result = compare(new, stored, kb, measure_exclusion=measure_exclusion)
        kind = _CONFLICT_KINDS.get(result.kind)
        if kind is None:
            continue
        if new.id is not None and kb.explicitly_related_ids(new.id, stored.id):
            continue
        conflicts.append(Conflict(stored.id, kind, via_measure=result.via_measure,
                                  advisory=result.advisory))
    return conflicts
