"""Canonical text rendering: sentences, term-relation lines, trees.

`parse_sentence(render_fe(s))` is structurally equal to `s` for any
normalized statement (determiners canonicalized, contexts sorted).
"""

from __future__ import annotations

from ..model import (
    Comparator,
    Context,
    ContextKind,
    Ident,
    LinkBody,
    Measure,
    MetaBody,
    Quantifier,
    QTag,
    Statement,
    StatementKind,
    TextBody,
)
from .parser import Command, CommandKind, FlLink, format_fraction, render_sexpr

OPEN = "`"
CLOSE = "´"

_CONTEXT_ORDER = {ContextKind.PLACE: 0, ContextKind.PERIOD: 1}


def _det(q: Quantifier, kind: StatementKind, subject: bool) -> str:
    if q.tag is QTag.UNIVERSAL:
        return "any " if (kind is StatementKind.DEFINITION and subject) else "every "
    if q.tag is QTag.NO:
        return "no "
    if q.tag is QTag.MOST:
        return "most "
    if q.tag is QTag.AT_LEAST_PERCENT:
        return f"{format_fraction(q.p)}% of "
    if q.tag is QTag.AT_LEAST:
        if not subject and q.n == 1:
            return "a "
        return f"at least {q.n} "
    if q.tag is QTag.EXACT:
        return f"{q.n} "
    return ""  # individual


def _measure_text(m: Measure) -> str:
    cmp_text = {Comparator.GE: "at least ", Comparator.LE: "at most ", Comparator.EQ: ""}
    return (f" with {m.relation.render()} {cmp_text[m.comparator]}"
            f"{format_fraction(m.magnitude)} {m.unit}")


def _context_text(ctx: Context) -> str:
    if ctx.kind is ContextKind.PLACE:
        return f"in place {ctx.place.render()}"
    return f"in period {ctx.start} to {ctx.end}"


def _attribution(stmt: Statement) -> str:
    text = ""
    if stmt.creator:
        text += f"{stmt.creator}#"
    if stmt.interpreted_source:
        text += f"{stmt.interpreted_source}#"
    return text


def render_fe(stmt: Statement) -> str:
    """Render a statement in the controlled sentence notation."""
    attr = _attribution(stmt)
    if isinstance(stmt.body, TextBody):
        return f'{attr}"{stmt.body.text}"'
    if isinstance(stmt.body, LinkBody):
        b = stmt.body
        return f"{b.source_term.render()} {b.relation.render()}: {b.target_term.render()}"
    if isinstance(stmt.body, MetaBody):
        def op_text(op) -> str:
            if isinstance(op, Ident):
                return op.render()
            return render_fe(op)
        b = stmt.body
        return (f"{attr}{OPEN}{op_text(b.first)} has for {b.relation.render()} "
                f"{op_text(b.second)}{CLOSE}")
    body = stmt.body
    if len(body.edges) != 1:
        raise ValueError("sentence rendering needs a single-clause body")
    edge = body.edges[0]
    copula = "can be" if stmt.has_modality_possible() else "is"
    subj = _det(edge.subject.quantifier, stmt.kind, True) + edge.subject.term.render()
    obj = _det(edge.obj.quantifier, stmt.kind, False) + edge.obj.term.render()
    text = f"{subj} {copula} {edge.relation.render()} of {obj}"
    if edge.obj.measure:
        text += _measure_text(edge.obj.measure)
    if edge.subject.measure:
        raise ValueError("subject measures are not expressible in the sentence notation")
    ctxs = sorted(
        (c for c in stmt.contexts if c.kind is not ContextKind.MODALITY_POSSIBLE),
        key=lambda c: (_CONTEXT_ORDER[c.kind], _context_text(c)),
    )
    if ctxs:
        text += " " + " and ".join(_context_text(c) for c in ctxs)
    return f"{attr}{OPEN}{text}{CLOSE}"


def render_fl(links: list[FlLink]) -> str:
    """Render term-relation links back to one compact line."""
    if not links:
        raise ValueError("nothing to render")
    subject = links[0].subject.render()
    groups: list[tuple[str, str | None, list[str]]] = []
    for link in links:
        objs = [o.render() for o in link.objects]
        if groups and groups[-1][0] == link.relation and groups[-1][1] == link.source:
            groups[-1][2].extend(objs)
        else:
            groups.append((link.relation, link.source, objs))
    parts = []
    for rel, source, objs in groups:
        text = f"{rel}: {' '.join(objs)}"
        if source:
            text += f" ({source})"
        parts.append(text)
    return f"{subject} " + ", ".join(parts)


def render_command(cmd: Command) -> str:
    """Canonical `;`-terminated command text (the journal format)."""
    if cmd.kind is CommandKind.ASSERT:
        return render_fe(cmd.statement) + ";"
    if cmd.kind is CommandKind.ASSERT_LINKS:
        return render_fl(cmd.links) + ";"
    if cmd.kind is CommandKind.REMOVE:
        return f"remove {cmd.target.render()};"
    if cmd.kind is CommandKind.REGISTER:
        if cmd.source_kind is not None and cmd.source_kind.value != "user":
            return f"source {cmd.name} {cmd.source_kind.value};"
        return f"register {cmd.name};"
    if cmd.kind is CommandKind.RATE:
        return f"rate {cmd.target.render()} {cmd.criterion} {format_fraction(cmd.value)};"
    if cmd.kind is CommandKind.DEF_MEASURE:
        return f"measure {cmd.name} {render_sexpr(cmd.expr)};"
    if cmd.kind is CommandKind.SET_FILTER:
        return f"filter {cmd.name} {cmd.action} {render_sexpr(cmd.expr)};"
    if cmd.kind is CommandKind.SPEC_OF:
        depth = f" {cmd.depth}" if cmd.depth is not None else ""
        return f"spec of {cmd.term.render()}{depth};"
    if cmd.kind is CommandKind.QUERY_GRAPH:
        return f"query {render_fe(cmd.statement)};"
    raise ValueError(f"unrenderable command kind {cmd.kind}")


def render_tree(node, indent: int = 0, lines: list[str] | None = None) -> str:
    """Indented, deterministic tree rendering (children in identifier order).

    Nodes are duck-typed: `.label`, `.link_kind`, `.creator`, `.children`.
    """
    own = lines is None
    if lines is None:
        lines = []
    if indent == 0:
        lines.append(node.label)
    else:
        annotation = f"  ({node.link_kind}, {node.creator})" if node.link_kind else ""
        lines.append("  " * indent + node.label + annotation)
    for child in sorted(node.children, key=lambda c: c.label):
        render_tree(child, indent + 1, lines)
    return "\n".join(lines) if own else ""
