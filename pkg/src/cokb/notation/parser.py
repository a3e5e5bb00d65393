"""Parsers for the controlled sentence notation, the compact term-relation
notation, and the command language.

Sentence grammar (LL(2), deterministic):

    SENTENCE := [NAME '#'] [NAME '#'] ( '`' CLAUSE {['and'] CONTEXT} '´' | '"' TEXT '"' )
    CLAUSE   := OPERAND 'has' 'for' REL OPERAND        -- meta form
              | SUBJ COPULA REL 'of' OBJ               -- simple form
    OPERAND  := SENTENCE | statement identifier
    SUBJ     := DET NP | NP                            -- bare NP = individual
    DET      := 'every' | 'any' | 'no' | 'most' | NUM '%' 'of'
              | 'at' 'least' NUM | NUM
    COPULA   := 'is' | 'are' | 'can' 'be' | 'is|are' 'able' 'to' 'be'
    OBJ      := ('a'|'the'|DET) NP ['with' REL [('at'('least'|'most'))] NUM UNIT]
    CONTEXT  := 'in' 'place' NP | 'in' 'period' WORD 'to' WORD

`any` marks a definition, everything else a belief; 'can'/'able to'
copulas add a modality-possible context.  Unprefixed multiword noun
phrases fold into a single informal term name (underscore-joined).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from ..model import (
    Comparator,
    ConceptNode,
    Context,
    ContextKind,
    Edge,
    GraphBody,
    Ident,
    Measure,
    MetaBody,
    Quantifier,
    QTag,
    SourceKind,
    Statement,
    StatementKind,
    TermRef,
    TextBody,
)
from .lexer import ParseError, TokenStream, tokenize

_COPULA_STARTS = {"is", "are", "can"}
_NP_STOPS = _COPULA_STARTS | {"has", "with", "in", "and", "to", "of"}
_SUBJ_DETS = {"every", "any", "no", "most", "a", "the"}


def _is_number(text: str) -> bool:
    try:
        Fraction(text)
        return True
    except (ValueError, ZeroDivisionError):
        return False


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def format_fraction(f: Fraction) -> str:
    """Exact rendering: integers bare, terminating decimals as decimals."""
    if f.denominator == 1:
        return str(f.numerator)
    den = f.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        digits = max(twos, fives)
        scaled = f * Fraction(10) ** digits
        text = str(scaled.numerator).rjust(digits + 1, "0")
        return f"{text[:-digits]}.{text[-digits:]}"
    return f"{f.numerator}/{f.denominator}"


# --- sentence parsing ----------------------------------------------------

def _at_sentence_start(s: TokenStream) -> bool:
    """True when the cursor sits on `[word# [word#]] (` or ")`."""
    k = 0
    hops = 0
    while hops < 2:
        a, b = s.peek(k), s.peek(k + 1)
        if a is not None and a.kind == "word" and b is not None and b.kind == "sym" and b.text == "#":
            nxt = s.peek(k + 2)
            if nxt is not None and (nxt.kind in ("open", "string") or (nxt.kind == "word" and hops < 1)):
                k += 2
                hops += 1
                continue
        break
    tok = s.peek(k)
    return tok is not None and tok.kind in ("open", "string")


def _parse_qname(s: TokenStream) -> TermRef:
    tok = s.expect("word")
    nxt = s.peek()
    if nxt is not None and nxt.kind == "sym" and nxt.text == "#":
        s.next()
        name = s.expect("word")
        return TermRef(name.text, Ident(tok.text, name.text))
    return TermRef(tok.text)


def _parse_np(s: TokenStream, stops: set[str]) -> TermRef:
    """Noun phrase: a qualified name, or informal words joined with `_`."""
    first = s.expect("word")
    nxt = s.peek()
    if nxt is not None and nxt.kind == "sym" and nxt.text == "#":
        s.next()
        name = s.expect("word")
        return TermRef(name.text, Ident(first.text, name.text))
    words = [first.text]
    while True:
        tok = s.peek()
        if tok is None or tok.kind != "word" or tok.text in stops or _is_number(tok.text):
            break
        words.append(s.next().text)
    return TermRef("_".join(words))


def _parse_det(s: TokenStream) -> tuple[Quantifier | None, bool]:
    """Return (quantifier, is_definition); (None, False) when no determiner."""
    tok = s.peek()
    if tok is None or tok.kind != "word":
        return None, False
    text = tok.text
    if text == "any":
        s.next()
        return Quantifier.universal(), True
    if text == "every":
        s.next()
        return Quantifier.universal(), False
    if text == "no":
        s.next()
        return Quantifier.no(), False
    if text == "most":
        s.next()
        return Quantifier.most(), False
    if text == "at" and s.peek(1) is not None and s.peek(1).text == "least":
        s.next()
        s.next()
        num = s.expect("word")
        if not _is_number(num.text):
            raise ParseError("expected number after 'at least'", num.line, num.column,
                             expected="number", found=num.text)
        return Quantifier.at_least(int(num.text)), False
    if _is_number(text):
        s.next()
        pct = s.peek()
        if pct is not None and pct.kind == "sym" and pct.text == "%":
            s.next()
            s.expect("word", "of")
            return Quantifier.at_least_percent(parse_fraction(text)), False
        return Quantifier.exact(int(text)), False
    return None, False


def _parse_copula(s: TokenStream) -> bool:
    """Consume a copula; True when it carries possibility ('can'/'able to')."""
    tok = s.expect("word")
    if tok.text == "can":
        s.expect("word", "be")
        return True
    if tok.text in ("is", "are"):
        nxt = s.peek()
        if nxt is not None and nxt.kind == "word" and nxt.text == "able":
            s.next()
            s.expect("word", "to")
            s.expect("word", "be")
            return True
        return False
    raise ParseError("expected copula", tok.line, tok.column, expected="is/are/can be",
                     found=tok.text)


def _parse_measure(s: TokenStream) -> Measure:
    s.expect("word", "with")
    relation = _parse_qname(s)
    comparator = Comparator.EQ
    tok = s.peek()
    if tok is not None and tok.kind == "word" and tok.text == "at":
        s.next()
        which = s.expect("word")
        if which.text == "least":
            comparator = Comparator.GE
        elif which.text == "most":
            comparator = Comparator.LE
        else:
            raise ParseError("expected 'least' or 'most'", which.line, which.column,
                             expected="least|most", found=which.text)
    num = s.expect("word")
    if not _is_number(num.text):
        raise ParseError("expected measure magnitude", num.line, num.column,
                         expected="number", found=num.text)
    unit = s.expect("word")
    return Measure(relation, comparator, parse_fraction(num.text), unit.text)


def _node(term: TermRef, quantifier: Quantifier, measure: Measure | None = None) -> ConceptNode:
    referent = term.ident if quantifier.tag is QTag.INDIVIDUAL and term.ident else None
    return ConceptNode(term, quantifier, referent=referent, measure=measure)


def _parse_contexts(s: TokenStream) -> list[Context]:
    contexts: list[Context] = []
    while True:
        tok = s.peek()
        if tok is not None and tok.kind == "word" and tok.text == "and":
            nxt = s.peek(1)
            if nxt is not None and nxt.kind == "word" and nxt.text == "in":
                s.next()
                tok = s.peek()
        if tok is None or tok.kind != "word" or tok.text != "in":
            return contexts
        s.next()
        which = s.expect("word")
        if which.text == "place":
            place = _parse_np(s, {"and", "in"})
            contexts.append(Context(ContextKind.PLACE, place=place))
        elif which.text == "period":
            start = s.expect("word")
            s.expect("word", "to")
            end = s.expect("word")
            contexts.append(Context(ContextKind.PERIOD, start=start.text, end=end.text))
        else:
            raise ParseError("expected 'place' or 'period'", which.line, which.column,
                             expected="place|period", found=which.text)


def _parse_operand(s: TokenStream, default_creator: str):
    if _at_sentence_start(s):
        return _parse_sentence_stream(s, default_creator)
    ref = _parse_qname(s)
    if ref.ident is None:
        raise ParseError("expected a statement identifier or quoted statement",
                         expected="identifier", found=ref.name)
    return ref.ident


def _parse_clause(s: TokenStream, creator: str) -> tuple[object, list[Context], bool]:
    """Parse the quoted clause; returns (body, extra contexts, is_definition)."""
    # meta form when an operand is followed by 'has for'
    save = s.pos
    try:
        first = _parse_operand(s, creator)
        if s.at_word("has"):
            s.next()
            s.expect("word", "for")
            relation = _parse_qname(s)
            second = _parse_operand(s, creator)
            return MetaBody(relation, first, second), [], False
        s.pos = save
    except ParseError:
        s.pos = save

    contexts: list[Context] = []
    quantifier, is_def = _parse_det(s)
    if quantifier is None:
        quantifier = Quantifier.individual()
    subj_term = _parse_np(s, _NP_STOPS)
    modal = _parse_copula(s)
    if modal:
        contexts.append(Context.possible())
    relation = _parse_qname(s)
    s.expect("word", "of")
    obj_q, obj_def = _parse_det(s)
    if obj_q is None:
        tok = s.peek()
        if tok is not None and tok.kind == "word" and tok.text in ("a", "the"):
            s.next()
        obj_q = Quantifier.at_least(1)
    if obj_def:
        raise ParseError("'any' is not allowed on the object")
    obj_term = _parse_np(s, _NP_STOPS)
    measure = None
    if s.at_word("with"):
        measure = _parse_measure(s)
    edge = Edge(_node(subj_term, quantifier), relation, _node(obj_term, obj_q, measure))
    return GraphBody((edge,)), contexts, is_def


def parse_sentence(text: str, default_creator: str = "") -> Statement:
    """Parse one sentence into a Statement (id and date unassigned)."""
    s = TokenStream(tokenize(text))
    stmt = _parse_sentence_stream(s, default_creator)
    if not s.exhausted():
        tok = s.peek()
        raise ParseError("trailing input after sentence", tok.line, tok.column,
                         found=tok.text)
    return stmt


def _parse_attribution(s: TokenStream) -> list[str]:
    names: list[str] = []
    while len(names) < 2:
        a, b = s.peek(), s.peek(1)
        if (a is None or a.kind != "word" or b is None
                or b.kind != "sym" or b.text != "#"):
            break
        nxt = s.peek(2)
        if nxt is None:
            break
        if nxt.kind in ("open", "string"):
            names.append(s.next().text)
            s.next()
            break
        if nxt.kind == "word" and len(names) == 0:
            after = s.peek(3)
            if after is not None and after.kind == "sym" and after.text == "#":
                names.append(s.next().text)
                s.next()
                continue
        break
    return names


def _parse_sentence_stream(s: TokenStream, default_creator: str) -> Statement:
    names = _parse_attribution(s)
    creator = names[0] if names else default_creator
    interpreted = names[1] if len(names) > 1 else None

    tok = s.peek()
    if tok is None:
        raise ParseError("expected a quoted clause or string")
    if tok.kind == "string":
        s.next()
        return Statement(
            creator=creator,
            kind=StatementKind.INFORMAL,
            body=TextBody(tok.text),
            interpreted_source=interpreted,
        )
    s.expect("open")
    body, extra, is_def = _parse_clause(s, creator)
    contexts = list(extra) + _parse_contexts(s)
    s.expect("close")
    kind = StatementKind.DEFINITION if is_def else StatementKind.BELIEF
    believer = None
    if kind is StatementKind.BELIEF and interpreted is None:
        believer = creator
    return Statement(
        creator=creator,
        kind=kind,
        body=body,
        believer=believer,
        interpreted_source=interpreted,
        contexts=tuple(contexts),
    )


# --- term-relation (FL) parsing -----------------------------------------

@dataclass(frozen=True)
class FlLink:
    """One (subject, relation, object) pair from a term-relation line."""

    subject: TermRef
    relation: str
    objects: tuple[TermRef, ...]
    source: str | None = None


def parse_fl(text: str) -> list[FlLink]:
    """Parse `TERM (REL ':' TERM+ ['(' SOURCE ')'] ',')* ';'` lines.

    Returns one link per (subject, relation, object) pair; unknown relation
    names are allowed and resolve later (they become informal relations).
    """
    s = TokenStream(tokenize(text))
    subject = _parse_qname(s)
    links: list[FlLink] = []
    while True:
        rel = s.expect("word")
        s.expect("sym", ":")
        objects: list[TermRef] = []
        while True:
            tok = s.peek()
            if tok is None or (tok.kind == "sym" and tok.text in (",", "(")):
                break
            if tok.kind != "word":
                break
            objects.append(_parse_qname(s))
        if not objects:
            tok = s.peek()
            raise ParseError("expected at least one object term",
                             tok.line if tok else 1, tok.column if tok else 0,
                             expected="term", found=tok.text if tok else ";")
        source = None
        tok = s.peek()
        if tok is not None and tok.kind == "sym" and tok.text == "(":
            s.next()
            source = s.expect("word").text
            s.expect("sym", ")")
        for obj in objects:
            links.append(FlLink(subject, rel.text, (obj,), source))
        tok = s.peek()
        if tok is not None and tok.kind == "sym" and tok.text == ",":
            s.next()
            continue
        break
    if not s.exhausted():
        tok = s.peek()
        raise ParseError("trailing input after term-relation statement",
                         tok.line, tok.column, found=tok.text)
    return links


# --- command parsing ------------------------------------------------------

class CommandKind(str, Enum):
    ASSERT = "assert"
    ASSERT_LINKS = "assert-links"
    REMOVE = "remove"
    SPEC_OF = "spec-of"
    QUERY_GRAPH = "query-graph"
    RATE = "rate"
    SET_FILTER = "set-filter"
    DEF_MEASURE = "def-measure"
    REGISTER = "register"


@dataclass
class Command:
    kind: CommandKind
    statement: Statement | None = None
    links: list[FlLink] = field(default_factory=list)
    target: Ident | None = None
    term: TermRef | None = None
    depth: int | None = None
    criterion: str | None = None
    value: Fraction | None = None
    name: str | None = None
    source_kind: SourceKind | None = None
    action: str | None = None
    expr: object = None


def _parse_sexpr(s: TokenStream):
    tok = s.next()
    if tok.kind == "sym" and tok.text == "(":
        items = []
        while True:
            nxt = s.peek()
            if nxt is None:
                raise ParseError("unterminated expression", tok.line, tok.column,
                                 expected=")")
            if nxt.kind == "sym" and nxt.text == ")":
                s.next()
                return tuple(items)
            items.append(_parse_sexpr(s))
    if tok.kind == "sym" and tok.text in ("<", ">", "="):
        nxt = s.peek()
        if nxt is not None and nxt.kind == "sym" and nxt.text == "=" and tok.text in ("<", ">"):
            s.next()
            return tok.text + "="
        return tok.text
    if tok.kind == "word":
        if _is_number(tok.text):
            return parse_fraction(tok.text)
        nxt = s.peek()
        if nxt is not None and nxt.kind == "sym" and nxt.text == "#":
            s.next()
            name = s.expect("word")
            return f"{tok.text}#{name.text}"
        return tok.text
    raise ParseError("unexpected token in expression", tok.line, tok.column,
                     found=tok.text)


def render_sexpr(expr) -> str:
    if isinstance(expr, tuple):
        return "(" + " ".join(render_sexpr(e) for e in expr) + ")"
    if isinstance(expr, Fraction):
        return format_fraction(expr)
    return str(expr)


def parse_command(text: str, default_creator: str = "") -> Command:
    """Dispatch one `;`-terminated unit on its leading keyword."""
    stripped = text.strip()
    s = TokenStream(tokenize(stripped))
    tok = s.peek()
    if tok is None:
        raise ParseError("empty command")
    if tok.kind == "word":
        kw = tok.text
        if kw == "register":
            s.next()
            name = s.expect("word")
            _end(s)
            return Command(CommandKind.REGISTER, name=name.text,
                           source_kind=SourceKind.USER)
        if kw == "source":
            s.next()
            name = s.expect("word")
            kind = SourceKind.EXTERNAL_VOCABULARY
            nxt = s.peek()
            if nxt is not None and nxt.kind == "word":
                kind = SourceKind(s.next().text)
            _end(s)
            return Command(CommandKind.REGISTER, name=name.text, source_kind=kind)
        if kw == "spec" and s.peek(1) is not None and s.peek(1).text == "of":
            s.next()
            s.next()
            term = _parse_qname(s)
            depth = None
            nxt = s.peek()
            if nxt is not None and nxt.kind == "word" and _is_number(nxt.text):
                depth = int(s.next().text)
            _end(s)
            return Command(CommandKind.SPEC_OF, term=term, depth=depth)
        if kw == "remove":
            s.next()
            ref = _parse_qname(s)
            if ref.ident is None:
                raise ParseError("remove needs a full identifier",
                                 expected="creator#name", found=ref.name)
            _end(s)
            return Command(CommandKind.REMOVE, target=ref.ident)
        if kw == "rate":
            s.next()
            ref = _parse_qname(s)
            criterion = s.expect("word")
            num = s.expect("word")
            if not _is_number(num.text):
                raise ParseError("expected rating value", num.line, num.column,
                                 expected="number", found=num.text)
            _end(s)
            if ref.ident is None:
                raise ParseError("rate needs a full identifier",
                                 expected="creator#name", found=ref.name)
            return Command(CommandKind.RATE, target=ref.ident,
                           criterion=criterion.text, value=parse_fraction(num.text))
        if kw == "measure":
            s.next()
            name = s.expect("word")
            expr = _parse_sexpr(s)
            _end(s)
            return Command(CommandKind.DEF_MEASURE, name=name.text, expr=expr)
        if kw == "filter":
            s.next()
            name = s.expect("word")
            action = s.expect("word")
            if action.text not in ("hide", "small-font"):
                raise ParseError("expected filter action", action.line, action.column,
                                 expected="hide|small-font", found=action.text)
            expr = _parse_sexpr(s)
            _end(s)
            return Command(CommandKind.SET_FILTER, name=name.text,
                           action=action.text, expr=expr)
        if kw == "query":
            s.next()
            stmt = _parse_sentence_stream(s, default_creator)
            _end(s)
            return Command(CommandKind.QUERY_GRAPH, statement=stmt)
    if _at_sentence_start(s):
        stmt = _parse_sentence_stream(s, default_creator)
        _end(s)
        return Command(CommandKind.ASSERT, statement=stmt)
    links = parse_fl(stripped)
    return Command(CommandKind.ASSERT_LINKS, links=links)


def _end(s: TokenStream) -> None:
    if not s.exhausted():
        tok = s.peek()
        raise ParseError("trailing input after command", tok.line, tok.column,
                         found=tok.text)
