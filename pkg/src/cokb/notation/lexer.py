"""Tokenizer shared by the sentence, term-relation and command parsers.

Input files are UTF-8, one command per `;`-terminated unit, with `//`
line comments.  Backquote/acute quotes nest (meta statements embed quoted
sentences); double-quoted strings hold informal text.
"""

from __future__ import annotations

from dataclasses import dataclass

OPEN_QUOTE = "`"
CLOSE_QUOTE = "´"  # acute accent

_WORD_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-")
_SYMBOLS = set("#%:,();<>=+-*/?")


class ParseError(ValueError):
    """Parse failure with position and expectation info."""

    def __init__(self, message: str, line: int = 1, column: int = 0,
                 expected: str | None = None, found: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"{message} (line {line}, column {column})")


@dataclass(frozen=True)
class Token:
    kind: str  # word | string | open | close | sym
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 0
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string", line, col, expected='"')
                j += 1
            if j >= n:
                raise ParseError("unterminated string", line, col, expected='"')
            tokens.append(Token("string", text[i + 1:j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch == OPEN_QUOTE:
            tokens.append(Token("open", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == CLOSE_QUOTE:
            tokens.append(Token("close", ch, line, col))
            i += 1
            col += 1
            continue
        if ch in _WORD_CHARS:
            j = i
            while j < n and text[j] in _WORD_CHARS:
                j += 1
            tokens.append(Token("word", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _SYMBOLS or ch == ";":
            tokens.append(Token("sym", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col, found=ch)
    return tokens


def split_units(text: str) -> list[str]:
    """Split a command stream into `;`-terminated units.

    Semicolons inside quotes (either kind) do not terminate; `//` comments
    and blank lines are dropped.  Journal header prefixes (`#...|`) are the
    caller's business and are kept verbatim.
    """
    units: list[str] = []
    buf: list[str] = []
    depth = 0
    in_string = False
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if in_string:
            buf.append(ch)
            if ch == '"':
                in_string = False
            i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/" and depth == 0:
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            in_string = True
            buf.append(ch)
            i += 1
            continue
        if ch == OPEN_QUOTE:
            depth += 1
        elif ch == CLOSE_QUOTE:
            depth = max(0, depth - 1)
        if ch == ";" and depth == 0:
            unit = "".join(buf).strip()
            if unit:
                units.append(unit)
            buf = []
            i += 1
            continue
        buf.append(ch)
        i += 1
    tail = "".join(buf).strip()
    if tail:
        raise ParseError("trailing input without terminating ';'", found=tail[:30])
    return units


class TokenStream:
    """A small cursor over the token list (the grammar is LL(2))."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token | None:
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise ParseError(
                "unexpected end of input",
                last.line if last else 1,
                last.column if last else 0,
            )
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            raise ParseError(
                "unexpected token",
                tok.line if tok else 1,
                tok.column if tok else 0,
                expected=text or kind,
                found=tok.text if tok else None,
            )
        return self.next()

    def at_word(self, *texts: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "word" and tok.text in texts

    def exhausted(self) -> bool:
        return self.pos >= len(self.tokens)
