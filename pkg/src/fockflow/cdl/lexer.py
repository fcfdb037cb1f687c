"""Tokenizer for the circuit description language.

Source is plain UTF-8 text. ``#`` starts a comment running to end of line.
Tokens carry 1-based line/column positions pointing at their first
character. A single ``end`` token is appended after the last real token.

Numbers are constant expressions folded at lex time: a chain of terms
joined by ``*`` or ``/``, each term an optionally negated decimal literal
or the word ``pi``. The chain must be written without internal whitespace
(``pi/4``, ``-3*pi/2``, ``0.25``, ``1e-3``). Because ``pi`` always lexes
as a number, it is not available as a label name.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

KEYWORDS = frozenset(
    {
        "internal",
        "external",
        "statistics",
        "particle",
        "hbs",
        "bs",
        "phase",
        "sorter",
        "exchange",
        "measure",
        "bin",
    }
)

_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_FLOAT = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class LexError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | number | punctuation | end
    text: str
    line: int
    col: int
    value: float | None = field(default=None, compare=False)


class _Scanner:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.src[i] if i < len(self.src) else ""

    def take(self) -> str:
        c = self.src[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def skip_blank(self):
        while self.pos < len(self.src):
            c = self.peek()
            if c == "#":
                while self.pos < len(self.src) and self.peek() != "\n":
                    self.take()
            elif c.isspace():
                self.take()
            else:
                return

    def match_word(self) -> str | None:
        m = _WORD.match(self.src, self.pos)
        if m is None:
            return None
        for _ in m.group(0):
            self.take()
        return m.group(0)

    def match_float(self) -> float | None:
        m = _FLOAT.match(self.src, self.pos)
        if m is None:
            return None
        for _ in m.group(0):
            self.take()
        return float(m.group(0))

    def number_term(self) -> float:
        line, col = self.line, self.col
        sign = 1.0
        while self.peek() == "-":
            self.take()
            sign = -sign
        value = self.match_float()
        if value is None:
            word = self.match_word()
            if word == "pi":
                value = math.pi
            elif word is not None:
                raise LexError(f"expected a number, found {word!r}", line, col)
            else:
                raise LexError("expected a number", line, col)
        return sign * value


def tokenize(source: str) -> list[Token]:
    sc = _Scanner(source)
    out: list[Token] = []
    while True:
        sc.skip_blank()
        line, col, start = sc.line, sc.col, sc.pos
        c = sc.peek()
        if c == "":
            out.append(Token("end", "", line, col))
            return out
        if c == "$":
            sc.take()
            word = sc.match_word()
            if word is None:
                raise LexError("'$' must introduce a parameter name", line, col)
            out.append(Token("identifier", "$" + word, line, col))
            continue
        if c == "-" and sc.peek(1) == ">":
            sc.take()
            sc.take()
            out.append(Token("punctuation", "->", line, col))
            continue
        if c in "=:":
            sc.take()
            out.append(Token("punctuation", c, line, col))
            continue
        if c.isdigit() or c in ".-" or (c.isalpha() and _word_is_pi(sc)):
            value = sc.number_term()
            while sc.peek() in ("*", "/"):
                op = sc.take()
                rhs = sc.number_term()
                if op == "/":
                    if rhs == 0.0:
                        raise LexError("division by zero in constant", line, col)
                    value /= rhs
                else:
                    value *= rhs
            if not math.isfinite(value):
                raise LexError("number is not finite", line, col)
            out.append(Token("number", sc.src[start : sc.pos], line, col, value=value))
            continue
        word = sc.match_word()
        if word is not None:
            kind = "keyword" if word in KEYWORDS else "identifier"
            out.append(Token(kind, word, line, col))
            continue
        raise LexError(f"illegal character {c!r}", line, col)


def _word_is_pi(sc: _Scanner) -> bool:
    m = _WORD.match(sc.src, sc.pos)
    return m is not None and m.group(0) == "pi"
