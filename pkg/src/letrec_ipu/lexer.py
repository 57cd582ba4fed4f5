"""Tokenizer shared by the ``.rec`` and ``.tgt`` readers."""
from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = {"rec", "in", "let", "if", "then", "else", "true", "false", "and", "or", "alloc", "update"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#(?![0-9])[^\n]*)
  | (?P<size>=\[\s*(?P<n>[0-9]+)\s*\])
  | (?P<unknown>=\?)
  | (?P<loc>\#[0-9]+)
  | (?P<num>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<lambda>\\|λ)
  | (?P<punct>[.(){},;=+\-><|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, num, loc, size, unknown, lambda, punct, eof
    text: str
    line: int
    col: int
    value: object = None


class SyntaxErrorAt(Exception):
    def __init__(self, message: str, line: int, col: int):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}")


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise SyntaxErrorAt(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group(0)
        if kind == "n":
            kind = "size"
        if kind == "size":
            out.append(Token("size", s, line, col, int(m.group("n"))))
        elif kind == "ident":
            out.append(Token("keyword" if s in KEYWORDS else "ident", s, line, col))
        elif kind == "num":
            out.append(Token("num", s, line, col, int(s)))
        elif kind != "ws":
            out.append(Token(kind, s, line, col))
        newlines = s.count("\n")
        if newlines:
            line += newlines
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class TokenStream:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.toks[self.i]

    def peek_at(self, k: int) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind: str, text: str | None = None):
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek
        if not self.at(kind, text):
            want = text or kind
            raise SyntaxErrorAt(f"expected {want}, found {t.text or t.kind!r}", t.line, t.col)
        return self.next()

    def error(self, message: str):
        t = self.peek
        return SyntaxErrorAt(message, t.line, t.col)
