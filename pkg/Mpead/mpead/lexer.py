"""Tokenizer for `.mpead` source text.

The lexer never fails: characters it cannot use become diagnostics and are
skipped, so the parser always receives a token stream ending in EOF.
"""
import enum
from dataclasses import dataclass
from typing import List, Tuple

from .schemas import ParseDiagnostic, Severity, SourceSpan


class TokenKind(enum.Enum):
    IDENT = "identifier"
    INT = "integer"
    STRING = "string"
    LBRACE = "'{'"
    RBRACE = "'}'"
    LBRACKET = "'['"
    RBRACKET = "']'"
    LPAREN = "'('"
    RPAREN = "')'"
    COMMA = "','"
    COLON = "':'"
    EQUALS = "'='"
    SLASH = "'/'"
    DOTDOT = "'..'"
    ARROW = "'->'"
    SQUIGGLE = "'~>'"
    STAR = "'*'"
    EOF = "end of input"


PUNCTUATION = {
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    ",": TokenKind.COMMA,
    ":": TokenKind.COLON,
    "=": TokenKind.EQUALS,
    "/": TokenKind.SLASH,
    "*": TokenKind.STAR,
}

DIGRAPHS = {
    "..": TokenKind.DOTDOT,
    "->": TokenKind.ARROW,
    "~>": TokenKind.SQUIGGLE,
}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int
    end_line: int
    end_col: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(
            file=file,
            start_line=self.line,
            start_col=self.col,
            end_line=self.end_line,
            end_col=self.end_col,
        )

    def describe(self) -> str:
        if self.kind in (TokenKind.IDENT, TokenKind.INT, TokenKind.STRING):
            return f"{self.kind.value} {self.text!r}"
        return self.kind.value


def is_ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def is_ident_char(ch: str) -> bool:
    return is_ident_start(ch) or ch.isdigit() and ch.isascii() or ch == "@"


class Lexer:
    def __init__(self, text: str, file: str = "<input>"):
        self.text = text
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: List[Token] = []
        self.diagnostics: List[ParseDiagnostic] = []

    def _advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.pos >= len(self.text):
                return
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _error(self, code: str, message: str, line: int, col: int) -> None:
        span = SourceSpan(
            file=self.file, start_line=line, start_col=col,
            end_line=self.line, end_col=max(self.col, col) if self.line == line else self.col,
        )
        self.diagnostics.append(ParseDiagnostic(
            severity=Severity.ERROR, message=message, span=span, code=code,
        ))

    def _emit(self, kind: TokenKind, text: str, line: int, col: int) -> None:
        self.tokens.append(Token(kind, text, line, col, self.line, self.col))

    def tokenize(self) -> Tuple[List[Token], List[ParseDiagnostic]]:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            line, col = self.line, self.col

            if ch in " \t\r\n\f\v":
                self._advance()
            elif ch == "#":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
            elif text.startswith(tuple(DIGRAPHS), self.pos):
                pair = text[self.pos:self.pos + 2]
                self._advance(2)
                self._emit(DIGRAPHS[pair], pair, line, col)
            elif ch in PUNCTUATION:
                self._advance()
                self._emit(PUNCTUATION[ch], ch, line, col)
            elif ch.isascii() and ch.isdigit():
                start = self.pos
                while self.pos < len(text) and text[self.pos].isascii() and text[self.pos].isdigit():
                    self._advance()
                self._emit(TokenKind.INT, text[start:self.pos], line, col)
            elif is_ident_start(ch):
                start = self.pos
                while self.pos < len(text) and is_ident_char(text[self.pos]):
                    self._advance()
                self._emit(TokenKind.IDENT, text[start:self.pos], line, col)
            elif ch == '"':
                self._string(line, col)
            else:
                self._advance()
                self._error("P001", f"unexpected character {ch!r}", line, col)

        self._emit(TokenKind.EOF, "", self.line, self.col)
        return self.tokens, self.diagnostics

    def _string(self, line: int, col: int) -> None:
        text = self.text
        self._advance()
        chars: List[str] = []
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == '"':
                self._advance()
                self._emit(TokenKind.STRING, "".join(chars), line, col)
                return
            if ch == "\n":
                break
            if ch == "\\" and self.pos + 1 < len(text) and text[self.pos + 1] in '"\\':
                chars.append(text[self.pos + 1])
                self._advance(2)
                continue
            chars.append(ch)
            self._advance()
        self._error("P003", "unterminated string", line, col)
        self._emit(TokenKind.STRING, "".join(chars), line, col)


def tokenize(text: str, file: str = "<input>") -> Tuple[List[Token], List[ParseDiagnostic]]:
    return Lexer(text, file).tokenize()
