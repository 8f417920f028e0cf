"""Surface syntax: lexer and recursive-descent parser producing :mod:`syntax` ASTs.

Declarations begin at column 1; any token in column 1 ends the declaration
before it. Comments run from ``--`` to end of line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .semiring import PRIVATE, PUBLIC, Grade, Usage
from .syntax import (
    INT,
    STRING,
    App,
    BoxIntro,
    Case,
    Ctor,
    DataDecl,
    Endorse,
    FunDecl,
    IntLit,
    Lam,
    LetBox,
    PBox,
    PCtor,
    PInt,
    PrimOp,
    Program,
    PVar,
    PWild,
    Reveal,
    SourceSpan,
    StrLit,
    TBox,
    TData,
    TFun,
    TrustIntro,
    TStar,
    Var,
)

KEYWORDS = frozenset({"data", "where", "let", "in", "endorse", "as", "reveal", "trust", "case", "of"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<lower>[a-z][A-Za-z0-9_']*|_[A-Za-z0-9_']+)
  | (?P<upper>[A-Z][A-Za-z0-9_']*)
  | (?P<sym>->|\+\+|==|[\\\[\](){}:;|=+\-*/_])
    """,
    re.VERBOSE,
)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n"}


@dataclass(frozen=True)
class Token:
    kind: str  # int | string | lower | upper | keyword | sym | eof
    text: str
    line: int
    col: int

    @property
    def end_col(self) -> int:
        return self.col + max(len(self.text), 1) - 1

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


class ParseError(Exception):
    def __init__(self, span: SourceSpan, expected: list[str], found: str, message: Optional[str] = None):
        self.span = span
        self.expected = list(expected)
        self.found = found
        if message is None:
            message = f"expected {' or '.join(self.expected)}, found {found}"
        self.message = message
        super().__init__(f"{span}: {message}")

    @property
    def code(self) -> str:
        return "E001"

    def diagnostic(self) -> str:
        return f"{self.span}: error[{self.code}]: {self.message}"


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            span = SourceSpan(filename, line, col, line, col)
            raise ParseError(span, ["a token"], repr(text[pos]), f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind == "string":
            tokens.append(Token("string", _unescape(lexeme, filename, line, col), line, col))
        elif kind == "lower" and lexeme in KEYWORDS:
            tokens.append(Token("keyword", lexeme, line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unescape(lexeme: str, filename: str, line: int, col: int) -> str:
    out = []
    body = lexeme[1:-1]
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            esc = body[i + 1]
            if esc not in _ESCAPES:
                span = SourceSpan(filename, line, col + i + 1, line, col + i + 2)
                raise ParseError(span, ['\\"', "\\\\", "\\n"], repr("\\" + esc), f"unknown escape \\{esc}")
            out.append(_ESCAPES[esc])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.filename = filename
        self.pos = 0
        self.limit = len(tokens) - 1  # index of the token acting as end-of-declaration

    # -- token plumbing

    def peek(self, offset: int = 0) -> Token:
        i = self.pos + offset
        if i >= self.limit:
            tok = self.tokens[self.limit]
            return Token("eof", "", tok.line, tok.col)
        return self.tokens[i]

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def at_sym(self, text: str) -> bool:
        return self.at("sym", text)

    def at_kw(self, text: str) -> bool:
        return self.at("keyword", text)

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, *expected: str) -> ParseError:
        tok = self.peek()
        span = SourceSpan(self.filename, tok.line, tok.col, tok.line, tok.end_col)
        return ParseError(span, list(expected), tok.describe())

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            raise self.error(what or (repr(text) if text else kind))
        return self.advance()

    def span_from(self, start: Token) -> SourceSpan:
        last = self.tokens[self.pos - 1] if self.pos > 0 else start
        return SourceSpan(self.filename, start.line, start.col, last.line, last.end_col)

    # -- declarations

    def program(self) -> Program:
        decls = []
        while self.pos < len(self.tokens) - 1:
            start = self.tokens[self.pos]
            if start.col != 1:
                raise ParseError(
                    SourceSpan(self.filename, start.line, start.col, start.line, start.end_col),
                    ["a declaration in column 1"],
                    start.describe(),
                )
            self.limit = self._next_decl_start(self.pos + 1)
            if start.kind == "keyword" and start.text == "data":
                decls.append(self.data_decl())
            else:
                sig_name, sig_type, sig_tok = self.fun_sig()
                self._end_decl()
                if self.pos >= len(self.tokens) - 1:
                    raise self.error(f"definition of {sig_name!r}")
                self.limit = self._next_decl_start(self.pos + 1)
                decls.append(self.fun_def(sig_name, sig_type, sig_tok))
            self._end_decl()
        return Program(tuple(decls))

    def _next_decl_start(self, i: int) -> int:
        while i < len(self.tokens) - 1 and self.tokens[i].col != 1:
            i += 1
        return i

    def _end_decl(self):
        if self.pos != self.limit:
            raise self.error("end of declaration")
        self.limit = len(self.tokens) - 1

    def data_decl(self) -> DataDecl:
        start = self.expect("keyword", "data")
        name = self.expect("upper", what="a type name").text
        self.expect("keyword", "where")
        ctors = []
        while self.at("upper"):
            cname = self.advance().text
            fields = []
            while not self.at_sym(";"):
                fields.append(self.atype())
            self.expect("sym", ";")
            ctors.append((cname, tuple(fields)))
        if not self.at("eof"):
            raise self.error("a constructor name", "end of declaration")
        return DataDecl(name, tuple(ctors), span=self.span_from(start))

    def fun_sig(self):
        tok = self.expect("lower", what="a function name or 'data'")
        self.expect("sym", ":")
        return tok.text, self.type_(), tok

    def fun_def(self, name: str, signature, sig_tok: Token) -> FunDecl:
        tok = self.peek()
        if not (tok.kind == "lower" and tok.text == name):
            raise self.error(f"definition of {name!r}")
        self.advance()
        params = []
        while not self.at_sym("="):
            params.append(self.apat())
        self.expect("sym", "=")
        body = self.term()
        span = SourceSpan(self.filename, sig_tok.line, sig_tok.col, tok.line, tok.end_col)
        return FunDecl(name, signature, tuple(params), body, span=span)

    # -- types

    def type_(self):
        dom = self.btype()
        if self.at_sym("->"):
            self.advance()
            return TFun(dom, self.type_())
        return dom

    def btype(self):
        t = self.atype()
        while True:
            if self.at_sym("["):
                self.advance()
                g = self.grade()
                self.expect("sym", "]")
                t = TBox(g, t)
            elif self.at_sym("*") and self.peek(1).kind == "sym" and self.peek(1).text == "{":
                self.advance()
                self.advance()
                tok = self.peek()
                if not (tok.kind == "upper" and tok.text == "Trusted"):
                    raise self.error("'Trusted'")
                self.advance()
                self.expect("sym", "}")
                t = TStar(t)
            else:
                return t

    def atype(self):
        tok = self.peek()
        if tok.kind == "upper":
            self.advance()
            if tok.text == "Int":
                return INT
            if tok.text == "String":
                return STRING
            return TData(tok.text)
        if self.at_sym("("):
            self.advance()
            t = self.type_()
            self.expect("sym", ")")
            return t
        raise self.error("a type")

    def grade(self) -> Grade:
        tok = self.peek()
        if tok.kind == "upper" and tok.text in ("Public", "Private"):
            self.advance()
            return PUBLIC if tok.text == "Public" else PRIVATE
        if tok.kind == "int":
            self.advance()
            return Usage(int(tok.text))
        raise self.error("'Public'", "'Private'", "a natural number")

    # -- terms

    def term(self):
        tok = self.peek()
        if self.at_sym("\\"):
            self.advance()
            param = self.expect("lower", what="a parameter name").text
            self.expect("sym", "->")
            return Lam(param, self.term(), span=self.span_from(tok))
        if self.at_kw("let"):
            self.advance()
            self.expect("sym", "[")
            var = self.expect("lower", what="a variable").text
            self.expect("sym", "]")
            self.expect("sym", "=")
            bound = self.term()
            self.expect("keyword", "in")
            body = self.term()
            return LetBox(var, bound, body, span=self.span_from(tok))
        if self.at_kw("endorse"):
            self.advance()
            bound = self.term()
            self.expect("keyword", "as")
            var = self.expect("lower", what="a variable").text
            self.expect("keyword", "in")
            body = self.term()
            return Endorse(bound, var, body, span=self.span_from(tok))
        if self.at_kw("reveal"):
            self.advance()
            return Reveal(self.aterm(), span=self.span_from(tok))
        if self.at_kw("trust"):
            self.advance()
            return TrustIntro(self.aterm(), span=self.span_from(tok))
        if self.at_kw("case"):
            self.advance()
            scrut = self.term()
            self.expect("keyword", "of")
            alts = []
            while self.at_sym("|"):
                self.advance()
                pat = self.pat()
                self.expect("sym", "->")
                alts.append((pat, self.term()))
            return Case(scrut, tuple(alts), span=self.span_from(tok))
        return self.opterm()

    def opterm(self):
        return self._binary(("+", "-", "++", "=="), self._multerm)

    def _multerm(self):
        return self._binary(("*", "/"), self.appterm)

    def _binary(self, ops, operand):
        start = self.peek()
        left = operand()
        while self.peek().kind == "sym" and self.peek().text in ops:
            op = self.advance().text
            right = operand()
            left = PrimOp(op, left, right, span=self.span_from(start))
        return left

    def appterm(self):
        start = self.peek()
        if self.at_sym("-") and self.peek(1).kind == "int":
            self.advance()
            head = IntLit(-int(self.advance().text), span=self.span_from(start))
        elif start.kind == "upper":
            self.advance()
            args = []
            while self._starts_aterm():
                args.append(self.aterm())
            return Ctor(start.text, tuple(args), span=self.span_from(start))
        else:
            head = self.aterm()
        while self._starts_aterm():
            head = App(head, self.aterm(), span=self.span_from(start))
        return head

    def _starts_aterm(self) -> bool:
        tok = self.peek()
        return tok.kind in ("lower", "upper", "int", "string") or (tok.kind == "sym" and tok.text in ("[", "("))

    def aterm(self):
        tok = self.peek()
        if tok.kind == "lower":
            self.advance()
            return Var(tok.text, span=self.span_from(tok))
        if tok.kind == "upper":
            self.advance()
            return Ctor(tok.text, (), span=self.span_from(tok))
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text), span=self.span_from(tok))
        if tok.kind == "string":
            self.advance()
            return StrLit(tok.text, span=self.span_from(tok))
        if self.at_sym("["):
            self.advance()
            body = self.term()
            self.expect("sym", "]")
            return BoxIntro(body, span=self.span_from(tok))
        if self.at_sym("("):
            self.advance()
            inner = self.term()
            self.expect("sym", ")")
            return inner
        raise self.error("a term")

    # -- patterns

    def pat(self):
        tok = self.peek()
        if tok.kind == "upper":
            self.advance()
            args = []
            while self._starts_apat():
                args.append(self.apat())
            return PCtor(tok.text, tuple(args), span=self.span_from(tok))
        return self.apat()

    def _starts_apat(self) -> bool:
        tok = self.peek()
        return tok.kind in ("lower", "upper", "int") or (tok.kind == "sym" and tok.text in ("_", "[", "("))

    def apat(self):
        tok = self.peek()
        if tok.kind == "lower":
            self.advance()
            return PVar(tok.text, span=self.span_from(tok))
        if tok.kind == "upper":
            self.advance()
            return PCtor(tok.text, (), span=self.span_from(tok))
        if tok.kind == "int":
            self.advance()
            return PInt(int(tok.text), span=self.span_from(tok))
        if self.at_sym("_"):
            self.advance()
            return PWild(span=self.span_from(tok))
        if self.at_sym("["):
            self.advance()
            inner = self.apat()
            self.expect("sym", "]")
            return PBox(inner, span=self.span_from(tok))
        if self.at_sym("("):
            self.advance()
            inner = self.pat()
            self.expect("sym", ")")
            return inner
        raise self.error("a pattern")


def parse_program(text: str, filename: str = "<input>") -> Program:
    tokens = tokenize(text, filename)
    return _Parser(tokens, filename).program()


def parse_term(text: str, filename: str = "<term>"):
    tokens = tokenize(text, filename)
    p = _Parser(tokens, filename)
    t = p.term()
    if not p.at("eof"):
        raise p.error("end of input")
    return t


def parse_type(text: str, filename: str = "<type>"):
    tokens = tokenize(text, filename)
    p = _Parser(tokens, filename)
    t = p.type_()
    if not p.at("eof"):
        raise p.error("end of input")
    return t
