"""Text front end for operator expressions and identity files.

Expression grammar (whitespace and newlines inside brackets are free)::

    expr    := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' '-'? INT)?
    atom    := NUMBER | '(' expr ')' | 'int' VAR '[' expr ']'
             | 'D' '[' expr ']' | 'D' '(' VAR ')' '[' expr ']'
             | 'a' '(' VAR ')' | 'ad' '(' VAR ')' | 'delta' '(' VAR ',' VAR ')'
             | 'w' | 'w' '(' VAR ')' | 'comm' '(' expr ',' expr ')'
             | 'boost' '(' expr ')' | 'subs' '(' expr ',' SYMBOL ',' expr ')'
             | '{' expr '||' expr '}'
             | 'm' | 'g' | 'gamma' | 'i' | 'sigma' | VAR | NAME

``VAR`` is a momentum name (``k p q r s u v`` optionally followed by
digits); ``w`` alone is ``w(k)``; ``NAME`` must have been bound by ``let``.

Identity files hold statements, one per line::

    let NAME = expr
    let                      # block form
      NAME = expr
    end
    assert NAME: expr == expr
    assert NAME: expr != expr    # expected to differ
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import sympy as sp

from . import expr as ex
from .boost import SIGMA, boost_commutator
from .scalar import NAMED_SYMBOLS, Scalar, ScalarError, is_momentum_name, momentum_symbol, omega_symbol

RESERVED = {"int", "D", "a", "ad", "delta", "w", "comm", "boost", "subs", "m", "g", "gamma", "i",
            "sigma", "let", "assert", "end"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, IDENT, OP, NL, EOF
    text: str
    line: int
    col: int


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\|\||==|!=|[-+*/^()\[\]{},:=;])
""", re.VERBOSE)

_OPEN, _CLOSE = "([{", ")]}"


def tokenize(text: str, statements: bool = True) -> list[Token]:
    """Token list; with ``statements`` newlines at bracket depth 0 separate statements."""
    tokens, depth = [], 0
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            if statements and depth == 0:
                tokens.append(Token("NL", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "num":
            tokens.append(Token("NUM", value, line, col))
        elif kind == "ident":
            tokens.append(Token("IDENT", value, line, col))
        elif kind == "op":
            if value == ";" and statements and depth == 0:
                tokens.append(Token("NL", value, line, col))
            else:
                if value in _OPEN:
                    depth += 1
                elif value in _CLOSE:
                    depth = max(0, depth - 1)
                tokens.append(Token("OP", value, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], env: dict[str, ex.OpExpr], sigma: int):
        self.toks = tokens
        self.i = 0
        self.env = env
        self.sigma = sigma
        self.binders: list[str] = []

    # token helpers -----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("OP", "IDENT") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        return self.advance()

    def skip_newlines(self):
        while self.tok.kind == "NL":
            self.advance()

    def var(self) -> str:
        tok = self.tok
        if tok.kind != "IDENT" or not is_momentum_name(tok.text):
            raise self.error(f"expected a momentum variable, found {tok.text or 'end of input'!r}")
        self.advance()
        return tok.text

    def guarded(self, tok: Token, fn, *args):
        try:
            return fn(*args)
        except (ex.AlgebraError, ScalarError) as err:
            raise ParseError(str(err), tok.line, tok.col) from None

    # grammar -----------------------------------------------------------
    def expression(self) -> ex.OpExpr:
        left = self.product()
        while self.at("+") or self.at("-"):
            op = self.advance()
            right = self.product()
            left = self.guarded(op, (lambda x, y: x + y) if op.text == "+" else (lambda x, y: x - y), left, right)
        return left

    def product(self) -> ex.OpExpr:
        left = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance()
            right = self.unary()
            left = self.guarded(op, (lambda x, y: x * y) if op.text == "*" else (lambda x, y: x / y), left, right)
        return left

    def unary(self) -> ex.OpExpr:
        if self.at("-"):
            self.advance()
            return -self.unary()
        if self.at("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> ex.OpExpr:
        base = self.atom()
        if self.at("^"):
            op = self.advance()
            neg = False
            if self.at("-"):
                self.advance()
                neg = True
            if self.tok.kind != "NUM" or "." in self.tok.text:
                raise self.error("exponent must be an integer literal")
            n = int(self.advance().text)
            base = self.guarded(op, lambda b: b ** (-n if neg else n), base)
        return base

    def atom(self) -> ex.OpExpr:
        tok = self.tok
        if tok.kind == "NUM":
            self.advance()
            return ex.OpExpr.scalar(Scalar(sp.Rational(tok.text)))
        if self.at("("):
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if self.at("{"):
            self.advance()
            left = self.expression()
            self.expect("||")
            right = self.expression()
            self.expect("}")
            return self.guarded(tok, ex.tensor_pair, left, right)
        if tok.kind != "IDENT":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}")
        name = tok.text
        self.advance()
        if name == "int":
            var_tok = self.tok
            var = self.var()
            if var in self.binders:
                raise self.error(f"integral variable {var!r} shadows an enclosing integral", var_tok)
            self.expect("[")
            self.binders.append(var)
            body = self.expression()
            self.binders.pop()
            self.expect("]")
            return self.guarded(tok, ex.integrate, var, body)
        if name == "D":
            var = "k"
            if self.at("("):
                self.advance()
                var = self.var()
                self.expect(")")
            self.expect("[")
            body = self.expression()
            self.expect("]")
            return self.guarded(tok, ex.derivative, body, var)
        if name in ("a", "ad"):
            self.expect("(")
            var = self.var()
            self.expect(")")
            return ex.annihilator(var) if name == "a" else ex.creator(var)
        if name == "delta":
            self.expect("(")
            x = self.var()
            self.expect(",")
            y = self.var()
            self.expect(")")
            return ex.delta(x, y)
        if name == "w":
            var = "k"
            if self.at("("):
                self.advance()
                var = self.var()
                self.expect(")")
            return ex.OpExpr.scalar(Scalar(omega_symbol(var)))
        if name == "comm":
            self.expect("(")
            x = self.expression()
            self.expect(",")
            y = self.expression()
            self.expect(")")
            return self.guarded(tok, ex.commutator, x, y)
        if name == "boost":
            self.expect("(")
            x = self.expression()
            self.expect(")")
            return self.guarded(tok, boost_commutator, x, self.sigma)
        if name == "subs":
            self.expect("(")
            x = self.expression()
            self.expect(",")
            sym_tok = self.advance()
            if sym_tok.text not in NAMED_SYMBOLS:
                raise self.error(f"subs expects one of {sorted(NAMED_SYMBOLS)}", sym_tok)
            self.expect(",")
            value = self.expression()
            self.expect(")")
            return self.guarded(tok, lambda: ex.substitute_symbol(x, sym_tok.text, value.scalar_value()))
        if name in NAMED_SYMBOLS:
            return ex.OpExpr.scalar(Scalar(NAMED_SYMBOLS[name]))
        if name == "i":
            return ex.OpExpr.scalar(Scalar(sp.I))
        if name == "sigma":
            return ex.OpExpr.scalar(Scalar(self.sigma))
        if is_momentum_name(name):
            return ex.OpExpr.scalar(Scalar(momentum_symbol(name)))
        if name in RESERVED:
            raise self.error(f"misplaced keyword {name!r}", tok)
        if name in self.env:
            return self.env[name]
        raise self.error(f"unbound name {name!r}", tok)


def parse(text: str, env: dict[str, ex.OpExpr] | None = None, sigma: int = SIGMA) -> ex.OpExpr:
    """Parse one expression into its canonical :class:`OpExpr`."""
    p = _Parser(tokenize(text, statements=False), dict(env or {}), sigma)
    value = p.expression()
    if p.tok.kind != "EOF":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    return value


@dataclass
class Assertion:
    name: str
    lhs: ex.OpExpr
    rhs: ex.OpExpr
    expect_equal: bool
    line: int


@dataclass
class IdentityFile:
    env: dict[str, ex.OpExpr] = field(default_factory=dict)
    assertions: list[Assertion] = field(default_factory=list)


def _binding(p: _Parser, env: dict):
    tok = p.tok
    if tok.kind != "IDENT":
        raise p.error("expected a name to bind")
    name = tok.text
    if name in RESERVED or is_momentum_name(name):
        raise p.error(f"cannot bind reserved or momentum name {name!r}")
    p.advance()
    p.expect("=")
    env[name] = p.expression()


def parse_identity_file(text: str, env: dict[str, ex.OpExpr] | None = None,
                        sigma: int = SIGMA) -> IdentityFile:
    out = IdentityFile(env=dict(env or {}))
    p = _Parser(tokenize(text), out.env, sigma)
    while True:
        p.skip_newlines()
        tok = p.tok
        if tok.kind == "EOF":
            break
        if p.at("let"):
            p.advance()
            if p.tok.kind == "NL":
                p.skip_newlines()
                while not p.at("end"):
                    if p.tok.kind == "EOF":
                        raise p.error("unterminated let block (missing 'end')")
                    _binding(p, out.env)
                    p.skip_newlines()
                p.advance()
            else:
                _binding(p, out.env)
        elif p.at("assert"):
            p.advance()
            name_tok = p.advance()
            if name_tok.kind != "IDENT":
                raise p.error("expected an assertion name", name_tok)
            p.expect(":")
            lhs = p.expression()
            if p.at("=="):
                equal = True
            elif p.at("!="):
                equal = False
            else:
                raise p.error("expected '==' or '!='")
            p.advance()
            rhs = p.expression()
            out.assertions.append(Assertion(name_tok.text, lhs, rhs, equal, tok.line))
        else:
            raise p.error(f"expected 'let' or 'assert', found {tok.text!r}")
        if p.tok.kind not in ("NL", "EOF"):
            raise p.error(f"unexpected {p.tok.text!r} at end of statement")
    return out
