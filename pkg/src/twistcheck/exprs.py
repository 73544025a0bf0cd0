"""Expression grammar shared by all catalog entries.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' exponent)?
    atom   := integer | symbol | symbol '(' expr {',' expr} ')' | '(' expr ')'

Exponents are integers, possibly negative, or parenthesized rationals such
as ^(1/2).  Rational literals like 3/4 come out of ordinary division of
integers.  Recognized calls are exp, log, sinh, cosh and tensor; sinh/cosh
are sugar for (exp(u) -+ exp(-u))/2 and are rewritten here so evaluation
domains only ever see exp and log.

Multiplication is never implicit and argument order is preserved
everywhere; products of noncommuting symbols mean exactly what they say.

The AST is plain tuples:
    ("num", Fraction), ("sym", name), ("add"|"sub"|"mul"|"div", l, r),
    ("neg", x), ("pow", base, Fraction), ("call", name, (args...))
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ParseError

_OPS = set("+-*/^(),")


def tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("num", int(text[i:j]), i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("sym", text[i:j], i))
            i = j
        elif ch in _OPS:
            toks.append((ch, ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", text, i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", self.text, tok[2])
        self.pos += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"trailing input {tok[1]!r}", self.text, tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            rhs = self.unary()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] != "^":
            return base
        self.take()
        return ("pow", base, self.exponent())

    def exponent(self):
        sign = 1
        if self.peek()[0] == "-":
            self.take()
            sign = -1
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return Fraction(sign * tok[1])
        if tok[0] == "(":
            self.take()
            s2 = 1
            if self.peek()[0] == "-":
                self.take()
                s2 = -1
            p = self.take("num")[1]
            if self.peek()[0] == "/":
                self.take()
                q = self.take("num")[1]
            else:
                q = 1
            self.take(")")
            return Fraction(sign * s2 * p, q)
        raise ParseError("malformed exponent", self.text, tok[2])

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return ("num", Fraction(tok[1]))
        if tok[0] == "sym":
            self.take()
            if self.peek()[0] == "(":
                self.take()
                args = [self.expr()]
                while self.peek()[0] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                return _expand_call(tok[1], tuple(args), self.text, tok[2])
            return ("sym", tok[1])
        if tok[0] == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        raise ParseError(f"unexpected token {tok[1]!r}", self.text, tok[2])


def _expand_call(name, args, text, pos):
    if name in ("exp", "log"):
        if len(args) != 1:
            raise ParseError(f"{name} takes one argument", text, pos)
        return ("call", name, args)
    if name in ("sinh", "cosh"):
        if len(args) != 1:
            raise ParseError(f"{name} takes one argument", text, pos)
        (u,) = args
        plus = ("call", "exp", (u,))
        minus = ("call", "exp", (("neg", u),))
        combo = ("sub" if name == "sinh" else "add", plus, minus)
        return ("div", combo, ("num", Fraction(2)))
    if name == "tensor":
        if len(args) not in (2, 3):
            raise ParseError("tensor takes two or three slots", text, pos)
        return ("call", "tensor", args)
    raise ParseError(f"unknown function {name!r}", text, pos)


def parse(text, macros=None):
    """Parse text to an AST, splicing macros in by symbol name.

    Macro bodies may be source strings or already-parsed ASTs; they may
    reference each other, but not cyclically.
    """
    node = _Parser(text).parse()
    if macros:
        node = _splice(node, macros, frozenset())
    return node


def _splice(node, macros, active):
    kind = node[0]
    if kind == "sym":
        name = node[1]
        if name in macros:
            if name in active:
                raise ParseError(f"macro cycle through {name!r}")
            body = macros[name]
            if isinstance(body, str):
                body = _Parser(body).parse()
            return _splice(body, macros, active | {name})
        return node
    if kind == "num":
        return node
    if kind in ("add", "sub", "mul", "div"):
        return (kind, _splice(node[1], macros, active), _splice(node[2], macros, active))
    if kind == "neg":
        return (kind, _splice(node[1], macros, active))
    if kind == "pow":
        return (kind, _splice(node[1], macros, active), node[2])
    if kind == "call":
        return (kind, node[1], tuple(_splice(a, macros, active) for a in node[2]))
    raise ParseError(f"unknown AST node {kind!r}")


def symbols_of(node):
    """All symbol names occurring in the AST."""
    kind = node[0]
    if kind == "sym":
        return {node[1]}
    if kind == "num":
        return set()
    if kind in ("add", "sub", "mul", "div"):
        return symbols_of(node[1]) | symbols_of(node[2])
    if kind in ("neg",):
        return symbols_of(node[1])
    if kind == "pow":
        return symbols_of(node[1])
    if kind == "call":
        out = set()
        for a in node[2]:
            out |= symbols_of(a)
        return out
    raise ParseError(f"unknown AST node {kind!r}")


def evaluate(node, domain):
    """Fold the AST through a domain object.

    The domain supplies number/symbol/add/neg/mul/div/pow/call; division and
    fractional powers may be partial (domain raises).  Argument order of
    products is preserved.
    """
    kind = node[0]
    if kind == "num":
        return domain.number(node[1])
    if kind == "sym":
        return domain.symbol(node[1])
    if kind == "add":
        return domain.add(evaluate(node[1], domain), evaluate(node[2], domain))
    if kind == "sub":
        return domain.add(
            evaluate(node[1], domain), domain.neg(evaluate(node[2], domain))
        )
    if kind == "neg":
        return domain.neg(evaluate(node[1], domain))
    if kind == "mul":
        return domain.mul(evaluate(node[1], domain), evaluate(node[2], domain))
    if kind == "div":
        return domain.div(evaluate(node[1], domain), evaluate(node[2], domain))
    if kind == "pow":
        return domain.pow(evaluate(node[1], domain), node[2])
    if kind == "call":
        return domain.call(node[1], [evaluate(a, domain) for a in node[2]])
    raise ParseError(f"unknown AST node {kind!r}")
