"""The `.pct` text format: parser, printer, and trace-expression semantics.

A document declares one horizon, ports (name, finite domain, default
role, optional per-port distribution), named predicate definitions, and
named contracts, implementations, and probabilistic contracts.  Trace
expressions combine per-step atoms (`p`, `p == v`, `p == q`,
`prev(p, init=v)`) with boolean connectives and the finite-horizon
temporal operators `always`, `never`, `eventually`, `at(t, ...)`.

An expression denotes a set of runs: the runs satisfying it at every
step (temporal operators quantify over steps themselves, so a guarded
expression is step-independent).  The grammar is documented in
docs/grammar.ebnf; parsing and printing are pure and round-trip:
``parse(print(doc))`` is structurally equal to ``doc``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import contracts as _contracts
from . import probabilistic as _prob
from . import traces
from .errors import (
    DistributionError,
    ParseError,
    ResolveError,
    SemanticError,
    SignatureError,
)
from .traces import Assertion, Port, Signature

MAX_NESTING = 80

KEYWORDS = frozenset("""
    horizon port bool controlled uncontrolled prob bernoulli table
    def contract impl probcontract input output assume guarantee behavior
    ports and or not implies always never eventually at prev init true false
""".split())


# --- tokens -------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str          # IDENT INT DECIMAL PUNCT KEYWORD EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<decimal>\d+\.\d+)
    | (?P<int>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>==|[{}()\[\]:;,=/])
""", re.VERBOSE)


def _tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and lexeme in KEYWORDS:
                tokens.append(Token("KEYWORD", lexeme, line, col))
            else:
                tokens.append(Token(kind.upper(), lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


# --- expression AST -----------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Lit(Expr):
    value: bool = True


@dataclass(frozen=True)
class NameRef(Expr):
    """Bare identifier: a boolean port or a definition reference."""
    name: str = ""


@dataclass(frozen=True)
class Not(Expr):
    body: Expr = None


@dataclass(frozen=True)
class And(Expr):
    left: Expr = None
    right: Expr = None


@dataclass(frozen=True)
class Or(Expr):
    left: Expr = None
    right: Expr = None


@dataclass(frozen=True)
class Implies(Expr):
    left: Expr = None
    right: Expr = None


@dataclass(frozen=True)
class Temporal(Expr):
    op: str = "always"      # always | never | eventually
    body: Expr = None


@dataclass(frozen=True)
class At(Expr):
    step: int = 0
    body: Expr = None


@dataclass(frozen=True)
class Operand:
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class PortOperand(Operand):
    name: str = ""


@dataclass(frozen=True)
class ValueOperand(Operand):
    """Literal value: bool, int, or an enum identifier (kept as text)."""
    value: object = None


@dataclass(frozen=True)
class PrevOperand(Operand):
    name: str = ""
    init: object = None


@dataclass(frozen=True)
class Cmp(Expr):
    left: Operand = None
    right: Operand = None


# --- document AST ---------------------------------------------------------------

@dataclass(frozen=True)
class BernoulliDecl:
    p: Fraction = Fraction(0)
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class TableDecl:
    entries: tuple = ()     # ((history tuple, Fraction), ...)
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class PortDecl:
    name: str
    domain: tuple           # () means bool
    role: str               # default role: controlled | uncontrolled
    dist: object = None     # BernoulliDecl | TableDecl | None
    loc: tuple = field(default=(0, 0), compare=False)

    def port(self) -> Port:
        return Port(self.name, self.domain or traces.BOOL)


@dataclass(frozen=True)
class ContractDecl:
    name: str
    inputs: Optional[tuple]   # None: default to document roles
    outputs: Optional[tuple]
    assume: Expr = None
    guarantee: Expr = None
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ImplDecl:
    name: str
    inputs: Optional[tuple]
    outputs: Optional[tuple]
    behavior: Expr = None
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ProbContractDecl:
    name: str
    contract: str
    ports: tuple = ()
    loc: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Document:
    horizon: Optional[int] = None
    ports: dict = field(default_factory=dict)
    defs: dict = field(default_factory=dict)
    contracts: dict = field(default_factory=dict)
    impls: dict = field(default_factory=dict)
    probcontracts: dict = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return (self.horizon is None and not self.ports and not self.defs
                and not self.contracts and not self.impls and not self.probcontracts)


# --- parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0
        self.depth = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message, tok=None):
        t = tok or self.tok
        raise ParseError(message, t.line, t.col)

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def at(self, kind, text=None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_kw(self, *words) -> bool:
        return self.tok.kind == "KEYWORD" and self.tok.text in words

    def expect(self, kind, text=None) -> Token:
        if not self.at(kind, text):
            want = text or kind.lower()
            raise self.error(f"expected {want!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def expect_kw(self, word) -> Token:
        if not self.at_kw(word):
            raise self.error(f"expected {word!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self, what="name") -> Token:
        if self.tok.kind == "KEYWORD":
            raise self.error(f"{self.tok.text!r} is a keyword and cannot be used as a {what}")
        if self.tok.kind != "IDENT":
            raise self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def loc(self) -> tuple:
        return (self.tok.line, self.tok.col)

    # document --------------------------------------------------------------

    def document(self) -> Document:
        horizon = None
        ports, defs, cdecls, idecls, pdecls = {}, {}, {}, {}, {}

        def declare(name, loc):
            if name in ports or name in defs or name in cdecls or name in idecls \
                    or name in pdecls:
                raise SemanticError(f"duplicate name {name!r}", *loc)

        while not self.at("EOF"):
            if self.at_kw("horizon"):
                t = self.advance()
                if horizon is not None:
                    raise SemanticError("horizon declared twice", t.line, t.col)
                num = self.expect("INT")
                horizon = int(num.text)
                if horizon < 1:
                    raise SemanticError("horizon must be at least 1", num.line, num.col)
                self.expect("PUNCT", ";")
            elif self.at_kw("port"):
                d = self.port_decl()
                declare(d.name, d.loc)
                ports[d.name] = d
            elif self.at_kw("def"):
                self.advance()
                name = self.ident("definition name")
                declare(name.text, (name.line, name.col))
                self.expect("PUNCT", "=")
                body = self.expr()
                self.expect("PUNCT", ";")
                defs[name.text] = body
            elif self.at_kw("contract"):
                d = self.contract_decl()
                declare(d.name, d.loc)
                cdecls[d.name] = d
            elif self.at_kw("impl"):
                d = self.impl_decl()
                declare(d.name, d.loc)
                idecls[d.name] = d
            elif self.at_kw("probcontract"):
                d = self.probcontract_decl()
                declare(d.name, d.loc)
                pdecls[d.name] = d
            else:
                raise self.error(
                    f"expected a declaration, found {self.tok.text or 'end of input'!r}")

        doc = Document(horizon, ports, defs, cdecls, idecls, pdecls)
        _resolve(doc)
        return doc

    def port_decl(self) -> PortDecl:
        kw = self.expect_kw("port")
        name = self.ident("port name")
        self.expect("PUNCT", ":")
        if self.at_kw("bool"):
            self.advance()
            domain = ()
        elif self.at("PUNCT", "{"):
            self.advance()
            values = [self.value_token()]
            while self.at("PUNCT", ","):
                self.advance()
                values.append(self.value_token())
            self.expect("PUNCT", "}")
            if len(set(values)) != len(values):
                raise SemanticError(f"duplicate values in domain of {name.text!r}",
                                    name.line, name.col)
            domain = tuple(values)
        else:
            raise self.error("expected 'bool' or a '{...}' value list")
        if self.at_kw("controlled", "uncontrolled"):
            role = self.advance().text
        else:
            raise self.error("expected 'controlled' or 'uncontrolled'")
        dist = None
        if self.at_kw("prob"):
            self.advance()
            dist = self.dist_decl()
        self.expect("PUNCT", ";")
        return PortDecl(name.text, domain, role, dist, (kw.line, kw.col))

    def value_token(self):
        t = self.tok
        if self.at_kw("true"):
            self.advance()
            return True
        if self.at_kw("false"):
            self.advance()
            return False
        if t.kind == "INT":
            self.advance()
            return int(t.text)
        if t.kind == "IDENT":
            self.advance()
            return t.text
        raise self.error(f"expected a value, found {t.text or 'end of input'!r}")

    def rational(self) -> Fraction:
        t = self.tok
        if t.kind == "DECIMAL":
            self.advance()
            return Fraction(t.text)
        if t.kind == "INT":
            self.advance()
            num = int(t.text)
            if self.at("PUNCT", "/"):
                self.advance()
                den = self.expect("INT")
                if int(den.text) == 0:
                    raise SemanticError("zero denominator", den.line, den.col)
                return Fraction(num, int(den.text))
            return Fraction(num)
        raise self.error(f"expected a probability, found {t.text or 'end of input'!r}")

    def dist_decl(self):
        loc = self.loc()
        if self.at_kw("bernoulli"):
            self.advance()
            self.expect("PUNCT", "(")
            p = self.rational()
            self.expect("PUNCT", ")")
            if not 0 <= p <= 1:
                raise SemanticError(f"probability {p} outside [0, 1]", *loc)
            return BernoulliDecl(p, loc)
        if self.at_kw("table"):
            self.advance()
            self.expect("PUNCT", "{")
            entries = []
            while not self.at("PUNCT", "}"):
                hist = self.history_literal()
                self.expect("PUNCT", ":")
                w = self.rational()
                self.expect("PUNCT", ";")
                entries.append((hist, w))
            self.expect("PUNCT", "}")
            return TableDecl(tuple(entries), loc)
        raise self.error("expected 'bernoulli' or 'table'")

    def history_literal(self) -> tuple:
        self.expect("PUNCT", "[")
        values = [self.value_token()]
        while self.at("PUNCT", ","):
            self.advance()
            values.append(self.value_token())
        self.expect("PUNCT", "]")
        return tuple(values)

    def io_clause(self):
        # stored sorted so parse(print(doc)) is structurally stable
        inputs, outputs = None, None
        while self.at_kw("input", "output"):
            kw = self.advance()
            names = [self.ident("port name").text]
            while self.at("PUNCT", ","):
                self.advance()
                names.append(self.ident("port name").text)
            self.expect("PUNCT", ";")
            if kw.text == "input":
                inputs = tuple(sorted((inputs or ()) + tuple(names)))
            else:
                outputs = tuple(sorted((outputs or ()) + tuple(names)))
        return inputs, outputs

    def contract_decl(self) -> ContractDecl:
        kw = self.expect_kw("contract")
        name = self.ident("contract name")
        self.expect("PUNCT", "{")
        inputs, outputs = self.io_clause()
        self.expect_kw("assume")
        assume = self.expr()
        self.expect("PUNCT", ";")
        self.expect_kw("guarantee")
        guarantee = self.expr()
        self.expect("PUNCT", ";")
        self.expect("PUNCT", "}")
        return ContractDecl(name.text, inputs, outputs, assume, guarantee, (kw.line, kw.col))

    def impl_decl(self) -> ImplDecl:
        kw = self.expect_kw("impl")
        name = self.ident("implementation name")
        self.expect("PUNCT", "{")
        inputs, outputs = self.io_clause()
        self.expect_kw("behavior")
        behavior = self.expr()
        self.expect("PUNCT", ";")
        self.expect("PUNCT", "}")
        return ImplDecl(name.text, inputs, outputs, behavior, (kw.line, kw.col))

    def probcontract_decl(self) -> ProbContractDecl:
        kw = self.expect_kw("probcontract")
        name = self.ident("probabilistic contract name")
        self.expect("PUNCT", "{")
        self.expect_kw("contract")
        base = self.ident("contract name")
        self.expect("PUNCT", ";")
        ports = ()
        if self.at_kw("ports"):
            self.advance()
            names = [self.ident("port name").text]
            while self.at("PUNCT", ","):
                self.advance()
                names.append(self.ident("port name").text)
            self.expect("PUNCT", ";")
            ports = tuple(sorted(names))
        self.expect("PUNCT", "}")
        return ProbContractDecl(name.text, base.text, ports, (kw.line, kw.col))

    # expressions -------------------------------------------------------------

    def expr(self) -> Expr:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise self.error("expression nested too deeply")
        try:
            left = self.or_expr()
            if self.at_kw("implies"):
                loc = self.loc()
                self.advance()
                right = self.expr()
                return Implies(loc, left, right)
            return left
        finally:
            self.depth -= 1

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.at_kw("or"):
            loc = self.loc()
            self.advance()
            left = Or(loc, left, self.and_expr())
        return left

    def and_expr(self) -> Expr:
        left = self.unary()
        while self.at_kw("and"):
            loc = self.loc()
            self.advance()
            left = And(loc, left, self.unary())
        return left

    def unary(self) -> Expr:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise self.error("expression nested too deeply")
        try:
            if self.at_kw("not"):
                loc = self.loc()
                self.advance()
                return Not(loc, self.unary())
            return self.atom()
        finally:
            self.depth -= 1

    def atom(self) -> Expr:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise self.error("expression nested too deeply")
        try:
            loc = self.loc()
            if self.at_kw("always", "never", "eventually"):
                op = self.advance().text
                self.expect("PUNCT", "(")
                body = self.expr()
                self.expect("PUNCT", ")")
                return Temporal(loc, op, body)
            if self.at_kw("at"):
                self.advance()
                self.expect("PUNCT", "(")
                step = self.expect("INT")
                self.expect("PUNCT", ",")
                body = self.expr()
                self.expect("PUNCT", ")")
                return At(loc, int(step.text), body)
            if self.at("PUNCT", "("):
                self.advance()
                body = self.expr()
                self.expect("PUNCT", ")")
                return body
            operand = self.operand(comparison_only=False)
            if self.at("PUNCT", "=="):
                self.advance()
                right = self.operand(comparison_only=True)
                return Cmp(loc, operand, right)
            # a bare operand must be usable as a step predicate
            if isinstance(operand, PortOperand):
                return NameRef(loc, operand.name)
            if isinstance(operand, PrevOperand):
                return Cmp(loc, operand, ValueOperand(loc, True))
            if isinstance(operand, ValueOperand) and isinstance(operand.value, bool):
                return Lit(loc, operand.value)
            raise ParseError("a bare value is not a predicate", *loc)
        finally:
            self.depth -= 1

    def operand(self, comparison_only: bool):
        loc = self.loc()
        if self.at_kw("prev"):
            self.advance()
            self.expect("PUNCT", "(")
            name = self.ident("port name")
            self.expect("PUNCT", ",")
            self.expect_kw("init")
            self.expect("PUNCT", "=")
            init = self.value_token()
            self.expect("PUNCT", ")")
            return PrevOperand(loc, name.text, init)
        if self.at_kw("true"):
            self.advance()
            return ValueOperand(loc, True)
        if self.at_kw("false"):
            self.advance()
            return ValueOperand(loc, False)
        if self.tok.kind == "INT":
            t = self.advance()
            return ValueOperand(loc, int(t.text))
        if self.tok.kind == "IDENT":
            t = self.advance()
            return PortOperand(loc, t.text)
        raise self.error(
            f"expected {'a value or port' if comparison_only else 'an expression'}, "
            f"found {self.tok.text or 'end of input'!r}")


def parse(text: str) -> Document:
    """Parse a document; raises a located SpecLangError subclass on any problem."""
    return _Parser(_tokenize(text)).document()


def parse_expr(text: str) -> Expr:
    """Parse a single trace expression (no trailing input allowed)."""
    p = _Parser(_tokenize(text))
    e = p.expr()
    p.expect("EOF")
    return e


# --- resolution ---------------------------------------------------------------

def _resolve(doc: Document) -> None:
    """Document-wide name and type checks; raises located diagnostics."""
    for decl in doc.ports.values():
        if decl.dist is not None:
            _check_dist_decl(decl, doc)
    for name, body in doc.defs.items():
        _resolve_expr(body, doc, stack=(name,))
    for decl in doc.contracts.values():
        _check_io(decl, doc)
        _resolve_expr(decl.assume, doc, ())
        _resolve_expr(decl.guarantee, doc, ())
    for decl in doc.impls.values():
        _check_io(decl, doc)
        _resolve_expr(decl.behavior, doc, ())
    for decl in doc.probcontracts.values():
        if decl.contract not in doc.contracts:
            raise ResolveError(f"undefined contract {decl.contract!r}", *decl.loc)
        for pname in decl.ports:
            if pname not in doc.ports:
                raise ResolveError(f"undefined port {pname!r}", *decl.loc)
            if doc.ports[pname].dist is None:
                raise SemanticError(
                    f"port {pname!r} has no declared distribution", *decl.loc)
        if len(set(decl.ports)) != len(decl.ports):
            raise SemanticError("repeated probabilistic port", *decl.loc)


def _domain_of(decl: PortDecl) -> tuple:
    return decl.domain or traces.BOOL


def _in_domain(value, dom: tuple) -> bool:
    return any(type(v) is type(value) and v == value for v in dom)


def _check_dist_decl(decl: PortDecl, doc: Document) -> None:
    dom = _domain_of(decl)
    d = decl.dist
    if isinstance(d, BernoulliDecl):
        if dom != traces.BOOL:
            raise SemanticError(
                f"bernoulli distribution needs a boolean port, {decl.name!r} is not", *d.loc)
        return
    total = Fraction(0)
    for hist, w in d.entries:
        if doc.horizon is not None and len(hist) != doc.horizon:
            raise SemanticError(
                f"history {list(hist)} has length {len(hist)}, horizon is {doc.horizon}",
                *d.loc)
        for v in hist:
            if v not in dom:
                raise SemanticError(
                    f"value {v!r} not in domain of port {decl.name!r}", *d.loc)
        if w < 0:
            raise SemanticError("negative probability", *d.loc)
        total += w
    if total != 1:
        raise SemanticError(f"table weights sum to {total}, not 1", *d.loc)


def _check_io(decl, doc: Document) -> None:
    seen = set()
    for group in (decl.inputs, decl.outputs):
        for pname in group or ():
            if pname not in doc.ports:
                raise ResolveError(f"undefined port {pname!r}", *decl.loc)
            if pname in seen:
                raise SemanticError(f"port {pname!r} listed twice", *decl.loc)
            seen.add(pname)


def _resolve_expr(e: Expr, doc: Document, stack: tuple) -> None:
    if isinstance(e, Lit):
        return
    if isinstance(e, NameRef):
        if e.name in doc.ports:
            if _domain_of(doc.ports[e.name]) != traces.BOOL:
                raise SemanticError(
                    f"port {e.name!r} is not boolean; compare it against a value", *e.loc)
            return
        if e.name in doc.defs:
            if e.name in stack:
                raise SemanticError(f"definition cycle through {e.name!r}", *e.loc)
            _resolve_expr(doc.defs[e.name], doc, stack + (e.name,))
            return
        raise ResolveError(f"undefined name {e.name!r}", *e.loc)
    if isinstance(e, Not):
        _resolve_expr(e.body, doc, stack)
        return
    if isinstance(e, (And, Or, Implies)):
        _resolve_expr(e.left, doc, stack)
        _resolve_expr(e.right, doc, stack)
        return
    if isinstance(e, Temporal):
        _resolve_expr(e.body, doc, stack)
        return
    if isinstance(e, At):
        if doc.horizon is not None and not 0 <= e.step < doc.horizon:
            raise SemanticError(
                f"step {e.step} outside horizon 0..{doc.horizon - 1}", *e.loc)
        _resolve_expr(e.body, doc, stack)
        return
    if isinstance(e, Cmp):
        _resolve_cmp(e, doc)
        return
    raise AssertionError(f"unhandled node {e!r}")


def _operand_port(op, doc: Document):
    if isinstance(op, PortOperand) and op.name in doc.ports:
        return doc.ports[op.name]
    if isinstance(op, PrevOperand):
        if op.name not in doc.ports:
            raise ResolveError(f"undefined port {op.name!r}", *op.loc)
        return doc.ports[op.name]
    return None


def _resolve_cmp(e: Cmp, doc: Document) -> None:
    pl = _operand_port(e.left, doc)
    pr = _operand_port(e.right, doc)
    if isinstance(e.left, PrevOperand) and not _in_domain(e.left.init, _domain_of(pl)):
        raise SemanticError(
            f"init value {e.left.init!r} not in domain of port {e.left.name!r}", *e.left.loc)
    if isinstance(e.right, PrevOperand) and not _in_domain(e.right.init, _domain_of(pr)):
        raise SemanticError(
            f"init value {e.right.init!r} not in domain of port {e.right.name!r}", *e.right.loc)
    if pl is None and pr is None:
        bad = e.left if isinstance(e.left, PortOperand) else \
            (e.right if isinstance(e.right, PortOperand) else None)
        if bad is not None:
            raise ResolveError(f"undefined name {bad.name!r}", *bad.loc)
        raise SemanticError("comparison needs at least one port", *e.loc)
    for op, p, peer in ((e.left, pl, pr), (e.right, pr, pl)):
        if p is None and isinstance(op, PortOperand):
            # identifier that is not a port: must be a value of the peer's domain
            if not _in_domain(op.name, _domain_of(peer)):
                raise ResolveError(f"undefined name {op.name!r}", *op.loc)
        elif p is None and isinstance(op, ValueOperand):
            if not _in_domain(op.value, _domain_of(peer)):
                raise SemanticError(
                    f"value {op.value!r} not in domain of port {peer.name!r}", *op.loc)
    if pl is not None and pr is not None \
            and not traces.same_domain(_domain_of(pl), _domain_of(pr)):
        raise SemanticError(
            f"ports {pl.name!r} and {pr.name!r} have different domains", *e.loc)


# --- denotation ---------------------------------------------------------------

class _Denoter:
    def __init__(self, sig: Signature, h: int, defs: dict):
        self.sig = sig
        self.h = h
        self.defs = defs or {}
        self.size = traces.space_of(sig, h).size
        self._memo = {}

    def port(self, name, loc) -> Port:
        if name in self.defs:
            raise SemanticError(f"{name!r} is a definition, not a port", *loc)
        try:
            return self.sig.port(name)
        except SignatureError:
            raise ResolveError(f"unknown port {name!r}", *loc) from None

    def digits(self, name, t) -> np.ndarray:
        return traces.slot_values(self.sig, self.h, name, t)

    def full(self, value: bool) -> np.ndarray:
        return np.full(self.size, value, dtype=bool)

    def eval(self, e: Expr, t: int) -> np.ndarray:
        if isinstance(e, Lit):
            return self.full(e.value)
        if isinstance(e, NameRef):
            if e.name in self.defs:
                return self.eval(self.defs[e.name], t)
            p = self.port(e.name, e.loc)
            if p.domain != traces.BOOL:
                raise SemanticError(
                    f"port {e.name!r} is not boolean; compare it against a value", *e.loc)
            return self.digits(e.name, t) == 1
        if isinstance(e, Not):
            return ~self.eval(e.body, t)
        if isinstance(e, And):
            return self.eval(e.left, t) & self.eval(e.right, t)
        if isinstance(e, Or):
            return self.eval(e.left, t) | self.eval(e.right, t)
        if isinstance(e, Implies):
            return ~self.eval(e.left, t) | self.eval(e.right, t)
        if isinstance(e, Temporal):
            key = (id(e), e.op)
            if key not in self._memo:
                steps = [self.eval(e.body, u) for u in range(self.h)]
                if e.op == "always":
                    out = np.logical_and.reduce(steps)
                elif e.op == "never":
                    out = ~np.logical_or.reduce(steps)
                else:
                    out = np.logical_or.reduce(steps)
                self._memo[key] = out
            return self._memo[key]
        if isinstance(e, At):
            if not 0 <= e.step < self.h:
                raise SemanticError(f"step {e.step} outside horizon 0..{self.h - 1}", *e.loc)
            return self.eval(e.body, e.step)
        if isinstance(e, Cmp):
            return self.eval_cmp(e, t)
        raise AssertionError(f"unhandled node {e!r}")

    def operand(self, op, t):
        """Returns (domain or None, digit array or raw literal value)."""
        if isinstance(op, PrevOperand):
            p = self.port(op.name, op.loc)
            if not _in_domain(op.init, p.domain):
                raise SemanticError(
                    f"init value {op.init!r} not in domain of port {op.name!r}", *op.loc)
            if t == 0:
                return p.domain, np.full(self.size, traces.domain_index(p.domain, op.init),
                                         dtype=np.int64)
            return p.domain, self.digits(op.name, t - 1)
        if isinstance(op, PortOperand):
            try:
                p = self.sig.port(op.name)
            except Exception:
                return None, op.name    # treated as an enum literal of the peer
            return p.domain, self.digits(op.name, t)
        return None, op.value

    def eval_cmp(self, e: Cmp, t: int) -> np.ndarray:
        ldom, lval = self.operand(e.left, t)
        rdom, rval = self.operand(e.right, t)
        if ldom is None and rdom is None:
            raise SemanticError("comparison needs at least one port", *e.loc)
        if ldom is not None and rdom is not None:
            if not traces.same_domain(ldom, rdom):
                raise SemanticError("compared ports have different domains", *e.loc)
            return lval == rval
        dom, arr = (ldom, lval) if ldom is not None else (rdom, rval)
        lit = rval if ldom is not None else lval
        if not _in_domain(lit, dom):
            raise SemanticError(f"value {lit!r} not in the compared port's domain",
                                *e.loc)
        return arr == traces.domain_index(dom, lit)


def denote(e: Expr, sig: Signature, h, defs: dict = None) -> Assertion:
    """The runs over ``sig`` satisfying ``e`` at every step."""
    hh = traces._hlen(h)
    den = _Denoter(sig, hh, defs)
    mask = np.ones(den.size, dtype=bool)
    for t in range(hh):
        mask &= den.eval(e, t)
    return Assertion(sig, hh, mask)


# --- building core objects ------------------------------------------------------

def _doc_horizon(doc: Document) -> int:
    if doc.horizon is None:
        raise SemanticError("document declares no horizon", 1, 1)
    return doc.horizon


def signature_of(doc: Document, decl) -> Signature:
    """The signature of a contract or implementation declaration.

    With no input/output clause, every declared port participates under
    its default document role.
    """
    if decl.inputs is None and decl.outputs is None:
        ins = tuple(n for n, d in doc.ports.items() if d.role == "uncontrolled")
        outs = tuple(n for n, d in doc.ports.items() if d.role == "controlled")
    else:
        ins = decl.inputs or ()
        outs = decl.outputs or ()
    return Signature.of(
        controlled=tuple(doc.ports[n].port() for n in outs),
        uncontrolled=tuple(doc.ports[n].port() for n in ins))


def build_contract(doc: Document, name: str) -> _contracts.Contract:
    decl = doc.contracts.get(name)
    if decl is None:
        raise ResolveError(f"undefined contract {name!r}", 1, 1)
    h = _doc_horizon(doc)
    sig = signature_of(doc, decl)
    return _contracts.contract(denote(decl.assume, sig, h, doc.defs),
                               denote(decl.guarantee, sig, h, doc.defs))


def build_impl(doc: Document, name: str) -> Assertion:
    decl = doc.impls.get(name)
    if decl is None:
        raise ResolveError(f"undefined implementation {name!r}", 1, 1)
    h = _doc_horizon(doc)
    sig = signature_of(doc, decl)
    return denote(decl.behavior, sig, h, doc.defs)


def build_port_distribution(doc: Document, name: str) -> _prob.Distribution:
    decl = doc.ports[name]
    h = _doc_horizon(doc)
    port = decl.port()
    d = decl.dist
    if d is None:
        raise SemanticError(f"port {name!r} has no declared distribution", *decl.loc)
    if isinstance(d, BernoulliDecl):
        return _prob.bernoulli_iid(port, d.p, h)
    table = {}
    for hist, w in d.entries:
        if len(hist) != h:
            raise SemanticError(
                f"history {list(hist)} has length {len(hist)}, horizon is {h}", *d.loc)
        omega = traces.Run.of({name: hist})
        table[omega] = table.get(omega, Fraction(0)) + w
    return _prob.from_table((port,), h, table)


def build_probcontract(doc: Document, name: str) -> _prob.ProbContract:
    decl = doc.probcontracts.get(name)
    if decl is None:
        raise ResolveError(f"undefined probabilistic contract {name!r}", 1, 1)
    base = build_contract(doc, decl.contract)
    h = _doc_horizon(doc)
    dist = _prob.point_mass_empty(h)
    for pname in decl.ports:
        dist = _prob.product_dist(dist, build_port_distribution(doc, pname))
    try:
        return _prob.prob_contract(base, decl.ports, dist)
    except (SignatureError, DistributionError) as exc:
        raise SemanticError(str(exc), *decl.loc) from exc


def lookup_satisfaction_pair(doc: Document, impl_name: str, contract_name: str):
    """Resolve names for a satisfaction query.

    The contract name may denote a probabilistic contract or a plain one
    (the latter is treated as probability-free).
    """
    m = build_impl(doc, impl_name)
    if contract_name in doc.probcontracts:
        return m, build_probcontract(doc, contract_name)
    if contract_name in doc.contracts:
        return m, _prob.from_contract(build_contract(doc, contract_name))
    raise ResolveError(f"undefined contract {contract_name!r}", 1, 1)


# --- printing -------------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3, Not: 4}


def _fmt_value(v) -> str:
    if v is True:
        return "true"
    if v is False:
        return "false"
    return str(v)


def _fmt_operand(op) -> str:
    if isinstance(op, PrevOperand):
        return f"prev({op.name}, init={_fmt_value(op.init)})"
    if isinstance(op, PortOperand):
        return op.name
    return _fmt_value(op.value)


def format_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, Lit):
        return "true" if e.value else "false"
    if isinstance(e, NameRef):
        return e.name
    if isinstance(e, Temporal):
        return f"{e.op}({format_expr(e.body)})"
    if isinstance(e, At):
        return f"at({e.step}, {format_expr(e.body)})"
    if isinstance(e, Cmp):
        return f"{_fmt_operand(e.left)} == {_fmt_operand(e.right)}"
    if isinstance(e, Not):
        s = f"not {format_expr(e.body, _PREC[Not])}"
        prec = _PREC[Not]
    elif isinstance(e, And):
        s = f"{format_expr(e.left, _PREC[And])} and {format_expr(e.right, _PREC[And] + 1)}"
        prec = _PREC[And]
    elif isinstance(e, Or):
        s = f"{format_expr(e.left, _PREC[Or])} or {format_expr(e.right, _PREC[Or] + 1)}"
        prec = _PREC[Or]
    elif isinstance(e, Implies):
        s = f"{format_expr(e.left, _PREC[Implies] + 1)} implies {format_expr(e.right, _PREC[Implies])}"
        prec = _PREC[Implies]
    else:
        raise AssertionError(f"unhandled node {e!r}")
    return f"({s})" if prec < parent_prec else s


def _fmt_dist(d) -> str:
    if isinstance(d, BernoulliDecl):
        return f"bernoulli({d.p})"
    parts = []
    for hist, w in d.entries:
        parts.append(f"[{', '.join(_fmt_value(v) for v in hist)}]: {w};")
    return "table { " + " ".join(parts) + " }"


def print_document(doc: Document) -> str:
    """Deterministic text form: categories in order, names sorted."""
    out = []
    if doc.horizon is not None:
        out.append(f"horizon {doc.horizon};")
        out.append("")
    for name in sorted(doc.ports):
        d = doc.ports[name]
        dom = "bool" if not d.domain else "{" + ", ".join(_fmt_value(v) for v in d.domain) + "}"
        dist = f" prob {_fmt_dist(d.dist)}" if d.dist is not None else ""
        out.append(f"port {name} : {dom} {d.role}{dist};")
    if doc.ports:
        out.append("")
    for name in sorted(doc.defs):
        out.append(f"def {name} = {format_expr(doc.defs[name])};")
    if doc.defs:
        out.append("")
    for name in sorted(doc.contracts):
        d = doc.contracts[name]
        out.append(f"contract {name} {{")
        out.extend(_fmt_io(d))
        out.append(f"  assume {format_expr(d.assume)};")
        out.append(f"  guarantee {format_expr(d.guarantee)};")
        out.append("}")
        out.append("")
    for name in sorted(doc.impls):
        d = doc.impls[name]
        out.append(f"impl {name} {{")
        out.extend(_fmt_io(d))
        out.append(f"  behavior {format_expr(d.behavior)};")
        out.append("}")
        out.append("")
    for name in sorted(doc.probcontracts):
        d = doc.probcontracts[name]
        out.append(f"probcontract {name} {{")
        out.append(f"  contract {d.contract};")
        if d.ports:
            out.append(f"  ports {', '.join(d.ports)};")
        out.append("}")
        out.append("")
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n" if out else ""


def _fmt_io(d) -> list:
    lines = []
    if d.inputs is not None or d.outputs is not None:
        if d.inputs:
            lines.append(f"  input {', '.join(sorted(d.inputs))};")
        if d.outputs:
            lines.append(f"  output {', '.join(sorted(d.outputs))};")
    return lines
