"""CDDL text to abstract syntax, plus rule inlining.

Supported: rule definitions, ``/``, ``//``, ``?``, ``*``, parentheses,
arrays, maps, ``=>`` and ``:`` entries, integer and text literals, the
prelude names ``any int uint nint tstr text bstr bytes bool nil null true
false undefined``, integer ranges, ``.size`` on strings, ``#6.n(t)`` tags
and ``#7.n`` simple values. Anything else is reported as Unsupported.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import List, Optional

from ..errors import CddlSyntaxError, RecursiveRule, UnknownRule, Unsupported
from . import ast as A

_PRELUDE = {
    "any": A.Base("any"),
    "int": A.Base("int"),
    "uint": A.Base("uint"),
    "nint": A.Base("nint"),
    "tstr": A.Base("tstr"),
    "text": A.Base("tstr"),
    "bstr": A.Base("bstr"),
    "bytes": A.Base("bstr"),
    "bool": A.BOOL,
    "false": A.LiteralSimple(20),
    "true": A.LiteralSimple(21),
    "nil": A.NIL,
    "null": A.NIL,
    "undefined": A.LiteralSimple(23),
}

_UNSUPPORTED_NAMES = {
    "float", "float16", "float32", "float64", "float16-32", "float32-64",
    "number", "biguint", "bignint", "bigint", "integer", "unsigned",
    "tdate", "time", "uri", "b64url", "b64legacy", "regexp", "mime-message",
    "cbor-any", "eb64url", "eb64legacy", "eb16", "encoded-cbor",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>(?:\s|;[^\n]*)+)
  | (?P<hash>\#(?P<major>\d+)(?:\.(?P<minor>\d+))?)
  | (?P<float>-?\d+(?:\.\d+(?:[eE][+-]?\d+)?|[eE][+-]?\d+))
  | (?P<num>-?(?:0x[0-9a-fA-F]+|0b[01]+|\d+))
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<bytes>(?:h|b64)?'[^']*')
  | (?P<id>[A-Za-z@_$](?:[A-Za-z0-9@_$.\-]*[A-Za-z0-9@_$])?)
  | (?P<ctl>\.[a-z][a-z0-9\-]*)
  | (?P<punct>//=|/=|\.\.\.|\.\.|=>|//|[=/:,?*+()\[\]{}^~&<>])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    start: int
    end: int
    line: int
    column: int


def tokenize(text: str) -> List[Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise CddlSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind in ("major", "minor"):
            kind = "hash"
        s = m.group(0)
        if kind != "ws":
            toks.append(Tok(kind, s, pos, m.end(), line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", pos, pos, line, pos - line_start + 1))
    return toks


# -- surface groups (contents of group rules, resolved by context on use) -----------


@dataclass(frozen=True)
class SEntry:
    occ: Optional[str]
    key: object  # TypeExpr or None
    cut: bool
    value: object  # TypeExpr or SGroup
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class SGroup:
    alts: tuple  # tuple of tuples of SEntry


def _int_value(tok: Tok) -> int:
    s = tok.text
    neg = s.startswith("-")
    body = s[1:] if neg else s
    if body.startswith("0x"):
        v = int(body, 16)
    elif body.startswith("0b"):
        v = int(body, 2)
    else:
        v = int(body)
    v = -v if neg else v
    if not A.MIN_INT <= v <= A.MAX_U64:
        raise CddlSyntaxError(f"integer {v} outside the CBOR range", tok.line, tok.column)
    return v


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.refs = []  # (name, line, column) for the current rule

    # token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind == "punct" and t.text in texts

    def expect(self, text):
        t = self.tok
        if not (t.kind == "punct" and t.text == text):
            self.fail(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.take()

    def fail(self, msg, tok=None, cls=CddlSyntaxError):
        tok = tok or self.tok
        raise cls(msg, tok.line, tok.column)

    # rules
    def schema(self) -> A.Schema:
        sch = A.Schema()
        deps = {}
        if self.tok.kind == "eof":
            self.fail("empty schema")
        while self.tok.kind != "eof":
            name_tok = self.tok
            if name_tok.kind != "id":
                self.fail(f"expected a rule name, found {name_tok.text!r}")
            self.take()
            if self.at("<"):
                self.fail("generic rules", cls=Unsupported)
            if self.at("/=", "//="):
                self.fail("incremental rule definitions", cls=Unsupported)
            self.expect("=")
            name = name_tok.text
            if name in sch.rules:
                self.fail(f"rule {name!r} defined twice", name_tok)
            if name in _PRELUDE:
                self.fail(f"rule {name!r} redefines a prelude name", name_tok)
            self.refs = []
            start = self.tok.start
            g = self.group(top=True)
            source = self.text[start : self.toks[self.i - 1].end]
            t = _as_type(g)
            if t is not None:
                rule = A.Rule(name, "type", t, name_tok.line, name_tok.column, source)
            else:
                rule = A.Rule(name, "group", g, name_tok.line, name_tok.column, source)
            sch.rules[name] = rule
            deps[name] = list(self.refs)
            if sch.root is None:
                sch.root = name
        _check_refs(sch, deps)
        return sch

    def _at_rule_start(self) -> bool:
        # `name =` begins the next rule when groups are not delimited
        return self.tok.kind == "id" and self.peek().kind == "punct" and self.peek().text in (
            "=", "/=", "//=", "<")

    # groups
    def group(self, top=False) -> SGroup:
        alts = [self.grpchoice(top)]
        while self.at("//"):
            self.take()
            alts.append(self.grpchoice(top))
        return SGroup(tuple(alts))

    def grpchoice(self, top) -> tuple:
        entries = []
        while True:
            t = self.tok
            if t.kind == "eof" or self.at(")", "]", "}", "//"):
                break
            if top and entries and self._at_rule_start():
                break
            entries.append(self.grpent())
            if self.at(","):
                self.take()
            elif top and self._at_rule_start():
                break
        return tuple(entries)

    def grpent(self) -> SEntry:
        start = self.tok
        occ = None
        if self.at("?", "*", "+"):
            t = self.take()
            if t.text == "+":
                self.fail("'+' occurrence", t, Unsupported)
            if t.text == "*" and self.tok.kind == "num" and self.tok.start == t.end:
                self.fail("bounded occurrence n*m", t, Unsupported)
            occ = t.text
        elif self.tok.kind == "num" and self.peek().kind == "punct" and self.peek().text == "*" \
                and self.peek().start == self.tok.end:
            self.fail("bounded occurrence n*m", cls=Unsupported)
        # bareword key
        if self.tok.kind == "id" and self.peek().kind == "punct" and self.peek().text == ":":
            key_tok = self.take()
            self.take()
            value = self.type_()
            return SEntry(occ, A.LiteralText(key_tok.text), True, value, start.line, start.column)
        if self.at("("):
            self.take()
            inner = self.group()
            self.expect(")")
            as_t = _as_type(inner)
            if as_t is not None and self.at("/", "..", "...") or as_t is not None and self.tok.kind == "ctl":
                first = self.type1_rest(as_t)
                t = self.type_rest(first)
                return self.entry_after_type(occ, t, start)
            if self.at("=>", "^", ":"):
                if as_t is None:
                    self.fail("a group cannot be a map key")
                return self.entry_after_type(occ, as_t, start)
            return SEntry(occ, None, False, inner, start.line, start.column)
        t = self.type_()
        return self.entry_after_type(occ, t, start)

    def entry_after_type(self, occ, t, start) -> SEntry:
        if self.at(":"):
            tok = self.take()
            if not A.is_literal(t):
                self.fail("only literal keys may use ':'", tok)
            value = self.type_()
            return SEntry(occ, t, True, value, start.line, start.column)
        if self.at("^"):
            self.take()
            self.expect("=>")
            value = self.type_()
            return SEntry(occ, t, True, value, start.line, start.column)
        if self.at("=>"):
            self.take()
            value = self.type_()
            return SEntry(occ, t, False, value, start.line, start.column)
        return SEntry(occ, None, False, t, start.line, start.column)

    # types
    def type_(self):
        return self.type_rest(self.type1())

    def type_rest(self, first):
        ts = [first]
        while self.at("/"):
            self.take()
            ts.append(self.type1())
        return A.choice_of(*ts)

    def type1(self):
        return self.type1_rest(self.type2())

    def type1_rest(self, t):
        if self.at("..", "..."):
            op = self.take()
            hi = self.type2()
            if not (isinstance(t, A.LiteralInt) and isinstance(hi, A.LiteralInt)):
                self.fail("range bounds must be integer literals", op, Unsupported)
            top = hi.value if op.text == ".." else hi.value - 1
            if top < t.value:
                return A.Bottom()  # no integer lies in an empty range
            return A.IntRange(t.value, top)
        if self.tok.kind == "ctl":
            ctl = self.take()
            if ctl.text != ".size":
                self.fail(f"control operator {ctl.text}", ctl, Unsupported)
            if not (isinstance(t, A.Base) and t.name in ("tstr", "bstr")):
                self.fail(".size on non-string types", ctl, Unsupported)
            arg = self.type2()
            if isinstance(arg, A.LiteralInt) and arg.value >= 0:
                return A.SizeConstraint(t.name, arg.value, arg.value)
            if isinstance(arg, A.IntRange) and arg.lo >= 0:
                return A.SizeConstraint(t.name, arg.lo, arg.hi)
            self.fail(".size needs a non-negative length or length range", ctl)
        return t

    def type2(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            return A.LiteralInt(_int_value(t))
        if t.kind == "float":
            self.fail("floating-point literals", t, Unsupported)
        if t.kind == "str":
            self.take()
            try:
                return A.LiteralText(json.loads(t.text))
            except ValueError:
                self.fail("bad text string literal", t)
        if t.kind == "bytes":
            self.fail("byte string literals", t, Unsupported)
        if t.kind == "hash":
            self.take()
            m = re.fullmatch(r"#(\d+)(?:\.(\d+))?", t.text)
            major, minor = int(m.group(1)), m.group(2)
            if major == 6 and minor is not None and self.at("("):
                self.take()
                inner = self.type_()
                self.expect(")")
                return A.Tagged(int(minor), inner)
            if major == 7 and minor is not None:
                v = int(minor)
                if not (v <= 23 or 32 <= v <= 255):
                    self.fail(f"simple value {v} is not encodable", t)
                return A.LiteralSimple(v)
            self.fail(f"{t.text} type", t, Unsupported)
        if t.kind == "id":
            self.take()
            if self.at("<"):
                self.fail("generic arguments", cls=Unsupported)
            if t.text in _PRELUDE:
                return _PRELUDE[t.text]
            if t.text in _UNSUPPORTED_NAMES:
                self.fail(f"prelude type {t.text}", t, Unsupported)
            self.refs.append((t.text, t.line, t.column))
            return A.RuleRef(t.text)
        if t.kind == "punct":
            if t.text == "(":
                self.take()
                inner = self.type_()
                self.expect(")")
                return inner
            if t.text == "[":
                self.take()
                g = self.group()
                self.expect("]")
                return A.ArrayOf(to_ag(g))
            if t.text == "{":
                self.take()
                g = self.group()
                self.expect("}")
                return A.MapOf(to_mg(g, self))
            if t.text in ("~", "&"):
                self.fail(f"'{t.text}' operator", t, Unsupported)
        self.fail(f"expected a type, found {t.text or 'end of input'!r}")


def _as_type(g: SGroup):
    """The single bare type a group consists of, if it is just that."""
    if len(g.alts) != 1 or len(g.alts[0]) != 1:
        return None
    e = g.alts[0][0]
    if e.occ is None and e.key is None:
        if isinstance(e.value, SGroup):
            return _as_type(e.value)
        return e.value
    return None


def to_ag(g: SGroup):
    alts = []
    for alt in g.alts:
        alts.append(A.concat_ag(*[_ent_ag(e) for e in alt]))
    out = alts[-1]
    for a in reversed(alts[:-1]):
        out = A.AltAG(a, out)
    return out


def _ent_ag(e: SEntry):
    # member keys inside arrays only name positions; they carry no semantics
    if isinstance(e.value, SGroup):
        inner = _as_type(e.value)
        base = A.Elem(inner) if inner is not None else to_ag(e.value)
    else:
        base = A.Elem(e.value)
    if e.occ == "?":
        return A.OptAG(base)
    if e.occ == "*":
        return A.StarAG(base)
    return base


def to_mg(g: SGroup, p: Optional[_Parser] = None):
    alts = []
    for alt in g.alts:
        alts.append(A.concat_mg(*[_ent_mg(e) for e in alt]))
    out = alts[-1]
    for a in reversed(alts[:-1]):
        out = A.AltMG(a, out)
    return out


def _ent_mg(e: SEntry):
    if e.key is not None:
        if isinstance(e.value, SGroup):
            raise CddlSyntaxError("a map entry value must be a type", e.line, e.column)
        base = A.Entry(e.key, e.value, e.cut)
    elif isinstance(e.value, SGroup):
        inner = _as_type(e.value)
        if isinstance(inner, A.RuleRef):
            base = A.GroupRef(inner.name)
        elif inner is not None:
            raise CddlSyntaxError("map entries need a key", e.line, e.column)
        else:
            base = to_mg(e.value)
    elif isinstance(e.value, A.RuleRef):
        base = A.GroupRef(e.value.name)
    else:
        raise CddlSyntaxError("map entries need a key", e.line, e.column)
    if e.occ == "?":
        return A.OptMG(base)
    if e.occ == "*":
        return A.StarMG(base)
    return base


def _check_refs(sch: A.Schema, deps):
    for name, refs in deps.items():
        for ref, line, col in refs:
            if ref not in sch.rules:
                raise UnknownRule(f"unknown rule {ref!r}", line, col, where=name)
    # cycle detection over the rule dependency graph
    color = {}
    for start in sch.rules:
        if start in color:
            continue
        stack = [(start, iter(deps[start]))]
        color[start] = 1
        while stack:
            name, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[name] = 2
                stack.pop()
                continue
            ref = nxt[0]
            c = color.get(ref)
            if c == 1:
                raise RecursiveRule(
                    f"rule {ref!r} refers to itself through {name!r}", nxt[1], nxt[2], where=ref
                )
            if c is None:
                color[ref] = 1
                stack.append((ref, iter(deps[ref])))


def parse_cddl(text: str, root: Optional[str] = None) -> A.Schema:
    sch = _Parser(text).schema()
    if root is not None:
        if root not in sch.rules:
            raise UnknownRule(f"unknown root rule {root!r}")
        sch.root = root
    return sch


# -- inlining ----------------------------------------------------------------------------------


def inline(schema: A.Schema, root: Optional[str] = None):
    """Root type with every rule reference substituted by its definition."""
    name = root or schema.root
    rule = schema.rules.get(name)
    if rule is None:
        raise UnknownRule(f"unknown root rule {name!r}")
    if rule.kind != "type":
        raise CddlSyntaxError(f"root rule {name!r} is a group, not a type", rule.line, rule.column)
    return _Inliner(schema).type_(rule.body)


class _Inliner:
    def __init__(self, schema):
        self.rules = schema.rules
        self.memo = {}

    def _rule(self, name):
        r = self.rules.get(name)
        if r is None:
            raise UnknownRule(f"unknown rule {name!r}")
        # a type rule that merely names a group rule stands for that group
        while r.kind == "type" and isinstance(r.body, A.RuleRef):
            r = self.rules[r.body.name]
        return r

    def type_(self, t):
        if isinstance(t, A.RuleRef):
            if t.name in self.memo:
                return self.memo[t.name]
            r = self._rule(t.name)
            if r.kind != "type":
                raise CddlSyntaxError(f"group {t.name!r} used as a type", r.line, r.column)
            out = self.type_(r.body)
            self.memo[t.name] = out
            return out
        if isinstance(t, A.Choice):
            return A.Choice(self.type_(t.left), self.type_(t.right))
        if isinstance(t, A.ArrayOf):
            return A.ArrayOf(self.ag(t.group))
        if isinstance(t, A.MapOf):
            return A.MapOf(self.mg(t.group))
        if isinstance(t, A.Tagged):
            return A.Tagged(t.tag, self.type_(t.type))
        return t

    def ag(self, g):
        if isinstance(g, A.Elem):
            if isinstance(g.type, A.RuleRef):
                r = self._rule(g.type.name)
                if r.kind == "group":
                    return self.ag(to_ag(r.body))
            return A.Elem(self.type_(g.type))
        if isinstance(g, A.GroupRef):
            r = self._rule(g.name)
            if r.kind == "group":
                return self.ag(to_ag(r.body))
            return A.Elem(self.type_(r.body))
        if isinstance(g, (A.AltAG, A.ConcatAG)):
            return type(g)(self.ag(g.left), self.ag(g.right))
        if isinstance(g, (A.OptAG, A.StarAG)):
            return type(g)(self.ag(g.group))
        return g

    def mg(self, g):
        if isinstance(g, A.Entry):
            return A.Entry(self.type_(g.key), self.type_(g.value), g.cut)
        if isinstance(g, A.GroupRef):
            r = self._rule(g.name)
            if r.kind != "group":
                raise CddlSyntaxError(
                    f"type {g.name!r} used as a map group entry", r.line, r.column)
            return self.mg(to_mg(r.body))
        if isinstance(g, (A.AltMG, A.ConcatMG)):
            return type(g)(self.mg(g.left), self.mg(g.right))
        if isinstance(g, (A.OptMG, A.StarMG)):
            return type(g)(self.mg(g.group))
        return g


def parse_type(text: str):
    """Parse and inline a single type; handy for tests and the CLI."""
    if not re.match(r"\s*[A-Za-z@_$][A-Za-z0-9@_$.\-]*\s*=(?![=>])", text):
        text = "root = " + text
    return inline(parse_cddl(text))
