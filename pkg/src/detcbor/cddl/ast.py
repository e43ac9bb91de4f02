"""Abstract syntax for the supported CDDL subset.

Types, array groups and map groups are separate node families. Binary
constructors nest to the right when built from flat surface lists, which
makes the printer/parser round trip exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

BASE_NAMES = ("any", "int", "uint", "nint", "tstr", "bstr")

MAX_U64 = (1 << 64) - 1
MIN_INT = -(1 << 64)


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class Base:
    name: str  # one of BASE_NAMES


@dataclass(frozen=True)
class LiteralInt:
    value: int


@dataclass(frozen=True)
class LiteralText:
    value: str


@dataclass(frozen=True)
class LiteralSimple:
    value: int  # 20 false, 21 true, 22 nil, other simple values


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int  # inclusive


@dataclass(frozen=True)
class SizeConstraint:
    base: str  # "tstr" or "bstr"
    lo: int
    hi: int  # inclusive byte-length bounds


@dataclass(frozen=True)
class ArrayOf:
    group: object


@dataclass(frozen=True)
class MapOf:
    group: object


@dataclass(frozen=True)
class Choice:
    left: object
    right: object


@dataclass(frozen=True)
class Tagged:
    tag: int
    type: object


@dataclass(frozen=True)
class RuleRef:
    name: str


@dataclass(frozen=True)
class Bottom:
    """The empty type; matches nothing."""


# -- array groups ----------------------------------------------------------------


@dataclass(frozen=True)
class Elem:
    type: object


@dataclass(frozen=True)
class AltAG:
    left: object
    right: object


@dataclass(frozen=True)
class OptAG:
    group: object


@dataclass(frozen=True)
class ConcatAG:
    left: object
    right: object


@dataclass(frozen=True)
class StarAG:
    group: object


@dataclass(frozen=True)
class EmptyAG:
    pass


# -- map groups --------------------------------------------------------------------


@dataclass(frozen=True)
class Entry:
    key: object
    value: object
    cut: bool


@dataclass(frozen=True)
class AltMG:
    left: object
    right: object


@dataclass(frozen=True)
class OptMG:
    group: object


@dataclass(frozen=True)
class ConcatMG:
    left: object
    right: object


@dataclass(frozen=True)
class StarMG:
    group: object


@dataclass(frozen=True)
class EmptyMG:
    pass


# a reference to a group rule, spliced into an array or map group by inlining
@dataclass(frozen=True)
class GroupRef:
    name: str


# -- elaborated map groups -----------------------------------------------------------


@dataclass(frozen=True)
class ExclusionSet:
    """Union of (key type, value type) atoms; the empty union is nothing."""

    atoms: Tuple[Tuple[object, object], ...] = ()

    def union(self, other: "ExclusionSet") -> "ExclusionSet":
        seen = list(self.atoms)
        for a in other.atoms:
            if a not in seen:
                seen.append(a)
        return ExclusionSet(tuple(seen))

    def add(self, key, value) -> "ExclusionSet":
        return self.union(ExclusionSet(((key, value),)))

    @property
    def empty(self) -> bool:
        return not self.atoms


@dataclass(frozen=True)
class Table:
    """``*(key => value)`` minus entries matched by ``excluded``."""

    key: object
    excluded: ExclusionSet
    value: object


# -- schema ----------------------------------------------------------------------------


@dataclass
class Rule:
    name: str
    kind: str  # "type" or "group"
    body: object  # TypeExpr for type rules, surface group for group rules
    line: int = 0
    column: int = 0
    source: str = ""


@dataclass
class Schema:
    rules: dict = field(default_factory=dict)  # name -> Rule, in definition order
    root: Optional[str] = None

    def __iter__(self):
        return iter(self.rules.values())


# -- helpers ------------------------------------------------------------------------------


def choice_of(*ts):
    """Right-nested choice of one or more types."""
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = Choice(t, out)
    return out


def choices(t):
    """Flatten a (possibly nested) type choice into its alternatives."""
    stack = [t]
    out = []
    while stack:
        x = stack.pop()
        if isinstance(x, Choice):
            stack.append(x.right)
            stack.append(x.left)
        else:
            out.append(x)
    return out


def concat_ag(*gs):
    if not gs:
        return EmptyAG()
    out = gs[-1]
    for g in reversed(gs[:-1]):
        out = ConcatAG(g, out)
    return out


def concat_mg(*gs):
    if not gs:
        return EmptyMG()
    out = gs[-1]
    for g in reversed(gs[:-1]):
        out = ConcatMG(g, out)
    return out


BOOL = Choice(LiteralSimple(20), LiteralSimple(21))
NIL = LiteralSimple(22)


def is_literal(t) -> bool:
    return isinstance(t, (LiteralInt, LiteralText, LiteralSimple))


# -- printer ---------------------------------------------------------------------------------

_SIMPLE_WORDS = {20: "false", 21: "true", 22: "nil"}


def show_type(t) -> str:
    if isinstance(t, Base):
        return t.name
    if isinstance(t, LiteralInt):
        return str(t.value)
    if isinstance(t, LiteralText):
        return json.dumps(t.value, ensure_ascii=False)
    if isinstance(t, LiteralSimple):
        return _SIMPLE_WORDS.get(t.value, f"#7.{t.value}")
    if isinstance(t, IntRange):
        return f"{t.lo}..{t.hi}"
    if isinstance(t, SizeConstraint):
        if t.lo == t.hi:
            return f"{t.base} .size {t.lo}"
        return f"{t.base} .size ({t.lo}..{t.hi})"
    if isinstance(t, ArrayOf):
        return f"[{show_ag(t.group)}]"
    if isinstance(t, MapOf):
        return "{" + show_mg(t.group) + "}"
    if isinstance(t, Choice):
        left = show_type(t.left)
        if isinstance(t.left, Choice):
            left = f"({left})"
        return f"{left} / {show_type(t.right)}"
    if isinstance(t, Tagged):
        return f"#6.{t.tag}({show_type(t.type)})"
    if isinstance(t, RuleRef):
        return t.name
    if isinstance(t, Bottom):
        return "(bottom)"
    raise TypeError(f"not a type: {t!r}")


def _wrap_type(t) -> str:
    # a choice inside a group needs parentheses only where `/` would bind wrongly
    return show_type(t)


def show_ag(g) -> str:
    if isinstance(g, Elem):
        return _wrap_type(g.type)
    if isinstance(g, EmptyAG):
        return ""
    if isinstance(g, GroupRef):
        return g.name
    if isinstance(g, OptAG):
        return f"? {_ag_atom(g.group)}"
    if isinstance(g, StarAG):
        return f"* {_ag_atom(g.group)}"
    if isinstance(g, ConcatAG):
        left = show_ag(g.left)
        if isinstance(g.left, (ConcatAG, AltAG, EmptyAG)):
            left = f"({left})"
        right = show_ag(g.right)
        if isinstance(g.right, (AltAG, EmptyAG)):
            right = f"({right})"
        return f"{left}, {right}"
    if isinstance(g, AltAG):
        left = show_ag(g.left)
        if isinstance(g.left, (AltAG, EmptyAG)):
            left = f"({left})"
        right = show_ag(g.right)
        if isinstance(g.right, EmptyAG):
            right = "()"
        return f"{left} // {right}"
    raise TypeError(f"not an array group: {g!r}")


def _ag_atom(g) -> str:
    if isinstance(g, (Elem, GroupRef)):
        return show_ag(g)
    return f"({show_ag(g)})"


def _show_key(t) -> str:
    s = show_type(t)
    return f"({s})" if isinstance(t, Choice) else s


def show_mg(g) -> str:
    if isinstance(g, Entry):
        if g.cut and is_literal(g.key):
            return f"{show_type(g.key)}: {show_type(g.value)}"
        arrow = "^ =>" if g.cut else "=>"
        return f"{_show_key(g.key)} {arrow} {show_type(g.value)}"
    if isinstance(g, Table):
        ex = " \\ ".join(
            f"<{show_type(k)}, {show_type(v)}>" for k, v in g.excluded.atoms
        )
        key = _show_key(g.key)
        if ex:
            key = f"{key} \\ {ex}"
        return f"* {key} => {show_type(g.value)}"
    if isinstance(g, EmptyMG):
        return ""
    if isinstance(g, GroupRef):
        return g.name
    if isinstance(g, OptMG):
        return f"? {_mg_atom(g.group)}"
    if isinstance(g, StarMG):
        return f"* {_mg_atom(g.group)}"
    if isinstance(g, ConcatMG):
        left = show_mg(g.left)
        if isinstance(g.left, (ConcatMG, AltMG, EmptyMG)):
            left = f"({left})"
        right = show_mg(g.right)
        if isinstance(g.right, (AltMG, EmptyMG)):
            right = f"({right})"
        return f"{left}, {right}"
    if isinstance(g, AltMG):
        left = show_mg(g.left)
        if isinstance(g.left, (AltMG, EmptyMG)):
            left = f"({left})"
        right = show_mg(g.right)
        if isinstance(g.right, EmptyMG):
            right = "()"
        return f"{left} // {right}"
    raise TypeError(f"not a map group: {g!r}")


def _mg_atom(g) -> str:
    if isinstance(g, (Entry, GroupRef)):
        return show_mg(g)
    return f"({show_mg(g)})"


def show_schema(schema: Schema) -> str:
    lines = []
    for r in schema:
        if r.kind == "type":
            lines.append(f"{r.name} = {show_type(r.body)}")
        else:
            lines.append(f"{r.name} = {r.source}")
    return "\n".join(lines) + "\n"
