"""Typed values produced by schema-driven parsing.

Text and byte payloads may be memoryview slices of the parsed buffer, and
lists and tables may be lazy seeds over validated bytes. Equality always
compares contents, so a parsed value equals its owned counterpart.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .. import det as D


@dataclass(frozen=True)
class VUnit:
    pass


@dataclass(frozen=True)
class VUInt:
    value: int


@dataclass(frozen=True)
class VNInt:
    magnitude: int  # the integer is -1 - magnitude

    @property
    def value(self) -> int:
        return -1 - self.magnitude


def vint(n: int):
    return VUInt(n) if n >= 0 else VNInt(-1 - n)


class _Payload:
    __slots__ = ("data",)

    def __init__(self, data):
        if isinstance(data, str):
            data = data.encode("utf-8")
        self.data = data

    def __bytes__(self):
        return bytes(self.data)

    def __eq__(self, other):
        return type(other) is type(self) and bytes(self.data) == bytes(other.data)

    def __hash__(self):
        return hash((type(self).__name__, bytes(self.data)))

    def owned(self):
        return type(self)(bytes(self.data))


class VText(_Payload):
    __slots__ = ()

    @property
    def text(self) -> str:
        return str(self.data, "utf-8")

    def __repr__(self):
        try:
            return f"VText({self.text!r})"
        except UnicodeDecodeError:
            return f"VText({bytes(self.data)!r})"


class VBytes(_Payload):
    __slots__ = ()

    def __repr__(self):
        return f"VBytes({bytes(self.data)!r})"


@dataclass(frozen=True)
class VLeft:
    value: object


@dataclass(frozen=True)
class VRight:
    value: object


@dataclass(frozen=True)
class VPair:
    first: object
    second: object


@dataclass(frozen=True)
class VNone:
    pass


@dataclass(frozen=True)
class VSome:
    value: object


@dataclass(frozen=True)
class VItem:
    """A value of type ``any``: the canonical item itself."""

    item: object


class VList:
    """A list value; ``items`` is a tuple or a lazy seed over parsed bytes."""

    __slots__ = ("items",)

    def __init__(self, items=()):
        if not hasattr(items, "reps"):
            items = tuple(items)
        self.items = items

    @property
    def is_seed(self) -> bool:
        return not isinstance(self.items, tuple)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items) if isinstance(self.items, tuple) else self.items.reps

    def __eq__(self, other):
        return isinstance(other, VList) and tuple(self) == tuple(other)

    def __hash__(self):
        return hash(tuple(self))

    def __repr__(self):
        if self.is_seed:
            return f"VList(<seed of {self.items.reps}>)"
        return f"VList({list(self.items)!r})"


class VTable:
    """Key/value pairs of a table; equality ignores pair order."""

    __slots__ = ("pairs",)

    def __init__(self, pairs=()):
        if isinstance(pairs, dict):
            pairs = pairs.items()
        if not hasattr(pairs, "table_key"):
            pairs = tuple((k, v) for k, v in pairs)
        self.pairs = pairs

    @property
    def is_seed(self) -> bool:
        return not isinstance(self.pairs, tuple)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return sum(1 for _ in self.pairs)

    def __eq__(self, other):
        return isinstance(other, VTable) and Counter(self) == Counter(other)

    def __hash__(self):
        return hash(frozenset(Counter(self).items()))

    def __repr__(self):
        if self.is_seed:
            return "VTable(<seed>)"
        return f"VTable({list(self.pairs)!r})"


def to_owned(v):
    """Copy every payload and materialize every seed."""
    if isinstance(v, _Payload):
        return v.owned()
    if isinstance(v, VList):
        return VList(tuple(to_owned(x) for x in v))
    if isinstance(v, VTable):
        return VTable(tuple((to_owned(k), to_owned(x)) for k, x in v))
    if isinstance(v, (VLeft, VRight, VSome)):
        return type(v)(to_owned(v.value))
    if isinstance(v, VPair):
        return VPair(to_owned(v.first), to_owned(v.second))
    return v


# -- line-oriented dump format -------------------------------------------------------
#
# One constructor per line, children indented by two spaces:
#   unit | uint N | nint -N | text "..." | bytes h'..' | item <diagnostic>
#   left / right / some (one child) | none | pair (two children)
#   list (children) | table (entry children, each with key and value children)


def dump(v, indent: int = 0) -> str:
    lines = []
    _dump(v, indent, lines)
    return "\n".join(lines) + "\n"


def _dump(v, ind, lines):
    pad = " " * ind
    if isinstance(v, VUnit):
        lines.append(pad + "unit")
    elif isinstance(v, VUInt):
        lines.append(f"{pad}uint {v.value}")
    elif isinstance(v, VNInt):
        lines.append(f"{pad}nint {v.value}")
    elif isinstance(v, VText):
        import json

        try:
            lines.append(f"{pad}text {json.dumps(v.text, ensure_ascii=False)}")
        except UnicodeDecodeError:
            lines.append(f"{pad}text-bytes h'{bytes(v.data).hex()}'")
    elif isinstance(v, VBytes):
        lines.append(f"{pad}bytes h'{bytes(v.data).hex()}'")
    elif isinstance(v, VItem):
        from ..diag import diag_item

        lines.append(f"{pad}item {diag_item(v.item)}")
    elif isinstance(v, (VLeft, VRight, VSome)):
        lines.append(pad + {VLeft: "left", VRight: "right", VSome: "some"}[type(v)])
        _dump(v.value, ind + 2, lines)
    elif isinstance(v, VNone):
        lines.append(pad + "none")
    elif isinstance(v, VPair):
        lines.append(pad + "pair")
        _dump(v.first, ind + 2, lines)
        _dump(v.second, ind + 2, lines)
    elif isinstance(v, VList):
        lines.append(pad + "list")
        for x in v:
            _dump(x, ind + 2, lines)
    elif isinstance(v, VTable):
        lines.append(pad + "table")
        for k, x in v:
            lines.append(pad + "  entry")
            _dump(k, ind + 4, lines)
            _dump(x, ind + 4, lines)
    else:
        raise TypeError(f"not a typed value: {v!r}")


class DumpSyntaxError(ValueError):
    pass


def load_dump(text: str):
    """Inverse of :func:`dump`."""
    import json

    rows = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        stripped = line.lstrip(" ")
        rows.append((len(line) - len(stripped), stripped.rstrip(), n))
    pos = 0

    def node(ind):
        nonlocal pos
        if pos >= len(rows):
            raise DumpSyntaxError("unexpected end of dump")
        i, s, n = rows[pos]
        if i != ind:
            raise DumpSyntaxError(f"line {n}: expected indentation {ind}")
        pos += 1
        word, _, rest = s.partition(" ")

        def children():
            out = []
            while pos < len(rows) and rows[pos][0] > ind:
                out.append(node(ind + 2))
            return out

        if word == "unit":
            return VUnit()
        if word == "uint":
            return VUInt(int(rest))
        if word == "nint":
            return VNInt(-1 - int(rest))
        if word == "text":
            return VText(json.loads(rest))
        if word == "text-bytes":
            return VText(bytes.fromhex(rest[2:-1]))
        if word == "bytes":
            return VBytes(bytes.fromhex(rest[2:-1]))
        if word == "item":
            from ..diag import parse_diag

            return VItem(D.canonicalize(parse_diag(rest)))
        if word == "none":
            return VNone()
        kids = children()
        if word in ("left", "right", "some"):
            if len(kids) != 1:
                raise DumpSyntaxError(f"line {n}: {word} takes one child")
            return {"left": VLeft, "right": VRight, "some": VSome}[word](kids[0])
        if word == "pair":
            if len(kids) != 2:
                raise DumpSyntaxError(f"line {n}: pair takes two children")
            return VPair(*kids)
        if word == "list":
            return VList(tuple(kids))
        if word == "table":
            return VTable(tuple(kids))
        if word == "entry":
            if len(kids) != 2:
                raise DumpSyntaxError(f"line {n}: entry takes a key and a value")
            return (kids[0], kids[1])
        raise DumpSyntaxError(f"line {n}: unknown constructor {word!r}")

    v = node(rows[0][0] if rows else 0)
    if pos != len(rows):
        raise DumpSyntaxError(f"line {rows[pos][2]}: trailing input")
    return v
