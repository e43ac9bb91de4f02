"""Deterministic CBOR: canonical data model, byte-level check, comparator.

A canonical item has exactly one encoding: integer arguments use their
shortest width and map keys appear in strictly increasing byte order of
their encodings. :func:`det_check` decides that property directly on bytes
with a fixed amount of state, and :func:`compare_det` orders canonical
items without serializing them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key
from typing import Optional, Tuple

from . import raw as R
from .errors import (
    DepthExceeded,
    DuplicateKey,
    IndefiniteLength,
    InvalidSimple,
    NonMinimalInt,
    ReservedInfo,
    Truncated,
    CountOverflow,
    UnsortedOrDuplicateKeys,
)

LESS, EQUAL, GREATER = -1, 0, 1

MIN_INT = -(1 << 64)
MAX_INT = (1 << 64) - 1


# -- canonical data model ------------------------------------------------------


@dataclass(frozen=True)
class Int:
    value: int

    def __post_init__(self):
        if not MIN_INT <= self.value <= MAX_INT:
            raise ValueError(f"integer {self.value} outside the CBOR range")

    @property
    def sign(self) -> int:
        return 0 if self.value >= 0 else 1

    @property
    def magnitude(self) -> int:
        return self.value if self.value >= 0 else -1 - self.value


@dataclass(frozen=True)
class Simple:
    value: int

    def __post_init__(self):
        if not (0 <= self.value <= 23 or 32 <= self.value <= 255):
            raise ValueError(f"simple value {self.value} out of range")


@dataclass(frozen=True)
class Bytes:
    value: bytes

    def __post_init__(self):
        if not isinstance(self.value, bytes):
            object.__setattr__(self, "value", bytes(self.value))


@dataclass(frozen=True)
class Text:
    value: str

    @property
    def utf8(self) -> bytes:
        return self.value.encode("utf-8")


@dataclass(frozen=True)
class Tagged:
    tag: int
    item: object

    def __post_init__(self):
        if not 0 <= self.tag <= MAX_INT:
            raise ValueError("tag out of u64 range")


@dataclass(frozen=True)
class Array:
    items: tuple = ()

    def __post_init__(self):
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True)
class Map:
    """Entries must already be strictly increasing by key; see :func:`mk_map`."""

    entries: tuple = ()

    def __post_init__(self):
        entries = tuple((k, v) for k, v in self.entries)
        object.__setattr__(self, "entries", entries)
        for i in range(1, len(entries)):
            if compare_det(entries[i - 1][0], entries[i][0]) != LESS:
                raise UnsortedOrDuplicateKeys("map keys are not strictly increasing")

    @classmethod
    def trusted(cls, entries: tuple) -> "Map":
        # entries known sorted (e.g. decoded from checked bytes)
        m = object.__new__(cls)
        object.__setattr__(m, "entries", entries)
        return m

    def get(self, key, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default


CanonItem = (Int, Simple, Bytes, Text, Tagged, Array, Map)

FALSE = Simple(20)
TRUE = Simple(21)
NULL = Simple(22)


def _head(x) -> Tuple[int, int]:
    """(major type, argument) of a canonical item."""
    t = type(x)
    if t is Int:
        v = x.value
        return (0, v) if v >= 0 else (1, -1 - v)
    if t is Bytes:
        return 2, len(x.value)
    if t is Text:
        return 3, len(x.value.encode("utf-8"))
    if t is Array:
        return 4, len(x.items)
    if t is Map:
        return 5, len(x.entries)
    if t is Tagged:
        return 6, x.tag
    if t is Simple:
        return 7, x.value
    raise TypeError(f"not a canonical item: {x!r}")


def _kids(x):
    t = type(x)
    if t is Array:
        return x.items
    if t is Map:
        return [c for kv in x.entries for c in kv]
    if t is Tagged:
        return (x.item,)
    return ()


def compare_det(x, y) -> int:
    """Order two canonical items exactly as their encodings compare bytewise.

    Works structurally: major type first, then the header argument (the
    shortest encodings of two arguments compare like the numbers), then the
    string payload or the children in order. Children are compared through an
    explicit work list, so deep items do not recurse.
    """
    work = [(x, y)]
    while work:
        a, b = work.pop()
        if a is b:
            continue
        ma, na = _head(a)
        mb, nb = _head(b)
        if ma != mb:
            return LESS if ma < mb else GREATER
        if na != nb:
            return LESS if na < nb else GREATER
        if ma == 2 or ma == 3:
            pa = a.value if ma == 2 else a.value.encode("utf-8")
            pb = b.value if ma == 2 else b.value.encode("utf-8")
            if pa != pb:
                return LESS if pa < pb else GREATER
        elif ma >= 4 and ma <= 6:
            ka, kb = _kids(a), _kids(b)
            # same count, so pairs line up; push in reverse for in-order pops
            for i in range(len(ka) - 1, -1, -1):
                work.append((ka[i], kb[i]))
    return EQUAL


_det_key = cmp_to_key(compare_det)


def mk_map(entries) -> Map:
    """Sort ``entries`` by key (in place when it is a list) and build a Map."""
    if not isinstance(entries, list):
        entries = list(entries)
    entries.sort(key=lambda kv: _det_key(kv[0]))
    for i in range(1, len(entries)):
        if compare_det(entries[i - 1][0], entries[i][0]) == EQUAL:
            raise DuplicateKey(f"duplicate map key {entries[i][0]!r}")
    return Map.trusted(tuple((k, v) for k, v in entries))


# -- serialization ---------------------------------------------------------------


def encode_det(x) -> bytes:
    out = bytearray()
    stack = [iter((x,))]
    while stack:
        node = next(stack[-1], None)
        if node is None:
            stack.pop()
            continue
        t = type(node)
        if t is Text:
            data = node.value.encode("utf-8")
            out += R.header_bytes(3, len(data))
            out += data
        elif t is Bytes:
            out += R.header_bytes(2, len(node.value))
            out += node.value
        else:
            major, arg = _head(node)
            out += R.header_bytes(major, arg)
            kids = _kids(node)
            if kids:
                stack.append(iter(kids))
    return bytes(out)


def serialize_det(x, out, pos: int = 0) -> int:
    """Write the deterministic encoding of ``x``; 0 if ``out`` is too small."""
    data = encode_det(x)
    if len(data) > len(out) - pos:
        return 0
    out[pos : pos + len(data)] = data
    return len(data)


# -- byte-level determinism check ---------------------------------------------------

# smallest argument that needs each trailing width
_MIN_FOR_WIDTH = {1: 24, 2: 0x100, 4: 0x10000, 8: 0x100000000}
_WIDTH = (0, 1, 2, 4, 8)
_CHUNK = 256


def _compare_ranges(buf, a0, a1, b0, b1) -> int:
    """Lexicographic comparison of two byte ranges in bounded chunks."""
    while a0 < a1 and b0 < b1:
        n = min(_CHUNK, a1 - a0, b1 - b0)
        ca = buf[a0 : a0 + n]
        cb = buf[b0 : b0 + n]
        if ca != cb:
            return LESS if ca < cb else GREATER
        a0 += n
        b0 += n
    if a0 < a1:
        return GREATER
    if b0 < b1:
        return LESS
    return EQUAL


def _validate_minimal(buf, pos, end):
    """Raw validation with the shortest-width rule checked along the way.

    Returns (size, offset of first non-minimal argument or None, saw a map
    with at least two entries).
    """
    expected = 1
    p = pos
    bad = None
    maps = False
    frombytes = int.from_bytes
    leaf1 = R._LEAF1
    while expected:
        expected -= 1
        if p >= end:
            raise Truncated("input ends before all expected items", p)
        b = buf[p]
        if leaf1[b]:
            if expected:
                k = R.leaf_run(buf, p, min(end, p + expected + 1))
                expected -= k - 1
                p += k
            else:
                p += 1
            if expected > end - p:
                raise Truncated("input ends before all expected items", p)
            continue
        info = b & 0x1F
        major = b >> 5
        if info < 24:
            arg = info
            p += 1
        elif info < 28:
            w = _WIDTH[info - 23]
            if end - p - 1 < w:
                raise Truncated(f"header declares {w} trailing bytes", p)
            if major == 7:
                if info != 24:
                    raise ReservedInfo("floating point is not supported", p)
                arg = buf[p + 1]
                if arg < 32:
                    raise InvalidSimple(f"simple value {arg} in two-byte form", p)
            else:
                arg = frombytes(buf[p + 1 : p + 1 + w], "big")
                if arg < _MIN_FOR_WIDTH[w] and bad is None:
                    bad = p
            p += 1 + w
        elif info == 31:
            raise IndefiniteLength("indefinite-length items are not supported", p)
        else:
            raise ReservedInfo(f"reserved additional info {info}", p)
        if major < 4:
            if major > 1:
                if arg > end - p:
                    raise Truncated("string payload truncated", p)
                if major == 3:
                    R._check_utf8(buf, p, p + arg, p)
                p += arg
            if expected > end - p:
                raise Truncated("input ends before all expected items", p)
            continue
        if expected > end - p:
            raise Truncated("input ends before all expected items", p)
        if major == 4:
            count = arg
        elif major == 5:
            count = 2 * arg
            if arg > 1:
                maps = True
        elif major == 6:
            count = 1
        else:
            continue
        if count > end - p - expected:
            raise CountOverflow(f"declared {count} items exceed remaining input", p)
        expected += count
    return p - pos, bad, maps


def _check_map_order(buf, pos, end):
    """Scan every map in a valid item and compare consecutive key encodings."""
    jump = R.jump
    p = pos
    leaf1 = R._LEAF1
    while p < end:
        b = buf[p]
        if leaf1[b]:
            p += R.leaf_run(buf, p, end)
            continue
        major = b >> 5
        arg, _, hl = R._read_arg(buf, p)
        if major == 2 or major == 3:
            p += hl + arg
            continue
        if major == 5 and arg > 1:
            q = p + hl
            k0 = q
            k1 = q + jump(buf, q)
            for i in range(1, arg):
                q = k1 + jump(buf, k1)  # skip value i-1
                n0 = q
                n1 = q + jump(buf, q)
                if _compare_ranges(buf, k0, k1, n0, n1) != LESS:
                    raise UnsortedOrDuplicateKeys("map keys are not strictly increasing", n0)
                k0, k1 = n0, n1
        p += hl


def det_check(buf, pos: int = 0, end: Optional[int] = None) -> int:
    """Size of the deterministically encoded item at ``pos``.

    Validity errors take precedence over width errors, which take
    precedence over key-order errors. Key order is only scanned when the
    first pass saw a map with two or more entries.
    """
    if end is None:
        end = len(buf)
    size, bad, maps = _validate_minimal(buf, pos, end)
    if bad is not None:
        raise NonMinimalInt("integer argument not in shortest form", bad)
    if maps:
        _check_map_order(buf, pos, pos + size)
    return size


def parse_det(buf, pos: int = 0, end: Optional[int] = None):
    size = det_check(buf, pos, end)
    return R.read_shallow(buf, pos), size


def decode_view(buf, pos: int = 0):
    """Canonical item for bytes already known deterministic (no checks)."""
    stack = []
    p = pos
    while True:
        v = R.read_shallow(buf, p)
        k = v.kind
        p = v.body
        if k == R.Kind.UINT:
            node = Int(v.arg)
        elif k == R.Kind.NINT:
            node = Int(-1 - v.arg)
        elif k == R.Kind.BYTES:
            node = Bytes(bytes(buf[p : p + v.arg]))
            p += v.arg
        elif k == R.Kind.TEXT:
            node = Text(str(buf[p : p + v.arg], "utf-8"))
            p += v.arg
        elif k == R.Kind.SIMPLE:
            node = Simple(v.arg)
        else:
            want = v.arg if k == R.Kind.ARRAY else 2 * v.arg if k == R.Kind.MAP else 1
            if want:
                stack.append((v, [], want))
                continue
            node = Array(()) if k == R.Kind.ARRAY else Map.trusted(())
        while stack:
            fv, kids, want = stack[-1]
            kids.append(node)
            if len(kids) < want:
                break
            stack.pop()
            if fv.kind == R.Kind.ARRAY:
                node = Array(tuple(kids))
            elif fv.kind == R.Kind.MAP:
                node = Map.trusted(tuple(zip(kids[0::2], kids[1::2])))
            else:
                node = Tagged(fv.arg, kids[0])
        else:
            return node


def decode_det(buf, pos: int = 0, end: Optional[int] = None):
    """Check and decode; returns ``(item, size)``."""
    size = det_check(buf, pos, end)
    return decode_view(buf, pos), size


def _item_end(buf, p: int) -> int:
    """End of the valid item at ``p``; scalars without recursion."""
    b = buf[p]
    major = b >> 5
    info = b & 0x1F
    if major < 4 or major == 7:
        if info < 24:
            hl, arg = 1, info
        else:
            w = _WIDTH[info - 23]
            hl, arg = 1 + w, int.from_bytes(buf[p + 1 : p + 1 + w], "big")
        return p + hl + (arg if 1 < major < 4 else 0)
    return p + R.jump(buf, p)


def map_get(buf, pos: int, key) -> Optional[int]:
    """Offset of the value stored under ``key`` in the map at ``pos``, or None.

    The map must already have passed :func:`det_check`. ``key`` is a
    canonical item or its encoding; keys are compared as bytes and the scan
    stops at the first larger key.
    """
    if not isinstance(key, (bytes, bytearray, memoryview)):
        key = encode_det(key)
    v = R.read_shallow(buf, pos)
    if v.kind != R.Kind.MAP:
        raise TypeError("not a map")
    p = v.body
    key = bytes(key)
    for _ in range(v.arg):
        k_end = _item_end(buf, p)
        here = bytes(buf[p:k_end])
        if here == key:
            return k_end
        if here > key:
            return None
        p = _item_end(buf, k_end)
    return None


def loads(data) -> object:
    """Decode a whole buffer holding exactly one deterministic item."""
    item, size = decode_det(data)
    if size != len(data):
        raise Truncated(f"{len(data) - size} trailing bytes after item", size)
    return item


# -- raw <-> canonical ------------------------------------------------------------------


def canonicalize(x, depth_limit: int = 64):
    """Minimize widths and sort maps of a raw item.

    The root is at depth 0; an item nested deeper than ``depth_limit``
    raises DepthExceeded.
    """

    def go(node, depth):
        if depth > depth_limit:
            raise DepthExceeded(f"nesting deeper than {depth_limit}")
        if isinstance(node, R.RawInt):
            return Int(node.value)
        if isinstance(node, R.RawSimple):
            return Simple(node.value)
        if isinstance(node, R.RawBytes):
            return Bytes(node.payload)
        if isinstance(node, R.RawText):
            return Text(node.payload.decode("utf-8"))
        if isinstance(node, R.RawArray):
            return Array(tuple(go(c, depth + 1) for c in node.items))
        if isinstance(node, R.RawMap):
            return mk_map([(go(k, depth + 1), go(v, depth + 1)) for k, v in node.entries])
        if isinstance(node, R.RawTagged):
            return Tagged(node.tag.value, go(node.payload, depth + 1))
        raise TypeError(f"not a raw item: {node!r}")

    return go(x, 0)


def to_raw(x):
    """The raw item with minimal widths that serializes like ``x``."""
    t = type(x)
    if t is Int:
        return R.raw_int(x.value)
    if t is Simple:
        return R.RawSimple(x.value)
    if t is Bytes:
        return R.raw_bytes(x.value)
    if t is Text:
        return R.raw_text(x.value)
    if t is Array:
        return R.raw_array(to_raw(c) for c in x.items)
    if t is Map:
        return R.raw_map((to_raw(k), to_raw(v)) for k, v in x.entries)
    if t is Tagged:
        return R.raw_tagged(x.tag, to_raw(x.item))
    raise TypeError(f"not a canonical item: {x!r}")


# -- reference oracles (small inputs) -----------------------------------------------


def valid(x) -> bool:
    """No map anywhere in ``x`` holds two equivalent keys."""
    if isinstance(x, R.RawArray):
        return all(valid(c) for c in x.items)
    if isinstance(x, R.RawTagged):
        return valid(x.payload)
    if isinstance(x, R.RawMap):
        if not all(valid(k) and valid(v) for k, v in x.entries):
            return False
        keys = [k for k, _ in x.entries]
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                if _equiv_valid(keys[i], keys[j]):
                    return False
        return True
    return True


def equiv(x, y) -> bool:
    """Same data ignoring argument widths and map entry order."""
    if x == y:
        return True
    return valid(x) and valid(y) and _equiv_valid(x, y)


def _equiv_valid(x, y) -> bool:
    if type(x) is not type(y):
        return False
    if isinstance(x, R.RawInt):
        return x.sign == y.sign and x.arg.value == y.arg.value
    if isinstance(x, R.RawSimple):
        return x.value == y.value
    if isinstance(x, (R.RawBytes, R.RawText)):
        return x.payload == y.payload
    if isinstance(x, R.RawArray):
        return len(x.items) == len(y.items) and all(
            _equiv_valid(a, b) for a, b in zip(x.items, y.items)
        )
    if isinstance(x, R.RawTagged):
        return x.tag.value == y.tag.value and _equiv_valid(x.payload, y.payload)
    if isinstance(x, R.RawMap):
        if len(x.entries) != len(y.entries):
            return False
        for k, v in x.entries:
            match = [v2 for k2, v2 in y.entries if _equiv_valid(k, k2)]
            if len(match) != 1 or not _equiv_valid(v, match[0]):
                return False
        return True
    return False


# -- convenience ------------------------------------------------------------------------


def from_python(obj):
    """Build a canonical item from plain Python data (int, str, bytes, bool,
    None, list/tuple, dict)."""
    if isinstance(obj, CanonItem):
        return obj
    if obj is True:
        return TRUE
    if obj is False:
        return FALSE
    if obj is None:
        return NULL
    if isinstance(obj, int):
        return Int(obj)
    if isinstance(obj, str):
        return Text(obj)
    if isinstance(obj, (bytes, bytearray, memoryview)):
        return Bytes(bytes(obj))
    if isinstance(obj, (list, tuple)):
        return Array(tuple(from_python(o) for o in obj))
    if isinstance(obj, dict):
        return mk_map([(from_python(k), from_python(v)) for k, v in obj.items()])
    raise TypeError(f"cannot convert {type(obj).__name__} to CBOR")
