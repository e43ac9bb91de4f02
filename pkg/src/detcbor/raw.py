"""Byte-level CBOR (definite-length subset).

Everything here works on a byte buffer plus offsets. Validation and jumping
are single loops over a counter of items still expected, so neither uses
stack proportional to nesting depth. Views returned by :func:`read_shallow`
refer back into the input buffer instead of copying payloads.
"""

from __future__ import annotations

import codecs
import re
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Iterator, Optional, Tuple, Union

from .errors import (
    BufferTooSmall,
    CountOverflow,
    IndefiniteLength,
    InvalidSimple,
    InvalidUtf8,
    ReservedInfo,
    TooLarge,
    Truncated,
)

UINT, NINT, BYTES, TEXT, ARRAY, MAP, TAGGED, SIMPLE = range(8)

MAX_U64 = (1 << 64) - 1

# trailing argument width per size class
_WIDTH = (0, 1, 2, 4, 8)
# size class -> additional-info code
_INFO = (None, 24, 25, 26, 27)

_utf8_decode = codecs.utf_8_decode

# one-byte leaf items: small uint/nint and inline simple values
_LEAF1 = bytes(
    1 if (b < 0x18 or 0x20 <= b < 0x38 or 0xE0 <= b < 0xF8) else 0 for b in range(256)
)
_LEAF_RUN = re.compile(rb"[\x00-\x17\x20-\x37\xe0-\xf7]+")


def leaf_run(buf, pos, limit):
    """Length of the run of one-byte leaf items in ``buf[pos:limit]``."""
    m = _LEAF_RUN.match(buf, pos, limit)
    return m.end() - pos if m else 0


class Kind(IntEnum):
    UINT = UINT
    NINT = NINT
    BYTES = BYTES
    TEXT = TEXT
    ARRAY = ARRAY
    MAP = MAP
    TAGGED = TAGGED
    SIMPLE = SIMPLE


@dataclass(frozen=True)
class RawUint:
    value: int
    size: int = 0

    def __post_init__(self):
        if not 0 <= self.size <= 4:
            raise ValueError("size class must be in 0..4")
        if not 0 <= self.value <= MAX_U64:
            raise ValueError("value out of u64 range")
        if self.size == 0:
            if self.value > 23:
                raise ValueError(f"{self.value} does not fit in additional info")
        elif self.value >= 1 << (8 * _WIDTH[self.size]):
            raise ValueError(f"{self.value} does not fit size class {self.size}")

    @classmethod
    def minimal(cls, value: int) -> "RawUint":
        return cls(value, minimal_size(value))


def minimal_size(value: int) -> int:
    if value < 24:
        return 0
    if value < 0x100:
        return 1
    if value < 0x10000:
        return 2
    if value < 0x100000000:
        return 3
    return 4


@dataclass(frozen=True)
class RawHeader:
    major: int
    arg: RawUint

    def __post_init__(self):
        if not 0 <= self.major <= 7:
            raise ValueError("major type must be in 0..7")
        if self.major == SIMPLE:
            v = self.arg.value
            if self.arg.size == 0 and v > 23 or self.arg.size > 1:
                raise ValueError("simple values use inline or one-byte arguments")
            if self.arg.size == 1 and v < 32:
                raise ValueError("simple values 24..31 are not encodable")


def header_size(h: RawHeader) -> int:
    return 1 + _WIDTH[h.arg.size]


def encode_header(h: RawHeader, out, pos: int = 0) -> int:
    """Write ``h`` into ``out`` at ``pos`` and return the number of bytes written."""
    n = header_size(h)
    if len(out) - pos < n:
        raise BufferTooSmall(f"need {n} bytes", pos)
    size = h.arg.size
    if size == 0:
        out[pos] = (h.major << 5) | h.arg.value
    else:
        out[pos] = (h.major << 5) | _INFO[size]
        out[pos + 1 : pos + n] = h.arg.value.to_bytes(_WIDTH[size], "big")
    return n


def header_bytes(major: int, value: int, size: Optional[int] = None) -> bytes:
    """Encoded header; minimal width unless ``size`` is given."""
    if size is None:
        size = minimal_size(value)
    if size == 0:
        return bytes(((major << 5) | value,))
    return bytes(((major << 5) | _INFO[size],)) + value.to_bytes(_WIDTH[size], "big")


def parse_header(buf, pos: int = 0, end: Optional[int] = None) -> Tuple[RawHeader, int]:
    if end is None:
        end = len(buf)
    if pos >= end:
        raise Truncated("empty input", pos)
    b = buf[pos]
    major = b >> 5
    info = b & 0x1F
    if info < 24:
        return RawHeader(major, RawUint(info, 0)), 1
    if info == 31:
        raise IndefiniteLength("indefinite-length items are not supported", pos)
    if info > 27:
        raise ReservedInfo(f"reserved additional info {info}", pos)
    size = info - 23
    w = _WIDTH[size]
    if end - pos - 1 < w:
        raise Truncated(f"header declares {w} trailing bytes", pos)
    if major == SIMPLE:
        if size != 1:
            raise ReservedInfo("floating point is not supported", pos)
        if buf[pos + 1] < 32:
            raise InvalidSimple(f"simple value {buf[pos + 1]} in two-byte form", pos)
    value = int.from_bytes(buf[pos + 1 : pos + 1 + w], "big")
    return RawHeader(major, RawUint(value, size)), 1 + w


def count_payload(h: RawHeader) -> int:
    """Number of child items that follow a header."""
    if h.major == ARRAY:
        return h.arg.value
    if h.major == MAP:
        return 2 * h.arg.value
    if h.major == TAGGED:
        return 1
    return 0


# -- generic recursive formats -------------------------------------------------


@dataclass(frozen=True)
class RecFormat:
    """A format whose items are a header followed by a counted list of items.

    ``validate_header(buf, pos, end)`` returns the header size (at least one
    byte) or raises; ``count_payload(buf, pos, header_size)`` returns how many
    child items follow a validated header.
    """

    validate_header: Callable[..., int]
    count_payload: Callable[..., int]
    name: str = ""


def validate_recursive(fmt: RecFormat, buf, pos: int = 0, end: Optional[int] = None) -> int:
    """Size of the single valid item at ``pos``.

    One loop, one counter. The guards keep the counter below the number of
    unread bytes, which bounds every intermediate value by the input length.
    """
    if end is None:
        end = len(buf)
    expected = 1
    p = pos
    while expected > 0:
        expected -= 1
        hs = fmt.validate_header(buf, p, end)
        p += hs
        if expected > end - p:
            # each remaining item consumes at least one byte
            raise Truncated("input ends before all expected items", p)
        count = fmt.count_payload(buf, p - hs, hs)
        if count > end - p - expected:
            raise CountOverflow(f"declared {count} items exceed remaining input", p)
        expected += count
    return p - pos


def _check_utf8(buf, start, stop, at):
    try:
        _utf8_decode(buf[start:stop], "strict", True)
    except UnicodeDecodeError as exc:
        raise InvalidUtf8(str(exc), at) from None


def _cbor_validate_header(buf, pos, end):
    h, n = parse_header(buf, pos, end)
    if h.major == BYTES or h.major == TEXT:
        length = h.arg.value
        if length > end - pos - n:
            raise Truncated("string payload truncated", pos)
        if h.major == TEXT:
            _check_utf8(buf, pos + n, pos + n + length, pos)
        n += length
    return n


def _cbor_count_payload(buf, pos, hs):
    b = buf[pos]
    major = b >> 5
    if major < ARRAY or major == SIMPLE:
        return 0
    if major == TAGGED:
        return 1
    info = b & 0x1F
    if info < 24:
        v = info
    else:
        v = int.from_bytes(buf[pos + 1 : pos + 1 + _WIDTH[info - 23]], "big")
    return v if major == ARRAY else 2 * v


CBOR = RecFormat(_cbor_validate_header, _cbor_count_payload, "cbor")


def validate_raw(buf, pos: int = 0, end: Optional[int] = None) -> int:
    """Raw CBOR validator; the generic loop with the CBOR header step inlined.

    Returns the same sizes and raises the same errors as
    ``validate_recursive(CBOR, ...)``.
    """
    if end is None:
        end = len(buf)
    expected = 1
    p = pos
    frombytes = int.from_bytes
    leaf1 = _LEAF1
    while expected:
        expected -= 1
        if p >= end:
            raise Truncated("input ends before all expected items", p)
        b = buf[p]
        if leaf1[b]:
            # batch a run of one-byte leaves; the guard below is invariant
            # along such a run, so checking it once at the end suffices
            if expected:
                k = leaf_run(buf, p, min(end, p + expected + 1))
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
                    _check_utf8(buf, p, p + arg, p)
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
        elif major == 6:
            count = 1
        else:
            continue
        if count > end - p - expected:
            raise CountOverflow(f"declared {count} items exceed remaining input", p)
        expected += count
    return p - pos


def jump(buf, pos: int = 0, count: int = 1) -> int:
    """Size of the ``count`` consecutive items at ``pos``, known valid."""
    expected = count
    p = pos
    frombytes = int.from_bytes
    leaf1 = _LEAF1
    while expected:
        expected -= 1
        b = buf[p]
        if leaf1[b]:
            if expected:
                k = leaf_run(buf, p, p + expected + 1)
                expected -= k - 1
                p += k
            else:
                p += 1
            continue
        info = b & 0x1F
        major = b >> 5
        if info < 24:
            arg = info
            p += 1
        else:
            w = _WIDTH[info - 23]
            arg = frombytes(buf[p + 1 : p + 1 + w], "big")
            p += 1 + w
        if major < 4:
            if major > 1:
                p += arg
        elif major == 4:
            expected += arg
        elif major == 5:
            expected += 2 * arg
        elif major == 6:
            expected += 1
    return p - pos


# -- shallow views ---------------------------------------------------------------


def _read_arg(buf, pos):
    """(argument, size class, header length) at ``pos``; input known valid."""
    info = buf[pos] & 0x1F
    if info < 24:
        return info, 0, 1
    size = info - 23
    w = _WIDTH[size]
    return int.from_bytes(buf[pos + 1 : pos + 1 + w], "big"), size, 1 + w


class ShallowView:
    """Head of one item; children and string payloads stay in ``buf``.

    ``arg`` is the header argument: the magnitude for integers, the byte
    length for strings, the entry count for arrays and maps, the tag number,
    or the simple value.
    """

    __slots__ = ("kind", "arg", "size_class", "buf", "start", "body")

    def __init__(self, kind, arg, size_class, buf, start, body):
        self.kind = kind
        self.arg = arg
        self.size_class = size_class
        self.buf = buf
        self.start = start
        self.body = body

    def __repr__(self):
        return f"ShallowView({self.kind.name}, arg={self.arg}, at={self.start})"

    @property
    def value(self) -> int:
        if self.kind == Kind.UINT:
            return self.arg
        if self.kind == Kind.NINT:
            return -1 - self.arg
        raise TypeError(f"{self.kind.name} item has no integer value")

    @property
    def payload(self) -> memoryview:
        if self.kind not in (Kind.BYTES, Kind.TEXT):
            raise TypeError(f"{self.kind.name} item has no payload")
        return memoryview(self.buf)[self.body : self.body + self.arg]

    @property
    def text(self) -> str:
        return str(self.payload, "utf-8")

    @property
    def end(self) -> int:
        if self.kind < Kind.ARRAY:
            return self.body + (self.arg if self.kind > Kind.NINT else 0)
        if self.kind == Kind.SIMPLE:
            return self.body
        return self.start + jump(self.buf, self.start)

    @property
    def size(self) -> int:
        return self.end - self.start

    @property
    def children(self) -> Tuple[int, int]:
        """Byte range holding the entries of an array/map or a tag payload."""
        if self.kind not in (Kind.ARRAY, Kind.MAP, Kind.TAGGED):
            raise TypeError(f"{self.kind.name} item has no children")
        return self.body, self.end

    def raw_bytes(self) -> memoryview:
        return memoryview(self.buf)[self.start : self.end]

    def items(self) -> "ArrayIterator":
        if self.kind != Kind.ARRAY:
            raise TypeError("not an array")
        return ArrayIterator(self.buf, self.body, self.arg)

    def entries(self) -> "MapIterator":
        if self.kind != Kind.MAP:
            raise TypeError("not a map")
        return MapIterator(self.buf, self.body, self.arg)

    def tagged(self) -> "ShallowView":
        if self.kind != Kind.TAGGED:
            raise TypeError("not a tagged item")
        return read_shallow(self.buf, self.body)


_KINDS = tuple(Kind)


def read_shallow(buf, pos: int = 0) -> ShallowView:
    """Decode only the header of the (valid) item at ``pos``."""
    b = buf[pos]
    arg, size, n = _read_arg(buf, pos)
    return ShallowView(_KINDS[b >> 5], arg, size, buf, pos, pos + n)


class ArrayIterator:
    """Iterator over the remaining items of a validated array.

    The state is just ``(pos, remaining)``; :meth:`clone` copies it so
    callers can backtrack.
    """

    __slots__ = ("buf", "pos", "remaining")

    def __init__(self, buf, pos, remaining):
        self.buf = buf
        self.pos = pos
        self.remaining = remaining

    def __iter__(self):
        return self

    def __next__(self) -> ShallowView:
        if not self.remaining:
            raise StopIteration
        v = read_shallow(self.buf, self.pos)
        self.pos += jump(self.buf, self.pos)
        self.remaining -= 1
        return v

    def peek(self) -> Optional[ShallowView]:
        if not self.remaining:
            return None
        return read_shallow(self.buf, self.pos)

    def skip(self) -> None:
        self.pos += jump(self.buf, self.pos)
        self.remaining -= 1

    def clone(self) -> "ArrayIterator":
        return ArrayIterator(self.buf, self.pos, self.remaining)


class MapIterator:
    """Iterator over ``(key view, value view)`` pairs of a validated map."""

    __slots__ = ("buf", "pos", "remaining")

    def __init__(self, buf, pos, remaining):
        self.buf = buf
        self.pos = pos
        self.remaining = remaining

    def __iter__(self):
        return self

    def __next__(self) -> Tuple[ShallowView, ShallowView]:
        if not self.remaining:
            raise StopIteration
        buf = self.buf
        k = read_shallow(buf, self.pos)
        vpos = self.pos + jump(buf, self.pos)
        v = read_shallow(buf, vpos)
        self.pos = vpos + jump(buf, vpos)
        self.remaining -= 1
        return k, v

    def clone(self) -> "MapIterator":
        return MapIterator(self.buf, self.pos, self.remaining)


def iter_next(it):
    """Advance an array or map iterator; ``None`` once it is exhausted."""
    return next(it, None)


# -- raw data model --------------------------------------------------------------


@dataclass(frozen=True)
class RawInt:
    sign: int  # 0 for unsigned, 1 for negative (value -1 - arg)
    arg: RawUint

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError("sign bit must be 0 or 1")

    @property
    def value(self) -> int:
        return self.arg.value if self.sign == 0 else -1 - self.arg.value


@dataclass(frozen=True)
class RawSimple:
    value: int

    def __post_init__(self):
        if not (0 <= self.value <= 23 or 32 <= self.value <= 255):
            raise ValueError(f"simple value {self.value} out of range")


@dataclass(frozen=True)
class RawBytes:
    length: RawUint
    payload: bytes

    def __post_init__(self):
        if self.length.value != len(self.payload):
            raise ValueError("declared length differs from payload length")


@dataclass(frozen=True)
class RawText:
    length: RawUint
    payload: bytes

    def __post_init__(self):
        if self.length.value != len(self.payload):
            raise ValueError("declared length differs from payload length")
        self.payload.decode("utf-8")


@dataclass(frozen=True)
class RawArray:
    count: RawUint
    items: tuple

    def __post_init__(self):
        if self.count.value != len(self.items):
            raise ValueError("declared count differs from item count")


@dataclass(frozen=True)
class RawMap:
    count: RawUint
    entries: tuple

    def __post_init__(self):
        if self.count.value != len(self.entries):
            raise ValueError("declared count differs from entry count")


@dataclass(frozen=True)
class RawTagged:
    tag: RawUint
    payload: object


RawItem = Union[RawInt, RawSimple, RawBytes, RawText, RawArray, RawMap, RawTagged]


def raw_int(value: int, size: Optional[int] = None) -> RawInt:
    arg = value if value >= 0 else -1 - value
    u = RawUint(arg, minimal_size(arg) if size is None else size)
    return RawInt(0 if value >= 0 else 1, u)


def raw_bytes(data: bytes, size: Optional[int] = None) -> RawBytes:
    n = len(data)
    return RawBytes(RawUint(n, minimal_size(n) if size is None else size), bytes(data))


def raw_text(s: str, size: Optional[int] = None) -> RawText:
    data = s.encode("utf-8")
    n = len(data)
    return RawText(RawUint(n, minimal_size(n) if size is None else size), data)


def raw_array(items, size: Optional[int] = None) -> RawArray:
    items = tuple(items)
    n = len(items)
    return RawArray(RawUint(n, minimal_size(n) if size is None else size), items)


def raw_map(entries, size: Optional[int] = None) -> RawMap:
    entries = tuple((k, v) for k, v in entries)
    n = len(entries)
    return RawMap(RawUint(n, minimal_size(n) if size is None else size), entries)


def raw_tagged(tag: int, payload, size: Optional[int] = None) -> RawTagged:
    return RawTagged(RawUint(tag, minimal_size(tag) if size is None else size), payload)


def _head(x) -> Tuple[int, RawUint]:
    if isinstance(x, RawInt):
        return x.sign, x.arg
    if isinstance(x, RawBytes):
        return BYTES, x.length
    if isinstance(x, RawText):
        return TEXT, x.length
    if isinstance(x, RawArray):
        return ARRAY, x.count
    if isinstance(x, RawMap):
        return MAP, x.count
    if isinstance(x, RawTagged):
        return TAGGED, x.tag
    if isinstance(x, RawSimple):
        return SIMPLE, RawUint(x.value, 0 if x.value < 24 else 1)
    raise TypeError(f"not a raw CBOR item: {x!r}")


def _children(x):
    if isinstance(x, RawArray):
        return x.items
    if isinstance(x, RawMap):
        return [c for kv in x.entries for c in kv]
    if isinstance(x, RawTagged):
        return (x.payload,)
    return ()


def _walk(x):
    """Pre-order traversal with an explicit stack."""
    stack = [iter((x,))]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            continue
        yield nxt
        kids = _children(nxt)
        if kids:
            stack.append(iter(kids))


def size_raw(x, bound: int) -> int:
    """Serialized size of ``x``; raises :class:`TooLarge` once it passes ``bound``."""
    total = 0
    for node in _walk(x):
        _, arg = _head(node)
        total += 1 + _WIDTH[arg.size]
        if isinstance(node, (RawBytes, RawText)):
            total += len(node.payload)
        if total > bound:
            raise TooLarge(f"item needs more than {bound} bytes")
    return total


def encode_raw(x) -> bytes:
    out = bytearray()
    for node in _walk(x):
        major, arg = _head(node)
        out += header_bytes(major, arg.value, arg.size)
        if isinstance(node, (RawBytes, RawText)):
            out += node.payload
    return bytes(out)


def serialize_raw(x, out, pos: int = 0) -> int:
    """Write ``x`` at ``out[pos:]``; returns the size, or 0 if it does not fit."""
    try:
        n = size_raw(x, len(out) - pos)
    except TooLarge:
        return 0
    out[pos : pos + n] = encode_raw(x)
    return n


def parse_raw(buf, pos: int = 0, end: Optional[int] = None) -> Tuple[object, int]:
    """Validate and fully decode the item at ``pos`` into the raw model.

    Builds the tree with an explicit stack, so deep inputs do not recurse.
    """
    size = validate_raw(buf, pos, end)
    buf = bytes(buf[pos : pos + size])
    # frames: [header view, collected children, children still expected]
    stack = []
    p = 0
    result = None
    while True:
        v = read_shallow(buf, p)
        arg = RawUint(v.arg, v.size_class)
        k = v.kind
        if k <= Kind.NINT:
            node = RawInt(int(k), arg)
            p = v.body
        elif k == Kind.BYTES:
            node = RawBytes(arg, buf[v.body : v.body + v.arg])
            p = v.body + v.arg
        elif k == Kind.TEXT:
            node = RawText(arg, buf[v.body : v.body + v.arg])
            p = v.body + v.arg
        elif k == Kind.SIMPLE:
            node = RawSimple(v.arg)
            p = v.body
        else:
            want = v.arg if k == Kind.ARRAY else 2 * v.arg if k == Kind.MAP else 1
            p = v.body
            if want:
                stack.append([v, [], want])
                continue
            node = _build(v, arg, [])
        while True:
            if not stack:
                result = node
                break
            frame = stack[-1]
            frame[1].append(node)
            if len(frame[1]) < frame[2]:
                break
            stack.pop()
            fv = frame[0]
            node = _build(fv, RawUint(fv.arg, fv.size_class), frame[1])
        if result is not None:
            return result, size


def _build(v, arg, kids):
    if v.kind == Kind.ARRAY:
        return RawArray(arg, tuple(kids))
    if v.kind == Kind.MAP:
        return RawMap(arg, tuple(zip(kids[0::2], kids[1::2])))
    return RawTagged(arg, kids[0])
