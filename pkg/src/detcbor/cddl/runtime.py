"""Validation, zero-copy parsing and serialization against elaborated schemas.

All three walk the elaborated type directly over the bytes. Map groups are
evaluated by counting: in an elaborated group every sub-group sees the same
relevant entries whether it runs on the whole map or on what earlier
sub-groups left, so a map matches exactly when the counts add up to its
entry count.
"""

from __future__ import annotations

import re
from bisect import bisect_left
from typing import Optional

from .. import det as D
from .. import raw as R
from ..errors import CutViolation, SchemaMismatch, SigmaError, UnconsumedEntries
from . import ast as A
from .elab import ElabSchema
from .values import (
    VBytes,
    VItem,
    VLeft,
    VList,
    VNInt,
    VNone,
    VPair,
    VRight,
    VSome,
    VTable,
    VText,
    VUInt,
    VUnit,
)

_UINT_RUN = re.compile(rb"[\x00-\x17]+")
_MAJOR = {"uint": 0, "nint": 1, "bstr": 2, "tstr": 3}

_lit_cache: dict = {}


def literal_bytes(t) -> bytes:
    """Deterministic encoding of a literal type's only value."""
    b = _lit_cache.get(t)
    if b is None:
        if isinstance(t, A.LiteralInt):
            b = D.encode_det(D.Int(t.value))
        elif isinstance(t, A.LiteralText):
            b = D.encode_det(D.Text(t.value))
        else:
            b = D.encode_det(D.Simple(t.value))
        _lit_cache[t] = b
    return b


def _schema_type(schema):
    return schema.type if isinstance(schema, ElabSchema) else schema


def _single_uint_elem(g) -> bool:
    return isinstance(g, A.Elem) and g.type == A.Base("uint")


class _Cut(Exception):
    pass


class _Reader:
    """Schema matching and value construction over one validated buffer."""

    def __init__(self, buf):
        self.buf = buf
        self.path = []
        self.cut_at = None
        self.unconsumed_at = None
        self.mismatch_at = None

    # -- failure bookkeeping ---------------------------------------------------------

    def _render(self, path=None):
        from ..diag import diag

        out = []
        for kind, x in self.path if path is None else path:
            out.append(f"[{x}]" if kind == "i" else "{" + diag(self.buf, x) + "}")
        return tuple(out)

    def _miss(self, what):
        if self.mismatch_at is None or len(self.path) >= len(self.mismatch_at[0]):
            self.mismatch_at = (self._render(), what)

    def raise_failure(self):
        if self.cut_at is not None:
            raise CutViolation(f"cut entry has a value of the wrong type at {'/'.join(self.cut_at)}",
                               self.cut_at)
        if self.unconsumed_at is not None:
            raise UnconsumedEntries(f"map has entries the schema does not describe at "
                                    f"{'/'.join(self.unconsumed_at) or '$'}", self.unconsumed_at)
        path, what = self.mismatch_at or ((), "item")
        raise SchemaMismatch(f"expected {what} at {'/'.join(path) or '$'}", path)

    # -- matching: return the end offset of a match, or -1 ----------------------------

    def match(self, t, p: int) -> int:
        buf = self.buf
        b = buf[p]
        major = b >> 5
        if isinstance(t, A.Base):
            n = t.name
            if n == "any":
                return p + R.jump(buf, p)
            if n == "int":
                ok = major < 2
            else:
                ok = major == _MAJOR[n]
            if not ok:
                self._miss(n)
                return -1
            arg, _, hl = R._read_arg(buf, p)
            return p + hl + (arg if major > 1 else 0)
        if isinstance(t, (A.LiteralInt, A.LiteralText, A.LiteralSimple)):
            enc = literal_bytes(t)
            e = p + len(enc)
            if buf[p:e] == enc:
                return e
            self._miss(A.show_type(t))
            return -1
        if isinstance(t, A.IntRange):
            if major < 2:
                arg, _, hl = R._read_arg(buf, p)
                v = arg if major == 0 else -1 - arg
                if t.lo <= v <= t.hi:
                    return p + hl
            self._miss(A.show_type(t))
            return -1
        if isinstance(t, A.SizeConstraint):
            if major == _MAJOR[t.base]:
                arg, _, hl = R._read_arg(buf, p)
                if t.lo <= arg <= t.hi:
                    return p + hl + arg
            self._miss(A.show_type(t))
            return -1
        if isinstance(t, A.Choice):
            e = self.match(t.left, p)
            return e if e >= 0 else self.match(t.right, p)
        if isinstance(t, A.ArrayOf):
            if major != 4:
                self._miss("array")
                return -1
            arg, _, hl = R._read_arg(buf, p)
            st = self.run_ag(t.group, p + hl, arg, 0)
            if st is None:
                return -1
            if st[1]:
                self.path.append(("i", arg - st[1]))
                self._miss("end of array")
                self.path.pop()
                return -1
            return st[0]
        if isinstance(t, A.MapOf):
            if major != 5:
                self._miss("map")
                return -1
            arg, _, hl = R._read_arg(buf, p)
            ents = self.entries(p + hl, arg)
            try:
                got = self.mg_count(t.group, ents)
            except _Cut:
                return -1
            if got is None:
                return -1
            if got != arg:
                if self.unconsumed_at is None:
                    self.unconsumed_at = self._render()
                return -1
            return ents[-1][2] if ents else p + hl
        if isinstance(t, A.Tagged):
            if major == 6:
                arg, _, hl = R._read_arg(buf, p)
                if arg == t.tag:
                    return self.match(t.type, p + hl)
            self._miss(f"tag {t.tag}")
            return -1
        if isinstance(t, A.Bottom):
            self._miss("nothing")
            return -1
        raise TypeError(f"not an elaborated type: {t!r}")

    def run_ag(self, g, pos: int, rem: int, idx: int):
        """PEG match of an array group on ``rem`` items at ``pos``.

        Returns the state ``(pos, rem)`` after the group, or None. ``idx`` is
        only used for error paths.
        """
        if isinstance(g, A.Elem):
            if not rem:
                self.path.append(("i", idx))
                self._miss(A.show_type(g.type))
                self.path.pop()
                return None
            self.path.append(("i", idx))
            e = self.match(g.type, pos)
            self.path.pop()
            return None if e < 0 else (e, rem - 1)
        if isinstance(g, A.ConcatAG):
            st = self.run_ag(g.left, pos, rem, idx)
            if st is None:
                return None
            return self.run_ag(g.right, st[0], st[1], idx + rem - st[1])
        if isinstance(g, A.AltAG):
            st = self.run_ag(g.left, pos, rem, idx)
            return st if st is not None else self.run_ag(g.right, pos, rem, idx)
        if isinstance(g, A.OptAG):
            st = self.run_ag(g.group, pos, rem, idx)
            return (pos, rem) if st is None else st
        if isinstance(g, A.StarAG):
            body = g.group
            if _single_uint_elem(body):
                return self._uint_star(pos, rem)
            while True:
                st = self.run_ag(body, pos, rem, idx)
                if st is None or st[0] == pos:
                    return pos, rem
                idx += rem - st[1]
                pos, rem = st
        if isinstance(g, A.EmptyAG):
            return pos, rem
        raise TypeError(f"not an elaborated array group: {g!r}")

    def _uint_star(self, pos, rem):
        buf = self.buf
        while rem:
            m = _UINT_RUN.match(buf, pos, pos + rem)
            if m:
                k = m.end() - pos
                pos += k
                rem -= k
                if not rem:
                    break
            b = buf[pos]
            if b >> 5 or b & 0x1F < 24:
                break
            pos += 1 + R._WIDTH[(b & 0x1F) - 23]
            rem -= 1
        return pos, rem

    # -- maps --------------------------------------------------------------------------

    def entries(self, body: int, n: int):
        """(key pos, value pos, end) for each entry of a validated map."""
        buf = self.buf
        out = []
        p = body
        for _ in range(n):
            v = p + R.jump(buf, p)
            e = v + R.jump(buf, v)
            out.append((p, v, e))
            p = e
        return out

    def find(self, ents, key: bytes) -> Optional[tuple]:
        buf = self.buf
        i = bisect_left(ents, key, key=lambda x: bytes(buf[x[0] : x[1]]))
        if i < len(ents) and buf[ents[i][0] : ents[i][1]] == key:
            return ents[i]
        return None

    def excluded(self, ex, kp, vp) -> bool:
        for kt, vt in ex.atoms:
            if self._quiet_match(kt, kp) >= 0 and self._quiet_match(vt, vp) >= 0:
                return True
        return False

    def _quiet_match(self, t, p):
        saved = (self.cut_at, self.unconsumed_at, self.mismatch_at)
        e = self.match(t, p)
        self.cut_at, self.unconsumed_at, self.mismatch_at = saved
        return e

    def committed(self, g, ents) -> bool:
        while isinstance(g, A.ConcatMG):
            g = g.left
        return isinstance(g, A.Entry) and g.cut and self.find(ents, literal_bytes(g.key)) is not None

    def mg_count(self, g, ents):
        """Entries consumed by ``g``, None when it fails; raises _Cut."""
        if isinstance(g, A.Entry):
            hit = self.find(ents, literal_bytes(g.key))
            if hit is None:
                self._miss(f"entry {A.show_type(g.key)}")
                return None
            self.path.append(("k", hit[0]))
            e = self.match(g.value, hit[1])
            if e < 0 and g.cut:
                if self.cut_at is None:
                    self.cut_at = self._render()
                self.path.pop()
                raise _Cut()
            self.path.pop()
            return None if e < 0 else 1
        if isinstance(g, A.Table):
            n = 0
            for kp, vp, _ in ents:
                if self._quiet_match(g.key, kp) >= 0 and self._quiet_match(g.value, vp) >= 0:
                    if g.excluded.empty or not self.excluded(g.excluded, kp, vp):
                        n += 1
            return n
        if isinstance(g, A.ConcatMG):
            a = self.mg_count(g.left, ents)
            if a is None:
                return None
            b = self.mg_count(g.right, ents)
            return None if b is None else a + b
        if isinstance(g, A.AltMG):
            a = self.mg_count(g.left, ents)
            if a is not None:
                return a
            if self.committed(g.left, ents):
                return None
            return self.mg_count(g.right, ents)
        if isinstance(g, A.OptMG):
            a = self.mg_count(g.group, ents)
            return 0 if a is None else a
        if isinstance(g, A.EmptyMG):
            return 0
        raise TypeError(f"not an elaborated map group: {g!r}")

    # -- value construction (input already matched) ---------------------------------

    def value(self, t, p: int):
        buf = self.buf
        if isinstance(t, A.Base):
            n = t.name
            if n == "any":
                return VItem(D.decode_view(buf, p))
            arg, _, hl = R._read_arg(buf, p)
            major = buf[p] >> 5
            if major == 0:
                return VUInt(arg)
            if major == 1:
                return VNInt(arg)
            view = memoryview(buf)[p + hl : p + hl + arg]
            return VText(view) if major == 3 else VBytes(view)
        if A.is_literal(t):
            return VUnit()
        if isinstance(t, A.IntRange):
            arg, _, _ = R._read_arg(buf, p)
            return VUInt(arg) if buf[p] >> 5 == 0 else VNInt(arg)
        if isinstance(t, A.SizeConstraint):
            arg, _, hl = R._read_arg(buf, p)
            view = memoryview(buf)[p + hl : p + hl + arg]
            return VText(view) if t.base == "tstr" else VBytes(view)
        if isinstance(t, A.Choice):
            if self._quiet_match(t.left, p) >= 0:
                return VLeft(self.value(t.left, p))
            return VRight(self.value(t.right, p))
        if isinstance(t, A.ArrayOf):
            arg, _, hl = R._read_arg(buf, p)
            return self.ag_value(t.group, p + hl, arg, True)[0]
        if isinstance(t, A.MapOf):
            arg, _, hl = R._read_arg(buf, p)
            return self.mg_value(t.group, self.entries(p + hl, arg))
        if isinstance(t, A.Tagged):
            _, _, hl = R._read_arg(buf, p)
            return self.value(t.type, p + hl)
        raise TypeError(f"not an elaborated type: {t!r}")

    def ag_value(self, g, pos, rem, tail):
        """(value, pos, rem); ``tail`` means nothing follows ``g`` in the array."""
        if isinstance(g, A.Elem):
            e = self._quiet_match(g.type, pos)
            return self.value(g.type, pos), e, rem - 1
        if isinstance(g, A.ConcatAG):
            a, pos, rem = self.ag_value(g.left, pos, rem, False)
            b, pos, rem = self.ag_value(g.right, pos, rem, tail)
            return VPair(a, b), pos, rem
        if isinstance(g, A.AltAG):
            if self._quiet_run(g.left, pos, rem) is not None:
                v, pos, rem = self.ag_value(g.left, pos, rem, tail)
                return VLeft(v), pos, rem
            v, pos, rem = self.ag_value(g.right, pos, rem, tail)
            return VRight(v), pos, rem
        if isinstance(g, A.OptAG):
            if self._quiet_run(g.group, pos, rem) is not None:
                v, pos, rem = self.ag_value(g.group, pos, rem, tail)
                return VSome(v), pos, rem
            return VNone(), pos, rem
        if isinstance(g, A.StarAG):
            body = g.group
            if tail and isinstance(body, A.Elem):
                # a validated array: a trailing star of single items takes the rest
                end = pos + R.jump(self.buf, pos, rem) if rem else pos
                return VList(ListSeed(self, body, pos, rem, rem, end)), end, 0
            p0, r0 = pos, rem
            reps = 0
            while True:
                st = self._quiet_run(body, pos, rem)
                if st is None or st[0] == pos:
                    break
                pos, rem = st
                reps += 1
            return VList(ListSeed(self, body, p0, reps, r0 - rem, pos)), pos, rem
        if isinstance(g, A.EmptyAG):
            return VUnit(), pos, rem
        raise TypeError(f"not an elaborated array group: {g!r}")

    def _quiet_run(self, g, pos, rem):
        saved = (self.cut_at, self.unconsumed_at, self.mismatch_at)
        st = self.run_ag(g, pos, rem, 0)
        self.cut_at, self.unconsumed_at, self.mismatch_at = saved
        return st

    def _quiet_count(self, g, ents):
        saved = (self.cut_at, self.unconsumed_at, self.mismatch_at)
        try:
            return self.mg_count(g, ents)
        except _Cut:
            return None
        finally:
            self.cut_at, self.unconsumed_at, self.mismatch_at = saved

    def mg_value(self, g, ents):
        if isinstance(g, A.Entry):
            hit = self.find(ents, literal_bytes(g.key))
            return VPair(VUnit(), self.value(g.value, hit[1]))
        if isinstance(g, A.Table):
            return VTable(TableSeed(self, g, ents))
        if isinstance(g, A.ConcatMG):
            return VPair(self.mg_value(g.left, ents), self.mg_value(g.right, ents))
        if isinstance(g, A.AltMG):
            if self._quiet_count(g.left, ents) is not None:
                return VLeft(self.mg_value(g.left, ents))
            return VRight(self.mg_value(g.right, ents))
        if isinstance(g, A.OptMG):
            if self._quiet_count(g.group, ents) is not None:
                return VSome(self.mg_value(g.group, ents))
            return VNone()
        if isinstance(g, A.EmptyMG):
            return VUnit()
        raise TypeError(f"not an elaborated map group: {g!r}")


class ListSeed:
    """Lazy list: ``reps`` matches of ``body`` starting at ``pos``.

    ``items`` is the number of array items spanned and ``end`` the offset
    just past them.
    """

    __slots__ = ("reader", "body", "pos", "reps", "items", "end")

    def __init__(self, reader, body, pos, reps, items, end):
        self.reader = reader
        self.body = body
        self.pos = pos
        self.reps = reps
        self.items = items
        self.end = end

    def __len__(self):
        return self.reps

    def __iter__(self):
        r = self.reader
        pos, rem = self.pos, self.items
        for _ in range(self.reps):
            v, pos, rem = r.ag_value(self.body, pos, rem, False)
            yield v

    def raw(self) -> memoryview:
        return memoryview(self.reader.buf)[self.pos : self.end]

    def uint_chunks(self):
        """Values of a list of ``uint``, in order, as chunks.

        A chunk is either a bytes-like run whose bytes are the values of
        consecutive small integers, or a single int.
        """
        if not _single_uint_elem(self.body):
            raise TypeError("uint_chunks needs a list of uint")
        buf = self.reader.buf
        mv = memoryview(buf)
        pos, rem = self.pos, self.items
        while rem:
            m = _UINT_RUN.match(buf, pos, pos + rem)
            if m:
                k = m.end() - pos
                yield mv[pos : pos + k]
                pos += k
                rem -= k
                if not rem:
                    break
            arg, _, hl = R._read_arg(buf, pos)
            yield arg
            pos += hl
            rem -= 1


class TableSeed:
    """Lazy table: the entries of a map claimed by one table group."""

    __slots__ = ("reader", "table", "ents")

    def __init__(self, reader, table, ents):
        self.reader = reader
        self.table = table
        self.ents = ents

    @property
    def table_key(self):
        return self.table.key

    def positions(self):
        r = self.reader
        g = self.table
        for kp, vp, e in self.ents:
            if r._quiet_match(g.key, kp) >= 0 and r._quiet_match(g.value, vp) >= 0:
                if g.excluded.empty or not r.excluded(g.excluded, kp, vp):
                    yield kp, vp, e

    def __iter__(self):
        r = self.reader
        g = self.table
        for kp, vp, _ in self.positions():
            yield r.value(g.key, kp), r.value(g.value, vp)


# -- public entry points ------------------------------------------------------------------


def validate(schema, buf, pos: int = 0) -> int:
    """Size of the deterministic item at ``pos`` if it matches the schema.

    Raises a CborError for malformed or non-deterministic bytes and a
    ValidationError when the item does not match.
    """
    size = D.det_check(buf, pos)
    r = _Reader(buf)
    if r.match(_schema_type(schema), pos) < 0:
        r.raise_failure()
    return size


def parse(schema, buf, pos: int = 0):
    """Validate, then return ``(typed value, rest of the buffer)``.

    Payloads, lists and tables in the value refer to ``buf``.
    """
    size = validate(schema, buf, pos)
    r = _Reader(buf)
    v = r.value(_schema_type(schema), pos)
    return v, memoryview(buf)[pos + size :]


def iterate(lst):
    """Iterate the elements of a list value (seed or owned)."""
    return iter(lst.items if isinstance(lst, VList) else lst)


# -- serialization --------------------------------------------------------------------------


class _Full(Exception):
    pass


class _Writer:
    def __init__(self, limit, hook):
        self.w = bytearray()
        self.limit = limit
        self.hook = hook
        self.path = []

    def fail(self, reason, msg):
        raise SigmaError(reason, f"{msg} at {'/'.join(self.path) or '$'}", self.path)

    def put(self, data):
        self.w += data
        if self.limit is not None and len(self.w) > self.limit:
            raise _Full()

    def header(self, major, arg):
        self.put(R.header_bytes(major, arg))

    def _expect(self, v, *types):
        if not isinstance(v, types):
            want = " or ".join(c.__name__ for c in types)
            self.fail("ShapeMismatch", f"expected {want}, got {type(v).__name__}")

    def _int(self, v, lo, hi):
        self._expect(v, VUInt, VNInt)
        n = v.value
        if isinstance(v, VUInt) and n < 0 or isinstance(v, VNInt) and v.magnitude < 0:
            self.fail("OutOfRange", f"{n} is not valid for {type(v).__name__}")
        if not lo <= n <= hi:
            self.fail("OutOfRange", f"{n} is outside {lo}..{hi}")
        if n >= 0:
            self.header(0, n)
        else:
            self.header(1, -1 - n)

    def _str(self, v, base, lo=0, hi=None):
        cls = VText if base == "tstr" else VBytes
        self._expect(v, cls)
        data = bytes(v.data)
        if cls is VText:
            try:
                data.decode("utf-8")
            except UnicodeDecodeError:
                self.fail("InvalidUtf8", "text payload is not UTF-8")
        if len(data) < lo or hi is not None and len(data) > hi:
            self.fail("OutOfRange", f"length {len(data)} outside {lo}..{hi}")
        self.header(_MAJOR[base], len(data))
        self.put(data)

    def type_(self, t, v):
        if isinstance(t, A.Base):
            n = t.name
            if n == "uint":
                return self._int(v, 0, R.MAX_U64)
            if n == "nint":
                return self._int(v, A.MIN_INT, -1)
            if n == "int":
                return self._int(v, A.MIN_INT, R.MAX_U64)
            if n in ("tstr", "bstr"):
                return self._str(v, n)
            self._expect(v, VItem)
            try:
                enc = D.encode_det(v.item)
            except (TypeError, ValueError, AttributeError) as e:
                self.fail("ShapeMismatch", f"not a canonical item: {e}")
            return self.put(enc)
        if A.is_literal(t):
            self._expect(v, VUnit)
            return self.put(literal_bytes(t))
        if isinstance(t, A.IntRange):
            return self._int(v, t.lo, t.hi)
        if isinstance(t, A.SizeConstraint):
            return self._str(v, t.base, t.lo, t.hi)
        if isinstance(t, A.Choice):
            self._expect(v, VLeft, VRight)
            return self.type_(t.left if isinstance(v, VLeft) else t.right, v.value)
        if isinstance(t, A.ArrayOf):
            self.header(4, self.count_ag(t.group, v))
            return self.ag(t.group, v, 0)
        if isinstance(t, A.MapOf):
            start = len(self.w)
            n = self.mg(t.group, v, start, 0)
            hdr = R.header_bytes(5, n)
            self.put(hdr)
            w = self.w
            w[start:] = hdr + w[start : len(w) - len(hdr)]
            return None
        if isinstance(t, A.Tagged):
            self.header(6, t.tag)
            return self.type_(t.type, v)
        self.fail("ShapeMismatch", "type has no values")

    # -- arrays --

    def count_ag(self, g, v) -> int:
        if isinstance(g, A.Elem):
            return 1
        if isinstance(g, A.ConcatAG):
            self._expect(v, VPair)
            return self.count_ag(g.left, v.first) + self.count_ag(g.right, v.second)
        if isinstance(g, A.AltAG):
            self._expect(v, VLeft, VRight)
            return self.count_ag(g.left if isinstance(v, VLeft) else g.right, v.value)
        if isinstance(g, A.OptAG):
            self._expect(v, VSome, VNone)
            return self.count_ag(g.group, v.value) if isinstance(v, VSome) else 0
        if isinstance(g, A.StarAG):
            self._expect(v, VList)
            if self._same_seed(v, g.group):
                return v.items.items
            if isinstance(g.group, A.Elem):
                return len(v)
            return sum(self.count_ag(g.group, x) for x in v)
        if isinstance(g, A.EmptyAG):
            self._expect(v, VUnit)
            return 0
        raise TypeError(f"not an elaborated array group: {g!r}")

    @staticmethod
    def _same_seed(v, body) -> bool:
        return v.is_seed and (v.items.body is body or v.items.body == body)

    def ag(self, g, v, idx):
        if isinstance(g, A.Elem):
            self.path.append(f"[{idx}]")
            self.type_(g.type, v)
            self.path.pop()
            return idx + 1
        if isinstance(g, A.ConcatAG):
            idx = self.ag(g.left, v.first, idx)
            return self.ag(g.right, v.second, idx)
        if isinstance(g, A.AltAG):
            return self.ag(g.left if isinstance(v, VLeft) else g.right, v.value, idx)
        if isinstance(g, A.OptAG):
            return self.ag(g.group, v.value, idx) if isinstance(v, VSome) else idx
        if isinstance(g, A.StarAG):
            if self._same_seed(v, g.group):
                self.put(v.items.raw())
                return idx + v.items.items
            for x in v:
                idx = self.ag(g.group, x, idx)
            return idx
        return idx

    # -- maps --

    def insert(self, start, entry, key_end, count):
        """Move the entry at ``entry`` into key order within ``[start, entry)``."""
        w = self.w
        key = bytes(w[entry:key_end])
        q = start
        while q < entry:
            k_end = q + R.jump(w, q)
            c = D._compare_ranges(w, q, k_end, entry, key_end)
            if c == 0:
                self.fail("DuplicateTableKey", f"duplicate map key {key.hex()}")
            if c > 0:
                break
            q = k_end + R.jump(w, k_end)
        if q < entry:
            w[q:] = w[entry:] + w[q:entry]
        if self.hook is not None:
            self.hook(w, start, len(w), count + 1)
        return count + 1

    def mg(self, g, v, start, count):
        if isinstance(g, A.Entry):
            self._expect(v, VPair)
            self._expect(v.first, VUnit)
            e = len(self.w)
            self.put(literal_bytes(g.key))
            k = len(self.w)
            self.path.append("{" + A.show_type(g.key) + "}")
            self.type_(g.value, v.second)
            self.path.pop()
            return self.insert(start, e, k, count)
        if isinstance(g, A.Table):
            self._expect(v, VTable)
            if v.is_seed and (v.pairs.table is g or v.pairs.table == g):
                buf = v.pairs.reader.buf
                for kp, vp, end in v.pairs.positions():
                    e = len(self.w)
                    self.put(buf[kp:end])
                    count = self.insert(start, e, e + vp - kp, count)
                return count
            for i, pair in enumerate(v):
                self.path.append(f"{{#{i}}}")
                if not (isinstance(pair, tuple) and len(pair) == 2):
                    self.fail("ShapeMismatch", "table entries are key/value pairs")
                e = len(self.w)
                self.type_(g.key, pair[0])
                k = len(self.w)
                self.type_(g.value, pair[1])
                if not g.excluded.empty and _Reader(self.w).excluded(g.excluded, e, k):
                    self.fail("ExcludedKey", "table entry is claimed by another part of the map")
                self.path.pop()
                count = self.insert(start, e, k, count)
            return count
        if isinstance(g, A.ConcatMG):
            self._expect(v, VPair)
            count = self.mg(g.left, v.first, start, count)
            return self.mg(g.right, v.second, start, count)
        if isinstance(g, A.AltMG):
            self._expect(v, VLeft, VRight)
            return self.mg(g.left if isinstance(v, VLeft) else g.right, v.value, start, count)
        if isinstance(g, A.OptMG):
            self._expect(v, VSome, VNone)
            return self.mg(g.group, v.value, start, count) if isinstance(v, VSome) else count
        if isinstance(g, A.EmptyMG):
            self._expect(v, VUnit)
            return count
        raise TypeError(f"not an elaborated map group: {g!r}")


def serialize(schema, v, out=None, pos: int = 0, hook=None):
    """Encode a typed value.

    With ``out`` given, write into it at ``pos`` and return the size, or 0
    when it does not fit. Without ``out``, return the encoding as bytes.
    Values the schema cannot represent raise SigmaError. ``hook``, if
    given, is called as ``hook(buffer, map_start, end, entries)`` after each
    map entry is placed.
    """
    limit = None if out is None else len(out) - pos
    wr = _Writer(limit, hook)
    try:
        wr.type_(_schema_type(schema), v)
    except _Full:
        return 0
    if out is None:
        return bytes(wr.w)
    n = len(wr.w)
    out[pos : pos + n] = wr.w
    return n


def sigma_check(schema, v) -> Optional[str]:
    """None when ``v`` is representable under the schema, else the reason."""
    try:
        serialize(schema, v)
    except SigmaError as e:
        return e.reason
    return None
