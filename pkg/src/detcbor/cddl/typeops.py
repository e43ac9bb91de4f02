"""Sound, incomplete reasoning about CDDL types.

``check_disjoint`` may say "maybe overlapping" for types that are in fact
disjoint, ``is_subtype`` may say False for real subtypes, and
``type_intersect_under`` may return a smaller type than the true
intersection. None of them ever errs in the other direction.
"""

from __future__ import annotations

from . import ast as A

DISJOINT = "Disjoint"
MAYBE = "MaybeOverlapping"

LEN_INF = 1 << 64
UINT_IV = (0, A.MAX_U64)
NINT_IV = (A.MIN_INT, -1)
INT_IV = (A.MIN_INT, A.MAX_U64)


def _cls(t) -> str:
    if isinstance(t, A.Base):
        return {"any": "any", "int": "int", "uint": "int", "nint": "int",
                "tstr": "text", "bstr": "bytes"}[t.name]
    if isinstance(t, (A.LiteralInt, A.IntRange)):
        return "int"
    if isinstance(t, A.LiteralText):
        return "text"
    if isinstance(t, A.SizeConstraint):
        return "text" if t.base == "tstr" else "bytes"
    if isinstance(t, A.LiteralSimple):
        return "simple"
    if isinstance(t, A.ArrayOf):
        return "array"
    if isinstance(t, A.MapOf):
        return "map"
    if isinstance(t, A.Tagged):
        return "tag"
    if isinstance(t, A.Bottom):
        return "bottom"
    raise TypeError(f"not an inlined type atom: {t!r}")


def _int_iv(t):
    if isinstance(t, A.Base):
        return {"uint": UINT_IV, "nint": NINT_IV, "int": INT_IV}[t.name]
    if isinstance(t, A.LiteralInt):
        return (t.value, t.value)
    return (t.lo, t.hi)


def _len_iv(t):
    """Byte-length interval of a non-literal string type."""
    if isinstance(t, A.Base):
        return (0, LEN_INF)
    return (t.lo, t.hi)


def _int_type(lo, hi):
    if lo > hi:
        return A.Bottom()
    if (lo, hi) == UINT_IV:
        return A.Base("uint")
    if (lo, hi) == NINT_IV:
        return A.Base("nint")
    if (lo, hi) == INT_IV:
        return A.Base("int")
    if lo == hi:
        return A.LiteralInt(lo)
    return A.IntRange(lo, hi)


def _str_type(base, lo, hi):
    if lo > hi:
        return A.Bottom()
    if lo == 0 and hi >= LEN_INF:
        return A.Base(base)
    return A.SizeConstraint(base, lo, min(hi, LEN_INF))


def _overlap(a, b) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def _utf8_len(s: str) -> int:
    return len(s.encode("utf-8"))


# -- disjointness ----------------------------------------------------------------


def _atom_disjoint(a, b) -> bool:
    ca, cb = _cls(a), _cls(b)
    if ca == "bottom" or cb == "bottom":
        return True
    if ca == "any" or cb == "any":
        return False
    if ca != cb:
        return True
    if ca == "int":
        return not _overlap(_int_iv(a), _int_iv(b))
    if ca == "text":
        la, lb = isinstance(a, A.LiteralText), isinstance(b, A.LiteralText)
        if la and lb:
            return a.value != b.value
        if la:
            n = _utf8_len(a.value)
            return not _overlap((n, n), _len_iv(b))
        if lb:
            n = _utf8_len(b.value)
            return not _overlap((n, n), _len_iv(a))
        return not _overlap(_len_iv(a), _len_iv(b))
    if ca == "bytes":
        return not _overlap(_len_iv(a), _len_iv(b))
    if ca == "simple":
        return a.value != b.value
    if ca == "tag":
        return a.tag != b.tag or check_disjoint(a.type, b.type) == DISJOINT
    if ca == "array":
        return arrays_disjoint(a.group, b.group)
    return False  # maps: no reasoning, assume overlap


def check_disjoint(t1, t2) -> str:
    for a in A.choices(t1):
        for b in A.choices(t2):
            if not _atom_disjoint(a, b):
                return MAYBE
    return DISJOINT


def types_disjoint(t1, t2) -> bool:
    return check_disjoint(t1, t2) == DISJOINT


def _fixed_elems(g):
    """Element types of a group that is a plain sequence of Elem, else None."""
    out = []
    stack = [g]
    while stack:
        x = stack.pop()
        if isinstance(x, A.ConcatAG):
            stack.append(x.right)
            stack.append(x.left)
        elif isinstance(x, A.Elem):
            out.append(x.type)
        elif isinstance(x, A.EmptyAG):
            pass
        else:
            return None
    return out


def ag_len_range(g):
    """Over-approximated (min, max) item count; max may be LEN_INF."""
    if isinstance(g, A.Elem):
        return (1, 1)
    if isinstance(g, A.EmptyAG):
        return (0, 0)
    if isinstance(g, A.ConcatAG):
        a, b = ag_len_range(g.left), ag_len_range(g.right)
        return (a[0] + b[0], min(LEN_INF, a[1] + b[1]))
    if isinstance(g, A.AltAG):
        a, b = ag_len_range(g.left), ag_len_range(g.right)
        return (min(a[0], b[0]), max(a[1], b[1]))
    if isinstance(g, A.OptAG):
        return (0, ag_len_range(g.group)[1])
    if isinstance(g, A.StarAG):
        inner = ag_len_range(g.group)
        return (0, LEN_INF if inner[1] else 0)
    raise TypeError(f"not an array group: {g!r}")


def arrays_disjoint(g1, g2) -> bool:
    if not _overlap(ag_len_range(g1), ag_len_range(g2)):
        return True
    f1, f2 = _fixed_elems(g1), _fixed_elems(g2)
    if f1 is not None and f2 is not None and len(f1) == len(f2):
        if any(types_disjoint(x, y) for x, y in zip(f1, f2)):
            return True
    if not ag_nullable(g1) and not ag_nullable(g2):
        if first_disjoint(ag_first(g1), ag_first(g2)):
            return True
    return False


# -- FIRST sets and nullability for array groups -----------------------------------------


def ag_nullable(g) -> bool:
    if isinstance(g, A.Elem):
        return False
    if isinstance(g, A.ConcatAG):
        return ag_nullable(g.left) and ag_nullable(g.right)
    if isinstance(g, A.AltAG):
        return ag_nullable(g.left) or ag_nullable(g.right)
    return True  # Opt, Star, Empty


def ag_first(g) -> list:
    """Types one of which the first consumed item must have."""
    if isinstance(g, A.Elem):
        return [g.type]
    if isinstance(g, A.ConcatAG):
        out = ag_first(g.left)
        if ag_nullable(g.left):
            out = out + ag_first(g.right)
        return out
    if isinstance(g, A.AltAG):
        return ag_first(g.left) + ag_first(g.right)
    if isinstance(g, (A.OptAG, A.StarAG)):
        return ag_first(g.group)
    return []


def first_disjoint(f1, f2) -> bool:
    return all(types_disjoint(a, b) for a in f1 for b in f2)


# -- subtyping -------------------------------------------------------------------------------


def _covered(iv, ivs) -> bool:
    lo, hi = iv
    for a, b in sorted(ivs):
        if a > lo:
            return False
        if b >= lo:
            lo = b + 1
            if lo > hi:
                return True
    return lo > hi


def _atom_subtype(a, bs) -> bool:
    ca = _cls(a)
    if ca == "bottom":
        return True
    if any(_cls(b) == "any" for b in bs):
        return True
    if ca == "any":
        return False
    same = [b for b in bs if _cls(b) == ca]
    if ca == "int":
        return _covered(_int_iv(a), [_int_iv(b) for b in same])
    if ca in ("text", "bytes"):
        if isinstance(a, A.LiteralText):
            n = _utf8_len(a.value)
            return any(
                (isinstance(b, A.LiteralText) and b.value == a.value)
                or (not isinstance(b, A.LiteralText) and _len_iv(b)[0] <= n <= _len_iv(b)[1])
                for b in same
            )
        ranges = [_len_iv(b) for b in same if not isinstance(b, A.LiteralText)]
        return _covered(_len_iv(a), ranges)
    if ca == "simple":
        return any(b.value == a.value for b in same)
    if ca == "tag":
        return any(b.tag == a.tag and is_subtype(a.type, b.type) for b in same)
    if ca == "array":
        return any(a == b or _array_subtype(a.group, b.group) for b in same)
    return any(a == b for b in same)


def _array_subtype(g1, g2) -> bool:
    f1, f2 = _fixed_elems(g1), _fixed_elems(g2)
    if f1 is not None and f2 is not None:
        return len(f1) == len(f2) and all(is_subtype(x, y) for x, y in zip(f1, f2))
    if isinstance(g2, A.StarAG) and isinstance(g2.group, A.Elem):
        # every item of every array matched by g1 has one of g1's element types
        elems = _all_elems(g1)
        return elems is not None and all(is_subtype(t, g2.group.type) for t in elems)
    return False


def _all_elems(g):
    if isinstance(g, A.Elem):
        return [g.type]
    if isinstance(g, A.EmptyAG):
        return []
    if isinstance(g, (A.ConcatAG, A.AltAG)):
        a, b = _all_elems(g.left), _all_elems(g.right)
        return None if a is None or b is None else a + b
    if isinstance(g, (A.OptAG, A.StarAG)):
        return _all_elems(g.group)
    return None


def is_subtype(t1, t2) -> bool:
    """True only if every item of ``t1`` belongs to ``t2``."""
    bs = A.choices(t2)
    return all(_atom_subtype(a, bs) for a in A.choices(t1))


# -- intersection --------------------------------------------------------------------------------


def _atom_intersect(a, b):
    ca, cb = _cls(a), _cls(b)
    if ca == "bottom" or cb == "bottom":
        return A.Bottom()
    if ca == "any":
        return b
    if cb == "any":
        return a
    if a == b:
        return a
    if ca != cb:
        return A.Bottom()
    if ca == "int":
        (lo1, hi1), (lo2, hi2) = _int_iv(a), _int_iv(b)
        return _int_type(max(lo1, lo2), min(hi1, hi2))
    if ca in ("text", "bytes"):
        if isinstance(a, A.LiteralText) or isinstance(b, A.LiteralText):
            lit, other = (a, b) if isinstance(a, A.LiteralText) else (b, a)
            return lit if _atom_subtype(lit, [other]) else A.Bottom()
        (lo1, hi1), (lo2, hi2) = _len_iv(a), _len_iv(b)
        base = "tstr" if ca == "text" else "bstr"
        return _str_type(base, max(lo1, lo2), min(hi1, hi2))
    if ca == "simple":
        return A.Bottom()  # distinct literals
    if ca == "tag":
        if a.tag != b.tag:
            return A.Bottom()
        inner = type_intersect_under(a.type, b.type)
        return A.Bottom() if isinstance(inner, A.Bottom) else A.Tagged(a.tag, inner)
    # arrays and maps: keep the smaller side when that is provable
    if is_subtype(a, b):
        return a
    if is_subtype(b, a):
        return b
    return A.Bottom()


def type_intersect_under(t1, t2):
    """A type contained in both ``t1`` and ``t2``."""
    out = []
    for a in A.choices(t1):
        for b in A.choices(t2):
            c = _atom_intersect(a, b)
            if not isinstance(c, A.Bottom) and c not in out:
                out.append(c)
    if not out:
        return A.Bottom()
    return A.choice_of(*out)


def is_bottom(t) -> bool:
    return all(isinstance(a, A.Bottom) for a in A.choices(t))
