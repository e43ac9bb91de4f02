"""Reference semantics for types, array groups and map groups.

This is the slow, obviously-correct layer that tests and the elaborator
compare against. Array groups follow PEG rules (greedy, no backtracking).
Map groups are nondeterministic: they return every way of splitting the
input map into consumed and remaining entries, or BOT when a cut fails.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import FrozenSet, Iterable, Optional, Tuple

from .. import det as D
from . import ast as A


class _Bot:
    __slots__ = ()

    def __repr__(self):
        return "BOT"

    def __bool__(self):
        raise TypeError("check for BOT explicitly")


BOT = _Bot()


# -- types ---------------------------------------------------------------------


def _utf8_len(x) -> int:
    return len(x.value.encode("utf-8")) if type(x) is D.Text else len(x.value)


def type_sem(t, x) -> bool:
    """Does the canonical item ``x`` belong to type ``t``?"""
    tx = type(x)
    if isinstance(t, A.Base):
        n = t.name
        if n == "any":
            return True
        if n == "uint":
            return tx is D.Int and x.value >= 0
        if n == "nint":
            return tx is D.Int and x.value < 0
        if n == "int":
            return tx is D.Int
        if n == "tstr":
            return tx is D.Text
        if n == "bstr":
            return tx is D.Bytes
        raise ValueError(f"unknown base type {n}")
    if isinstance(t, A.LiteralInt):
        return tx is D.Int and x.value == t.value
    if isinstance(t, A.LiteralText):
        return tx is D.Text and x.value == t.value
    if isinstance(t, A.LiteralSimple):
        return tx is D.Simple and x.value == t.value
    if isinstance(t, A.IntRange):
        return tx is D.Int and t.lo <= x.value <= t.hi
    if isinstance(t, A.SizeConstraint):
        want = D.Text if t.base == "tstr" else D.Bytes
        return tx is want and t.lo <= _utf8_len(x) <= t.hi
    if isinstance(t, A.Choice):
        return type_sem(t.left, x) or type_sem(t.right, x)
    if isinstance(t, A.ArrayOf):
        if tx is not D.Array:
            return False
        return ag_match(t.group, x.items, 0) == len(x.items)
    if isinstance(t, A.MapOf):
        if tx is not D.Map:
            return False
        out = map_group_sem(t.group, x.entries)
        return out is not BOT and any(not rem for _, rem in out)
    if isinstance(t, A.Tagged):
        return tx is D.Tagged and x.tag == t.tag and type_sem(t.type, x.item)
    if isinstance(t, A.Bottom):
        return False
    raise TypeError(f"not an inlined type: {t!r}")


# -- array groups (PEG) ------------------------------------------------------------------


def ag_match(a, items, i: int) -> Optional[int]:
    """Index after ``a`` matches ``items[i:]``, or None on failure."""
    if isinstance(a, A.Elem):
        if i < len(items) and type_sem(a.type, items[i]):
            return i + 1
        return None
    if isinstance(a, A.ConcatAG):
        j = ag_match(a.left, items, i)
        return None if j is None else ag_match(a.right, items, j)
    if isinstance(a, A.AltAG):
        j = ag_match(a.left, items, i)
        return j if j is not None else ag_match(a.right, items, i)
    if isinstance(a, A.OptAG):
        j = ag_match(a.group, items, i)
        return i if j is None else j
    if isinstance(a, A.StarAG):
        while True:
            j = ag_match(a.group, items, i)
            if j is None or j == i:
                return i
            i = j
    if isinstance(a, A.EmptyAG):
        return i
    raise TypeError(f"not an inlined array group: {a!r}")


def array_group_sem(a, items) -> Optional[Tuple[list, list]]:
    """(consumed, remaining) split of ``items``, or None when ``a`` fails."""
    items = list(items)
    j = ag_match(a, items, 0)
    if j is None:
        return None
    return items[:j], items[j:]


# -- map groups ---------------------------------------------------------------------------

Outcome = Tuple[FrozenSet, FrozenSet]


def _leftmost(g):
    while isinstance(g, A.ConcatMG):
        g = g.left
    return g


def committed(g, m) -> bool:
    """A group whose first entry is a cut entry with its key present in ``m``.

    Once such a key is found, the alternatives after ``g`` are not tried.
    """
    e = _leftmost(g)
    return isinstance(e, A.Entry) and e.cut and any(type_sem(e.key, k) for k, _ in m)


def _excluded(ex: A.ExclusionSet, k, v) -> bool:
    return any(type_sem(kt, k) and type_sem(vt, v) for kt, vt in ex.atoms)


def _mg(g, m: FrozenSet):
    if isinstance(g, A.Entry):
        out = set()
        for e in m:
            k, v = e
            if type_sem(g.key, k):
                if type_sem(g.value, v):
                    out.add((frozenset((e,)), m - {e}))
                elif g.cut:
                    return BOT
        return out
    if isinstance(g, A.Table):
        taken = frozenset(
            e for e in m
            if type_sem(g.key, e[0]) and type_sem(g.value, e[1]) and not _excluded(g.excluded, *e)
        )
        return {(taken, m - taken)}
    if isinstance(g, A.EmptyMG):
        return {(frozenset(), m)}
    if isinstance(g, A.AltMG):
        r1 = _mg(g.left, m)
        if r1 is BOT:
            return BOT
        if r1:
            return r1
        if committed(g.left, m):
            return set()
        return _mg(g.right, m)
    if isinstance(g, A.OptMG):
        r = _mg(g.group, m)
        if r is BOT:
            return BOT
        return r if r else {(frozenset(), m)}
    if isinstance(g, A.ConcatMG):
        r1 = _mg(g.left, m)
        if r1 is BOT:
            return BOT
        out = set()
        for c1, rem1 in r1:
            r2 = _mg(g.right, rem1)
            if r2 is BOT:
                return BOT
            for c2, rem2 in r2:
                out.add((c1 | c2, rem2))
        return out
    if isinstance(g, A.StarMG):
        done = set()
        seen = set()
        frontier = [(frozenset(), m)]
        while frontier:
            c, rem = frontier.pop()
            if (c, rem) in seen:
                continue
            seen.add((c, rem))
            r = _mg(g.group, rem)
            if r is BOT:
                return BOT
            progress = [(c | c2, rem2) for c2, rem2 in r if c2]
            if progress:
                frontier.extend(progress)
            else:
                done.add((c, rem))
        return done
    raise TypeError(f"not an inlined map group: {g!r}")


def map_group_sem(g, entries: Iterable):
    """BOT, or the set of (consumed, remaining) entry partitions."""
    return _mg(g, frozenset(tuple(e) for e in entries))


def map_sem_matches(g, entries) -> bool:
    out = map_group_sem(g, entries)
    return out is not BOT and any(not rem for _, rem in out)


# -- deterministic subset ----------------------------------------------------------------------


def is_det_form(g) -> bool:
    if isinstance(g, A.Entry):
        return A.is_literal(g.key)
    if isinstance(g, A.StarMG):
        return isinstance(g.group, A.Entry) and not g.group.cut
    if isinstance(g, (A.AltMG, A.ConcatMG)):
        return is_det_form(g.left) and is_det_form(g.right)
    if isinstance(g, A.OptMG):
        return is_det_form(g.group)
    return isinstance(g, (A.EmptyMG, A.Table))


def small_maps(universe, max_entries: int = 3):
    """Every map with at most ``max_entries`` entries over ``universe``.

    Keys are distinct universe items; values range over the whole universe.
    """
    universe = list(universe)
    for n in range(max_entries + 1):
        for keys in combinations(universe, n):
            for vals in product(universe, repeat=n):
                yield D.mk_map(list(zip(keys, vals)))


def det_oracle(g, universe, max_entries: int = 3) -> bool:
    """Brute force: on every small map, ``g`` yields BOT or one outcome."""
    for m in small_maps(universe, max_entries):
        r = map_group_sem(g, m.entries)
        if r is not BOT and len(r) > 1:
            return False
    return True
