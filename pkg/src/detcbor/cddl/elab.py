"""Elaboration: turn an inlined type into an unambiguous, checkable schema.

Map groups are first rewritten so that every star ranges over a single
entry, then restricted to a deterministic subset. Tables (starred entries)
are annotated with the key/value pairs that earlier entries already claim,
so that each part of a map group owns a disjoint set of entries. Finally,
type choices, array groups and map groups are checked for overlaps that
would make parsing ambiguous or the serializer non-injective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

from ..errors import (
    FootprintOverlap,
    GreedyStarOverlap,
    NonDeterministicMapGroup,
    NonDisjointAlternatives,
)
from . import ast as A
from . import typeops as T
from .sem import is_det_form

ANY = A.Base("any")


# -- binding shapes --------------------------------------------------------------


@dataclass(frozen=True)
class UnitShape:
    pass


@dataclass(frozen=True)
class UIntShape:
    pass


@dataclass(frozen=True)
class NIntShape:
    pass


@dataclass(frozen=True)
class IntShape:
    pass


@dataclass(frozen=True)
class TextShape:
    pass


@dataclass(frozen=True)
class BytesShape:
    pass


@dataclass(frozen=True)
class AnyShape:
    pass


@dataclass(frozen=True)
class EmptyShape:
    """Shape of a type with no values."""


@dataclass(frozen=True)
class SumShape:
    left: object
    right: object


@dataclass(frozen=True)
class PairShape:
    first: object
    second: object


@dataclass(frozen=True)
class ListShape:
    elem: object


@dataclass(frozen=True)
class TableShape:
    key: object
    value: object


@dataclass(frozen=True)
class OptionShape:
    inner: object


@dataclass
class ElabSchema:
    type: object  # elaborated root type
    shape: object
    source: object  # the inlined type before elaboration
    notes: List[str] = field(default_factory=list)


def _where(x) -> str:
    try:
        if isinstance(x, (A.Entry, A.Table, A.AltMG, A.ConcatMG, A.OptMG, A.StarMG, A.EmptyMG)):
            s = "{" + A.show_mg(x) + "}"
        elif isinstance(x, (A.Elem, A.AltAG, A.ConcatAG, A.OptAG, A.StarAG, A.EmptyAG)):
            s = "[" + A.show_ag(x) + "]"
        else:
            s = A.show_type(x)
    except TypeError:
        s = repr(x)
    return s if len(s) <= 100 else s[:97] + "..."


# -- map-group rewriting ----------------------------------------------------------


def _alts_mg(g):
    if isinstance(g, A.AltMG):
        return _alts_mg(g.left) + _alts_mg(g.right)
    return [g]


def rewrite_stars(g, notes=None):
    """Replace ``*(e1 // ... // en)`` over entries by ``*e1, ..., *en``."""
    if isinstance(g, A.StarMG):
        alts = _alts_mg(g.group)
        if len(alts) > 1 and all(isinstance(a, A.Entry) for a in alts):
            out = A.concat_mg(*[A.StarMG(a) for a in alts])
            if notes is not None:
                notes.append(f"rewrote {_where(g)} into {_where(out)}")
            return out
        return g
    if isinstance(g, (A.AltMG, A.ConcatMG)):
        return type(g)(rewrite_stars(g.left, notes), rewrite_stars(g.right, notes))
    if isinstance(g, A.OptMG):
        return A.OptMG(rewrite_stars(g.group, notes))
    return g


# -- exclusion sets ------------------------------------------------------------------


def _simplify(atoms):
    out = []
    for i, (k, v) in enumerate(atoms):
        if T.is_bottom(k) or T.is_bottom(v):
            continue
        subsumed = False
        for j, (k2, v2) in enumerate(atoms):
            if i == j:
                continue
            if T.is_subtype(k, k2) and T.is_subtype(v, v2):
                # keep the first of two mutually subsuming atoms
                if not (T.is_subtype(k2, k) and T.is_subtype(v2, v) and j > i):
                    subsumed = True
                    break
        if not subsumed and (k, v) not in out:
            out.append((k, v))
    return A.ExclusionSet(tuple(out))


def meet(t1: A.ExclusionSet, t2: A.ExclusionSet) -> A.ExclusionSet:
    """Under-approximation of the intersection of two exclusion unions."""
    atoms = []
    for k1, v1 in t1.atoms:
        for k2, v2 in t2.atoms:
            k = T.type_intersect_under(k1, k2)
            v = T.type_intersect_under(v1, v2)
            if not T.is_bottom(k) and not T.is_bottom(v):
                atoms.append((k, v))
    return _simplify(atoms)


def _leftmost(g):
    while isinstance(g, A.ConcatMG):
        g = g.left
    return g


def annotate(t: A.ExclusionSet, g):
    """Annotate tables with the entries claimed by groups to their left.

    ``t`` is the union of (key, value) patterns that cannot occur in the
    part of the map this group sees. Returns the pattern union that holds
    after the group and the annotated group.
    """
    if isinstance(g, A.Entry):
        return t.add(g.key, ANY), g
    if isinstance(g, A.OptMG):
        inner = g.group
        if isinstance(inner, A.Entry):
            # a present key is consumed, or with a cut the map fails;
            # without a cut only a matching value is sure to be consumed
            return t.add(inner.key, ANY if inner.cut else inner.value), g
        _, inner2 = annotate(t, inner)
        return t, A.OptMG(inner2)
    if isinstance(g, A.AltMG):
        lead = _leftmost(g.left)
        base = t
        if isinstance(lead, A.Entry) and lead.cut:
            # the right branch only runs when the cut key is absent
            base = t.add(lead.key, ANY)
        t1, left = annotate(base, g.left)
        t2, right = annotate(base, g.right)
        return meet(t1, t2), A.AltMG(left, right)
    if isinstance(g, A.ConcatMG):
        t1, left = annotate(t, g.left)
        t2, right = annotate(t1, g.right)
        return t2, A.ConcatMG(left, right)
    if isinstance(g, A.StarMG):
        e = g.group
        return t, A.Table(e.key, t, e.value)
    return t, g


# -- footprints -------------------------------------------------------------------------

_NOEX = A.ExclusionSet()


def mg_nullable(g) -> bool:
    if isinstance(g, A.Entry):
        return False
    if isinstance(g, A.ConcatMG):
        return mg_nullable(g.left) and mg_nullable(g.right)
    if isinstance(g, A.AltMG):
        return mg_nullable(g.left) or mg_nullable(g.right)
    return True


def prod(g) -> list:
    """Atoms (key, value, exclusions) covering every entry ``g`` can consume."""
    if isinstance(g, A.Entry):
        return [(g.key, g.value, _NOEX)]
    if isinstance(g, A.Table):
        return [(g.key, g.value, g.excluded)]
    if isinstance(g, (A.AltMG, A.ConcatMG)):
        return prod(g.left) + prod(g.right)
    if isinstance(g, (A.OptMG, A.StarMG)):
        return prod(g.group)
    return []


def sens(g) -> list:
    """Atoms covering every entry whose presence can change ``g``'s result."""
    if isinstance(g, A.Entry):
        return [(g.key, ANY if g.cut else g.value, _NOEX)]
    if isinstance(g, (A.AltMG, A.ConcatMG)):
        return sens(g.left) + sens(g.right)
    if isinstance(g, (A.OptMG, A.StarMG)):
        return sens(g.group)
    return prod(g)


def _atoms_disjoint(a, b) -> bool:
    k1, v1, ex1 = a
    k2, v2, ex2 = b
    ex = ex1.atoms + ex2.atoms
    for ka in A.choices(k1):
        for kb in A.choices(k2):
            if T.types_disjoint(ka, kb):
                continue
            for va in A.choices(v1):
                for vb in A.choices(v2):
                    if T.types_disjoint(va, vb):
                        continue
                    if any(
                        (T.is_subtype(ka, ek) or T.is_subtype(kb, ek))
                        and (T.is_subtype(va, ev) or T.is_subtype(vb, ev))
                        for ek, ev in ex
                    ):
                        continue
                    return False
    return True


def footprints_disjoint(f1, f2) -> bool:
    return all(_atoms_disjoint(a, b) for a in f1 for b in f2)


def check_footprints(g) -> None:
    """Concatenated and alternative groups must not compete for entries."""
    if isinstance(g, A.ConcatMG):
        check_footprints(g.left)
        check_footprints(g.right)
        if not footprints_disjoint(sens(g.left), sens(g.right)):
            raise FootprintOverlap(
                f"{_where(g.left)} and {_where(g.right)} may claim the same entries",
                where=_where(g))
    elif isinstance(g, A.AltMG):
        check_footprints(g.left)
        check_footprints(g.right)
        if mg_nullable(g.left):
            raise NonDisjointAlternatives(
                f"first alternative {_where(g.left)} can match without consuming anything",
                where=_where(g))
        lead = _leftmost(g.left)
        ok = False
        if isinstance(lead, A.Entry) and A.is_literal(lead.key):
            atom = (lead.key, ANY if lead.cut else lead.value, _NOEX)
            ok = footprints_disjoint([atom], prod(g.right))
        if not ok:
            ok = footprints_disjoint(sens(g.left), sens(g.right))
        if not ok:
            raise NonDisjointAlternatives(
                f"alternatives {_where(g.left)} and {_where(g.right)} may match the same map",
                where=_where(g))
    elif isinstance(g, A.OptMG):
        check_footprints(g.group)
        if mg_nullable(g.group):
            raise NonDisjointAlternatives(
                f"optional group {_where(g.group)} can match without consuming anything",
                where=_where(g))


# -- array groups --------------------------------------------------------------------------


def check_array_group(a, follow=()) -> None:
    """Greedy repetition, options and alternatives must not steal items.

    ``follow`` lists the types an item right after ``a`` may have.
    """
    follow = list(follow)
    if isinstance(a, A.ConcatAG):
        check_array_group(a.right, follow)
        nxt = T.ag_first(a.right) + (follow if T.ag_nullable(a.right) else [])
        check_array_group(a.left, nxt)
    elif isinstance(a, A.AltAG):
        if T.ag_nullable(a.left):
            raise NonDisjointAlternatives(
                f"first alternative {_where(a.left)} can match no items", where=_where(a))
        first = T.ag_first(a.left)
        if not T.first_disjoint(first, T.ag_first(a.right)):
            raise NonDisjointAlternatives(
                f"alternatives {_where(a.left)} and {_where(a.right)} may start alike",
                where=_where(a))
        if T.ag_nullable(a.right) and not T.first_disjoint(first, follow):
            raise NonDisjointAlternatives(
                f"alternative {_where(a.left)} may start like what follows", where=_where(a))
        check_array_group(a.left, follow)
        check_array_group(a.right, follow)
    elif isinstance(a, (A.OptAG, A.StarAG)):
        body = a.group
        kind = "optional" if isinstance(a, A.OptAG) else "repeated"
        if T.ag_nullable(body):
            raise GreedyStarOverlap(
                f"{kind} group {_where(body)} can match no items", where=_where(a))
        first = T.ag_first(body)
        if not T.first_disjoint(first, follow):
            raise GreedyStarOverlap(
                f"{kind} group {_where(body)} may consume items meant for what follows",
                where=_where(a))
        inner_follow = first + follow if isinstance(a, A.StarAG) else follow
        check_array_group(body, inner_follow)


def check_array_stars(a) -> None:
    check_array_group(a, ())


# -- the pipeline -------------------------------------------------------------------------------


class _Elab:
    def __init__(self):
        self.notes = []

    def type_(self, t):
        if isinstance(t, A.Choice):
            left = self.type_(t.left)
            right = self.type_(t.right)
            if not T.types_disjoint(left, right):
                raise NonDisjointAlternatives(
                    f"type choices {_where(left)} and {_where(right)} may overlap",
                    where=_where(t))
            return A.Choice(left, right)
        if isinstance(t, A.ArrayOf):
            g = self.ag(t.group)
            check_array_group(g)
            return A.ArrayOf(g)
        if isinstance(t, A.MapOf):
            return A.MapOf(self.mg(t.group))
        if isinstance(t, A.Tagged):
            return A.Tagged(t.tag, self.type_(t.type))
        return t

    def ag(self, g):
        if isinstance(g, A.Elem):
            return A.Elem(self.type_(g.type))
        if isinstance(g, (A.AltAG, A.ConcatAG)):
            return type(g)(self.ag(g.left), self.ag(g.right))
        if isinstance(g, (A.OptAG, A.StarAG)):
            return type(g)(self.ag(g.group))
        return g

    def _types_in_mg(self, g):
        if isinstance(g, A.Entry):
            return A.Entry(self.type_(g.key), self.type_(g.value), g.cut)
        if isinstance(g, (A.AltMG, A.ConcatMG)):
            return type(g)(self._types_in_mg(g.left), self._types_in_mg(g.right))
        if isinstance(g, (A.OptMG, A.StarMG)):
            return type(g)(self._types_in_mg(g.group))
        return g

    def mg(self, g):
        g = self._types_in_mg(g)
        g = rewrite_stars(g, self.notes)
        if not is_det_form(g):
            raise NonDeterministicMapGroup(
                f"map group {_where(g)} is outside the deterministic subset", where=_where(g))
        _, g = annotate(A.ExclusionSet(), g)
        for tbl in _tables(g):
            if not tbl.excluded.empty:
                self.notes.append(f"table {_where(tbl)} excludes claimed entries")
        check_footprints(g)
        return g


def _tables(g):
    if isinstance(g, A.Table):
        return [g]
    if isinstance(g, (A.AltMG, A.ConcatMG)):
        return _tables(g.left) + _tables(g.right)
    if isinstance(g, (A.OptMG, A.StarMG)):
        return _tables(g.group)
    return []


def elaborate(t) -> ElabSchema:
    e = _Elab()
    out = e.type_(t)
    return ElabSchema(out, interp_type(out), t, e.notes)


# -- type interpretation -----------------------------------------------------------------------


def interp_type(t):
    if isinstance(t, A.Base):
        return {"any": AnyShape(), "int": IntShape(), "uint": UIntShape(), "nint": NIntShape(),
                "tstr": TextShape(), "bstr": BytesShape()}[t.name]
    if A.is_literal(t):
        return UnitShape()
    if isinstance(t, A.IntRange):
        if t.lo >= 0:
            return UIntShape()
        if t.hi < 0:
            return NIntShape()
        return IntShape()
    if isinstance(t, A.SizeConstraint):
        return TextShape() if t.base == "tstr" else BytesShape()
    if isinstance(t, A.Choice):
        return SumShape(interp_type(t.left), interp_type(t.right))
    if isinstance(t, A.ArrayOf):
        return interp_ag(t.group)
    if isinstance(t, A.MapOf):
        return interp_mg(t.group)
    if isinstance(t, A.Tagged):
        return interp_type(t.type)
    if isinstance(t, A.Bottom):
        return EmptyShape()
    raise TypeError(f"no binding shape for {t!r}")


def interp_ag(g):
    if isinstance(g, A.Elem):
        return interp_type(g.type)
    if isinstance(g, A.ConcatAG):
        return PairShape(interp_ag(g.left), interp_ag(g.right))
    if isinstance(g, A.AltAG):
        return SumShape(interp_ag(g.left), interp_ag(g.right))
    if isinstance(g, A.OptAG):
        return OptionShape(interp_ag(g.group))
    if isinstance(g, A.StarAG):
        return ListShape(interp_ag(g.group))
    if isinstance(g, A.EmptyAG):
        return UnitShape()
    raise TypeError(f"no binding shape for {g!r}")


def interp_mg(g):
    if isinstance(g, A.Entry):
        return PairShape(interp_type(g.key), interp_type(g.value))
    if isinstance(g, A.Table):
        return TableShape(interp_type(g.key), interp_type(g.value))
    if isinstance(g, A.ConcatMG):
        return PairShape(interp_mg(g.left), interp_mg(g.right))
    if isinstance(g, A.AltMG):
        return SumShape(interp_mg(g.left), interp_mg(g.right))
    if isinstance(g, A.OptMG):
        return OptionShape(interp_mg(g.group))
    if isinstance(g, A.EmptyMG):
        return UnitShape()
    raise TypeError(f"no binding shape for {g!r}")


def elaborate_text(text: str, root=None) -> ElabSchema:
    from .parser import inline, parse_cddl

    return elaborate(inline(parse_cddl(text), root))
