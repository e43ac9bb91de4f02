import itertools
import random

from detcbor import det as D
from detcbor.cddl import ast as A
from detcbor.cddl.sem import type_sem
from detcbor.cddl.typeops import (
    DISJOINT, MAYBE, check_disjoint, is_bottom, is_subtype, type_intersect_under,
)

import gen

UINT, TSTR, ANY = A.Base("uint"), A.Base("tstr"), A.Base("any")

# a small universe of items and a pool of types to check against it
ITEMS = gen.SMALL_ATOMS + [D.Int(-3), D.Int(2**64 - 1), D.Int(-(2**64)), D.Text("ab"),
                           D.Bytes(b"x"), D.Array(()), D.Array((D.Int(0),)), D.mk_map([]),
                           D.Tagged(18, D.Int(0)), D.TRUE]
TYPES = gen._ATOMS + [
    A.ArrayOf(A.Elem(UINT)), A.ArrayOf(A.StarAG(A.Elem(ANY))), A.ArrayOf(A.EmptyAG()),
    A.MapOf(A.EmptyMG()), A.Tagged(18, UINT), A.Tagged(18, TSTR), A.Bottom(),
    A.Choice(A.LiteralInt(0), TSTR), A.IntRange(1, 5), A.IntRange(6, 9),
    A.SizeConstraint("tstr", 2, 5),
]


def test_intersect_examples():
    assert type_intersect_under(UINT, UINT) == UINT
    assert type_intersect_under(A.LiteralInt(18), UINT) == A.LiteralInt(18)
    assert is_bottom(type_intersect_under(TSTR, UINT))
    assert type_intersect_under(A.IntRange(0, 10), A.IntRange(5, 20)) == A.IntRange(5, 10)


def test_disjoint_examples():
    assert check_disjoint(UINT, TSTR) == DISJOINT
    assert check_disjoint(UINT, ANY) == MAYBE
    assert check_disjoint(A.IntRange(1, 5), A.IntRange(6, 9)) == DISJOINT
    assert check_disjoint(A.IntRange(1, 5), A.IntRange(5, 9)) == MAYBE
    assert check_disjoint(A.Bottom(), ANY) == DISJOINT


def test_disjoint_sound_on_universe():
    for t1, t2 in itertools.product(TYPES, repeat=2):
        if check_disjoint(t1, t2) == DISJOINT:
            assert not any(type_sem(t1, x) and type_sem(t2, x) for x in ITEMS), (t1, t2)


def test_intersection_sound_on_universe():
    for t1, t2 in itertools.product(TYPES, repeat=2):
        t = type_intersect_under(t1, t2)
        for x in ITEMS:
            if type_sem(t, x):
                assert type_sem(t1, x) and type_sem(t2, x), (t1, t2, x)


def test_subtype_sound_on_universe():
    for t1, t2 in itertools.product(TYPES, repeat=2):
        if is_subtype(t1, t2):
            assert all(type_sem(t2, x) for x in ITEMS if type_sem(t1, x)), (t1, t2)


def test_disjoint_sound_on_random_types():
    rng = random.Random(11)
    items = ITEMS + [gen.rand_small_item(rng) for _ in range(200)]
    for _ in range(400):
        t1, t2 = gen.rand_type(rng, 2), gen.rand_type(rng, 2)
        if check_disjoint(t1, t2) == DISJOINT:
            assert not any(type_sem(t1, x) and type_sem(t2, x) for x in items)
