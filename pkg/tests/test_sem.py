import random

from hypothesis import given, settings
import hypothesis.strategies as st

from detcbor import det as D
from detcbor.cddl import ast as A
from detcbor.cddl.sem import (
    BOT, array_group_sem, det_oracle, is_det_form, map_group_sem, map_sem_matches, small_maps,
    type_sem,
)

import gen

UINT, NINT, TSTR, ANY = A.Base("uint"), A.Base("nint"), A.Base("tstr"), A.Base("any")
UNIVERSE = [D.Int(0), D.Int(18), D.Int(42), D.Int(-1), D.Text("a"), D.Text("b")]


def test_type_sem_examples():
    assert type_sem(UINT, D.Int(42))
    kind = A.Choice(A.LiteralText("company"), A.LiteralText("nonprofit"))
    assert type_sem(kind, D.Text("company"))
    assert not type_sem(kind, D.Text("charity"))
    assert not type_sem(NINT, D.Int(42))
    assert type_sem(A.IntRange(-3, 3), D.Int(-3))
    assert type_sem(A.SizeConstraint("tstr", 2, 2), D.Text("é"))
    assert not type_sem(A.Bottom(), D.Int(0))


def test_array_group_sem_examples():
    items = [D.Int(1), D.Int(2), D.Text("a")]
    assert array_group_sem(A.StarAG(A.Elem(UINT)), items) == (items[:2], items[2:])
    greedy = A.ConcatAG(A.StarAG(A.Elem(UINT)), A.Elem(UINT))
    assert array_group_sem(greedy, [D.Int(1)]) is None
    alt = A.ConcatAG(A.AltAG(A.Elem(UINT), A.Elem(ANY)), A.Elem(TSTR))
    xy = [D.Text("x"), D.Text("y")]
    assert array_group_sem(alt, xy) == (xy, [])


def test_alternatives_do_not_backtrack():
    # the first branch succeeds on "x", so "x" is never offered to the second
    g = A.ConcatAG(A.AltAG(A.Elem(TSTR), A.ConcatAG(A.Elem(TSTR), A.Elem(TSTR))), A.Elem(UINT))
    assert array_group_sem(g, [D.Text("x"), D.Text("y"), D.Int(1)]) is None


def test_map_group_sem_examples():
    m = D.mk_map([(D.Int(18), D.Int(21))]).entries
    opt = A.OptMG(A.Entry(A.LiteralInt(18), A.LiteralInt(42), False))
    assert map_group_sem(opt, m) == {(frozenset(), frozenset(m))}
    cut = A.OptMG(A.Entry(A.LiteralInt(18), A.LiteralInt(42), True))
    assert map_group_sem(cut, m) is BOT
    two = D.mk_map([(D.Int(18), D.Text("foo")), (D.Int(42), D.Text("bar"))]).entries
    assert len(map_group_sem(A.Entry(UINT, TSTR, False), two)) == 2


def test_cut_poisons_alternatives():
    m = D.mk_map([(D.Text("CEO"), D.Int(1))]).entries
    g = A.AltMG(A.Entry(A.LiteralText("CEO"), TSTR, True), A.StarMG(A.Entry(TSTR, UINT, False)))
    assert map_group_sem(g, m) is BOT


def test_is_det_form_examples():
    assert is_det_form(A.OptMG(A.Entry(A.LiteralInt(18), A.LiteralInt(42), True)))
    assert is_det_form(A.StarMG(A.Entry(UINT, ANY, False)))
    assert not is_det_form(A.Entry(UINT, TSTR, False))
    assert not is_det_form(A.StarMG(A.Entry(UINT, ANY, True)))
    assert not is_det_form(A.StarMG(A.AltMG(A.Entry(UINT, ANY, False), A.Entry(TSTR, ANY, False))))


def test_det_oracle_examples():
    assert det_oracle(A.StarMG(A.Entry(UINT, ANY, False)), UNIVERSE)
    assert not det_oracle(A.Entry(UINT, TSTR, False), UNIVERSE)
    assert det_oracle(A.Entry(A.LiteralInt(18), A.LiteralInt(42), True), UNIVERSE)


def test_small_maps_count():
    maps = list(small_maps(UNIVERSE[:3], 2))
    # 1 + 3*3 + 3*9 maps with at most two distinct keys
    assert len(maps) == 1 + 9 + 27


# -- properties ---------------------------------------------------------------------------

_TYPES = [UINT, NINT, TSTR, ANY, A.LiteralInt(0), A.LiteralInt(18), A.LiteralText("a"),
          A.Base("int")]


def _rand_det_group(rng, depth=2):
    r = rng.random()
    if depth <= 0 or r < 0.4:
        if rng.random() < 0.3:
            return A.StarMG(A.Entry(rng.choice(_TYPES), rng.choice(_TYPES), False))
        key = rng.choice([A.LiteralInt(0), A.LiteralInt(18), A.LiteralText("a")])
        return A.Entry(key, rng.choice(_TYPES), rng.random() < 0.5)
    if r < 0.6:
        return A.ConcatMG(_rand_det_group(rng, depth - 1), _rand_det_group(rng, depth - 1))
    if r < 0.8:
        return A.AltMG(_rand_det_group(rng, depth - 1), _rand_det_group(rng, depth - 1))
    return A.OptMG(_rand_det_group(rng, depth - 1))


def test_det_form_groups_are_deterministic():
    rng = random.Random(5)
    for _ in range(60):
        g = _rand_det_group(rng)
        assert is_det_form(g)
        assert det_oracle(g, UNIVERSE[:5], 2)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_partition_law_and_star_totality(r):
    g = _rand_det_group(r)
    ents = {}
    for _ in range(r.randrange(4)):
        k = r.choice(UNIVERSE)
        ents[D.encode_det(k)] = (k, r.choice(UNIVERSE))
    m = D.mk_map(list(ents.values())).entries
    out = map_group_sem(g, m)
    if out is not BOT:
        for consumed, rest in out:
            assert consumed | rest == frozenset(m) and not consumed & rest
    star = A.StarMG(A.Entry(r.choice(_TYPES), r.choice(_TYPES), False))
    assert len(map_group_sem(star, m)) == 1
    items = [r.choice(UNIVERSE) for _ in range(r.randrange(5))]
    assert array_group_sem(A.StarAG(A.Elem(r.choice(_TYPES))), items) is not None


def test_map_sem_matches_requires_everything_consumed():
    g = A.Entry(A.LiteralInt(1), UINT, True)
    assert map_sem_matches(g, D.mk_map([(D.Int(1), D.Int(5))]).entries)
    assert not map_sem_matches(g, D.mk_map([(D.Int(1), D.Int(5)), (D.Int(2), D.Int(5))]).entries)
