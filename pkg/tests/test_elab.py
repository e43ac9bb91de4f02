import random

import pytest

from detcbor import det as D
from detcbor.cddl import ast as A
from detcbor.cddl import elaborate, elaborate_text, parse_type
from detcbor.cddl.elab import (
    AnyShape, BytesShape, IntShape, ListShape, OptionShape, PairShape, SumShape, TableShape,
    TextShape, UIntShape, UnitShape, annotate, check_array_stars, check_footprints, interp_type,
    rewrite_stars,
)
from detcbor.cddl.sem import BOT, det_oracle, map_group_sem, type_sem
from detcbor.errors import (
    FootprintOverlap, GreedyStarOverlap, NonDeterministicMapGroup, NonDisjointAlternatives,
)

import gen

UINT, TSTR, ANY = A.Base("uint"), A.Base("tstr"), A.Base("any")
NOEX = A.ExclusionSet()
ENTITY = 'entity = [ tstr, ("company" / "nonprofit"), { ? ("CEO": tstr), * (tstr => uint) } ]'
OKP = """
COSE_Key_OKP = { 1:1, -1:int/tstr, ?-2:bstr, ?-4:bstr, *label=>values }
label = int / tstr
values = any
"""


def _entry(k, v, cut=False):
    return A.Entry(k, v, cut)


def test_rewrite_stars_examples():
    g = A.StarMG(A.AltMG(_entry(UINT, TSTR), _entry(TSTR, UINT)))
    assert rewrite_stars(g) == A.ConcatMG(A.StarMG(_entry(UINT, TSTR)), A.StarMG(_entry(TSTR, UINT)))
    lit = A.StarMG(_entry(A.LiteralInt(18), A.LiteralInt(42), True))
    assert rewrite_stars(lit) == lit
    with pytest.raises(NonDeterministicMapGroup):
        elaborate(A.MapOf(lit))
    with pytest.raises(NonDeterministicMapGroup):
        elaborate(A.MapOf(_entry(UINT, TSTR)))


def test_annotate_examples():
    g = A.ConcatMG(_entry(A.LiteralInt(18), UINT), A.StarMG(_entry(UINT, ANY)))
    _, out = annotate(NOEX, g)
    assert out.right == A.Table(UINT, A.ExclusionSet(((A.LiteralInt(18), ANY),)), ANY)

    g = A.ConcatMG(A.OptMG(_entry(A.LiteralText("CEO"), TSTR, True)), A.StarMG(_entry(TSTR, UINT)))
    _, out = annotate(NOEX, g)
    assert out.right.excluded.atoms == ((A.LiteralText("CEO"), ANY),)

    t, out = annotate(NOEX, _entry(A.LiteralInt(18), A.LiteralInt(42), True))
    assert t.atoms == ((A.LiteralInt(18), ANY),)
    assert out == _entry(A.LiteralInt(18), A.LiteralInt(42), True)


def test_optional_non_cut_entry_excludes_only_matching_values():
    g = A.ConcatMG(A.OptMG(_entry(A.LiteralInt(18), UINT)), A.StarMG(_entry(UINT, ANY)))
    _, out = annotate(NOEX, g)
    assert out.right.excluded.atoms == ((A.LiteralInt(18), UINT),)
    check_footprints(out)
    # 18 => "x" stays with the table
    m = D.mk_map([(D.Int(18), D.Text("x"))]).entries
    (consumed, rest), = map_group_sem(out, m)
    assert rest == frozenset()


def test_check_footprints_examples():
    ok = A.ConcatMG(_entry(A.LiteralText("CEO"), TSTR, True),
                    A.Table(TSTR, A.ExclusionSet(((A.LiteralText("CEO"), ANY),)), UINT))
    check_footprints(ok)
    bad = A.ConcatMG(_entry(A.LiteralInt(18), UINT), A.Table(UINT, NOEX, ANY))
    with pytest.raises(FootprintOverlap):
        check_footprints(bad)
    good = A.ConcatMG(_entry(A.LiteralInt(18), UINT),
                      A.Table(UINT, A.ExclusionSet(((A.LiteralInt(18), ANY),)), ANY))
    check_footprints(good)


def test_check_array_stars_examples():
    check_array_stars(A.ConcatAG(A.StarAG(A.Elem(UINT)), A.StarAG(A.Elem(TSTR))))
    with pytest.raises(GreedyStarOverlap):
        check_array_stars(A.ConcatAG(A.StarAG(A.Elem(UINT)), A.Elem(UINT)))
    check_array_stars(A.ConcatAG(A.StarAG(A.Elem(UINT)), A.Elem(TSTR)))
    with pytest.raises(GreedyStarOverlap):
        check_array_stars(A.ConcatAG(A.OptAG(A.Elem(TSTR)), A.Elem(TSTR)))


def test_elaborate_rejects_ambiguous_choice():
    with pytest.raises(NonDisjointAlternatives):
        elaborate_text("x = uint / any")
    with pytest.raises(NonDisjointAlternatives):
        elaborate_text("x = [ (uint // uint, tstr) ]")


def test_entity_shape():
    es = elaborate_text(ENTITY)
    assert es.shape == PairShape(
        TextShape(),
        PairShape(SumShape(UnitShape(), UnitShape()),
                  PairShape(OptionShape(PairShape(UnitShape(), TextShape())),
                            TableShape(TextShape(), UIntShape()))))


def test_cose_key_okp_exclusions():
    es = elaborate_text(OKP)
    tables = []

    def walk(g):
        if isinstance(g, A.Table):
            tables.append(g)
        for f in ("left", "right", "group"):
            if hasattr(g, f):
                walk(getattr(g, f))

    walk(es.type.group)
    (tbl,) = tables
    assert {k.value for k, _ in tbl.excluded.atoms} == {1, -1, -2, -4}


def test_interp_type_examples():
    assert interp_type(UINT) == UIntShape()
    assert interp_type(parse_type('"company" / "nonprofit"')) == SumShape(UnitShape(), UnitShape())
    es = elaborate(A.MapOf(A.StarMG(_entry(TSTR, UINT))))
    assert es.shape == TableShape(TextShape(), UIntShape())
    assert interp_type(parse_type("[* int]")) == ListShape(IntShape())
    assert interp_type(parse_type("bstr")) == BytesShape()
    assert interp_type(ANY) == AnyShape()


def test_notes_record_rewrites():
    es = elaborate_text("m = { * (uint => tstr // tstr => uint) }")
    assert any("rewrote" in n for n in es.notes)


def test_rejected_groups_are_really_nondeterministic():
    universe = [D.Int(0), D.Int(1), D.Text("a")]
    for g in (_entry(UINT, TSTR), _entry(ANY, ANY), A.OptMG(_entry(A.Base("int"), ANY))):
        with pytest.raises(NonDeterministicMapGroup):
            elaborate(A.MapOf(g))
        assert not det_oracle(g, universe, 2)


def test_elaboration_preserves_semantics():
    rng = random.Random(21)
    schemas, _ = gen.accepted_schemas(rng, 150)
    for t, es in schemas:
        for _ in range(30):
            x = gen.rand_small_item(rng, 3)
            assert type_sem(t, x) == type_sem(es.type, x)


def test_annotation_matches_original_on_untouched_maps():
    # maps with no key claimed by the accumulated patterns see the same outcomes
    g = A.ConcatMG(A.OptMG(_entry(A.LiteralInt(0), UINT, True)), A.StarMG(_entry(A.Base("int"), ANY)))
    _, ann = annotate(NOEX, g)
    rng = random.Random(2)
    for _ in range(200):
        ents = {}
        for _ in range(rng.randrange(4)):
            k = rng.choice([D.Int(1), D.Int(-1), D.Int(5), D.Text("a")])
            ents[D.encode_det(k)] = (k, rng.choice(gen.SMALL_ATOMS))
        m = D.mk_map(list(ents.values())).entries
        a, b = map_group_sem(g, m), map_group_sem(ann, m)
        assert (a is BOT) == (b is BOT)
        if a is not BOT:
            assert a == b
