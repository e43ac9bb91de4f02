import random

import pytest

from detcbor.cddl import ast as A
from detcbor.cddl import inline, parse_cddl, parse_type
from detcbor.cddl.sem import type_sem
from detcbor.errors import CddlSyntaxError, RecursiveRule, UnknownRule, Unsupported

import gen

ENTITY = 'entity = [ tstr, ("company" / "nonprofit"), { ? ("CEO": tstr), * (tstr => uint) } ]'


def test_entity_schema():
    s = parse_cddl(ENTITY)
    assert list(s.rules) == ["entity"] and s.root == "entity"
    body = s.rules["entity"].body
    mg = body.group.right.right.type.group
    assert mg.left == A.OptMG(A.Entry(A.LiteralText("CEO"), A.Base("tstr"), True))
    assert mg.right == A.StarMG(A.Entry(A.Base("tstr"), A.Base("uint"), False))


def test_recursive_rule():
    with pytest.raises(RecursiveRule):
        parse_cddl("a = b  b = a")
    with pytest.raises(RecursiveRule):
        parse_cddl("a = [* a]")


def test_literal_cut_entry():
    body = parse_cddl("m = { 1:1 }").rules["m"].body
    assert body == A.MapOf(A.Entry(A.LiteralInt(1), A.LiteralInt(1), True))


def test_negative_keys():
    body = parse_cddl("m = { -1: int, ? -2 => bstr }").rules["m"].body
    assert body.group.left == A.Entry(A.LiteralInt(-1), A.Base("int"), True)
    assert body.group.right == A.OptMG(A.Entry(A.LiteralInt(-2), A.Base("bstr"), False))


def test_inline():
    assert inline(parse_cddl("t = uint")) == A.Base("uint")
    assert inline(parse_cddl("t = uint  r = [ t ]"), "r") == A.ArrayOf(A.Elem(A.Base("uint")))
    s = parse_cddl("r = [ t ]\nt = uint")
    assert inline(s, "r") == A.ArrayOf(A.Elem(A.Base("uint")))


def test_group_rules_splice():
    t = inline(parse_cddl("m = { g, * tstr => any }\ng = (1: uint, ? 2: tstr)"))
    assert isinstance(t, A.MapOf)
    assert t.group.left == A.ConcatMG(A.Entry(A.LiteralInt(1), A.Base("uint"), True),
                                      A.OptMG(A.Entry(A.LiteralInt(2), A.Base("tstr"), True)))


def test_cose_schema_inlines():
    from detcbor import cose

    t = inline(parse_cddl(cose.COSE_SIGN1), "COSE_Sign1_Tagged")
    assert isinstance(t, A.Tagged) and t.tag == 18
    assert "RuleRef" not in repr(t) and "GroupRef" not in repr(t)


def test_prelude_types():
    assert parse_type("bool") == A.Choice(A.LiteralSimple(20), A.LiteralSimple(21))
    assert parse_type("nil") == A.LiteralSimple(22)
    assert parse_type("1..5") == A.IntRange(1, 5)
    assert parse_type("tstr .size 3") == A.SizeConstraint("tstr", 3, 3)
    assert parse_type("bstr .size (1..2)") == A.SizeConstraint("bstr", 1, 2)
    assert parse_type("1..0") == A.Bottom()


@pytest.mark.parametrize("text, err", [
    ("a = b", UnknownRule),
    ("a = [ 2*3 uint ]", Unsupported),
    ("a = x<uint>", Unsupported),
    ("a = bstr .cbor uint", Unsupported),
    ("a = &(x: 1)", Unsupported),
    ("a = [ uint", CddlSyntaxError),
])
def test_errors(text, err):
    with pytest.raises(err):
        parse_cddl(text)


def test_error_positions():
    with pytest.raises(CddlSyntaxError) as ei:
        parse_cddl("a = uint\nb = [ uint")
    assert ei.value.position == (2, 11)
    with pytest.raises(UnknownRule) as ei:
        parse_cddl("a = [\n  nope ]")
    assert ei.value.position == (2, 3)


def test_printer_round_trip():
    rng = random.Random(0)
    for _ in range(1000):
        t = gen.rand_type(rng, 4)
        assert parse_type(A.show_type(t)) == t


def test_schema_printer_round_trip():
    s = parse_cddl(ENTITY)
    again = parse_cddl(A.show_schema(s))
    assert again.rules["entity"].body == s.rules["entity"].body


def test_inline_preserves_semantics():
    multi = parse_cddl("""
        r = [ name, kind, props ]
        name = tstr
        kind = "company" / "nonprofit"
        props = { ? ("CEO": tstr), * (tstr => uint) }
    """)
    flat = parse_cddl(ENTITY)
    t1, t2 = inline(multi), inline(flat)
    assert t1 == t2
    rng = random.Random(1)
    for _ in range(200):
        x = gen.rand_small_item(rng, 3)
        assert type_sem(t1, x) == type_sem(t2, x)
