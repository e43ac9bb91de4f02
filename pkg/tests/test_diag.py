import random

import pytest

from detcbor import det as D
from detcbor import raw as R
from detcbor.diag import DiagSyntaxError, diag, diag_item, parse_diag

import gen


def test_diag_basic():
    data = D.encode_det(D.from_python([1, -2, "a", b"\x01", {"k": None}, True]))
    assert diag(data) == '[1, -2, "a", h\'01\', {"k": null}, true]'


def test_diag_shows_widths():
    assert diag(bytes.fromhex("c11a00000001")) == "1(1_2)"
    assert diag(b"\x18\x01") == "1_0"
    assert diag(b"\xf8\x20") == "simple(32)"


def test_parse_diag_keeps_widths():
    assert parse_diag("1_0") == R.raw_int(1, 1)
    assert R.encode_raw(parse_diag("[1_1, 2]")) == b"\x82\x19\x00\x01\x02"


def test_parse_diag_errors():
    with pytest.raises(DiagSyntaxError):
        parse_diag("[1, ")
    with pytest.raises(DiagSyntaxError):
        parse_diag("1 2")


def test_diag_round_trip_random():
    rng = random.Random(3)
    for _ in range(300):
        x = gen.rand_canon(rng, 4, 4)
        data = D.encode_det(x)
        text = diag(data)
        assert diag_item(x) == text
        assert R.encode_raw(parse_diag(text)) == data
