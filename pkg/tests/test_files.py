"""File format round trips and rejection of malformed input."""

from fractions import Fraction

import numpy as np
import pytest

from ershovlab import ApproxTable, InputError, RationalSequence, SetPrefix
from ershovlab.files import (
    parse_sequence,
    parse_set,
    parse_table,
    serialize_sequence,
    serialize_set,
    serialize_table,
)


def test_table_round_trip_is_canonical_fixed_point():
    text = (
        "ERSHOV-TABLE v1\n"
        "universe 3\n"
        "stages 4\n"
        "row 2 0011\n"
        "row 0 0110\n"
        "row 1 0000\n"
        "settled 2 2\n"
        "settled 0 3\n"
    )
    once = serialize_table(parse_table(text))
    twice = serialize_table(parse_table(once))
    assert once == twice
    assert once.index("row 0") < once.index("row 1") < once.index("row 2")


def test_table_errors():
    with pytest.raises(InputError, match="header"):
        parse_table("ERSHOV-TABLE v2\nuniverse 1\nstages 1\nrow 0 0\n")
    with pytest.raises(InputError, match="missing row"):
        parse_table("ERSHOV-TABLE v1\nuniverse 2\nstages 1\nrow 0 0\n")
    with pytest.raises(InputError, match="length 2"):
        parse_table("ERSHOV-TABLE v1\nuniverse 1\nstages 2\nrow 0 0\n")
    with pytest.raises(InputError, match="duplicate"):
        parse_table("ERSHOV-TABLE v1\nuniverse 1\nstages 1\nrow 0 0\nrow 0 0\n")
    with pytest.raises(InputError, match=r"g\(x, 0\)"):
        parse_table("ERSHOV-TABLE v1\nuniverse 1\nstages 2\nrow 0 10\n")
    with pytest.raises(InputError, match="unrecognized"):
        parse_table("ERSHOV-TABLE v1\nuniverse 1\nstages 1\nrow 0 0\nbogus\n")


def test_set_round_trip_both_styles():
    bits_text = "ERSHOV-SET v1\nuniverse 6\nbits 010101\n"
    elems_text = "ERSHOV-SET v1\nuniverse 6\nelems 1 3 5\n"
    a = parse_set(bits_text)
    b = parse_set(elems_text)
    assert a == b
    assert serialize_set(a) == bits_text
    assert serialize_set(parse_set(serialize_set(b))) == bits_text


def test_set_errors():
    with pytest.raises(InputError, match="strictly increasing"):
        parse_set("ERSHOV-SET v1\nuniverse 4\nelems 2 1\n")
    with pytest.raises(InputError, match="length 4"):
        parse_set("ERSHOV-SET v1\nuniverse 4\nbits 01\n")
    with pytest.raises(InputError, match="outside universe"):
        parse_set("ERSHOV-SET v1\nuniverse 2\nelems 5\n")


def test_sequence_round_trip_with_bounds():
    seq = RationalSequence(
        [Fraction(3, 4), Fraction(1, 4), Fraction(2)],
        lower=Fraction(0),
        upper=Fraction(2),
    )
    text = serialize_sequence(seq)
    back = parse_sequence(text)
    assert back.values == seq.values
    assert back.lower == Fraction(0) and back.upper == Fraction(2)
    assert serialize_sequence(back) == text


def test_sequence_errors():
    with pytest.raises(InputError, match="no values"):
        parse_sequence("ERSHOV-SEQ v1\n")
    with pytest.raises(InputError, match="bad rational"):
        parse_sequence("ERSHOV-SEQ v1\nx/y\n")
    with pytest.raises(InputError, match="violates declared bounds"):
        parse_sequence("ERSHOV-SEQ v1\nbounds 0 1\n3/2\n")


def test_table_serialize_skips_missing_certificates():
    t = ApproxTable(2, 2, np.array([[0, 1], [0, 0]], dtype=bool), {0: 1})
    text = serialize_table(t)
    assert "settled 0 1" in text and "settled 1" not in text
    assert parse_table(text) == t


def test_set_prefix_counting():
    sp = parse_set("ERSHOV-SET v1\nuniverse 8\nelems 0 2 4 6\n")
    assert sp.count(4) == 2 and sp.count(8) == 4
    assert sp.density(4) == Fraction(1, 2)
    assert sp.complement().members() == (1, 3, 5, 7)
