import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, strategies as st

from assouad_forge.scalar import (PrecisionError, default_precision, from_hex, log2_floor,
                                  parse_decimal, precision, scalar, set_precision, to_decimal,
                                  to_hex, ulp, working_precision)


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        scalar(0.1)


def test_decimal_strings_parse_without_binary_rounding():
    # 0.1 at 256 bits differs from the double nearest 0.1
    assert scalar("0.1") != mpfr(0.1)
    assert abs(scalar("0.1") * 10 - 1) < mpfr(2) ** -250


def test_parse_decimal_refuses_hex():
    with pytest.raises(ValueError):
        parse_decimal("0x1p-1")
    with pytest.raises(ValueError):
        parse_decimal("one half")


@pytest.mark.parametrize("text,expected", [
    ("0", "0x0p+0"), ("1", "0x1p+0"), ("0.5", "0x1p-1"), ("-3", "-0x1.8p+1"), ("0.75", "0x1.8p-1"),
])
def test_hex_canonical_form(text, expected):
    assert to_hex(scalar(text)) == expected


def test_default_precision_formula():
    assert default_precision(6) == 704
    assert default_precision(1) == 8 + 128


def test_working_precision_restores():
    before = precision()
    with working_precision(1000):
        assert precision() == 1000
    assert precision() == before


def test_log2_floor_and_ulp():
    assert log2_floor(scalar("1")) == 0
    assert log2_floor(scalar("0.75")) == -1
    assert log2_floor(gmpy2.exp2(-300)) == -300
    assert ulp(scalar("1")) == mpfr(2) ** (1 - precision())
    with pytest.raises(ValueError):
        log2_floor(mpfr(0))


def test_to_decimal_thirty_digits():
    assert to_decimal(scalar("1") / 3) == "0." + "3" * 30
    assert to_decimal(mpfr(0)) == "0"


@given(st.integers(min_value=-(2 ** 300), max_value=2 ** 300), st.integers(min_value=-2000, max_value=2000))
def test_hex_round_trip_is_bit_exact(mant, exp):
    with working_precision(320):
        x = mpfr(mant) * mpfr(2) ** exp
        text = to_hex(x)
        assert from_hex(text) == x
        assert text == text.lower()


@given(st.integers(min_value=1, max_value=2 ** 64), st.integers(min_value=-80, max_value=80))
def test_hex_text_is_independent_of_precision(mant, exp):
    with working_precision(128):
        x = mpfr(mant) * mpfr(2) ** exp
        t1 = to_hex(x)
    with working_precision(1024):
        assert to_hex(mpfr(mant) * mpfr(2) ** exp) == t1


def test_set_precision_rejects_nonsense():
    with pytest.raises(ValueError):
        set_precision(1)
    assert issubclass(PrecisionError, ArithmeticError)
