"""Arbitrary-precision scalars.

All geometry is carried in :class:`gmpy2.mpfr` values.  The working precision
is the mantissa width of the active gmpy2 context; helpers here set it, parse
decimal strings without passing through binary floats, and serialise values
in a canonical lowercase hex-float form that round-trips bit for bit.
"""

from __future__ import annotations

import contextlib
from typing import Iterator

import gmpy2
from gmpy2 import mpfr

Scalar = type(mpfr(0))

DEFAULT_PRECISION = 256


class PrecisionError(ArithmeticError):
    """Two generated points collided at the working precision."""


def precision() -> int:
    return gmpy2.get_context().precision


def set_precision(bits: int) -> None:
    if bits < 2:
        raise ValueError(f"precision must be >= 2 bits, got {bits}")
    gmpy2.get_context().precision = int(bits)


@contextlib.contextmanager
def working_precision(bits: int) -> Iterator[int]:
    """Temporarily run arithmetic with ``bits`` mantissa bits."""
    if bits < 2:
        raise ValueError(f"precision must be >= 2 bits, got {bits}")
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)):
        yield int(bits)


def default_precision(depth_max: int) -> int:
    """Mantissa width leaving >= 64 guard bits below the finest Y_n feature."""
    return 2 ** (depth_max + 2) + 64 * (depth_max + 1)


def scalar(value) -> Scalar:
    """Coerce ``value`` to a Scalar at the working precision.

    Strings are parsed as decimal (or hex-float) literals directly; Python
    floats are rejected so that binary-float literals never leak in.
    """
    if isinstance(value, float):
        raise TypeError("binary float literals are not accepted; pass a decimal string")
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty numeric literal")
        try:
            return mpfr(text)
        except ValueError as exc:
            raise ValueError(f"unparsable number {value!r}") from exc
    return mpfr(value)


def parse_decimal(text: str) -> Scalar:
    text = text.strip()
    if text.lower().lstrip("+-").startswith("0x"):
        raise ValueError(f"expected a decimal literal, got {text!r}")
    return scalar(text)


def pi() -> Scalar:
    return gmpy2.const_pi()


def to_hex(x: Scalar) -> str:
    """Canonical lowercase hex float: ``[-]0x1.<hex>p<exp>`` or ``0x0p+0``."""
    if gmpy2.is_nan(x) or gmpy2.is_infinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    if x == 0:
        return "-0x0p+0" if gmpy2.is_signed(x) else "0x0p+0"
    mant, exp = x.as_mantissa_exp()
    sign = "-" if mant < 0 else ""
    mant = int(abs(mant))
    # strip trailing zero bits so the text does not depend on the precision
    tz = (mant & -mant).bit_length() - 1
    mant >>= tz
    exp = int(exp) + tz
    nbits = mant.bit_length()
    e = exp + nbits - 1
    frac = mant - (1 << (nbits - 1))
    fbits = nbits - 1
    if fbits == 0:
        return f"{sign}0x1p{e:+d}"
    pad = (-fbits) % 4
    digits = format(frac << pad, "x").rjust((fbits + pad) // 4, "0").rstrip("0")
    return f"{sign}0x1.{digits}p{e:+d}"


def from_hex(text: str, bits: int | None = None) -> Scalar:
    """Parse a hex float exactly (the precision is widened when needed)."""
    text = text.strip()
    body = text.lstrip("+-").lower()
    if not body.startswith("0x") or "p" not in body:
        raise ValueError(f"not a hex float: {text!r}")
    mantissa = body[2:].split("p", 1)[0].replace(".", "")
    need = max(4 * len(mantissa), 2)
    prec = max(need, bits or 0, precision())
    try:
        value = mpfr(text, prec)
    except ValueError as exc:
        raise ValueError(f"not a hex float: {text!r}") from exc
    return value


def to_decimal(x: Scalar, digits: int = 30) -> str:
    """Decimal string with ``digits`` significant digits (for CSV output)."""
    if x == 0:
        return "0"
    return format(x, f".{digits}g")


def ulp(x: Scalar) -> Scalar:
    """Unit in the last place of ``x`` at the working precision."""
    if x == 0:
        return mpfr(2) ** (gmpy2.get_context().emin)
    e, _ = gmpy2.frexp(x)
    return mpfr(2) ** (e - precision())


def log2_floor(x: Scalar) -> int:
    """floor(log2 x) for x > 0, exact."""
    if x <= 0:
        raise ValueError("log2_floor needs a positive argument")
    e, _ = gmpy2.frexp(x)
    return int(e) - 1


def cos_sin(theta: Scalar) -> tuple[Scalar, Scalar]:
    """(cos theta, sin theta), with the symmetries of the axis and diagonal
    directions (pi/4, pi/2, 3pi/4, pi) kept exact."""
    p = pi()
    if theta == p:
        return mpfr(-1), mpfr(0)
    if theta == p / 2:
        return mpfr(0), mpfr(1)
    if theta == p / 4:
        s = gmpy2.sqrt(2) / 2
        return s, s
    if theta == 3 * p / 4:
        s = gmpy2.sqrt(2) / 2
        return -s, s
    return gmpy2.cos(theta), gmpy2.sin(theta)
