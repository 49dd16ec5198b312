"""Exact rational arithmetic helpers.

All certified quantities in this package are rationals.  gmpy2's mpq is used
when available (it is roughly 6x faster than fractions.Fraction on the pivot
loops of the exact simplex); the stdlib Fraction is a drop-in fallback.
"""

from __future__ import annotations

import math

try:
    from gmpy2 import mpq as Rat

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - fallback environment
    from fractions import Fraction as Rat

    _HAVE_GMPY2 = False

RAT0 = Rat(0)
RAT1 = Rat(1)


def rat(num, den=None):
    """Build a rational from ints, a rational, or a literal string."""
    if den is not None:
        return Rat(num, den)
    if isinstance(num, str):
        return parse_rational(num)
    return Rat(num)


def parse_rational(text: str):
    """Parse ``int``, ``int/int`` or a decimal literal, exactly.

    Decimal literals convert exactly: "5.644" -> 5644/1000 (reduced).
    Raises ValueError on malformed input or a zero denominator.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty rational literal")
    if "/" in s:
        p, _, q = s.partition("/")
        num = int(p.strip())
        den = int(q.strip())
        if den == 0:
            raise ValueError(f"zero denominator in rational literal {text!r}")
        return Rat(num, den)
    if "." in s:
        whole, _, frac = s.partition(".")
        sign = -1 if whole.strip().startswith("-") else 1
        whole_i = int(whole) if whole.strip() not in ("", "-", "+") else 0
        if frac == "":
            return Rat(whole_i)
        if not frac.isdigit():
            raise ValueError(f"malformed decimal literal {text!r}")
        scale = 10 ** len(frac)
        return Rat(whole_i * scale + sign * int(frac), scale)
    return Rat(int(s))


def format_rational(v) -> str:
    """Render reduced ``p/q`` (plain integer when q == 1)."""
    return str(Rat(v))


def denominator_lcm(values) -> int:
    """lcm of the denominators of an iterable of rationals (1 if empty)."""
    q = 1
    for v in values:
        q = q * v.denominator // math.gcd(q, int(v.denominator))
    return q


def is_multiple_of(value, unit) -> bool:
    """True when value is an integer multiple of unit (unit > 0)."""
    return (Rat(value) / unit).denominator == 1


def _iroot(x: int, k: int) -> int:
    """floor(x ** (1/k)) for nonnegative integer x."""
    if _HAVE_GMPY2:
        import gmpy2

        return int(gmpy2.iroot(gmpy2.mpz(x), k)[0])
    if x < 2:
        return x
    r = 1 << ((x.bit_length() + k - 1) // k)
    while True:
        nr = ((k - 1) * r + x // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r ** k > x:
        r -= 1
    return r


def pow2_decimal(exponent, digits: int = 3) -> str:
    """Render 2**exponent as a decimal string with ``digits`` places.

    Integer exponents give the exact power.  Fractional exponents are
    irrational; they are rounded half-even at ``digits`` places (the tie can
    never occur: 2^(p/q)*10^d is irrational whenever q > 1 for reduced p/q).
    Display helper only -- never used in certified comparisons.
    """
    e = Rat(exponent)
    if e < 0:
        raise ValueError("pow2_decimal expects a nonnegative exponent")
    p, q = int(e.numerator), int(e.denominator)
    if q == 1:
        return str(2 ** p)
    scale = 10 ** digits
    base = 2 ** p * scale ** q
    r = _iroot(base, q)  # floor(2^(p/q) * 10^digits)
    # round up iff frac part > 1/2, i.e. 2^q * base > (2r+1)^q
    if (2 ** q) * base > (2 * r + 1) ** q:
        r += 1
    whole, frac = divmod(r, scale)
    return f"{whole}.{frac:0{digits}d}"
