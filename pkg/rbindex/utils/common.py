import re
from fractions import Fraction

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")
_RATIONAL = re.compile(r"^[+-]?\d+/\d+$")


def parse_coord(text: str) -> Fraction:
    """
    Convert a coordinate literal to an exact rational.

    Args:
        text: String like "1.25", "-3" or "5/4"

    Returns:
        Canonical Fraction
    """
    text = text.strip()
    if _RATIONAL.match(text):
        num, den = text.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    if _DECIMAL.match(text):
        return Fraction(text)
    raise ValueError(f"not a coordinate: {text!r}")


def format_coord(value: Fraction | int) -> str:
    """Render an exact rational as "p" or "p/q"."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
