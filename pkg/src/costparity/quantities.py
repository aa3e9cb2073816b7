"""Unit-aware scalars: bytes, instruction counts, cpu time and money.

All quantities are plain floats in a canonical unit:

    bytes         -> bytes (decimal SI, 1 KB = 1e3)
    instructions  -> instructions
    cpu_time      -> cpu-hours (1 y = 8766 h, i.e. 365.25 days)
    money         -> US dollars

Text forms are a number with an optional suffix, e.g. ``"0.5MB"``,
``"1.5e13"``, ``"7y"``, ``"10µ$"``, ``"$0.10"``.
"""

from __future__ import annotations

import enum
import math
import re
from typing import Union

HOURS_PER_YEAR = 8766.0


class Kind(str, enum.Enum):
    BYTES = "bytes"
    INSTRUCTIONS = "instructions"
    CPU_TIME = "cpu_time"
    MONEY = "money"


ByteCount = float
InstructionCount = float
CpuTime = float
Money = float

# Ordered small -> large; formatting picks the largest unit with mantissa >= 1.
_BYTE_UNITS = [("B", 1.0), ("KB", 1e3), ("MB", 1e6), ("GB", 1e9), ("TB", 1e12), ("PB", 1e15)]
_INSTRUCTION_UNITS = [("", 1.0), ("K", 1e3), ("M", 1e6), ("G", 1e9), ("T", 1e12)]
_TIME_UNITS = [
    ("s", 1 / 3600),
    ("min", 1 / 60),
    ("h", 1.0),
    ("d", 24.0),
    ("y", HOURS_PER_YEAR),
]
_MONEY_UNITS = [("µ$", 1e-6), ("u$", 1e-6), ("m$", 1e-3), ("$", 1.0)]

_UNITS = {
    Kind.BYTES: _BYTE_UNITS,
    Kind.INSTRUCTIONS: _INSTRUCTION_UNITS,
    Kind.CPU_TIME: _TIME_UNITS,
    Kind.MONEY: _MONEY_UNITS,
}

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_QUANTITY_RE = re.compile(
    rf"^\s*(?P<sign>[+-])?(?P<dollar>\$)?(?(dollar)(?P<sign2>[+-])?)\s*(?P<num>{_NUMBER})\s*(?P<suffix>\S*)\s*$"
)

QuantityLike = Union[str, int, float]


class QuantityError(ValueError):
    """Raised for text that is not a valid quantity of the requested kind."""


def _kind(kind: Kind | str) -> Kind:
    try:
        return Kind(kind)
    except ValueError:
        raise QuantityError(f"unknown quantity kind {kind!r}") from None


def _scale(suffix: str, kind: Kind) -> float:
    if suffix == "":
        return 1.0
    if kind is Kind.MONEY:
        # case-sensitive: "m$" is milli, there is no mega-dollar suffix
        for name, scale in _MONEY_UNITS:
            if suffix == name:
                return scale
        raise QuantityError(f"unknown money suffix {suffix!r}")
    folded = suffix.lower()
    for name, scale in _UNITS[kind]:
        if folded == name.lower():
            return scale
    if kind is Kind.BYTES and folded in ("k", "m", "g", "t", "p"):
        raise QuantityError(f"byte suffix must end in 'B', got {suffix!r}")
    raise QuantityError(f"unknown {kind.value} suffix {suffix!r}")


def parse_quantity(text: str, kind: Kind | str) -> float:
    """Parse ``text`` and return its value in the canonical unit of ``kind``.

    >>> parse_quantity("0.5MB", "bytes")
    500000.0
    >>> parse_quantity("7y", "cpu_time")
    61362.0
    """
    kind = _kind(kind)
    if not isinstance(text, str):
        raise QuantityError(f"expected text, got {type(text).__name__}")
    match = _QUANTITY_RE.match(text)
    if match is None:
        raise QuantityError(f"not a quantity: {text!r}")
    suffix = match["suffix"]
    if match["dollar"]:
        if kind is not Kind.MONEY:
            raise QuantityError(f"'$' is only valid for money: {text!r}")
        if suffix not in ("", "$"):
            raise QuantityError(f"unexpected suffix after '$' amount: {text!r}")
        suffix = ""
    if match["sign"] and match["sign2"]:
        raise QuantityError(f"two signs in {text!r}")
    negative = "-" in (match["sign"], match["sign2"])
    value = float(match["num"]) * _scale(suffix, kind)
    if negative:
        value = -value
    return check_quantity(value, kind)


def check_quantity(value: float, kind: Kind | str) -> float:
    """Validate a raw canonical value; returns it as a float."""
    kind = _kind(kind)
    value = float(value)
    if not math.isfinite(value):
        raise QuantityError(f"{kind.value} must be finite, got {value!r}")
    if value < 0 and kind is not Kind.MONEY:
        raise QuantityError(f"{kind.value} must be non-negative, got {value!r}")
    # normalise -0.0 so formatting never shows a sign on zero
    return value + 0.0


def coerce_quantity(value: QuantityLike, kind: Kind | str) -> float:
    """Accept either a raw number in canonical units or a suffixed string."""
    if isinstance(value, bool):
        raise QuantityError(f"expected a quantity, got {value!r}")
    if isinstance(value, (int, float)):
        return check_quantity(value, kind)
    if isinstance(value, str):
        return parse_quantity(value, kind)
    raise QuantityError(f"expected a number or string, got {type(value).__name__}")


def _mantissa(value: float, digits: int | None) -> str:
    if digits is None:
        text = f"{value:.15g}"
    else:
        text = f"{value:.{digits}g}"
    if "e" in text:
        # keep plain decimal notation where possible
        text = repr(float(text))
        if text.endswith(".0"):
            text = text[:-2]
    return text


def _pick_unit(value: float, units: list[tuple[str, float]], digits: int | None) -> tuple[str, str]:
    chosen = units[0]
    for name, scale in units:
        # round first so 999.9999999999999 moves up to the next unit
        if float(_mantissa(value / scale, digits)) >= 1:
            chosen = (name, scale)
    return chosen[0], _mantissa(value / chosen[1], digits)


def format_quantity(value: float, kind: Kind | str, digits: int | None = None, sep: str = "") -> str:
    """Render ``value`` with the largest suffix that keeps the mantissa >= 1.

    ``digits=None`` keeps 15 significant digits so the text parses back to
    the same value within 1e-12 relative.

    >>> format_quantity(1e-5, "money")
    '10µ$'
    >>> format_quantity(1e9, "bytes")
    '1GB'
    """
    kind = _kind(kind)
    value = check_quantity(value, kind)
    if kind is Kind.MONEY:
        sign = "-" if value < 0 else ""
        magnitude = abs(value)
        if 0 < magnitude < 1e-3:
            return f"{sign}{_mantissa(magnitude / 1e-6, digits)}{sep}µ$"
        return f"{sign}${_mantissa(magnitude, digits)}"
    if value == 0:
        unit = _UNITS[kind][0][0]
        return f"0{sep}{unit}" if unit else "0"
    name, mantissa = _pick_unit(value, _UNITS[kind], digits)
    if not name:
        return mantissa
    return f"{mantissa}{sep}{name}"
