"""Working-precision plumbing.

All real quantities in this package are mpmath floats evaluated at one
fixed mantissa precision per computation.  Entry points wrap their body
in ``working_precision(bits)``; lower-level functions simply operate at
the ambient precision.  Arithmetic is deterministic for a fixed
precision (round-to-nearest), which is what makes byte-identical report
artifacts possible.
"""

from __future__ import annotations

import contextlib
from fractions import Fraction

from mpmath import mp, mpf

from .errors import PrecisionError

DEFAULT_PRECISION_BITS = 256
MIN_PRECISION_BITS = 64


def validate_bits(bits: int) -> int:
    bits = int(bits)
    if bits < MIN_PRECISION_BITS:
        raise PrecisionError(
            f"precision must be >= {MIN_PRECISION_BITS} bits, got {bits}"
        )
    return bits


@contextlib.contextmanager
def working_precision(bits: int = DEFAULT_PRECISION_BITS):
    """Context manager fixing the mantissa precision in bits."""
    with mp.workprec(validate_bits(bits)):
        yield mp


def as_scalar(x) -> mpf:
    """Convert to an mpmath float at the current working precision.

    Strings are parsed as exact decimal literals, Fractions exactly;
    Python floats convert exactly (note 0.2 as a float literal already
    carries binary rounding -- pass "0.2" when the decimal is meant).
    """
    if isinstance(x, mpf):
        return +x
    if isinstance(x, Fraction):
        return mpf(x.numerator) / mpf(x.denominator)
    if isinstance(x, (int, float, str)):
        return mpf(x)
    raise TypeError(f"cannot interpret {x!r} as a scalar")


def machine_epsilon() -> mpf:
    return mpf(2) ** (1 - mp.prec)


def decimal_digits() -> int:
    # 0.30103 ~ log10(2); a few guard digits so parsing back round-trips
    return int(mp.prec * 0.30103) + 5


def scalar_str(x) -> str:
    """Full-precision decimal string; 'inf' sentinel for the point at
    infinity (used in CSV/JSON artifacts)."""
    x = +x
    if x == mp.inf or x == mp.ninf:
        return "inf"
    if x == 0:
        return "0.0"
    return mp.nstr(x, decimal_digits())
