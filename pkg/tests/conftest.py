from fractions import Fraction

import pytest
from mpmath import mp, mpf

from stirling_sums.bigreal import to_mpf


def digits_match(value, reference, digits: int) -> bool:
    """|value - reference| <= 10^-digits * max(1, |reference|)."""
    with mp.workprec(max(mp.prec, int(digits * 3.4) + 64)):
        v = to_mpf(value) if isinstance(value, (Fraction, int, str)) else value
        r = to_mpf(reference) if isinstance(reference, (Fraction, int, str)) else reference
        return abs(v - r) <= mpf(10) ** (-digits) * max(mpf(1), abs(r))


def abs_err(value, reference, prec_bits: int = 320) -> float:
    with mp.workprec(prec_bits):
        v = to_mpf(value) if isinstance(value, (Fraction, int, str)) else value
        r = to_mpf(reference) if isinstance(reference, (Fraction, int, str)) else reference
        return float(abs(v - r))


@pytest.fixture
def x_grid():
    return [Fraction("1.25"), Fraction("3.7"), Fraction("10.5"), Fraction(25)]
