"""Sound arithmetic on partially determined binary expansions.

A finite bit prefix pins its value down to a half-open dyadic interval.
Arithmetic acts on the interval with exact rational endpoints, and an output
digit is emitted only when every point of the interval agrees on it.  Emitted
digits are therefore correct no matter how the undetermined tail resolves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EnumerationBoundError, UnitMismatchError
from .models import BitPrefix, IndependentBitsModel, SampleMatrix
from .propensity import TailPolicy

EXACT_ENUMERATION_MAX_DEPTH = 20


@dataclass(frozen=True)
class PartialNumber:
    """Half-open interval [low, high) of exact rationals, tagged with a unit."""

    low: Fraction
    high: Fraction
    unit: str = "1"

    def __post_init__(self) -> None:
        object.__setattr__(self, "low", Fraction(self.low))
        object.__setattr__(self, "high", Fraction(self.high))
        if not self.low < self.high:
            raise ValueError(f"empty interval [{self.low}, {self.high})")

    @property
    def width(self) -> Fraction:
        return self.high - self.low


@dataclass(frozen=True)
class DeterminedDigits:
    """Digits every completion of an interval agrees on.

    ``integer_part`` is None when the interval spans an integer boundary; in
    that case no fractional digits are reported either.  Fractional bits stop
    at the first position that varies across the interval.
    """

    integer_part: int | None
    fraction_bits: tuple[int, ...]

    def as_string(self) -> str:
        head = "?" if self.integer_part is None else str(self.integer_part)
        return f"{head}.{''.join(str(b) for b in self.fraction_bits)}"


def prefix_to_interval(p: BitPrefix, unit: str = "1") -> PartialNumber:
    """Dyadic interval [value, value + 2^-d) of a depth-d prefix."""
    v = p.value
    return PartialNumber(low=v, high=v + Fraction(1, 1 << p.depth), unit=unit)


def scale_by_constant(x: PartialNumber, c: Fraction, unit: str | None = None) -> PartialNumber:
    """Multiply by an exact positive rational constant (change of units)."""
    c = Fraction(c)
    if c <= 0:
        raise ValueError(f"scaling constant must be positive, got {c}")
    return PartialNumber(low=c * x.low, high=c * x.high,
                         unit=x.unit if unit is None else unit)


def add(x: PartialNumber, y: PartialNumber) -> PartialNumber:
    """Sum of two partial numbers; unit labels must match."""
    if x.unit != y.unit:
        raise UnitMismatchError(f"cannot add {x.unit!r} to {y.unit!r}")
    return PartialNumber(low=x.low + y.low, high=x.high + y.high, unit=x.unit)


def determined_digits(x: PartialNumber) -> DeterminedDigits:
    """All output digits that are constant across the interval.

    The integer part is determined iff floor is constant on [low, high).
    Fractional bits are then peeled off by doubling: a bit is determined iff
    the doubled interval stays within one unit cell.  The loop terminates
    because the width doubles at every step.
    """
    fl = math.floor(x.low)
    if x.high > fl + 1:
        return DeterminedDigits(integer_part=None, fraction_bits=())
    a = x.low - fl
    b = x.high - fl
    bits: list[int] = []
    while True:
        a2 = 2 * a
        b2 = 2 * b
        if b2 <= 1:
            bits.append(0)
        elif a2 >= 1:
            bits.append(1)
            a2 -= 1
            b2 -= 1
        else:
            break
        a, b = a2, b2
    return DeterminedDigits(integer_part=fl, fraction_bits=tuple(bits))


def digits_of_rational(z: Fraction, n_frac: int) -> tuple[int, tuple[int, ...]]:
    """Integer part and first n_frac exact binary fraction digits of z >= 0."""
    z = Fraction(z)
    if z < 0:
        raise ValueError("only nonnegative values have a binary expansion here")
    int_part = math.floor(z)
    num = (z - int_part).numerator
    den = (z - int_part).denominator
    bits = []
    for _ in range(n_frac):
        num *= 2
        bit, num = divmod(num, den)
        bits.append(bit)
    return int_part, tuple(bits)


def _head_weights(pv, depth: int) -> tuple[list[Fraction], int]:
    """Exact weight of each head of explicit-prefix bits; tail bits are fair."""
    m = min(pv.prefix_length, depth)
    weights = []
    for head in range(1 << m):
        w = Fraction(1)
        for j in range(m):
            bit = (head >> (m - 1 - j)) & 1
            q = pv.prefix[j]
            w *= q if bit else 1 - q
        weights.append(w)
    return weights, m


def scaled_digit_table(c: Fraction, depth: int) -> list[DeterminedDigits]:
    """Determined digits of c * [v/2^d, (v+1)/2^d) for every prefix value v."""
    c = Fraction(c)
    if c <= 0:
        raise ValueError(f"scaling constant must be positive, got {c}")
    if depth > EXACT_ENUMERATION_MAX_DEPTH:
        raise EnumerationBoundError(
            f"depth {depth} exceeds exact enumeration bound {EXACT_ENUMERATION_MAX_DEPTH}"
        )
    step = Fraction(1, 1 << depth)
    table = []
    for v in range(1 << depth):
        x = PartialNumber(low=v * step, high=(v + 1) * step)
        table.append(determined_digits(scale_by_constant(x, c)))
    return table


def scale_fiq_truncated(
    model: IndependentBitsModel,
    c: Fraction,
    depth: int,
) -> dict[DeterminedDigits, Fraction]:
    """Exact law of the determined digits of c * Q at truncation depth d.

    Enumerates every depth-d prefix with its exact propensity weight (half
    tails weight the positions beyond the explicit prefix by 1/2 each); the
    undetermined tail beyond d is carried by the interval itself.
    """
    if not isinstance(model, IndependentBitsModel):
        raise TypeError("exact scaling is defined for independent-bit models only")
    pv = model.pv
    if pv.tail is TailPolicy.UNSPECIFIED and depth > pv.prefix_length:
        # propensity_at would be undefined beyond the prefix
        from .errors import DepthBeyondKnowledgeError

        raise DepthBeyondKnowledgeError(
            f"depth {depth} exceeds prefix length {pv.prefix_length} with unspecified tail"
        )
    table = scaled_digit_table(c, depth)
    head_weights, m = _head_weights(pv, depth)
    tail_weight = Fraction(1, 1 << (depth - m))
    dist: dict[DeterminedDigits, Fraction] = {}
    for v, dd in enumerate(table):
        w = head_weights[v >> (depth - m)] * tail_weight if depth > m else head_weights[v]
        if w:
            dist[dd] = dist.get(dd, Fraction(0)) + w
    return dist


def prefix_values(sample: SampleMatrix) -> np.ndarray:
    """Integer value sum bits_j 2^(d-j) of every row; usable as a table index."""
    d = sample.depth
    powers = (1 << np.arange(d - 1, -1, -1)).astype(np.int64)
    return sample.bits.astype(np.int64) @ powers
