"""Integer semantics of the reversible arithmetic used by the payoff oracle.

Values live on a uniform lattice: an unsigned code ``q`` with ``bits`` bits
stands for ``q * scale / 2**(bits - 1)``, so the most significant bit weighs
exactly ``scale``. Signed quantities carry a separate sign bit, as a reversible
register would. Everything here operates on Python ints; no floating point is
involved once a value has been encoded.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class FixedPointSpec:
    bits: int
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.bits < 1:
            raise DomainError("need at least one bit")
        if not self.scale > 0:
            raise DomainError("scale must be > 0")

    @property
    def denominator(self) -> int:
        return 1 << (self.bits - 1)

    @property
    def max_code(self) -> int:
        return (1 << self.bits) - 1

    @property
    def step(self) -> float:
        return self.scale / self.denominator

    def encode(self, value: float) -> tuple[int, int]:
        """Round ``value`` to the nearest lattice point (ties to even).

        Returns ``(magnitude_code, sign_bit)``; magnitudes beyond the register
        width saturate at :attr:`max_code`.
        """
        code = round(Fraction(value) / Fraction(self.scale) * self.denominator)
        sign = 1 if code < 0 else 0
        return min(abs(code), self.max_code), sign

    def encode_array(self, values) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized :meth:`encode` returning int64 magnitudes and sign bits.

        The quotient ``value / scale`` is formed in floating point, so results
        can differ from the exact scalar path only on values within one ulp of
        a rounding tie.
        """
        if self.bits > 52:
            raise DomainError("vectorized encoding supports at most 52 bits")
        v = np.asarray(values, dtype=float)
        code = np.rint(v / self.scale * self.denominator).astype(np.int64)
        sign = (code < 0).astype(np.int64)
        return np.minimum(np.abs(code), self.max_code), sign

    def decode(self, code: int, sign: int = 0) -> float:
        if not 0 <= code <= self.max_code:
            raise DomainError(f"code {code} does not fit in {self.bits} bits")
        value = code * self.scale / self.denominator
        return -value if sign else value


def max0(code: int, sign: int) -> int:
    """``MAX(0)``: copy the magnitude into a fresh register when the sign bit is clear."""
    return 0 if sign else code


def clamp_code(code: int, cap: int) -> int:
    return code if code <= cap else cap


def add(a: int, b: int) -> int:
    return a + b


def add_mod(a: int, b: int, modulus: int) -> int:
    if not (0 <= a < modulus and 0 <= b < modulus):
        raise DomainError("operands must lie in [0, modulus)")
    return (a + b) % modulus


def mult_mod(a: int, x: int, modulus: int) -> int:
    if not 0 <= x < modulus:
        raise DomainError("x must lie in [0, modulus)")
    return (a * x) % modulus


def exp_mod(a: int, x: int, modulus: int) -> int:
    return pow(a, x, modulus)


def fraction_bits(value: float, m: int) -> list[int]:
    """First ``m`` bits ``b_1..b_m`` of ``value`` in ``[0, 1)``: ``value ~ sum b_i / 2**i``."""
    if not 0 <= value < 1:
        raise DomainError("value must lie in [0, 1)")
    q = int(Fraction(value) * (1 << m))
    return [(q >> (m - 1 - i)) & 1 for i in range(m)]


def bits_to_fraction(bits: list[int]) -> Fraction:
    """``[.b_1 b_2 ... b_m]`` as an exact rational."""
    return sum((Fraction(b, 1 << (i + 1)) for i, b in enumerate(bits)), Fraction(0))
