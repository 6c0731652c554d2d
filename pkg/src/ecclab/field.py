"""Prime-field arithmetic over odd moduli with explicit operation counting.

Every element is kept fully reduced into [0, p). One code path serves both
the 256-bit standard prime and tiny test primes: products are reduced with
generic Barrett reduction driven by constants precomputed on the Modulus,
and arbitrary-width integers enter through shift-subtract long division
(`fe_reduce`). Nothing here is constant-time; this is instrumentation-grade
arithmetic, not a production signer.

Counting is explicit. Call sites that want multiplication/squaring/addition/
inversion tallies pass an OpCounter; passing None skips accounting. There is
no global tally, so parallel scopes cannot contaminate each other.

Internally an element's magnitude is a Python int (the natural fixed-width
unsigned integer here); `to_limbs`/`from_limbs` expose the equivalent
four-limb little-endian 64-bit view used by the byte-level interfaces.
"""

from __future__ import annotations

from dataclasses import dataclass


class ModulusMismatchError(ValueError):
    """Two elements from different fields were combined."""


class NonInvertibleError(ZeroDivisionError):
    """Inverse of zero requested."""


@dataclass(frozen=True)
class Modulus:
    """An odd modulus >= 3 with precomputed Barrett constants.

    Callers are responsible for primality where inversion correctness
    requires it (Fermat inversion assumes a prime modulus).
    """

    value: int
    bit_length: int
    barrett_mu: int  # floor(4**bit_length / value)

    def __init__(self, value: int):
        if value < 3 or value % 2 == 0:
            raise ValueError(f"modulus must be odd and >= 3, got {value}")
        k = value.bit_length()
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "bit_length", k)
        object.__setattr__(self, "barrett_mu", (1 << (2 * k)) // value)

    @property
    def byte_width(self) -> int:
        return (self.bit_length + 7) // 8

    @property
    def hex_width(self) -> int:
        return (self.bit_length + 3) // 4


@dataclass(frozen=True, slots=True)
class FieldElement:
    """A fully reduced residue. Construct through fe()/fe_reduce, not directly."""

    value: int
    modulus: Modulus

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"FieldElement(0x{self.value:x} mod 0x{self.modulus.value:x})"


@dataclass
class OpCounter:
    """Tally of priced field operations within one counting scope.

    `additions` counts both additions and subtractions; negation and
    multiplication by small constants implemented as repeated addition
    are priced through the additions they perform.
    """

    mults: int = 0
    squarings: int = 0
    additions: int = 0
    inversions: int = 0

    def reset(self) -> None:
        self.mults = 0
        self.squarings = 0
        self.additions = 0
        self.inversions = 0

    def copy(self) -> "OpCounter":
        return OpCounter(self.mults, self.squarings, self.additions, self.inversions)

    def as_dict(self) -> dict[str, int]:
        return {
            "mults": self.mults,
            "squarings": self.squarings,
            "additions": self.additions,
            "inversions": self.inversions,
        }


def _barrett_reduce(a: int, m: Modulus) -> int:
    # Valid for 0 <= a < 4**bit_length, which covers any product of two
    # reduced residues. HAC algorithm 14.42 with at most two corrections.
    k = m.bit_length
    q = ((a >> (k - 1)) * m.barrett_mu) >> (k + 1)
    r = a - q * m.value
    while r >= m.value:
        r -= m.value
    return r


def _shift_subtract_reduce(a: int, m: int) -> int:
    # Restoring binary long division; total for any width of a.
    if a < m:
        return a
    shift = a.bit_length() - m.bit_length()
    mm = m << shift
    while shift >= 0:
        if a >= mm:
            a -= mm
        mm >>= 1
        shift -= 1
    return a


def fe(value: int, m: Modulus) -> FieldElement:
    """Validating constructor: reduces any non-negative integer into the field."""
    if value < 0:
        raise ValueError("field elements are unsigned")
    if value >= m.value:
        value = _shift_subtract_reduce(value, m.value)
    return FieldElement(value, m)


def fe_reduce(a: int, m: Modulus) -> FieldElement:
    """Reduce an arbitrary-width unsigned integer: a - m*floor(a/m)."""
    if a < 0:
        raise ValueError("fe_reduce takes unsigned input")
    return FieldElement(_shift_subtract_reduce(a, m.value), m)


def _require_same(a: FieldElement, b: FieldElement) -> None:
    if a.modulus.value != b.modulus.value:
        raise ModulusMismatchError(
            f"mixed moduli: 0x{a.modulus.value:x} vs 0x{b.modulus.value:x}"
        )


def fe_add(a: FieldElement, b: FieldElement, counter: OpCounter | None = None) -> FieldElement:
    _require_same(a, b)
    s = a.value + b.value
    p = a.modulus.value
    if s >= p:
        s -= p
    if counter is not None:
        counter.additions += 1
    return FieldElement(s, a.modulus)


def fe_sub(a: FieldElement, b: FieldElement, counter: OpCounter | None = None) -> FieldElement:
    _require_same(a, b)
    d = a.value - b.value
    if d < 0:
        d += a.modulus.value
    if counter is not None:
        counter.additions += 1
    return FieldElement(d, a.modulus)


def fe_neg(a: FieldElement) -> FieldElement:
    # Negation is free in the cost model, matching how the priced operation
    # tables treat it.
    if a.value == 0:
        return a
    return FieldElement(a.modulus.value - a.value, a.modulus)


def fe_mul(a: FieldElement, b: FieldElement, counter: OpCounter | None = None) -> FieldElement:
    _require_same(a, b)
    if counter is not None:
        counter.mults += 1
    return FieldElement(_barrett_reduce(a.value * b.value, a.modulus), a.modulus)


def fe_sqr(a: FieldElement, counter: OpCounter | None = None) -> FieldElement:
    # Squarings are tallied separately from general multiplications because
    # the cost model prices them differently.
    if counter is not None:
        counter.squarings += 1
    return FieldElement(_barrett_reduce(a.value * a.value, a.modulus), a.modulus)


def fe_pow(a: FieldElement, e: int, counter: OpCounter | None = None) -> FieldElement:
    """Left-to-right binary exponentiation; counts its squarings and mults."""
    if e < 0:
        raise ValueError("negative exponent")
    if e == 0:
        return FieldElement(1 % a.modulus.value, a.modulus)
    result = a
    for i in range(e.bit_length() - 2, -1, -1):
        result = fe_sqr(result, counter)
        if (e >> i) & 1:
            result = fe_mul(result, a, counter)
    return result


def fe_inv(a: FieldElement, counter: OpCounter | None = None) -> FieldElement:
    """Inverse by Fermat exponentiation a**(p-2); modulus must be prime.

    The internal squarings and multiplications of the exponentiation do
    increment the counter, on top of the inversion tally itself.
    """
    if a.value == 0:
        raise NonInvertibleError("zero has no inverse")
    if counter is not None:
        counter.inversions += 1
    return fe_pow(a, a.modulus.value - 2, counter)


def fe_to_hex(a: FieldElement) -> str:
    """Lowercase fixed-width big-endian hex (64 chars for a 256-bit modulus)."""
    return format(a.value, f"0{a.modulus.hex_width}x")


def fe_from_hex(s: str, m: Modulus) -> FieldElement:
    v = int(s, 16)
    if v >= m.value:
        raise ValueError(f"hex value 0x{s} is not a reduced residue")
    return FieldElement(v, m)


def fe_to_bytes(a: FieldElement, width: int | None = None) -> bytes:
    return a.value.to_bytes(width or a.modulus.byte_width, "big")


def fe_from_bytes(data: bytes, m: Modulus) -> FieldElement:
    v = int.from_bytes(data, "big")
    if v >= m.value:
        raise ValueError("byte value is not a reduced residue")
    return FieldElement(v, m)


def to_limbs(a: FieldElement) -> tuple[int, int, int, int]:
    """Little-endian 64-bit limb view of the magnitude."""
    v = a.value
    mask = (1 << 64) - 1
    return (v & mask, (v >> 64) & mask, (v >> 128) & mask, (v >> 192) & mask)


def from_limbs(limbs: tuple[int, int, int, int], m: Modulus) -> FieldElement:
    v = limbs[0] | (limbs[1] << 64) | (limbs[2] << 128) | (limbs[3] << 192)
    return fe(v, m)
