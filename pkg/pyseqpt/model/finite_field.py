"""Finite fields GF(p^n) and the Galois ring GR(4, n)

Elements are stored in the polynomial basis over a monic irreducible modulus, coefficients
low-degree first. The modulus is the lexicographically smallest irreducible polynomial, so
every table derived from a field is reproducible.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import List, Sequence, Tuple, Union

import attr

from pyseqpt.exceptions import ConfigError, FieldMismatch
from pyseqpt.util import is_prime


Poly = Tuple[int, ...]


def _trim(poly: Sequence[int]) -> Poly:
    """Drop trailing zero coefficients (zero polynomial becomes ())"""
    coeffs = list(poly)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _poly_mul(a: Sequence[int], b: Sequence[int], modulo: int) -> Poly:
    out = [0] * max(len(a) + len(b) - 1, 0)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % modulo
    return _trim(out)


def _poly_rem(a: Sequence[int], monic: Sequence[int], modulo: int) -> Poly:
    """Remainder of a modulo a monic polynomial, coefficients mod `modulo`"""
    rest = [c % modulo for c in a]
    degree = len(monic) - 1
    for shift in range(len(rest) - 1 - degree, -1, -1):
        lead = rest[shift + degree]
        if lead:
            for k, mk in enumerate(monic):
                rest[shift + k] = (rest[shift + k] - lead * mk) % modulo
    return _trim(rest[:degree])


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """
    Brute-force irreducibility test over GF(p).

    :param modulus: monic polynomial, coefficients low-degree first
    :param p: prime characteristic
    """
    degree = len(modulus) - 1
    if degree < 1 or modulus[-1] != 1:
        return False
    for k in range(1, degree // 2 + 1):
        for lower in product(range(p), repeat=k):
            if not _poly_rem(modulus, lower + (1,), p):
                return False
    return True


@lru_cache(maxsize=None)
def _find_irreducible(p: int, n: int) -> Poly:
    for lower in product(range(p), repeat=n):
        candidate = lower + (1,)
        if is_irreducible(candidate, p):
            return candidate
    raise AssertionError(f"no irreducible polynomial of degree {n} over GF({p})")


def find_irreducible(p: int, n: int) -> List[int]:
    """
    Lexicographically smallest monic irreducible polynomial of degree n over GF(p).

    Coefficients are returned low-degree first and compared low-degree first.
    """
    if not is_prime(p):
        raise ConfigError(f"characteristic {p} is not prime")
    if n < 1:
        raise ConfigError(f"extension degree must be >= 1, got {n}")
    return list(_find_irreducible(p, n))


@attr.s(frozen=True, repr=False)
class FieldSpec:
    """GF(p^n) presented as GF(p)[x]/(modulus)"""

    p: int = attr.ib()
    n: int = attr.ib()
    modulus: Poly = attr.ib(converter=tuple)

    def __attrs_post_init__(self):
        if not is_prime(self.p):
            raise ConfigError(f"characteristic {self.p} is not prime")
        if self.n < 1:
            raise ConfigError(f"extension degree must be >= 1, got {self.n}")
        if len(self.modulus) != self.n + 1 or self.modulus[-1] != 1:
            raise ConfigError(f"modulus {self.modulus} is not monic of degree {self.n}")
        if not is_irreducible(self.modulus, self.p):
            raise ConfigError(f"modulus {self.modulus} is reducible over GF({self.p})")

    def __repr__(self):
        return f"FieldSpec(GF({self.p}^{self.n}), modulus={list(self.modulus)})"

    @classmethod
    def of(cls, p: int, n: int = 1) -> FieldSpec:
        """Field with the canonical modulus"""
        return _field_spec(p, n)

    @property
    def size(self) -> int:
        """Number of elements p^n"""
        return self.p ** self.n

    def element(self, value: Union[int, Sequence[int]]) -> FieldElement:
        """Element from its integer encoding sum(c_k p^k) or from a coefficient list"""
        if isinstance(value, int):
            if not 0 <= value < self.size:
                raise ConfigError(f"{value} does not encode an element of GF({self.size})")
            coeffs = []
            for _ in range(self.n):
                value, c = divmod(value, self.p)
                coeffs.append(c)
            return FieldElement(self, tuple(coeffs))
        coeffs = [c % self.p for c in value]
        if len(coeffs) > self.n:
            coeffs = list(_poly_rem(coeffs, self.modulus, self.p))
        return FieldElement(self, tuple(coeffs + [0] * (self.n - len(coeffs))))

    def elements(self) -> List[FieldElement]:
        """All elements in order of their integer encoding"""
        return [self.element(k) for k in range(self.size)]

    @property
    def zero(self) -> FieldElement:
        return self.element(0)

    @property
    def one(self) -> FieldElement:
        return self.element(1)


@lru_cache(maxsize=None)
def _field_spec(p: int, n: int) -> FieldSpec:
    return FieldSpec(p, n, find_irreducible(p, n))


@attr.s(frozen=True, repr=False)
class FieldElement:
    """Element of GF(p^n), polynomial basis"""

    field: FieldSpec = attr.ib()
    coefficients: Poly = attr.ib(converter=tuple)

    def __repr__(self):
        return f"FieldElement({list(self.coefficients)} in GF({self.field.size}))"

    def __int__(self):
        return sum(c * self.field.p ** k for k, c in enumerate(self.coefficients))

    def __add__(self, other):
        return ff_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return ff_neg(self)

    def __sub__(self, other):
        return ff_add(self, ff_neg(_coerce(self.field, other)))

    def __mul__(self, other):
        return ff_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        return ff_pow(self, exponent)

    def is_zero(self) -> bool:
        return not any(self.coefficients)


def _coerce(field: FieldSpec, value) -> FieldElement:
    """Integers are read as elements of the prime subfield"""
    if isinstance(value, FieldElement):
        if value.field != field:
            raise FieldMismatch(f"{value.field} and {field} differ")
        return value
    if isinstance(value, int):
        return field.element([value % field.p])
    raise TypeError(f"cannot combine {type(value).__name__} with a field element")


def ff_add(a: FieldElement, b: Union[FieldElement, int]) -> FieldElement:
    """a + b"""
    b = _coerce(a.field, b)
    p = a.field.p
    return FieldElement(
        a.field, tuple((x + y) % p for x, y in zip(a.coefficients, b.coefficients))
    )


def ff_neg(a: FieldElement) -> FieldElement:
    """-a"""
    p = a.field.p
    return FieldElement(a.field, tuple((-x) % p for x in a.coefficients))


def ff_mul(a: FieldElement, b: Union[FieldElement, int]) -> FieldElement:
    """a * b, reduced modulo the field modulus"""
    b = _coerce(a.field, b)
    field = a.field
    prod = _poly_mul(a.coefficients, b.coefficients, field.p)
    return field.element(list(_poly_rem(prod, field.modulus, field.p)))


def ff_pow(a: FieldElement, exponent: Union[FieldElement, int]) -> FieldElement:
    """
    a ** exponent by square and multiply.

    A field-element exponent is read through its integer encoding; negative exponents
    invert a nonzero base.
    """
    if isinstance(exponent, FieldElement):
        exponent = int(exponent)
    if exponent < 0:
        if a.is_zero():
            raise ZeroDivisionError("zero has no multiplicative inverse")
        exponent %= a.field.size - 1
    result = a.field.one
    base = a
    while exponent:
        if exponent & 1:
            result = ff_mul(result, base)
        base = ff_mul(base, base)
        exponent >>= 1
    return result


def ff_inverse(a: FieldElement) -> FieldElement:
    """a^-1 = a^(q-2)"""
    if a.is_zero():
        raise ZeroDivisionError("zero has no multiplicative inverse")
    return ff_pow(a, a.field.size - 2)


def ff_trace(a: FieldElement) -> int:
    """Absolute trace sum_k a^(p^k), an element of the prime subfield"""
    total = a.field.zero
    conjugate = a
    for _ in range(a.field.n):
        total = ff_add(total, conjugate)
        conjugate = ff_pow(conjugate, a.field.p)
    assert not any(total.coefficients[1:]), "trace left the prime subfield"
    return total.coefficients[0]


class GaloisRing4:
    """
    GR(4, n) = Z_4[x]/(h) where h is the irreducible GF(2) modulus read over Z_4.

    Elements are coefficient tuples of length n with entries in Z_4.
    """

    def __init__(self, field: FieldSpec):
        if field.p != 2:
            raise ConfigError("the Galois ring GR(4, n) lifts a characteristic-2 field")
        self.field = field
        self.n = field.n
        self.modulus = field.modulus
        self.q = field.size

    def __repr__(self):
        return f"GaloisRing4(n={self.n}, modulus={list(self.modulus)})"

    def _pad(self, poly: Sequence[int]) -> Poly:
        return tuple(list(poly) + [0] * (self.n - len(poly)))

    def add(self, a: Poly, b: Poly) -> Poly:
        return tuple((x + y) % 4 for x, y in zip(a, b))

    def scale(self, a: Poly, k: int) -> Poly:
        return tuple((k * x) % 4 for x in a)

    def mul(self, a: Poly, b: Poly) -> Poly:
        return self._pad(_poly_rem(_poly_mul(a, b, 4), self.modulus, 4))

    def power(self, a: Poly, exponent: int) -> Poly:
        result = self._pad((1,))
        base = a
        while exponent:
            if exponent & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            exponent >>= 1
        return result

    def teichmuller(self, u: FieldElement) -> Poly:
        """Teichmuller representative of u: any lift raised to the power q"""
        return self.power(tuple(u.coefficients), self.q)

    def frobenius(self, y: Poly) -> Poly:
        """sigma(t + 2s) = t^2 + 2 s^2 for Teichmuller t, s"""
        t = self.power(y, self.q)
        twice_s = self.add(y, self.scale(t, 3))
        assert all(c % 2 == 0 for c in twice_s), "y and its Teichmuller part differ mod 2"
        s_bar = self.field.element([c // 2 for c in twice_s])
        s_sq = ff_mul(s_bar, s_bar)
        return self.add(self.mul(t, t), self.scale(s_sq.coefficients, 2))

    def trace(self, y: Poly) -> int:
        """Ring trace sum_k sigma^k(y), an element of Z_4"""
        total = self._pad(())
        conjugate = tuple(y)
        for _ in range(self.n):
            total = self.add(total, conjugate)
            conjugate = self.frobenius(conjugate)
        assert not any(total[1:]), "ring trace left Z_4"
        return total[0]
