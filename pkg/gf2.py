"""
Binary extension field GF(2^N) arithmetic.

Polynomials over GF(2) are represented as nonnegative integers: the polynomial
b_n x^n + ... + b_1 x + b_0 corresponds to the integer b_n 2^n + ... + b_1 2 + b_0.
A FieldContext fixes the degree N and an irreducible modulus; FieldElements carry a
reference to their context and never combine across contexts.
"""
import functools
import logging
import random
from typing import Dict, Iterator, Optional, Tuple

from sympy import factorint, primefactors

from errors import FieldError, ParameterError, VerificationError

logger = logging.getLogger(__name__)

MAX_FIELD_DEGREE = 4096
# Above this degree 2^N - 1 is not factored; element orders need an explicit bound.
FACTORABLE_DEGREE = 64

# x^0..x^7 spread to x^0, x^2, ..., x^14: squaring is linear in characteristic 2.
_SPREAD = tuple(
    sum(((b >> i) & 1) << (2 * i) for i in range(8)).to_bytes(2, "little") for b in range(256)
)
# Irreducibles of degree <= 4, used to reject most candidates before the full test.
_SMALL_IRREDUCIBLES = (0b11, 0b111, 0b1011, 0b1101, 0b10011, 0b11001, 0b11111)


def _degree(a: int) -> int:
    return a.bit_length() - 1


def _clmul(a: int, b: int) -> int:
    """Carry-less product, shift-xor schoolbook with a 4-bit window for long operands."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    if b.bit_length() <= 32:
        c = 0
        while b:
            if b & 1:
                c ^= a
            a <<= 1
            b >>= 1
        return c
    table = [0] * 16
    table[1] = a
    for i in range(2, 16):
        table[i] = table[i >> 1] << 1 if i % 2 == 0 else table[i - 1] ^ a
    c = 0
    top = (b.bit_length() + 3) // 4 * 4
    for pos in range(top - 4, -1, -4):
        c = (c << 4) ^ table[(b >> pos) & 15]
    return c


def _square(a: int) -> int:
    if a < 2:
        return a
    raw = a.to_bytes((a.bit_length() + 7) // 8, "little")
    return int.from_bytes(b"".join([_SPREAD[byte] for byte in raw]), "little")


def _fold(a: int, n: int, low: int, mask: int) -> int:
    # x^n = low modulo x^n + low; each pass strictly lowers the degree.
    while a >> n:
        a = (a & mask) ^ _clmul(a >> n, low)
    return a


def _mod(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero polynomial")
    n = _degree(b)
    while a and _degree(a) >= n:
        a ^= b << (_degree(a) - n)
    return a


def _divmod(a: int, b: int) -> Tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("division by zero polynomial")
    n = _degree(b)
    q = 0
    while a and _degree(a) >= n:
        shift = _degree(a) - n
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _mod(a, b)
    return a


def _invert(a: int, b: int) -> int:
    s, s1 = 1, 0
    while b:
        q, r = _divmod(a, b)
        a, b = b, r
        s, s1 = s1, s ^ _clmul(q, s1)
    if a != 1:
        raise FieldError("inverse does not exist")
    return s


def is_irreducible(f: int) -> bool:
    """
    Rabin test: x^(2^N) = x mod f, and gcd(x^(2^(N/q)) - x, f) = 1 for every prime q | N.
    """
    n = _degree(f)
    if n < 1:
        return False
    if n == 1:
        return True
    if not f & 1:
        return False
    low, mask = f ^ (1 << n), (1 << n) - 1
    checkpoints = {n // q for q in primefactors(n)}
    saved: Dict[int, int] = {}
    h = 2
    for i in range(1, n + 1):
        h = _fold(_square(h), n, low, mask)
        if i in checkpoints:
            saved[i] = h
    if h != 2:
        return False
    return all(_gcd(f, saved[k] ^ 2) == 1 for k in checkpoints)


def find_irreducible(n: int) -> int:
    """Lexicographically smallest irreducible polynomial of degree n (x for n = 1)."""
    if n == 1:
        return 0b10
    top = 1 << n
    for low in range(1, top, 2):
        f = top | low
        if bin(f).count("1") % 2 == 0:
            continue
        if any(f != d and _mod(f, d) == 0 for d in _SMALL_IRREDUCIBLES if _degree(d) < n):
            continue
        if is_irreducible(f):
            return f
    raise VerificationError(f"no irreducible polynomial of degree {n} found")


class FieldContext:
    """GF(2^N) = GF(2)[x] / (modulus)."""

    __slots__ = ("degree", "modulus", "group_order", "_low", "_mask", "_factors")

    def __init__(self, degree: int, modulus: int):
        if _degree(modulus) != degree:
            raise ParameterError(f"modulus degree {_degree(modulus)} != {degree}")
        self.degree = degree
        self.modulus = modulus
        self.group_order = (1 << degree) - 1
        self._low = modulus ^ (1 << degree)
        self._mask = (1 << degree) - 1
        self._factors: Dict[int, Tuple[Tuple[int, int], ...]] = {}

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldContext):
            return NotImplemented
        return self.degree == other.degree and self.modulus == other.modulus

    def __hash__(self) -> int:
        return hash((self.degree, self.modulus))

    def __repr__(self) -> str:
        return f"FieldContext(degree={self.degree}, modulus=0x{self.modulus:x})"

    def reduce(self, a: int) -> int:
        return _fold(a, self.degree, self._low, self._mask)

    def element(self, value: int) -> "FieldElement":
        if value < 0:
            raise ParameterError("field element value must be nonnegative")
        return FieldElement(self.reduce(value), self)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def factor(self, m: int) -> Tuple[Tuple[int, int], ...]:
        """Cached prime factorisation of a selected divisor m of 2^N - 1."""
        if m not in self._factors:
            self._factors[m] = tuple(sorted((int(q), int(e)) for q, e in factorint(m).items()))
        return self._factors[m]

    def elements(self) -> Iterator["FieldElement"]:
        for value in range(1 << self.degree):
            yield FieldElement(value, self)

    def random_element(self, rng: random.Random, nonzero: bool = False) -> "FieldElement":
        low = 1 if nonzero else 0
        return FieldElement(rng.randrange(low, 1 << self.degree), self)

    def from_hex(self, text: str) -> "FieldElement":
        try:
            tag, degree, digits = text.split(":")
        except ValueError:
            raise ParameterError(f"malformed field element {text!r}") from None
        if tag != "gf2" or int(degree) != self.degree:
            raise FieldError(f"element {text!r} does not belong to GF(2^{self.degree})")
        value = int(digits, 16)
        if value >> self.degree:
            raise FieldError(f"element {text!r} is not reduced")
        return FieldElement(value, self)


class FieldElement:
    """Element of GF(2^N): a bit polynomial of degree < N plus its context."""

    __slots__ = ("value", "ctx")

    def __init__(self, value: int, ctx: FieldContext):
        self.value = value
        self.ctx = ctx

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise FieldError(f"elements of {self.ctx} and {other.ctx} do not combine")
            return other.value
        if isinstance(other, int):
            if other < 0:
                raise ParameterError("field element value must be nonnegative")
            return self.ctx.reduce(other)
        raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")

    def __add__(self, other) -> "FieldElement":
        return FieldElement(self.value ^ self._coerce(other), self.ctx)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self) -> "FieldElement":
        return self

    def __mul__(self, other) -> "FieldElement":
        return FieldElement(self.ctx.reduce(_clmul(self.value, self._coerce(other))), self.ctx)

    __rmul__ = __mul__

    def square(self) -> "FieldElement":
        return FieldElement(self.ctx.reduce(_square(self.value)), self.ctx)

    def __pow__(self, exponent: int) -> "FieldElement":
        exponent = int(exponent)
        if exponent < 0:
            return self.inverse() ** (-exponent)
        if self.value == 0:
            return self.ctx.one if exponent == 0 else self.ctx.zero
        exponent %= self.ctx.group_order
        reduce = self.ctx.reduce
        base, result = self.value, 1
        for bit in bin(exponent)[2:]:
            result = reduce(_square(result))
            if bit == "1":
                result = reduce(_clmul(result, base))
        return FieldElement(result, self.ctx)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise FieldError("inverse of zero")
        return FieldElement(self.ctx.reduce(_invert(self.value, self.ctx.modulus)), self.ctx)

    def __truediv__(self, other) -> "FieldElement":
        if not isinstance(other, FieldElement):
            other = self.ctx.element(self._coerce(other))
        return self * other.inverse()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.ctx == other.ctx and self.value == other.value

    def __hash__(self) -> int:
        return hash((self.ctx.degree, self.ctx.modulus, self.value))

    def __bool__(self) -> bool:
        return self.value != 0

    def is_zero(self) -> bool:
        return self.value == 0

    def is_one(self) -> bool:
        return self.value == 1

    def to_hex(self) -> str:
        words = max(1, (self.ctx.degree + 63) // 64)
        return f"gf2:{self.ctx.degree}:{self.value:0{16 * words}x}"

    def __repr__(self) -> str:
        return f"FieldElement(0x{self.value:x}, N={self.ctx.degree})"


@functools.lru_cache(maxsize=None)
def make_context(n: int) -> FieldContext:
    """Context for GF(2^n) with the lexicographically smallest irreducible modulus."""
    if not 1 <= n <= MAX_FIELD_DEGREE:
        raise ParameterError(f"field degree {n} outside 1..{MAX_FIELD_DEGREE}")
    modulus = find_irreducible(n)
    logger.info("GF(2^%d) modulus 0x%x", n, modulus)
    return FieldContext(n, modulus)


def frobenius(a: FieldElement, k: int = 1) -> FieldElement:
    """a^(2^k) by k squarings."""
    for _ in range(k):
        a = a.square()
    return a


def has_order(a: FieldElement, m: int) -> bool:
    """True iff the multiplicative order of a is exactly m."""
    if a.is_zero() or not (a**m).is_one():
        return False
    return all(not (a ** (m // q)).is_one() for q, _ in a.ctx.factor(m))


def element_order(a: FieldElement, bound: Optional[int] = None) -> int:
    """
    Exact multiplicative order of a, descending from `bound` through its prime factors.

    The bound defaults to 2^N - 1 only for small N; larger fields must pass a bound
    known to be a multiple of the order (here p^(r+1)).
    """
    if a.is_zero():
        raise FieldError("zero has no multiplicative order")
    ctx = a.ctx
    if bound is None:
        if ctx.degree > FACTORABLE_DEGREE:
            raise ParameterError(f"GF(2^{ctx.degree}) needs an explicit order bound")
        bound = ctx.group_order
    if not (a**bound).is_one():
        raise FieldError(f"order of {a!r} does not divide {bound}")
    order = bound
    for q, e in ctx.factor(bound):
        for _ in range(e):
            if (a ** (order // q)).is_one():
                order //= q
            else:
                break
    return order


def primitive_root_of_unity(ctx: FieldContext, m: int) -> FieldElement:
    """
    First c^((2^N-1)/m) of order exactly m, walking c = 1, x, x+1, x^2, ... in counting order.
    """
    if m < 1 or ctx.group_order % m:
        raise ParameterError(f"{m} does not divide 2^{ctx.degree} - 1")
    if m == 1:
        return ctx.one
    cofactor = ctx.group_order // m
    for value in range(1, 1 << ctx.degree):
        candidate = FieldElement(value, ctx) ** cofactor
        if has_order(candidate, m):
            logger.debug("Primitive %d-th root of unity from candidate 0x%x", m, value)
            return candidate
    raise VerificationError(f"no element of order {m} in GF(2^{ctx.degree})")


def trace_to_subfield(a: FieldElement, n: int, k: int, verify: bool = True) -> FieldElement:
    """
    Tr_k^n(a) = a + a^(2^k) + ... + a^(2^((n/k - 1) k)) for a in the degree-n subfield.

    With verify, a^(2^n) = a and result^(2^k) = result are certified.
    """
    ambient = a.ctx.degree
    if k < 1 or n < 1 or n % k or ambient % n:
        raise ParameterError(f"need k | n | N, got k={k}, n={n}, N={ambient}")
    if verify and frobenius(a, n) != a:
        raise FieldError(f"{a!r} is not in the degree-{n} subfield")
    total = conjugate = a
    for _ in range(n // k - 1):
        conjugate = frobenius(conjugate, k)
        total = total + conjugate
    if verify and frobenius(total, k) != total:
        raise FieldError(f"Tr_{k}^{n} result left the degree-{k} subfield")
    return total
