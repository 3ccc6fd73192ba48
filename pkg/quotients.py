"""
Integer-side number theory: Euler quotients, multiplicative orders, primitive roots,
generalized cyclotomic classes and Wieferich detection.
"""
import functools
import logging
from dataclasses import dataclass
from itertools import count
from math import gcd
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator
from sympy import isprime, n_order
from sympy.ntheory.residue_ntheory import is_primitive_root as sympy_is_primitive_root

from errors import ParameterError, VerificationError

logger = logging.getLogger(__name__)

# Classes are kept as sorted lists up to this modulus; above it they are generated on demand.
MATERIALIZE_LIMIT = 10**6


def require_odd_prime(p: int) -> int:
    if p < 3 or not isprime(p):
        raise ParameterError("p must be an odd prime")
    return p


def require_level(r: int) -> int:
    if r < 1:
        raise ParameterError("r must be >= 1")
    return r


class Params(BaseModel):
    """The pair (p, r_frak) fixing one sequence family member."""

    model_config = ConfigDict(frozen=True)

    p: int
    r_frak: int

    @field_validator("p")
    @classmethod
    def _odd_prime(cls, value: int) -> int:
        return require_odd_prime(value)

    @field_validator("r_frak")
    @classmethod
    def _positive_level(cls, value: int) -> int:
        return require_level(value)

    @property
    def period(self) -> int:
        return self.p ** (self.r_frak + 1)

    @property
    def modulus_levels(self) -> List[int]:
        return [self.p ** (r + 1) for r in range(1, self.r_frak + 1)]

    @property
    def threshold_classes(self) -> range:
        """Class indices l with e_u = 1, i.e. (p^r+1)/2 <= l < p^r."""
        size = self.p ** self.r_frak
        return range((size + 1) // 2, size)


class NormalizedRoot(BaseModel):
    """Primitive root g modulo p^(r+1) with Q_r(g) = 1."""

    model_config = ConfigDict(frozen=True)

    g: int
    witness_order: int


class TwoOrderProfile(BaseModel):
    """Orders of 2 modulo the powers of p."""

    model_config = ConfigDict(frozen=True)

    p: int
    lam: int
    t0: int
    orders: List[int]
    wieferich: bool

    def order_at(self, r: int) -> int:
        """Order of 2 modulo p^r from the tower law."""
        if r <= self.t0:
            return self.lam
        return self.lam * self.p ** (r - self.t0)

    def subgroup_step(self, r: int) -> int:
        """Exponent s such that {2^(j*s) mod p^(r+1) : j < lam} is the order-lam subgroup."""
        if r < self.t0:
            return 1
        return self.p ** (r + 1 - self.t0)


@functools.lru_cache(maxsize=None)
def _check_prime_level(p: int, r: int) -> None:
    require_odd_prime(p)
    require_level(r)


def euler_quotient(u: int, p: int, r: int) -> int:
    """
    Euler quotient Q_r(u) = ((u^phi(p^r) - 1) / p^r) mod p^r, with Q_r(u) = 0 when p | u.

    Works modulo p^(2r), which is enough to recover the quotient digit exactly.
    """
    _check_prime_level(p, r)
    if u % p == 0:
        return 0
    m = p**r
    lifted = pow(u, m - m // p, m * m)
    return ((lifted - 1) // m) % m


def multiplicative_order(a: int, m: int) -> int:
    """Least n >= 1 with a^n = 1 (mod m)."""
    if m < 1 or gcd(a, m) != 1:
        raise ParameterError(f"gcd({a}, {m}) != 1: order undefined")
    if m == 1:
        return 1
    return int(n_order(a, m))


def is_primitive_root(g: int, m: int) -> bool:
    if gcd(g, m) != 1:
        return False
    return bool(sympy_is_primitive_root(g, m))


def find_primitive_root(modulus: int) -> int:
    """Smallest primitive root modulo `modulus`, scanning upwards from 2."""
    if modulus == 2:
        return 1
    for g in count(2):
        if g >= modulus:
            raise ParameterError(f"no primitive root modulo {modulus}")
        if is_primitive_root(g, modulus):
            return g


@functools.lru_cache(maxsize=64)
def find_normalized_root(params: Params) -> NormalizedRoot:
    """
    Primitive root g' modulo p^(r+1) with Q_r(g') = 1.

    Starts from the smallest primitive root g. When a = Q_r(g) != 1 it is replaced by
    g^(a^-1 + k0 p^r), where a^-1 is the inverse of a modulo p^r and k0 is the smallest
    value in [0, p-1) making the exponent coprime to phi(p^(r+1)).
    """
    p, r = params.p, params.r_frak
    modulus = params.period
    phi = modulus - modulus // p
    g = find_primitive_root(modulus)
    a = euler_quotient(g, p, r)
    if a != 1:
        level = p**r
        inverse = pow(a, -1, level)
        for k0 in range(p - 1):
            exponent = inverse + k0 * level
            if gcd(exponent, phi) == 1:
                logger.debug("Normalizing root %d with exponent %d (k0=%d)", g, exponent, k0)
                g = pow(g, exponent, modulus)
                break
        else:
            raise VerificationError(f"no normalizing exponent for g={g} modulo {modulus}")
    if euler_quotient(g, p, r) != 1 or not is_primitive_root(g, modulus):
        raise VerificationError(f"normalized root {g} failed its own checks")
    logger.info("Normalized primitive root modulo %d: g=%d", modulus, g)
    return NormalizedRoot(g=g, witness_order=phi)


def class_index(u: int, p: int, r: int) -> Optional[int]:
    """Index l of the class D_l^(r) holding u, or None when p | u (non-unit)."""
    if u % p == 0:
        _check_prime_level(p, r)
        return None
    return euler_quotient(u % p ** (r + 1), p, r)


@dataclass(frozen=True, eq=False)
class CyclotomicPartition:
    """
    The classes D_l^(r) = {g^(l + k p^r) mod p^(r+1) : 0 <= k < p-1} for 0 <= l < p^r.

    Indices wrap modulo p^r.
    """

    params: Params
    level: int
    root: NormalizedRoot
    classes: Optional[Tuple[Tuple[int, ...], ...]]

    @property
    def modulus(self) -> int:
        return self.params.p ** (self.level + 1)

    @property
    def size(self) -> int:
        """Number of classes, p^r."""
        return self.params.p ** self.level

    @property
    def materialized(self) -> bool:
        return self.classes is not None

    def members(self, l: int) -> Tuple[int, ...]:
        l %= self.size
        if self.classes is not None:
            return self.classes[l]
        g, modulus, size = self.root.g, self.modulus, self.size
        return tuple(sorted(pow(g, l + k * size, modulus) for k in range(self.params.p - 1)))

    def class_of(self, u: int) -> Optional[int]:
        return class_index(u, self.params.p, self.level)

    def units(self) -> List[int]:
        p = self.params.p
        return [u for u in range(1, self.modulus) if u % p]

    def as_dict(self) -> Dict[int, Tuple[int, ...]]:
        return {l: self.members(l) for l in range(self.size)}


@functools.lru_cache(maxsize=64)
def build_partition(params: Params, r: int, root: Optional[NormalizedRoot] = None) -> CyclotomicPartition:
    """Cyclotomic partition of Z*_{p^(r+1)} at level 1 <= r <= r_frak."""
    if not 1 <= r <= params.r_frak:
        raise ParameterError(f"level r={r} outside 1..{params.r_frak}")
    root = root or find_normalized_root(params)
    modulus = params.p ** (r + 1)
    size = params.p**r
    classes = None
    if modulus <= MATERIALIZE_LIMIT:
        buckets: List[List[int]] = [[] for _ in range(size)]
        x = 1
        for e in range(size * (params.p - 1)):
            buckets[e % size].append(x)
            x = x * root.g % modulus
        classes = tuple(tuple(sorted(bucket)) for bucket in buckets)
    logger.debug("Partition level %d modulo %d (materialized=%s)", r, modulus, classes is not None)
    return CyclotomicPartition(params=params, level=r, root=root, classes=classes)


def is_wieferich(p: int) -> bool:
    """True iff 2^(p-1) = 1 (mod p^2)."""
    _check_prime_level(p, 1)
    return pow(2, p - 1, p * p) == 1


def two_order_profile(p: int, r_max: int) -> TwoOrderProfile:
    """
    lambda = order of 2 mod p, t0 = largest r with order of 2 mod p^r equal to lambda, and the
    orders at levels 1..r_max, each cross-checked against multiplicative_order.
    """
    _check_prime_level(p, max(r_max, 1))
    lam = multiplicative_order(2, p)
    t0 = 1
    while pow(2, lam, p ** (t0 + 1)) == 1:
        t0 += 1
    profile = TwoOrderProfile(p=p, lam=lam, t0=t0, orders=[], wieferich=is_wieferich(p))
    orders = []
    for r in range(1, r_max + 1):
        order = multiplicative_order(2, p**r)
        if order != profile.order_at(r):
            raise VerificationError(
                f"order of 2 mod {p}^{r} is {order}, tower law predicts {profile.order_at(r)}"
            )
        orders.append(order)
    return profile.model_copy(update={"orders": orders})
