"""
Defining pair and trace representation of the Euler-quotient threshold sequences.

Everything here lives inside one ambient field GF(2^N) with N = lambda p^r, the order of
2 modulo p^(r+1). beta is a primitive p^(r+1)-th root of unity in it, and the level-r
roots theta_r = beta^(p^(r_frak - r)) live in its subfields.

G(x) is never densified: it is kept as the unit-term parity plus the eta table and
evaluated term by term through a table of the powers of beta.
"""
import hashlib
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel

from errors import FieldError, ParameterError, VerificationError, WieferichError
from gf2 import (
    FieldContext,
    FieldElement,
    element_order,
    has_order,
    make_context,
    primitive_root_of_unity,
    trace_to_subfield,
)
from quotients import (
    CyclotomicPartition,
    NormalizedRoot,
    Params,
    TwoOrderProfile,
    build_partition,
    euler_quotient,
    find_normalized_root,
    is_wieferich,
    multiplicative_order,
    two_order_profile,
)

logger = logging.getLogger(__name__)

DD_SCHEMA = "eulerseq-dd-v1"


@dataclass(frozen=True)
class ClassVector:
    """C_start^(r)(gamma) = (D_start(gamma), ..., D_(start + p^r - 1)(gamma)); indices wrap."""

    level: int
    start: int
    values: Tuple[FieldElement, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> FieldElement:
        return self.values[k % len(self.values)]

    def rotated(self, i: int) -> "ClassVector":
        i %= len(self.values)
        return ClassVector(self.level, (self.start + i) % len(self.values), self.values[i:] + self.values[:i])

    def dot(self, other: "ClassVector") -> FieldElement:
        total = self.values[0].ctx.zero
        for left, right in zip(self.values, other.values):
            total = total + left * right
        return total


class CosetDecomposition(BaseModel):
    level: int
    subgroup: Tuple[int, ...]
    leaders: Tuple[int, ...]


class DefiningDocument(BaseModel):
    schema_version: str = DD_SCHEMA
    params: Params
    degree: int
    modulus: str
    beta: str
    g: int
    unit_term_parity: int
    eta: Dict[str, str]


def _power_table(gamma: FieldElement, length: int) -> List[int]:
    powers, current = [], gamma.ctx.one
    for _ in range(length):
        powers.append(current.value)
        current = current * gamma
    return powers


def _xor_all(values) -> int:
    acc = 0
    for value in values:
        acc ^= value
    return acc


def _as_bit(element: FieldElement, what: str) -> int:
    if element.value not in (0, 1):
        raise VerificationError(f"{what} evaluated to non-bit field element {element!r}")
    return element.value


def class_poly_eval(partition: CyclotomicPartition, l: int, gamma: FieldElement) -> FieldElement:
    """D_l^(r)(gamma) = sum of gamma^u over the class members, by direct powering."""
    total = gamma.ctx.zero
    for u in partition.members(l):
        total = total + gamma**u
    return total


def class_evaluations(partition: CyclotomicPartition, gamma: FieldElement) -> ClassVector:
    """C_0^(r)(gamma) for gamma with ord(gamma) | p^(r+1)."""
    modulus = partition.modulus
    if not (gamma**modulus).is_one():
        raise FieldError(f"order of {gamma!r} does not divide {modulus}")
    powers = _power_table(gamma, modulus)
    ctx = gamma.ctx
    values = tuple(
        FieldElement(_xor_all(powers[u] for u in partition.members(l)), ctx) for l in range(partition.size)
    )
    return ClassVector(partition.level, 0, values)


def _check_primitive(partition: CyclotomicPartition, theta: FieldElement) -> None:
    if not has_order(theta, partition.modulus):
        raise ParameterError(f"theta must be a primitive {partition.modulus}-th root of unity")


def inner_product(
    partition: CyclotomicPartition, i: int, j: int, theta: FieldElement, m: int
) -> FieldElement:
    """C_i^(r)(theta) . C_j^(r)(theta^(p^m))^T for a primitive p^(r+1)-th root theta."""
    _check_primitive(partition, theta)
    left = class_evaluations(partition, theta).rotated(i)
    right = class_evaluations(partition, theta ** (partition.params.p**m)).rotated(j)
    return left.dot(right)


def inner_product_expected(p: int, r: int, i: int, j: int, m: int) -> int:
    """Closed value of the inner product: 0 for m >= 1, else 1 iff p^(r-1) exactly divides i - j."""
    if m >= 1:
        return 0
    d = (i - j) % p**r
    return 1 if d and d % p ** (r - 1) == 0 else 0


def inner_product_via_cosets(
    partition: CyclotomicPartition, i: int, j: int, theta: FieldElement, m: int
) -> FieldElement:
    """
    The same inner product rewritten as the sum over w in D_0 of sum_l D_l(gamma_w),
    gamma_w = theta^(g^(i-j) + w p^m).
    """
    _check_primitive(partition, theta)
    p, modulus = partition.params.p, partition.modulus
    phi = modulus - modulus // p
    base = pow(partition.root.g, (i - j) % phi, modulus)
    shift = p**m
    total = theta.ctx.zero
    for w in partition.members(0):
        gamma = theta ** ((base + w * shift) % modulus)
        powers = _power_table(gamma, modulus)
        total = total + FieldElement(_xor_all(powers[z] for z in range(1, modulus) if z % p), theta.ctx)
    return total


@dataclass(frozen=True, eq=False)
class DefiningData:
    params: Params
    ctx: FieldContext
    beta: FieldElement
    root: NormalizedRoot
    profile: TwoOrderProfile
    partitions: Tuple[CyclotomicPartition, ...]
    powers: Tuple[int, ...]
    theta_values: Tuple[Tuple[int, ...], ...]
    eta_table: Dict[Tuple[int, int], FieldElement]
    unit_term_parity: int
    verify: bool = True

    @property
    def levels(self) -> range:
        return range(1, self.params.r_frak + 1)

    def partition(self, r: int) -> CyclotomicPartition:
        return self.partitions[r - 1]

    def power(self, e: int) -> FieldElement:
        """beta^e, with e reduced modulo p^(r+1)."""
        return FieldElement(self.powers[e % self.params.period], self.ctx)

    def theta(self, r: int) -> FieldElement:
        """theta_r = beta^(p^(r_frak - r)), a primitive p^(r+1)-th root of unity."""
        return self.power(self.params.p ** (self.params.r_frak - r))

    def theta_class_value(self, r: int, m: int) -> FieldElement:
        """D_m^(r)(theta_r)."""
        values = self.theta_values[r - 1]
        return FieldElement(values[m % len(values)], self.ctx)

    def eta(self, r: int, l: int) -> FieldElement:
        return self.eta_table[(r, l % self.params.p**r)]

    def class_value_at(self, r: int, l: int, u: int) -> int:
        """D_l^(r)(beta^(u p^(r_frak - r))) as a raw bit polynomial."""
        period = self.params.period
        scale = u * self.params.p ** (self.params.r_frak - r)
        powers = self.powers
        return _xor_all(powers[scale * v % period] for v in self.partition(r).members(l))

    def unit_term_at(self, u: int) -> int:
        """sum_{k=1}^{p-1} beta^(u k p^r_frak) as a raw bit polynomial."""
        p, period = self.params.p, self.params.period
        step = u * p**self.params.r_frak
        return _xor_all(self.powers[step * k % period] for k in range(1, p))

    def to_document(self) -> DefiningDocument:
        return DefiningDocument(
            params=self.params,
            degree=self.ctx.degree,
            modulus=f"{self.ctx.modulus:x}",
            beta=self.beta.to_hex(),
            g=self.root.g,
            unit_term_parity=self.unit_term_parity,
            eta={f"{r}:{l}": value.to_hex() for (r, l), value in self.eta_table.items()},
        )

    def eta_digest(self) -> str:
        lines = "\n".join(f"{r}:{l}={value.to_hex()}" for (r, l), value in self.eta_table.items())
        return hashlib.sha256(lines.encode("ascii")).hexdigest()


def ambient_degree(params: Params) -> int:
    """N = order of 2 modulo p^(r+1); lambda p^r for non-Wieferich p."""
    return multiplicative_order(2, params.period)


def build_defining_data(
    params: Params, max_degree: Optional[int] = None, verify: bool = True
) -> DefiningData:
    """Ambient field, beta, normalized g, partitions, beta power table and the eta table."""
    p, r_frak = params.p, params.r_frak
    profile = two_order_profile(p, r_frak + 1)
    if profile.wieferich:
        raise WieferichError(p, profile.lam, profile.t0)
    degree = profile.orders[r_frak]
    if degree != profile.lam * p**r_frak:
        raise VerificationError(f"ambient degree {degree} != lambda p^r = {profile.lam * p**r_frak}")
    if max_degree is not None and degree > max_degree:
        raise ParameterError(f"ambient field degree {degree} exceeds the ceiling {max_degree}")
    ctx = make_context(degree)
    period = params.period
    if ctx.group_order % period:
        raise VerificationError(f"{period} does not divide 2^{degree} - 1")
    beta = primitive_root_of_unity(ctx, period)
    if verify and element_order(beta, period) != period:
        raise VerificationError("beta is not a primitive root of unity")
    root = find_normalized_root(params)
    partitions = tuple(build_partition(params, r, root) for r in range(1, r_frak + 1))
    powers = tuple(_power_table(beta, period))

    theta_values = []
    eta_table: Dict[Tuple[int, int], FieldElement] = {}
    for r, partition in enumerate(partitions, start=1):
        scale = p ** (r_frak - r)
        values = tuple(
            _xor_all(powers[v * scale % period] for v in partition.members(m)) for m in range(partition.size)
        )
        theta_values.append(values)
        size = partition.size
        for l in range(size):
            eta = FieldElement(_xor_all(values[(i + l) % size] for i in range((size + 1) // 2, size)), ctx)
            if eta.is_zero():
                raise VerificationError(f"eta_{l}^({r}) vanishes")
            eta_table[(r, l)] = eta

    logger.info(
        "Defining data for p=%d r=%d: N=%d, g=%d, %d eta entries", p, r_frak, degree, root.g, len(eta_table)
    )
    return DefiningData(
        params=params,
        ctx=ctx,
        beta=beta,
        root=root,
        profile=profile,
        partitions=partitions,
        powers=powers,
        theta_values=tuple(theta_values),
        eta_table=eta_table,
        unit_term_parity=((p**r_frak - 1) // 2) % 2,
        verify=verify,
    )


def defining_eval(dd: DefiningData, u: int) -> int:
    """G(beta^u) through the eta-table form of G."""
    total = FieldElement(dd.unit_term_at(u) if dd.unit_term_parity else 0, dd.ctx)
    for r in dd.levels:
        for l in range(dd.params.p**r):
            value = dd.class_value_at(r, l, u)
            if value:
                total = total + dd.eta(r, l) * FieldElement(value, dd.ctx)
    return _as_bit(total, f"G(beta^{u})")


def indicator_defining_eval(dd: DefiningData, i: int, u: int) -> int:
    """G_i(beta^u), which equals the indicator s_u^(i) of D_i^(r)."""
    size = dd.params.p**dd.params.r_frak
    if not 0 <= i < size:
        raise ParameterError(f"class index {i} outside 0..{size - 1}")
    total = FieldElement(dd.unit_term_at(u), dd.ctx)
    for r in dd.levels:
        for k in range(dd.params.p**r):
            right = dd.class_value_at(r, k, u)
            if right:
                total = total + dd.theta_class_value(r, i + k) * FieldElement(right, dd.ctx)
    return _as_bit(total, f"G_{i}(beta^{u})")


def column_sum(dd: DefiningData, r: int, u: int) -> FieldElement:
    """sum_i C_i^(r)(theta_r) . C_0^(r)(beta^(u p^(r_frak - r)))^T; zero for every u."""
    size = dd.params.p**r
    right = [dd.class_value_at(r, k, u) for k in range(size)]
    total = dd.ctx.zero
    for i in range(size):
        for k, value in enumerate(right):
            if value:
                total = total + dd.theta_class_value(r, i + k) * FieldElement(value, dd.ctx)
    return total


def coset_decomposition(
    params: Params, r: int, root: Optional[NormalizedRoot] = None
) -> CosetDecomposition:
    """
    U^(r) = {2^(j p^r) mod p^(r+1) : j < lambda} and the leaders g^(k p^r) of the
    (p-1)/lambda cosets tiling D_0^(r). Level 0 tiles Z_p^* by g^k <2>.
    """
    p = params.p
    if is_wieferich(p):
        profile = two_order_profile(p, 2)
        raise WieferichError(p, profile.lam, profile.t0)
    if not 0 <= r <= params.r_frak:
        raise ParameterError(f"level r={r} outside 0..{params.r_frak}")
    root = root or find_normalized_root(params)
    lam = multiplicative_order(2, p)
    modulus, step = p ** (r + 1), p**r
    subgroup = sorted({pow(2, j * step, modulus) for j in range(lam)})
    if len(subgroup) != lam:
        raise VerificationError(f"|U^({r})| = {len(subgroup)} != lambda = {lam}")
    if r == 0:
        target = set(range(1, p))
    else:
        target = set(build_partition(params, r, root).members(0))
        if any(euler_quotient(v, p, r) for v in subgroup):
            raise VerificationError(f"U^({r}) has an element with nonzero quotient")
    if not set(subgroup) <= target:
        raise VerificationError(f"U^({r}) is not inside D_0^({r})")
    leaders = [pow(root.g, k * step, modulus) for k in range((p - 1) // lam)]
    covered: set = set()
    for leader in leaders:
        coset = {leader * v % modulus for v in subgroup}
        if coset & covered:
            raise VerificationError(f"cosets of U^({r}) overlap at leader {leader}")
        covered |= coset
    if covered != target:
        raise VerificationError(f"cosets of U^({r}) do not tile D_0^({r})")
    return CosetDecomposition(level=r, subgroup=tuple(subgroup), leaders=tuple(leaders))


def _trace_at(dd: DefiningData, exponent: int, n: int, k: int, verify: bool) -> FieldElement:
    """Tr_k^n(beta^exponent), certified in the field or read off cached Frobenius powers."""
    period = dd.params.period
    exponent %= period
    if verify:
        return trace_to_subfield(dd.power(exponent), n, k, verify=True)
    step = pow(2, k, period)
    value, e = 0, exponent
    for _ in range(n // k):
        value ^= dd.powers[e]
        e = e * step % period
    return FieldElement(value, dd.ctx)


def class_poly_trace(dd: DefiningData, l: int, r: int, gamma: FieldElement) -> FieldElement:
    """D_l^(r)(gamma) as sum_j Tr_{p^r}^{lambda p^r}(gamma^(g^(j p^r + l)))."""
    p, lam = dd.params.p, dd.profile.lam
    modulus, step = p ** (r + 1), p**r
    total = dd.ctx.zero
    for j in range((p - 1) // lam):
        total = total + trace_to_subfield(
            gamma ** pow(dd.root.g, j * step + l, modulus), lam * step, step, verify=dd.verify
        )
    return total


def trace_eval(dd: DefiningData, u: int, extended: bool = False, verify: Optional[bool] = None) -> int:
    """
    e_u from the trace representation:
    parity * sum_k Tr_1^lambda(beta^(u p^r g^k))
      + sum_r sum_l eta_l^(r) sum_j Tr_{p^r}^{lambda p^r}(beta^(u p^(r_frak - r) g^(j p^r + l))).
    """
    p, r_frak, period = dd.params.p, dd.params.r_frak, dd.params.period
    if r_frak == 1 and not extended:
        raise ParameterError("trace representation is stated for r >= 2; pass extended=True for r = 1")
    verify = dd.verify if verify is None else verify
    lam, g = dd.profile.lam, dd.root.g
    cosets = (p - 1) // lam
    total = dd.ctx.zero
    if dd.unit_term_parity:
        for k in range(cosets):
            total = total + _trace_at(dd, u * p**r_frak * pow(g, k, period), lam, 1, verify)
    for r in dd.levels:
        step, scale = p**r, p ** (r_frak - r)
        for l in range(step):
            inner = dd.ctx.zero
            for j in range(cosets):
                inner = inner + _trace_at(dd, u * scale * pow(g, j * step + l, period), lam * step, step, verify)
            if inner:
                total = total + dd.eta(r, l) * inner
    return _as_bit(total, f"trace form at u={u}")
