"""
Binary threshold sequences (e_u) derived from Euler quotients.

Two independent generators are provided: the threshold rule on Q_r(u) and class
membership in the union of D_l^(r) for l in I = {(p^r+1)/2, ..., p^r-1}.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from errors import InsufficientDataError, ParameterError
from quotients import Params, build_partition, euler_quotient

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BinarySequence:
    bits: Tuple[int, ...]
    asserted_period: int
    params: Optional[Params] = None

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, u: int) -> int:
        return self.bits[u]

    def to_string(self) -> str:
        return "".join("1" if bit else "0" for bit in self.bits)


def generate_threshold(params: Params, count: Optional[int] = None) -> BinarySequence:
    """e_u = 0 iff 2 Q_r(u) < p^r, for 0 <= u < count (one period by default)."""
    count = params.period if count is None else count
    if count < 0:
        raise ParameterError("count must be >= 0")
    p, r = params.p, params.r_frak
    level = p**r
    bits = tuple(0 if 2 * euler_quotient(u, p, r) < level else 1 for u in range(count))
    return BinarySequence(bits=bits, asserted_period=params.period, params=params)


def generate_cyclotomic(params: Params, count: Optional[int] = None) -> BinarySequence:
    """Same sequence as generate_threshold, produced through class membership."""
    count = params.period if count is None else count
    if count < 0:
        raise ParameterError("count must be >= 0")
    partition = build_partition(params, params.r_frak)
    period = params.period
    if partition.materialized:
        ones = set()
        for l in params.threshold_classes:
            ones.update(partition.members(l))
        window = [1 if u in ones else 0 for u in range(period)]
    else:
        threshold = set(params.threshold_classes)
        window = [1 if partition.class_of(u) in threshold else 0 for u in range(period)]
    bits = tuple(window[u % period] for u in range(count))
    return BinarySequence(bits=bits, asserted_period=period, params=params)


def indicator_sequence(params: Params, i: int, count: Optional[int] = None) -> BinarySequence:
    """Characteristic sequence s_u^(i) of the class D_i^(r)."""
    size = params.p**params.r_frak
    if not 0 <= i < size:
        raise ParameterError(f"class index {i} outside 0..{size - 1}")
    count = params.period if count is None else count
    if count < 0:
        raise ParameterError("count must be >= 0")
    members = set(build_partition(params, params.r_frak).members(i))
    period = params.period
    bits = tuple(1 if u % period in members else 0 for u in range(count))
    return BinarySequence(bits=bits, asserted_period=period, params=params)


def detect_period(seq: BinarySequence) -> int:
    """Least period of the stored window; needs at least two asserted periods of bits."""
    n = len(seq.bits)
    if n == 0 or n < 2 * seq.asserted_period:
        raise InsufficientDataError(
            f"need at least {2 * seq.asserted_period} bits to detect the period, got {n}"
        )
    # least period = n - (longest proper border), via the prefix function
    bits = seq.bits
    border = [0] * n
    k = 0
    for i in range(1, n):
        while k and bits[i] != bits[k]:
            k = border[k - 1]
        if bits[i] == bits[k]:
            k += 1
        border[i] = k
    return n - border[-1]


def balance(seq: BinarySequence) -> int:
    """Number of ones in the first asserted period."""
    return sum(seq.bits[: seq.asserted_period])
