"""
Linear complexity of the threshold sequences, computed three ways:
Berlekamp-Massey on the bits, the closed form in p and r, and the number of monomials of G.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from pydantic import BaseModel

from defining import DefiningData, build_defining_data
from errors import ParameterError, VerificationError, WieferichError
from quotients import Params, is_wieferich, two_order_profile
from sequences import generate_threshold

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LfsrResult:
    """Shortest LFSR: its length, connection polynomial (bit i = coefficient of x^i) and L after each bit."""

    linear_complexity: int
    connection_polynomial: int
    profile: Tuple[int, ...]


class LinearComplexityReport(BaseModel):
    params: Params
    period: int
    bm_value: int
    closed_form_value: int
    weight_value: int
    epsilon_flag: int
    agree: bool
    prior_work_case: bool
    meets_half_period: bool


def berlekamp_massey(bits: Sequence[int]) -> LfsrResult:
    """
    Berlekamp-Massey over GF(2) on bit-packed words.

    `window` holds the last bits with the newest in bit 0, so bit i of `window` is s_(n-i)
    and the discrepancy is the parity of (C & window).
    """
    if len(bits) == 0:
        raise ParameterError("berlekamp_massey needs at least one bit")
    c, b = 1, 1
    length, shift = 0, 1
    window = 0
    profile = []
    for n, bit in enumerate(bits):
        window = (window << 1) | (bit & 1)
        discrepancy = (c & window).bit_count() & 1
        if discrepancy:
            previous = c
            c ^= b << shift
            if 2 * length <= n:
                length = n + 1 - length
                b = previous
                shift = 1
            else:
                shift += 1
        else:
            shift += 1
        profile.append(length)
    return LfsrResult(linear_complexity=length, connection_polynomial=c, profile=tuple(profile))


def epsilon(m: int) -> int:
    if m < 0:
        raise ParameterError("epsilon is defined for m >= 0")
    return m % 2


def closed_form_lc(params: Params) -> int:
    """p^(r+1) - p + (p-1) * epsilon((p^r - 1)/2), valid when p is not a Wieferich prime."""
    p, r_frak = params.p, params.r_frak
    if is_wieferich(p):
        profile = two_order_profile(p, 2)
        raise WieferichError(p, profile.lam, profile.t0)
    return params.period - p + (p - 1) * epsilon((p**r_frak - 1) // 2)


def weight_of_G(dd: DefiningData) -> int:
    """
    Monomial count of G without expanding it.

    The unit term has exponents k p^r_frak (valuation r_frak) and level r contributes the
    exponents v p^(r_frak - r), v a unit (valuation r_frak - r); these groups are disjoint,
    so no cancellation between them is possible.
    """
    p, r_frak = dd.params.p, dd.params.r_frak
    period = dd.params.period
    groups = [{k * p**r_frak % period for k in range(1, p)}] if dd.unit_term_parity else []
    weight = (p - 1) * dd.unit_term_parity
    for r in dd.levels:
        scale = p ** (r_frak - r)
        nonzero = [l for l in range(p**r) if not dd.eta(r, l).is_zero()]
        groups.append({v * scale % period for l in nonzero for v in dd.partition(r).members(l)})
        weight += (p - 1) * len(nonzero)
    if sum(len(group) for group in groups) != len(set().union(*groups)) or sum(map(len, groups)) != weight:
        raise VerificationError("exponent groups of G overlap")
    return weight


def linear_complexity_report(params: Params, dd: Optional[DefiningData] = None) -> LinearComplexityReport:
    """Runs all three routes on one parameter pair; BM sees two full periods."""
    dd = dd or build_defining_data(params)
    closed = closed_form_lc(params)
    bits = generate_threshold(params, 2 * params.period).bits
    bm = berlekamp_massey(bits).linear_complexity
    weight = weight_of_G(dd)
    agree = bm == closed == weight
    if agree:
        logger.info("Linear complexity %d for p=%d r=%d", closed, params.p, params.r_frak)
    else:
        logger.warning(
            "Linear complexity mismatch for p=%d r=%d: bm=%d closed=%d weight=%d",
            params.p, params.r_frak, bm, closed, weight,
        )
    return LinearComplexityReport(
        params=params,
        period=params.period,
        bm_value=bm,
        closed_form_value=closed,
        weight_value=weight,
        epsilon_flag=epsilon((params.p**params.r_frak - 1) // 2),
        agree=agree,
        prior_work_case=params.r_frak == 1,
        meets_half_period=2 * closed >= params.period,
    )
