#!/usr/bin/env python3
"""
Test the integer side: Euler quotients, orders, normalized roots, cyclotomic classes and Wieferich detection
"""

import os
import sys
from math import gcd

import pytest
from pydantic import ValidationError
from sympy import primerange

# Add the parent directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import ParameterError
from quotients import (
    Params,
    build_partition,
    class_index,
    euler_quotient,
    find_normalized_root,
    find_primitive_root,
    is_primitive_root,
    is_wieferich,
    multiplicative_order,
    two_order_profile,
)

SMALL = [(3, 1), (3, 2), (5, 1), (5, 2)]


def test_euler_quotient_examples():
    assert euler_quotient(10, 5, 1) == 0
    assert euler_quotient(1, 5, 2) == 0
    assert euler_quotient(3, 5, 1) == 1


def test_euler_quotient_matches_big_integer_definition():
    for p, r in SMALL:
        m = p**r
        phi = m - m // p
        for u in range(1, p ** (r + 1)):
            if u % p:
                assert euler_quotient(u, p, r) == ((u**phi - 1) // m) % m


def test_euler_quotient_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        euler_quotient(2, 9, 1)
    with pytest.raises(ParameterError):
        euler_quotient(2, 5, 0)


def test_multiplicative_order():
    assert multiplicative_order(1, 7) == 1
    assert multiplicative_order(2, 5) == 4
    assert multiplicative_order(2, 27) == 18
    with pytest.raises(ParameterError):
        multiplicative_order(3, 9)


@pytest.mark.parametrize("p, k", [(3, 2), (5, 2), (3, 3), (7, 2), (5, 3)])
def test_orders_and_primitive_roots_against_brute_force(p, k):
    m = p**k
    units = [a for a in range(1, m) if gcd(a, m) == 1]
    phi = len(units)
    roots = 0
    for a in units:
        order = next(n for n in range(1, phi + 1) if pow(a, n, m) == 1)
        assert multiplicative_order(a, m) == order
        assert is_primitive_root(a, m) == (order == phi)
        roots += order == phi
    assert roots == sum(1 for j in range(1, phi + 1) if gcd(j, phi) == 1)
    assert not is_primitive_root(p, m)


def test_primitive_roots():
    assert find_primitive_root(9) == 2
    assert find_primitive_root(25) == 2
    assert is_primitive_root(2, 27)
    assert not is_primitive_root(4, 27)


def test_params_validation():
    with pytest.raises(ValidationError, match="p must be an odd prime"):
        Params(p=4, r_frak=1)
    with pytest.raises(ValidationError, match="p must be an odd prime"):
        Params(p=2, r_frak=1)
    with pytest.raises(ValidationError, match="r must be >= 1"):
        Params(p=3, r_frak=0)
    params = Params(p=3, r_frak=2)
    assert params.period == 27
    assert params.modulus_levels == [9, 27]
    assert list(params.threshold_classes) == [5, 6, 7, 8]


@pytest.mark.parametrize("p,r_frak", [(3, 1), (3, 2), (3, 3), (5, 2), (7, 2)])
def test_normalized_root(p, r_frak):
    params = Params(p=p, r_frak=r_frak)
    root = find_normalized_root(params)
    assert euler_quotient(root.g, p, r_frak) == 1
    assert multiplicative_order(root.g, params.period) == root.witness_order
    assert root.witness_order == params.period - params.period // p
    for r in range(1, r_frak + 1):
        assert euler_quotient(root.g, p, r) == 1


def test_class_index():
    assert class_index(5, 5, 1) is None
    assert class_index(3, 3, 2) is None
    params = Params(p=5, r_frak=3)
    partition = build_partition(params, 3)
    for u in partition.members(17):
        assert class_index(u, 5, 1) == 2
        assert class_index(u, 5, 2) == 17
    for u in partition.members(85):
        assert class_index(u, 5, 1) == 0
        assert class_index(u, 5, 2) == 10


@pytest.mark.parametrize("p,r", SMALL)
def test_partition_covers_units(p, r):
    params = Params(p=p, r_frak=r)
    partition = build_partition(params, r)
    assert partition.materialized
    seen = set()
    for l in range(partition.size):
        members = set(partition.members(l))
        assert len(members) == p - 1
        assert not members & seen
        assert all(class_index(u, p, r) == l for u in members)
        seen |= members
    assert seen == set(partition.units())
    assert partition.members(partition.size + 1) == partition.members(1)


def test_partition_level_outside_range():
    with pytest.raises(ParameterError):
        build_partition(Params(p=3, r_frak=2), 3)


@pytest.mark.parametrize("p,r", SMALL)
def test_quotient_additivity(p, r):
    modulus, level = p ** (r + 1), p**r
    units = [u for u in range(1, modulus) if u % p]
    for u in units:
        for v in units:
            assert euler_quotient(u * v % modulus, p, r) == (euler_quotient(u, p, r) + euler_quotient(v, p, r)) % level


@pytest.mark.parametrize("p,r", SMALL)
def test_quotient_shift_law(p, r):
    level = p**r
    for u in range(1, level):
        if u % p == 0:
            continue
        inverse = pow(u, -1, level)
        for k in range(p):
            expected = (euler_quotient(u, p, r) - k * p ** (r - 1) * inverse) % level
            assert euler_quotient(u + k * level, p, r) == expected


@pytest.mark.parametrize("p,r", SMALL)
def test_quotient_of_minus_one_vanishes(p, r):
    assert euler_quotient(p ** (r + 1) - 1, p, r) == 0


@pytest.mark.parametrize("p,r", [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)])
def test_class_translation(p, r):
    partition = build_partition(Params(p=p, r_frak=r), r)
    modulus = partition.modulus
    for l_prime in range(partition.size):
        for u in partition.members(l_prime):
            for l in range(partition.size):
                moved = {u * v % modulus for v in partition.members(l)}
                assert moved == set(partition.members(l + l_prime))


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("r", [1, 2])
def test_level_reduction(p, r):
    params = Params(p=p, r_frak=r + 1)
    lower, upper = build_partition(params, r), build_partition(params, r + 1)
    for l in range(upper.size):
        assert {u % lower.modulus for u in upper.members(l)} == set(lower.members(l % lower.size))


@pytest.mark.parametrize("p,r", SMALL)
def test_quotient_is_onto(p, r):
    image = {euler_quotient(u, p, r) for u in range(1, p ** (r + 1)) if u % p}
    assert image == set(range(p**r))


def test_two_order_profile():
    profile = two_order_profile(3, 3)
    assert (profile.lam, profile.t0, profile.orders) == (2, 1, [2, 6, 18])
    profile = two_order_profile(5, 2)
    assert (profile.lam, profile.t0, profile.wieferich) == (4, 1, False)
    assert profile.orders == [4, 20]
    assert profile.subgroup_step(2) == 25
    profile = two_order_profile(1093, 2)
    assert (profile.lam, profile.t0, profile.wieferich) == (364, 2, True)
    assert profile.orders == [364, 364]
    assert profile.order_at(3) == 364 * 1093


def test_two_orders_grow_by_p_for_non_wieferich_primes():
    for p in (3, 5, 7, 11, 13):
        profile = two_order_profile(p, 3)
        assert profile.orders == [profile.lam * p ** (r - 1) for r in range(1, 4)]


def test_wieferich_primes_below_5000():
    assert not is_wieferich(3)
    assert [p for p in primerange(3, 5000) if is_wieferich(p)] == [1093, 3511]
