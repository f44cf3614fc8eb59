"""Exact psi intersection numbers, the recursion behind them, and the
pairing machinery built on top."""

import random
from fractions import Fraction

import pytest

from spintaut.integrate import (IntegralCache, classes_equal, evaluate,
                                generator_keys, pairing_rank,
                                pairing_signature, psi_integral, set_cache,
                                vertex_integral)
from spintaut.tautology import TautClass


def test_base_cases():
    assert psi_integral(0, (0, 0, 0)) == 1
    assert psi_integral(1, (1,)) == Fraction(1, 24)


def test_known_values():
    assert psi_integral(0, (1, 0, 0, 0)) == 1
    assert psi_integral(0, (2, 0, 0, 0, 0)) == 1
    assert psi_integral(0, (1, 1, 0, 0, 0)) == 2
    assert psi_integral(2, (4,)) == Fraction(1, 1152)
    assert psi_integral(3, (7,)) == Fraction(1, 82944)


def test_wrong_total_degree_is_zero():
    assert psi_integral(1, (0,)) == 0
    assert psi_integral(2, (1, 1)) == 0


def test_string_and_dilaton_random():
    rng = random.Random(7)
    for _ in range(25):
        g = rng.randrange(0, 4)
        n = rng.randrange(max(1, 3 - 2 * g), 6)
        d = 3 * g - 3 + n
        if d < 0:
            continue
        exps = [0] * n
        for _ in range(d):
            exps[rng.randrange(n)] += 1
        base = psi_integral(g, tuple(exps))
        assert psi_integral(g, tuple(exps) + (0,)) == sum(
            psi_integral(g, tuple(exps[:i] + [exps[i] - 1] + exps[i + 1:]))
            for i in range(n) if exps[i] > 0)
        assert psi_integral(g, tuple(exps) + (1,)) \
            == (2 * g - 2 + n) * base


def test_vertex_integral_with_kappa():
    # kappa_1 on (1, 1) equals the psi integral there
    assert vertex_integral(1, (0,), (1,)) == Fraction(1, 24)
    # kappa_1^3 on (2, 0)
    assert vertex_integral(2, (), (1, 1, 1)) == Fraction(43, 2880)


def test_evaluate_decorated_boundary_term():
    amb = ((1, 1),)
    cls = TautClass.psi(amb, 1, 1)
    assert evaluate(cls) == Fraction(1, 24)
    assert evaluate(TautClass.fundamental(amb)) == 0


def test_pairing_signature_detects_relations():
    amb = ((1, 1),)
    # psi_1 = kappa_1 on (1, 1): equal signatures, unequal presentations
    a = TautClass.psi(amb, 1, 1)
    b = TautClass.kappa(amb, 1)
    assert a != b
    assert classes_equal(a, b)
    assert not classes_equal(a, b.scale(2))


def test_pairing_signature_length_matches_generators():
    amb = ((2, 0),)
    cls = TautClass.kappa(amb, 1)
    sig = pairing_signature(cls)
    assert len(sig) == len(generator_keys(amb, 2))


def test_pairing_rank_positive():
    rank, rows, cols = pairing_rank(((1, 1),), 1)
    assert rank == 1
    rank2, _, _ = pairing_rank(((2, 0),), 1)
    assert rank2 == 2


def test_cache_roundtrip(tmp_path):
    path = str(tmp_path / "integrals.txt")
    cache = set_cache(path)
    try:
        value = vertex_integral(2, (), (1, 1, 1))
        cache.save()
        fresh = IntegralCache(path)
        key = IntegralCache.monomial_key((), (1, 1, 1))
        assert fresh.get(2, 0, key) == value
    finally:
        set_cache(None)


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        psi_integral(1, (-1, 2))
