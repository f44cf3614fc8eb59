"""Lambda classes: known Hodge integrals, the vanishing of the
Chern-character reduction in even degrees, and the signed symbol."""

from fractions import Fraction

from spintaut.hodge import (L_series, bernoulli, hodge_char, lambda_class,
                            mumford_defect)
from spintaut.integrate import evaluate, pairing_signature
from spintaut.strata import d_constant
from spintaut.tautology import TautClass, ambient_dim


def test_bernoulli_values():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(3) == 0
    assert bernoulli(12) == Fraction(-691, 2730)


def test_lambda_known_integrals():
    assert evaluate(lambda_class(1, 1, 1)) == Fraction(1, 24)
    cube = lambda_class(2, 0, 1).multiply(
        lambda_class(2, 0, 1)).multiply(lambda_class(2, 0, 1))
    assert evaluate(cube) == Fraction(1, 2880)
    assert evaluate(lambda_class(2, 0, 1).multiply(
        lambda_class(2, 0, 2))) == Fraction(1, 5760)
    # psi_1 pushes forward to kappa_0 = 2g - 2 on the unmarked space
    l1l2 = lambda_class(2, 1, 1).multiply(lambda_class(2, 1, 2))
    psi = TautClass.psi(((2, 1),), 1, 1)
    assert evaluate(l1l2.multiply(psi)) == Fraction(1, 2880)


def test_lambda_bounds():
    assert lambda_class(2, 0, 3).is_zero()
    assert lambda_class(1, 1, 0) == TautClass.fundamental(((1, 1),))


def test_even_chern_characters_vanish():
    assert hodge_char(2, 0, 2).is_zero()
    assert hodge_char(2, 1, 2).is_zero()


def test_mumford_defect_small():
    for (g, n) in [(1, 1), (2, 0)]:
        for d in range(ambient_dim(((g, n),)) + 1):
            sig = pairing_signature(mumford_defect(g, n, d))
            assert all(x == 0 for x in sig), (g, n, d)


def test_signed_symbol_constant_matches_pole_count():
    for g in range(7):
        n = 3 if g == 0 else (1 if g == 1 else 0)
        const = L_series(g, n, 0).coefficient(0)
        want = TautClass.fundamental(((g, n),)).scale(d_constant(g, 0))
        assert const == want
        assert d_constant(g, 0) == 2 ** (g - 1) - Fraction(2) ** (2 * g - 1)
