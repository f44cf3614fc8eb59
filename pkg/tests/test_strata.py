"""Signed stratum classes and Segre series: closed-form pole counts,
the induction engine, and the star-graph expression."""

from fractions import Fraction

import pytest

from spintaut.integrate import classes_equal
from spintaut.spin import dr_spin
from spintaut.strata import (StrataError, d_constant, psq_reduce,
                             psq_series, segre_roundtrip_check, segre_spin,
                             segre_spin_mero, stargraph_spin,
                             strata_class_spin)
from spintaut.tautology import TautClass


def fund(g, n):
    return TautClass.fundamental(((g, n),))


def test_d_constant_anchors():
    assert d_constant(0, 3) == 1
    assert d_constant(0, 1) == 1
    assert d_constant(1, 1) == 3
    assert d_constant(2, 0) == -6


def test_d_constant_recurrence_in_genus():
    for g in range(6):
        for m in range(6):
            assert d_constant(g + 1, m) \
                == 3 * d_constant(g, m) - d_constant(g, m + 1)


def test_d_constant_rejects_negative():
    with pytest.raises(StrataError):
        d_constant(-1, 0)


def test_segre_constant_is_signed_section_count():
    # genus 1: one odd square root of the canonical bundle, with a
    # section; even minus odd gives -1 independent of the markings
    for n in (1, 2, 3):
        assert segre_spin(1, n).coefficient(0) == fund(1, n).scale(-1)
    # genus 2: the tree-corrected constant is the closed-form count
    assert segre_spin(2, 0).coefficient(0) \
        == fund(2, 0).scale(d_constant(2, 0))


def test_segre_mero_constant_is_d_value():
    for (g, n) in [(0, 3), (1, 1), (1, 2)]:
        assert segre_spin_mero(g, n).coefficient(0) \
            == fund(g, n).scale(d_constant(g, 1))


def test_engine_reproduces_pole_count_with_conditions():
    # a single pole has its residue forced to zero by the implicit
    # per-component relation; with two poles one explicit condition is
    # needed before every residue vanishes
    assert psq_series(((1, (-1, 1, 1, 1)),)).coefficient(0) \
        == fund(1, 4).scale(d_constant(1, 1))
    two = psq_series(((0, (-1, -1, 3)),), [{(0, 0)}]).coefficient(0)
    assert two == fund(0, 3).scale(d_constant(0, 2))
    assert two.is_zero()


def test_strata_class_genus_one():
    assert strata_class_spin((1,), 1) == fund(1, 1).scale(-1)
    assert strata_class_spin((1, 1), 1) == fund(1, 2).scale(-1)


def test_strata_class_validation():
    with pytest.raises(StrataError):
        strata_class_spin((2,), 2)
    with pytest.raises(StrataError):
        strata_class_spin((1, 1), 2)


def test_roundtrip_small():
    assert segre_roundtrip_check(1, 1)
    assert segre_roundtrip_check(1, 2)


def test_stargraph_matches_ramification_class():
    for (a, g) in [((3, -1), 1), ((5, -3), 1)]:
        assert classes_equal(dr_spin(a, 1, g), stargraph_spin(a, 1))


def test_psq_reduce_residue_step_accumulates():
    base = psq_series(((0, (-1, -1, -1, 3)),))
    refined = psq_reduce(base, ("residue_step", [{(0, 0), (0, 1)}]))
    assert refined.conditions
    assert refined.coefficient(0) == fund(0, 4).scale(d_constant(0, 3))


def test_psq_reduce_unmarked_step_raises_entry():
    base = psq_series(((1, (-1, 1)),))
    lifted = psq_reduce(base, ("unmarked_step",))
    assert lifted.sig == ((1, (1, 1)),)


def test_psq_reduce_zero_step_matches_series():
    ser = psq_series(((1, (-1, 3)),))
    stepped = psq_reduce(ser, ("zero_step", 0, 1))
    for c in (0, 1):
        assert classes_equal(stepped.coefficient(c), ser.coefficient(c))
