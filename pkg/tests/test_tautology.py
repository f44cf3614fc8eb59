"""Exact ring operations on decorated-graph classes: canonical terms,
products with excess corrections, forgetful maps, gluing."""

from fractions import Fraction

import pytest

from spintaut.graphs import GraphError, StableGraph
from spintaut.tautology import (SeriesClass, TautClass, ambient_dim,
                                pull_forget, push_forget, push_glue,
                                relabel_legs, tensor)

AMB11 = ((1, 1),)
AMB12 = ((1, 2),)


def test_ambient_dim():
    assert ambient_dim(((0, 3),)) == 0
    assert ambient_dim(((2, 1),)) == 4
    assert ambient_dim(((1, 1), (1, 1))) == 2


def test_linear_operations_exact():
    a = TautClass.psi(AMB12, 1, 1).scale(Fraction(1, 3))
    b = TautClass.psi(AMB12, 1, 1).scale(Fraction(2, 3))
    assert a.add(b) == TautClass.psi(AMB12, 1, 1)
    assert a.add(a.scale(-1)).is_zero()
    assert (a + b - a - b).is_zero()


def test_fundamental_is_multiplicative_identity():
    k = TautClass.kappa(AMB12, 1)
    assert TautClass.fundamental(AMB12).multiply(k) == k


def test_multiply_commutes_and_adds_degree():
    p1 = TautClass.psi(AMB12, 1, 1)
    p2 = TautClass.psi(AMB12, 2, 1)
    assert p1.multiply(p2) == p2.multiply(p1)
    assert p1.multiply(p2).degrees() == [2]


def test_multiply_truncates_above_dimension():
    p = TautClass.psi(AMB11, 1, 1)
    assert p.multiply(p).is_zero()


def test_boundary_self_intersection_has_excess_term():
    # the irreducible boundary divisor on (1, 2), squared, must pick up
    # a psi correction on the node rather than a bare two-edge graph
    graph = StableGraph((0,), ((1, 0), (2, 0)), ((0, 0),))
    d = TautClass.from_terms(AMB12, [(graph, [()], {}, {}, Fraction(1))])
    sq = d.multiply(d)
    assert not sq.is_zero()
    assert sq.degrees() == [2]
    assert any(k[6] for k in sq.terms)


def test_push_forget_kappa_rules():
    assert push_forget(TautClass.psi(AMB12, 2, 1), 2) \
        == TautClass.fundamental(AMB11)
    assert push_forget(TautClass.psi(AMB12, 2, 2), 2) \
        == TautClass.kappa(AMB11, 1)
    assert push_forget(TautClass.fundamental(AMB12), 2).is_zero()


def test_pull_forget_psi_gets_boundary_correction():
    pulled = pull_forget(TautClass.psi(AMB11, 1, 1))
    assert pulled.ambient == AMB12
    assert pulled.degrees() == [1]
    assert len(pulled.terms) == 2


def test_relabel_legs():
    swapped = relabel_legs(TautClass.psi(AMB12, 1, 1), {1: 2, 2: 1})
    assert swapped == TautClass.psi(AMB12, 2, 1)


def test_tensor_concatenates_ambients():
    t = tensor([TautClass.fundamental(AMB11),
                TautClass.fundamental(((2, 0),))])
    assert t.ambient == ((1, 1), (2, 0))
    assert t.degrees() == [0]


def test_push_glue_degree_bookkeeping():
    graph = StableGraph((1, 1), ((1, 0),), ((0, 1),))
    per_vertex = [TautClass.fundamental(((1, 2),)),
                  TautClass.fundamental(((1, 1),))]
    glued = push_glue(graph, per_vertex, ((2, 1),))
    assert glued.degrees() == [1]


def test_ambient_mismatch_rejected():
    with pytest.raises(GraphError):
        TautClass.fundamental(AMB11).add(TautClass.fundamental(AMB12))


def test_series_coefficient_and_truncate():
    s = SeriesClass(AMB11, {0: TautClass.fundamental(AMB11),
                            1: TautClass.psi(AMB11, 1, 1)})
    assert s.coefficient(1) == TautClass.psi(AMB11, 1, 1)
    assert s.coefficient(5).is_zero()
    assert s.truncate(0).coefficient(1).is_zero()
