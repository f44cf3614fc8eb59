"""Lambda classes of the Hodge bundle reduced to psi/kappa/boundary form.

The Chern character in degree d is a Bernoulli multiple of
kappa_d - sum psi_i^d plus one-edge boundary corrections; lambda
classes follow by Newton's identities.  Everything is an exact
TautClass, so Hodge expressions integrate and pair like any other
class.

>>> from .integrate import evaluate
>>> evaluate(lambda_class(1, 1, 1))
Fraction(1, 24)
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

from .graphs import StableGraph, enumerate_stable_graphs
from .tautology import TautClass, SeriesClass, ambient_dim
from .integrate import _fact


@lru_cache(maxsize=None)
def bernoulli(m):
    """Bernoulli number B_m (B_1 = -1/2), exact.

    >>> bernoulli(2)
    Fraction(1, 6)
    """
    if m == 0:
        return Fraction(1)
    total = Fraction(0)
    for k in range(m):
        total += Fraction(_binom(m + 1, k)) * bernoulli(k)
    return -total / (m + 1)


def _binom(n, k):
    if k < 0 or k > n:
        return 0
    return _fact(n) // (_fact(k) * _fact(n - k))


@lru_cache(maxsize=None)
def _one_edge_graphs(g, n):
    return tuple(graph for graph in enumerate_stable_graphs(g, n)
                 if graph.n_edges == 1)


@lru_cache(maxsize=None)
def hodge_char(g, n, d):
    """Degree-d Chern character of the Hodge bundle on (g, n).

    ch_d = B_{d+1}/(d+1)! * (kappa_d - sum_i psi_i^d
           + (1/2) sum over one-edge graphs of
             (1/|Aut|) glue(K_d(h,h') + K_d(h',h)))
    with K_d(h,h') = sum_{j=0}^{d-1} psi_h^j (-psi_h')^{d-1-j}.
    Vanishes for even d >= 2.
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    ambient = ((g, n),)
    if d > ambient_dim(ambient):
        return TautClass.zero(ambient)
    pref = bernoulli(d + 1) / _fact(d + 1)
    if pref == 0:
        return TautClass.zero(ambient)
    cls = TautClass.kappa(ambient, d)
    for i in range(1, n + 1):
        cls = cls - TautClass.psi(ambient, i, d)
    items = []
    for graph in _one_edge_graphs(g, n):
        from .graphs import canonicalize
        _, aut = canonicalize(graph)
        c = Fraction(1, 2 * aut)
        for j in range(d):
            sj = Fraction(-1) ** (d - 1 - j)
            for (ha, hb) in (((0, 0), (0, 1)), ((0, 1), (0, 0))):
                ph = {}
                if j:
                    ph[ha] = j
                if d - 1 - j:
                    ph[hb] = ph.get(hb, 0) + (d - 1 - j)
                items.append((graph, [()] * graph.n_vertices, {}, ph,
                              c * sj))
    cls = cls + TautClass.from_terms(ambient, items)
    return cls.scale(pref)


@lru_cache(maxsize=None)
def lambda_class(g, n, j):
    """The j-th Chern class of the Hodge bundle on (g, n), reduced.

    >>> lambda_class(2, 0, 1).degrees()
    [1]
    """
    ambient = ((g, n),)
    if j == 0:
        return TautClass.fundamental(ambient)
    if j < 0 or j > g:
        return TautClass.zero(ambient)
    if j > ambient_dim(ambient):
        return TautClass.zero(ambient)
    # Newton: e_j = (1/j) sum_{i=1}^{j} (-1)^{i-1} e_{j-i} p_i,
    # with power sums p_i = i! ch_i
    acc = TautClass.zero(ambient)
    for i in range(1, j + 1):
        p_i = hodge_char(g, n, i).scale(_fact(i))
        if p_i.is_zero():
            continue
        term = lambda_class(g, n, j - i).multiply(p_i)
        acc = acc + term.scale(Fraction(-1) ** (i - 1))
    return acc.scale(Fraction(1, j))


def hodge_series(g, n, max_deg):
    """Total lambda series: 1 + t lambda_1 + t^2 lambda_2 + ..."""
    ambient = ((g, n),)
    coeffs = {}
    for j in range(0, min(g, max_deg) + 1):
        c = lambda_class(g, n, j)
        if not c.is_zero():
            coeffs[j] = c
    return SeriesClass(ambient, coeffs)


def L_series(g, n, max_deg):
    """The signed Hodge symbol 2^{g-1} Lam(2t) Lam(-t) - 2^{2g-1},
    truncated at max_deg (and at the ambient dimension).

    >>> L_series(1, 1, 1).coefficient(0).terms[next(iter(L_series(1, 1, 1).coefficient(0).terms))]
    Fraction(-1, 1)
    """
    ambient = ((g, n),)
    max_deg = min(max_deg, ambient_dim(ambient))
    coeffs = {}
    for d in range(0, max_deg + 1):
        acc = TautClass.zero(ambient)
        for i in range(0, min(g, d) + 1):
            j = d - i
            if j > g:
                continue
            c = Fraction(2) ** i * Fraction(-1) ** j
            term = lambda_class(g, n, i).multiply(lambda_class(g, n, j))
            acc = acc + term.scale(c)
        acc = acc.scale(Fraction(2) ** (g - 1))
        if d == 0:
            acc = acc - TautClass.fundamental(ambient).scale(
                Fraction(2) ** (2 * g - 1))
        if not acc.is_zero():
            coeffs[d] = acc
    return SeriesClass(ambient, coeffs)


def mumford_defect(g, n, d):
    """Degree-d coefficient of Lam(t) Lam(-t) - 1: a class whose
    pairing signature must vanish identically."""
    ambient = ((g, n),)
    acc = TautClass.zero(ambient)
    for i in range(0, min(g, d) + 1):
        j = d - i
        if j > g:
            continue
        term = lambda_class(g, n, i).multiply(lambda_class(g, n, j))
        acc = acc + term.scale(Fraction(-1) ** j)
    if d == 0:
        acc = acc - TautClass.fundamental(ambient)
    return acc
