"""Spin Pixton classes: fixed-r assembly and r-polynomial constant terms.

For odd k and odd zero orders a with sum a = k(2g - 2 + n), the fixed-r
class sums over stable graphs and odd modular weightings; each graph
carries r^{-h1}/|Aut|, vertices carry exp(-(k^2/4) kappa_1), legs carry
exp((a_i^2/4) psi_i), and edges carry the divided-exponential series
sum_{d>=1} (-1)^{d+1} (w(h) w(h')/4)^d (psi_h + psi_h')^{d-1} / d!.
The class coefficients are polynomials in r of degree at most 2c for r
large; the spin Pixton class is the constant term, certified by exact
zero residual on surplus sample points and by window independence.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .graphs import (StableGraph, enumerate_stable_graphs, canonicalize,
                     weighting_moment_sum)
from .tautology import TautClass, ambient_dim, canonical_term, term_degree
from .integrate import _fact
from .hodge import _binom


class PolynomialityError(RuntimeError):
    """Raised when the r-samples of a term do not fit a polynomial of
    the declared degree (signals r below the stability threshold)."""

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


def infer_genus(a, k, g=None):
    """Genus forced by sum a_i = k(2g - 2 + n)."""
    n = len(a)
    if g is not None:
        if sum(a) != k * (2 * g - 2 + n):
            raise ValueError("orders %r do not sum to k(2g-2+n)" % (a,))
        return g
    q, rem = divmod(sum(a), k)
    if rem or (q + 2 - n) % 2:
        raise ValueError("orders %r incompatible with k=%d" % (a, k))
    g = (q + 2 - n) // 2
    if g < 0:
        raise ValueError("negative genus from orders %r" % (a,))
    return g


def _validate(a, k):
    if k <= 0 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    if any(x % 2 == 0 for x in a):
        raise ValueError("all orders must be odd")


def pixton_spin_r(a, k, c, r, g=None):
    """Degree-c part of the fixed-r spin Pixton class.

    >>> cls = pixton_spin_r((1,), 1, 0, 5)
    >>> cls == TautClass.fundamental(((1, 1),))
    True
    """
    _validate(a, k)
    g = infer_genus(a, k, g)
    n = len(a)
    ambient = ((g, n),)
    if c > ambient_dim(ambient):
        return TautClass.zero(ambient)
    items = []
    for graph in enumerate_stable_graphs(g, n):
        ne = graph.n_edges
        if ne > c:
            continue
        _, aut = canonicalize(graph)
        pref = Fraction(1, aut * r ** graph.h1())
        nv = graph.n_vertices
        # edge degrees d_e >= 1 totalling at most c
        for dvec in _edge_degrees(ne, c):
            de_total = sum(dvec)
            wsum = weighting_moment_sum(graph, a, k, r,
                                        {e: dvec[e] for e in range(ne)})
            if wsum == 0:
                continue
            coeff = pref * wsum
            for d in dvec:
                coeff *= Fraction((-1) ** (d + 1), 4 ** d * _fact(d))
            rem = c - de_total
            # distribute the remaining degree over legs and vertices
            for split in _compositions(rem, n + nv):
                cf = coeff
                pl = {}
                for i in range(n):
                    p = split[i]
                    if p:
                        pl[i + 1] = p
                        cf *= Fraction(a[i] ** 2, 4) ** p / _fact(p)
                kappa = []
                for v in range(nv):
                    m = split[n + v]
                    kappa.append((1,) * m)
                    if m:
                        cf *= Fraction(-k ** 2, 4) ** m / _fact(m)
                # expand each (psi_h + psi_h')^{d_e - 1}
                for jvec in itertools.product(
                        *(range(d) for d in dvec)):
                    ph = {}
                    cfe = cf
                    for e in range(ne):
                        d, j = dvec[e], jvec[e]
                        cfe *= _binom(d - 1, j)
                        if j:
                            ph[(e, 0)] = j
                        if d - 1 - j:
                            ph[(e, 1)] = d - 1 - j
                    items.append((graph, kappa, dict(pl), ph, cfe))
    return TautClass.from_terms(ambient, items)


def _edge_degrees(ne, c):
    if ne == 0:
        yield ()
        return
    for first in range(1, c - ne + 2):
        for rest in _edge_degrees(ne - 1, c - first):
            yield (first,) + rest


def _compositions(total, slots):
    if slots == 0:
        if total == 0:
            yield ()
        return
    for x in range(total + 1):
        for rest in _compositions(total - x, slots - 1):
            yield (x,) + rest


def r_window_start(a, k, c, g=None):
    """First admissible r: 2r must exceed max(sum |a_i|, k(2g-2+n))
    scaled by (c + 2)."""
    g = infer_genus(a, k, g)
    n = len(a)
    bound = max(sum(abs(x) for x in a), k * (2 * g - 2 + n)) * (c + 2)
    return bound // 2 + 1


def pixton_spin_samples(a, k, c, r_values, g=None):
    """Fixed-r classes at each r, merged per canonical term.

    Returns (keys, table) where table[key] lists the coefficient of the
    term at each sampled r (0 where absent)."""
    classes = [pixton_spin_r(a, k, c, r, g) for r in r_values]
    keys = sorted({key for cls in classes for key in cls.terms})
    table = {key: [cls.terms.get(key, Fraction(0)) for cls in classes]
             for key in keys}
    return keys, table


def _fit_constant(r_values, values, deg_bound, key):
    """Constant term of the unique degree <= deg_bound polynomial
    through the first deg_bound+1 samples; the remaining samples must
    lie on it exactly."""
    m = deg_bound + 1
    xs, ys = r_values[:m], values[:m]
    # Lagrange evaluation at r = 0 and residual check at surplus points
    def lagrange(x0):
        total = Fraction(0)
        for i in range(m):
            term = ys[i]
            for j in range(m):
                if j != i:
                    term *= Fraction(x0 - xs[j], xs[i] - xs[j])
            total += term
        return total
    for x, y in zip(r_values[m:], values[m:]):
        if lagrange(x) != y:
            raise PolynomialityError(
                "polynomiality bound violated at r=%d" % x, term=key)
    return lagrange(0)


def pixton_spin(a, k, c, g=None, r_start=None, retries=3):
    """Degree-c spin Pixton class: the r-constant term, certified.

    Each canonical term is sampled at 2c+4 consecutive admissible r
    values; a polynomial of degree at most 2c must fit with exactly
    zero residual on the 3 surplus points, else the window is doubled
    and the fit retried.

    >>> cls = pixton_spin((1,), 1, 0)
    >>> cls == TautClass.fundamental(((1, 1),))
    True
    """
    _validate(a, k)
    g = infer_genus(a, k, g)
    start = r_start if r_start is not None else r_window_start(a, k, c, g)
    last = None
    for attempt in range(retries + 1):
        r_values = [start + j for j in range(2 * c + 4)]
        keys, table = pixton_spin_samples(a, k, c, r_values, g)
        try:
            terms = {}
            for key in keys:
                v = _fit_constant(r_values, table[key], 2 * c, key)
                if v:
                    terms[key] = v
            return TautClass(((g, len(a)),), terms)
        except PolynomialityError as err:
            last = err
            start *= 2
    raise last


def dr_spin(a, k, g=None, r_start=None):
    """Spin double ramification class: the degree-g constant term.

    >>> dr_spin((1,), 1).degrees()
    [1]
    """
    g = infer_genus(a, k, g)
    return pixton_spin(a, k, g, g, r_start=r_start)
