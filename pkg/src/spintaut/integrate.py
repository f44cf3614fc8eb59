"""Exact top intersection numbers and pairing-based equality.

psi integrals are computed by the double-factorial recursion for
correlators of psi classes (with string and dilaton stripping and the
genus-0 closed form), kappa classes are reduced by adding a marked
point, and decorated boundary terms factor into vertex integrals.
Equality of classes is decided by pairing against a deterministic list
of decorated boundary monomials of complementary degree.

>>> psi_integral(0, (0, 0, 0))
Fraction(1, 1)
>>> psi_integral(1, (1,))
Fraction(1, 24)
"""

from __future__ import annotations

import itertools
import os
from fractions import Fraction
from functools import lru_cache

from .graphs import GraphError
from .tautology import (TautClass, ambient_dim, ambient_graphs,
                        canonical_term, parse_term, term_degree)


# set when an integral was requested in the wrong degree (returns 0)
degree_mismatch_flag = False


def _dfact(n):
    """Double factorial with (-1)!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


# -- psi correlators ------------------------------------------------------------


_psi_memo = {}


def psi_integral(g, exponents):
    """Integral of psi_1^{d_1} ... psi_n^{d_n} over the (g, n) moduli
    space, as an exact rational.

    Returns 0 (and sets ``degree_mismatch_flag``) when the exponents do
    not sum to the dimension 3g - 3 + n.

    >>> psi_integral(0, (1, 0, 0, 0))
    Fraction(1, 1)
    >>> psi_integral(2, (4,))
    Fraction(1, 1152)
    """
    global degree_mismatch_flag
    g = int(g)
    d = tuple(sorted(int(x) for x in exponents))
    n = len(d)
    if any(x < 0 for x in d):
        raise ValueError("negative psi exponent")
    if 2 * g - 2 + n <= 0:
        raise ValueError("unstable (g, n) = (%d, %d)" % (g, n))
    if sum(d) != 3 * g - 3 + n:
        degree_mismatch_flag = True
        return Fraction(0)
    return _psi(g, d)


def _psi(g, d):
    hit = _psi_memo.get((g, d))
    if hit is not None:
        return hit
    n = len(d)
    if g == 0:
        # closed form: (n-3)! / prod d_i!
        val = Fraction(_fact(n - 3))
        for x in d:
            val /= _fact(x)
    elif (g, d) == (1, (1,)):
        val = Fraction(1, 24)
    elif d and d[0] == 0:
        # string equation
        rest = d[1:]
        val = Fraction(0)
        for j in range(len(rest)):
            if rest[j] >= 1:
                val += _psi(g, tuple(sorted(
                    rest[:j] + (rest[j] - 1,) + rest[j + 1:])))
    elif d and d[0] == 1:
        # dilaton equation
        val = (2 * g - 2 + n - 1) * _psi(g, d[1:])
    else:
        val = _dvv(g, d)
    _psi_memo[(g, d)] = val
    return val


def _fact(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _dvv(g, d):
    """Remove the largest exponent (>= 2) by the double-factorial
    recursion; all remaining exponents are >= 2 as well."""
    k = d[-1] - 1
    rest = d[:-1]
    total = Fraction(0)
    # transfer to each remaining marking
    for j in range(len(rest)):
        a = rest[j]
        coeff = Fraction(_dfact(2 * k + 2 * a + 1), _dfact(2 * a - 1))
        total += coeff * _psi(g, tuple(sorted(
            rest[:j] + (k + a,) + rest[j + 1:])))
    # splitting terms
    for a in range(0, k):
        b = k - 1 - a
        cf = Fraction(_dfact(2 * a + 1) * _dfact(2 * b + 1), 2)
        # non-separating
        if g >= 1 and 2 * (g - 1) - 2 + len(rest) + 2 > 0:
            total += cf * _psi_pair_ns(g - 1, a, b, rest)
        # separating
        for g1 in range(0, g + 1):
            g2 = g - g1
            for mask in itertools.product((0, 1), repeat=len(rest)):
                s1 = tuple(rest[i] for i in range(len(rest))
                           if mask[i] == 0)
                s2 = tuple(rest[i] for i in range(len(rest))
                           if mask[i] == 1)
                if 2 * g1 - 2 + len(s1) + 1 <= 0:
                    continue
                if 2 * g2 - 2 + len(s2) + 1 <= 0:
                    continue
                v1 = _psi_checked(g1, tuple(sorted(s1 + (a,))))
                if v1 == 0:
                    continue
                v2 = _psi_checked(g2, tuple(sorted(s2 + (b,))))
                total += cf * v1 * v2
    return total / _dfact(2 * k + 3)


def _psi_pair_ns(g, a, b, rest):
    return _psi_checked(g, tuple(sorted(rest + (a, b))))


def _psi_checked(g, d):
    if sum(d) != 3 * g - 3 + len(d):
        return Fraction(0)
    return _psi(g, d)


# -- persistent cache ------------------------------------------------------------


class IntegralCache:
    """Line-oriented persistent memo of vertex integrals.

    File format: a header line with the version tag, then lines
    "g n <monomial> num/den" where the monomial is
    "p<psi exps desc>;k<kappa degs desc>", e.g. "p2,1;k" or "p;k1".
    """

    VERSION = "spintaut-cache-1"

    def __init__(self, path=None):
        self.path = path
        self.entries = {}
        self._dirty = False
        if path and os.path.exists(path):
            self.load()

    @staticmethod
    def monomial_key(psi, kappa):
        p = ",".join(str(x) for x in sorted(psi, reverse=True))
        k = ",".join(str(x) for x in sorted(kappa, reverse=True))
        return "p%s;k%s" % (p, k)

    def load(self):
        with open(self.path) as f:
            lines = f.read().splitlines()
        if not lines or lines[0] != "# " + self.VERSION:
            self.entries = {}
            return
        for line in lines[1:]:
            if not line.strip():
                continue
            g, n, mono, val = line.split()
            num, den = val.split("/")
            self.entries[(int(g), int(n), mono)] = Fraction(int(num),
                                                            int(den))

    def save(self, path=None):
        path = path or self.path
        if path is None:
            return
        tmp = path + ".tmp"
        with open(tmp, "w") as f:
            f.write("# " + self.VERSION + "\n")
            for (g, n, mono) in sorted(self.entries):
                v = self.entries[(g, n, mono)]
                f.write("%d %d %s %d/%d\n"
                        % (g, n, mono, v.numerator, v.denominator))
        os.replace(tmp, path)
        self._dirty = False

    def get(self, g, n, mono):
        return self.entries.get((g, n, mono))

    def put(self, g, n, mono, value):
        self.entries[(g, n, mono)] = value
        self._dirty = True


_active_cache = None


def get_cache():
    """The process-wide cache; created lazily, honoring SPINTAUT_CACHE."""
    global _active_cache
    if _active_cache is None:
        _active_cache = IntegralCache(os.environ.get("SPINTAUT_CACHE"))
    return _active_cache


def set_cache(cache_or_path):
    global _active_cache
    if isinstance(cache_or_path, IntegralCache) or cache_or_path is None:
        _active_cache = cache_or_path
    else:
        _active_cache = IntegralCache(str(cache_or_path))
    return _active_cache


# -- vertex integrals (psi and kappa) ----------------------------------------------


def vertex_integral(g, psi, kappa=()):
    """Integral over (g, n) of a psi monomial times kappa classes.

    ``psi`` lists one exponent per marked point (zeros included);
    ``kappa`` lists kappa degrees.  kappa_0 contributes the scalar
    2g - 2 + n.  Returns 0 in the wrong total degree.

    >>> vertex_integral(1, (0,), (1,))
    Fraction(1, 24)
    """
    psi = tuple(sorted(int(x) for x in psi))
    kappa = tuple(sorted(int(x) for x in kappa))
    n = len(psi)
    scalar = Fraction(1)
    while kappa and kappa[0] == 0:
        scalar *= 2 * g - 2 + n
        kappa = kappa[1:]
    if any(x < 0 for x in kappa):
        raise ValueError("negative kappa degree")
    if sum(psi) + sum(kappa) != 3 * g - 3 + n:
        return Fraction(0)
    if not kappa:
        return scalar * psi_integral(g, psi)
    cache = get_cache()
    mono = IntegralCache.monomial_key(psi, kappa)
    hit = cache.get(g, n, mono)
    if hit is not None:
        return scalar * hit
    # reduce the last kappa by adding a marked point:
    # <tau_A kappa_B kappa_b> = sum over S subset B of
    #   (-1)^|S| <tau_A tau_{b+1+sum S} kappa_{B minus S}>_{g,n+1}
    b = kappa[-1]
    B = kappa[:-1]
    val = Fraction(0)
    for mask in itertools.product((0, 1), repeat=len(B)):
        S = [B[i] for i in range(len(B)) if mask[i]]
        keep = tuple(B[i] for i in range(len(B)) if not mask[i])
        sign = -1 if len(S) % 2 else 1
        val += sign * vertex_integral(
            g, psi + (b + 1 + sum(S),), keep)
    cache.put(g, n, mono, val)
    return scalar * val


# -- evaluation of classes ---------------------------------------------------------


def evaluate(cls):
    """Integrate a class over its ambient product of moduli spaces.

    Terms whose per-vertex decoration degree does not match the vertex
    dimension contribute 0, so inhomogeneous classes evaluate to their
    top part.

    >>> evaluate(TautClass.fundamental(((0, 3),)))
    Fraction(1, 1)
    """
    total = Fraction(0)
    for key, coeff in cls.terms.items():
        graph, kappa, pl, ph = parse_term(key)
        val = coeff
        for v in range(graph.n_vertices):
            psi = tuple(
                (ph.get(pt, 0) if isinstance(pt, tuple) else pl.get(pt, 0))
                for pt in graph.vertex_points(v))
            gv = graph.genera[v]
            if sum(psi) + sum(kappa[v]) != 3 * gv - 3 + len(psi):
                val = Fraction(0)
                break
            val *= vertex_integral(gv, psi, kappa[v])
            if val == 0:
                break
        total += val
    return total


# -- pairing signatures ------------------------------------------------------------


@lru_cache(maxsize=None)
def generator_keys(ambient, degree):
    """Deterministic list of decorated boundary monomials of a given
    degree: every ambient stable graph with every psi/kappa decoration
    whose per-vertex degree fits the vertex dimension."""
    seen = set()
    for (graph, _) in ambient_graphs(ambient):
        rem = degree - graph.n_edges
        if rem < 0:
            continue
        nv = graph.n_vertices
        caps = [3 * graph.genera[v] - 3 + graph.valence(v)
                for v in range(nv)]
        if sum(caps) < rem:
            continue
        for split in _compositions(rem, caps):
            for combo in itertools.product(
                    *(_vertex_monomials(graph, v, split[v])
                      for v in range(nv))):
                kappa = [m[0] for m in combo]
                pl, ph = {}, {}
                for m in combo:
                    pl.update(m[1])
                    ph.update(m[2])
                seen.add(canonical_term(graph, kappa, pl, ph))
    return tuple(sorted(seen))


def _compositions(total, caps):
    if not caps:
        if total == 0:
            yield ()
        return
    hi = min(total, caps[0])
    for x in range(hi + 1):
        for rest in _compositions(total - x, caps[1:]):
            yield (x,) + rest


def _vertex_monomials(graph, v, deg):
    """All (kappa multiset, psi_leg, psi_he) of a given degree at v."""
    pts = graph.vertex_points(v)
    out = []
    for s in range(deg + 1):
        for psis in _compositions(s, [s] * len(pts)):
            pl = {pts[i]: psis[i] for i in range(len(pts))
                  if psis[i] and not isinstance(pts[i], tuple)}
            ph = {pts[i]: psis[i] for i in range(len(pts))
                  if psis[i] and isinstance(pts[i], tuple)}
            for kap in _partitions(deg - s):
                out.append((tuple(kap), pl, ph))
    return out


def _partitions(n, mx=None):
    if n == 0:
        yield ()
        return
    if mx is None:
        mx = n
    for first in range(min(n, mx), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _generator_classes(ambient, degree):
    return tuple(TautClass(ambient, {k: Fraction(1)})
                 for k in generator_keys(ambient, degree))


def pairing_signature(cls, degree=None):
    """Pairings of the class against all generator monomials of
    complementary degree, as a tuple of exact rationals.

    For an inhomogeneous class, signatures of all degree parts are
    concatenated in degree order.
    """
    dim = ambient_dim(cls.ambient)
    degs = [degree] if degree is not None else cls.degrees()
    out = []
    for d in degs:
        part = cls.degree_part(d)
        for gen in _generator_classes(cls.ambient, dim - d):
            out.append(evaluate(part.multiply(gen)))
    return tuple(out)


def classes_equal(A, B):
    """True iff A and B pair identically against all generator
    monomials of every complementary degree (equality against the
    tautological pairing; a necessary condition for equality of
    classes that separates everything in the test suite).
    """
    if A.ambient != B.ambient:
        raise GraphError("ambient mismatch: %r vs %r"
                         % (A.ambient, B.ambient))
    diff = A - B
    if diff.is_zero():
        return True
    dim = ambient_dim(A.ambient)
    for d in diff.degrees():
        part = diff.degree_part(d)
        for gen in _generator_classes(A.ambient, dim - d):
            if evaluate(part.multiply(gen)) != 0:
                return False
    return True


def pairing_rank(ambient, degree):
    """Rank of the pairing matrix between generator monomials of the
    given degree and those of complementary degree.  Used to report how
    much of the degree-d tautological group the signature separates."""
    dim = ambient_dim(ambient)
    rows = _generator_classes(ambient, degree)
    cols = _generator_classes(ambient, dim - degree)
    mat = [[evaluate(r.multiply(c)) for c in cols] for r in rows]
    return _rank(mat), len(rows), len(cols)


def _rank(mat):
    mat = [row[:] for row in mat]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, len(mat)) if mat[r][col]), None)
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        pv = mat[row][col]
        for r in range(len(mat)):
            if r != row and mat[r][col]:
                f = mat[r][col] / pv
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[row])]
        row += 1
        rank += 1
        if row == len(mat):
            break
    return rank
