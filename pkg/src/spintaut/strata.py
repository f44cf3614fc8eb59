"""Signed Segre series of spin-square cones and spin strata classes.

A signature is a tuple of components (g_j, a_j) where a_j is a vector of
odd integers attached to the markings of a genus-g_j factor.  The series
attached to a signature (and a set of residue conditions R) collects the
pushforwards of all powers of the relative hyperplane class on the
projectivised cone of spin differentials with prescribed singularity
orders; coefficient c is an exact tautological class on the product of
the factor moduli spaces.

All coefficients are computed by an exact mutual recursion:

* non-full signatures lift to full ones by appending entries 3 for the
  unmarked double zeros and pushing down along the forgetful maps;
* extra residue conditions are removed one at a time, trading each for a
  hyperplane twist plus two-level boundary corrections;
* positive signatures are reduced towards the all-ones base (the signed
  Segre series of the spin cone itself) by lowering one entry by 2;
* full meromorphic signatures at coefficient 0 are the signed strata
  classes, recovered from the spin double ramification class by removing
  the star-graph boundary terms;
* higher coefficients of full signatures follow from the psi-twisted
  recursion at the first marking.

Every rational number is an exact Fraction; no floats appear anywhere.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .graphs import (GraphError, StableGraph, enumerate_backbones,
                     enumerate_bicolored, enumerate_simple_stars_odd,
                     enumerate_star_trees, aut_order)
from .tautology import (SeriesClass, TautClass, ambient_dim, push_forget,
                        push_glue, push_glue_joint, relabel_legs, tensor)
from .hodge import L_series
from .spin import dr_spin, r_window_start
from .integrate import classes_equal


class StrataError(ValueError):
    """Invalid signature or residue data."""


class StrataRecursionError(RuntimeError):
    """The induction revisited a value it is still computing."""


# -- the d constants ---------------------------------------------------------


def d_constant(g, m):
    """Degree-0 pushforward constant for the signature ((-1)^m, 1^n)
    with all residues set to zero; independent of n.

    >>> d_constant(0, 3)
    Fraction(1, 1)
    >>> d_constant(1, 1)
    Fraction(3, 1)
    >>> d_constant(2, 0)
    Fraction(-6, 1)
    """
    if g < 0 or m < 0:
        raise StrataError("g and m must be non-negative")
    return (Fraction(-1) ** (m + 1)) * Fraction(2) ** (2 * g - 1) \
        + Fraction(2) ** (g - 1)


# -- holomorphic signed Segre series ------------------------------------------


def _tree_sum(graphs_with_extras, vertex_series, ambient, max_deg, weight):
    """Sum of glued series over trees: weight(graph) * t^{|E|} *
    product of per-vertex series.  ``vertex_series(graph, v, deg)``
    returns the degree cap series for vertex v."""
    coeffs = {}
    for item in graphs_with_extras:
        graph, scale = item
        ne = graph.n_edges
        nv = graph.n_vertices
        series = [vertex_series(graph, v, max_deg - ne) for v in range(nv)]
        for c in range(ne, max_deg + 1):
            inner = c - ne
            for split in _compositions(inner, nv):
                parts = []
                dead = False
                for v in range(nv):
                    p = series[v].coefficient(split[v])
                    if p.is_zero():
                        dead = True
                        break
                    parts.append(p)
                if dead:
                    continue
                term = push_glue(graph, parts, ambient)
                term = term.scale(scale * weight(ne))
                if term.is_zero():
                    continue
                coeffs[c] = coeffs.get(c, TautClass.zero(ambient)).add(term)
    return SeriesClass(ambient, {c: v for c, v in coeffs.items()
                                 if not v.is_zero()})


def _compositions(total, slots):
    if slots == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _segre_full(g, n):
    """Signed Segre series of the spin cone on (g, n), to full ambient
    dimension: sum over positive-genus trees of (-t)^{|E|}/|Aut| times
    the glued product of per-vertex signed Hodge series."""
    ambient = ((g, n),)
    D = ambient_dim(ambient)
    items = [(tree, Fraction(1, aut_order(tree)))
             for tree in enumerate_star_trees(g, n)]

    def vs(graph, v, deg):
        return L_series(graph.genera[v], graph.valence(v), max(deg, 0))

    return _tree_sum(items, vs, ambient, D,
                     lambda ne: Fraction(-1) ** ne)


def segre_spin(g, n, max_deg=None):
    """Signed Segre series of the cone of spin differentials on (g, n).

    >>> segre_spin(1, 1).coefficient(0) == TautClass.fundamental(((1, 1),)).scale(-1)
    True
    """
    if 2 * g - 2 + n <= 0:
        raise StrataError("unstable (g, n)")
    ser = _segre_full(g, n)
    if max_deg is None:
        return ser
    return ser.truncate(max_deg)


def segre_roundtrip_check(g, n):
    """Substitute the signed Segre series back into the tree sum and
    compare with the signed Hodge series degree by degree (by pairing
    signature).  Returns True when every degree matches."""
    ambient = ((g, n),)
    D = ambient_dim(ambient)
    items = [(tree, Fraction(1, aut_order(tree)))
             for tree in enumerate_star_trees(g, n)]

    def vs(graph, v, deg):
        gv, nv = graph.genera[v], graph.valence(v)
        return segre_spin(gv, nv, max(deg, 0))

    forward = _tree_sum(items, vs, ambient, D, lambda ne: Fraction(1))
    target = L_series(g, n, D)
    for d in range(D + 1):
        if not classes_equal(forward.coefficient(d), target.coefficient(d)):
            return False
    return True


@lru_cache(maxsize=None)
def _segre_mero_full(g, n):
    """Signed Segre series for a double pole without residue at the
    first marking and simple singularities elsewhere.  Obtained by
    solving the backbone identity
    (1 - t psi_1) s1(t) = (1 + t psi_1) s(t) + backbone corrections."""
    ambient = ((g, n),)
    D = ambient_dim(ambient)
    rhs = segre_spin(g, n, D).mul_one_plus_t_psi(1, 1, D)
    items = []
    for graph, center in enumerate_backbones(g, n):
        scale = Fraction(2 ** (2 * graph.genera[center]),
                         aut_order(graph))
        items.append((graph, center, scale))

    def vs(graph_center):
        graph, center = graph_center

        def inner(gr, v, deg):
            if v == center:
                amb = ((gr.genera[v], gr.valence(v)),)
                return SeriesClass(amb, {0: TautClass.fundamental(amb)})
            return segre_spin(gr.genera[v], gr.valence(v), max(deg, 0))
        return inner

    extra = SeriesClass.zero(ambient)
    for graph, center, scale in items:
        part = _tree_sum([(graph, scale)], vs((graph, center)), ambient, D,
                         lambda ne: Fraction(-1) ** ne)
        extra = extra.add(part)
    rhs = rhs.add(extra)
    return rhs.solve_one_minus_t_psi(1, D)


def segre_spin_mero(g, n, max_deg=None):
    """Signed Segre series with a residueless double pole at marking 1.

    >>> c0 = segre_spin_mero(1, 1).coefficient(0)
    >>> c0 == TautClass.fundamental(((1, 1),)).scale(3)
    True
    """
    if n < 1:
        raise StrataError("the pole needs a marking")
    if 2 * g - 2 + n <= 0:
        raise StrataError("unstable (g, n)")
    ser = _segre_mero_full(g, n)
    if max_deg is None:
        return ser
    return ser.truncate(max_deg)


# -- signatures and residue conditions ----------------------------------------


def _norm_sig(sig):
    out = []
    for (g, a) in sig:
        a = tuple(int(x) for x in a)
        out.append((int(g), a))
    return tuple(out)


def _validate_sig(sig):
    if not sig:
        raise StrataError("empty signature")
    for (g, a) in sig:
        if g < 0 or 2 * g - 2 + len(a) <= 0:
            raise StrataError("unstable component %r" % ((g, a),))
        if any(x % 2 == 0 for x in a):
            raise StrataError("all entries must be odd")


def _poles(sig):
    return tuple((j, i) for j, (g, a) in enumerate(sig)
                 for i, x in enumerate(a) if x < 0)


def _norm_conditions(sig, conditions):
    pol = set(_poles(sig))
    out = set()
    for E in conditions:
        E = frozenset(E)
        if not E or not E <= pol:
            raise StrataError("condition %r is not a set of poles" % (E,))
        out.add(E)
    return frozenset(out)


def _unmarked(g, a):
    """Number of unmarked double zeros; negative means the locus is
    empty."""
    s = 2 * g - 2 + len(a) - sum(a)
    if s % 2:
        raise StrataError("odd-parity signature %r" % ((g, a),))
    return s // 2


def _total_rows(sig):
    rows = []
    for j, (g, a) in enumerate(sig):
        row = frozenset((j, i) for i, x in enumerate(a) if x < 0)
        if row:
            rows.append(row)
    return rows


def _rank(rows):
    """Rank of a system of 0/1 rows, each a frozenset of variable keys,
    by exact Gaussian elimination."""
    basis = []
    for row in rows:
        vec = {v: Fraction(1) for v in row}
        for piv, bvec in basis:
            if piv in vec:
                c = vec[piv]
                for k, x in bvec.items():
                    vec[k] = vec.get(k, Fraction(0)) - c * x
                    if vec[k] == 0:
                        del vec[k]
        if vec:
            piv = min(vec)
            c = vec[piv]
            basis.append((piv, {k: x / c for k, x in vec.items()}))
    return len(basis)


def _in_span(row, rows):
    return _rank(list(rows) + [frozenset(row)]) == _rank(list(rows))


def _extra_rank(sig, conditions):
    tot = _total_rows(sig)
    return _rank(tot + list(conditions)) - _rank(tot)


# -- the induction engine ------------------------------------------------------


_PSQ_CACHE = {}
_ACTIVE = set()
_MAX_DEPTH = 80


def psq_series(sig, conditions=frozenset()):
    """The signed stratum series of a signature with residue
    conditions.  ``sig`` is a tuple of (genus, orders) components;
    ``conditions`` is a set of sets of pole labels (j, i), each meaning
    that the corresponding residues sum to zero.  Per-component total
    residue relations are always implicit.

    >>> psq_series(((1, (1,)),)).coefficient(0) == TautClass.fundamental(((1, 1),)).scale(-1)
    True
    """
    sig = _norm_sig(sig)
    _validate_sig(sig)
    R = _norm_conditions(sig, conditions)
    key = (sig, R)
    if key not in _PSQ_CACHE:
        _PSQ_CACHE[key] = PSQSeries(sig, R)
    return _PSQ_CACHE[key]


class PSQSeries:
    """Lazy signed stratum series; coefficients are memoised
    TautClasses on the product ambient of the signature."""

    def __init__(self, sig, conditions=frozenset()):
        self.sig = _norm_sig(sig)
        self.conditions = frozenset(frozenset(E) for E in conditions)
        self.ambient = tuple((g, len(a)) for (g, a) in self.sig)
        self._coeffs = {}

    def __repr__(self):
        return "PSQSeries(%r, %r)" % (self.sig, set(self.conditions))

    def coefficient(self, c):
        if c < 0:
            raise StrataError("negative coefficient index")
        if c not in self._coeffs:
            key = (self.sig, self.conditions, c)
            if key in _ACTIVE:
                raise StrataRecursionError(
                    "cyclic dependence at %r" % (key,))
            if len(_ACTIVE) > _MAX_DEPTH:
                raise StrataRecursionError("recursion too deep")
            _ACTIVE.add(key)
            try:
                self._coeffs[c] = self._compute(c)
            finally:
                _ACTIVE.discard(key)
        return self._coeffs[c]

    # -- leg bookkeeping

    def _offsets(self):
        offs, off = [], 0
        for (g, a) in self.sig:
            offs.append(off)
            off += len(a)
        return offs

    def _leg(self, j, i):
        return self._offsets()[j] + i + 1

    # -- dispatch

    def _compute(self, c):
        zero = TautClass.zero(self.ambient)
        for (g, a) in self.sig:
            if _unmarked(g, a) < 0:
                return zero
        # upper bound on the degrees of nonzero coefficients
        cod = len(self.sig) - 1
        for (g, a) in self.sig:
            cod += g - 1 + (1 if any(x < 0 for x in a) else 0)
            cod -= _unmarked(g, a)
        if c + cod > ambient_dim(self.ambient):
            return zero
        extra = _extra_rank(self.sig, self.conditions)
        if len(self.sig) == 1:
            g, a = self.sig[0]
            if (g, len(a)) == (0, 3) and _unmarked(g, a) == 0:
                if c == 0 and extra == 0:
                    return TautClass.fundamental(self.ambient)
                return zero
        if extra == 0 and self.conditions:
            return psq_series(self.sig).coefficient(c)
        if extra > 0:
            # conditions are traded for hyperplane twists on full
            # signatures only (otherwise the twist picks up excess
            # loci of dropping pole order over smooth curves)
            if any(_unmarked(g, a) > 0 for (g, a) in self.sig):
                return self._lift(c)
            return self._residue_chain(c)
        if len(self.sig) > 1:
            return self._product_rule(c)
        g, a = self.sig[0]
        if all(x == 1 for x in a):
            return segre_spin(g, len(a)).coefficient(c)
        mero = [i for i, x in enumerate(a) if x < 0]
        if len(mero) == 1 and a[mero[0]] == -1 and \
                all(a[i] == 1 for i in range(len(a)) if i != mero[0]):
            ser = segre_spin_mero(g, len(a))
            val = ser.coefficient(c)
            i = mero[0]
            if i != 0:
                val = relabel_legs(val, {1: i + 1, i + 1: 1})
            return val
        if all(x > 0 for x in a):
            return self._driver(c)
        N = _unmarked(g, a)
        if N > 0:
            return self._lift(c)
        if c == 0:
            return _stratum_class_mero(a, 1, g)
        return self._zero_step(0, 0, c)

    # -- reduction steps

    def _product_rule(self, c):
        """Joint series of a disjoint union at trivial conditions: one
        degree shift per extra factor, then the product of the factor
        series."""
        zero = TautClass.zero(self.ambient)
        ell = len(self.sig)
        if c < ell - 1:
            return zero
        total = zero
        for split in _compositions(c - (ell - 1), ell):
            parts = []
            dead = False
            for j, (g, a) in enumerate(self.sig):
                p = psq_series(((g, a),)).coefficient(split[j])
                if p.is_zero():
                    dead = True
                    break
                parts.append(p)
            if not dead:
                total = total.add(tensor(parts))
        return total

    def _residue_chain(self, c):
        """Trade one independent residue condition for a hyperplane
        twist of the weaker series minus two-level boundary
        corrections."""
        tot = _total_rows(self.sig)
        conds = sorted(self.conditions, key=lambda E: sorted(E))
        for E in conds:
            rest = [x for x in conds if x != E]
            if _in_span(E, tot + rest):
                return psq_series(self.sig,
                                  frozenset(rest)).coefficient(c)
        E = conds[0]
        prev = frozenset(conds[1:])
        result = psq_series(self.sig, prev).coefficient(c + 1)
        for (graph, twist, levels, m, aut) in \
                enumerate_bicolored(list(self.sig)):
            if not _ensures(self.sig, graph, twist, levels, prev, E):
                continue
            term = _leveled_glue(self.sig, prev, self.ambient,
                                 graph, twist, levels, c)
            if not term.is_zero():
                result = result.add(term.scale(Fraction(-m, aut)))
        return result

    def _zero_step(self, j, i, c):
        """Coefficient c of a full signature from coefficient c-1,
        twisting at the marking (j, i)."""
        if c == 0:
            raise StrataError("the psi-twisted step needs c >= 1")
        g, a = self.sig[j]
        leg = self._leg(j, i)
        prev = self.coefficient(c - 1)
        result = prev.mult_psi(leg, 1).scale(-a[i])
        for (graph, twist, levels, m, aut) in \
                enumerate_bicolored(list(self.sig),
                                    leg_level_minus1=leg):
            term = _leveled_glue(self.sig, self.conditions, self.ambient,
                                 graph, twist, levels, c - 1)
            if not term.is_zero():
                result = result.add(term.scale(Fraction(m, aut)))
        return result

    def _driver(self, c):
        """Coefficient of a positive signature with an entry >= 3 from
        the signature with that entry lowered by 2."""
        g, a = self.sig[0]
        n = len(a)
        i = next(idx for idx, x in enumerate(a) if x >= 3)
        b = a[:i] + (a[i] - 2,) + a[i + 1:]
        src = psq_series(((g, b),))
        result = src.coefficient(c + 1)
        result = result.add(src.coefficient(c).mult_psi(i + 1, 1)
                            .scale(b[i]))
        N = _unmarked(g, b)
        bt = b + (3,) * N
        big_sig = ((g, bt),)
        big_amb = ((g, n + N),)
        corr = TautClass.zero(big_amb)
        for (graph, twist, levels, m, aut) in \
                enumerate_bicolored([(g, bt)], leg_level_minus1=i + 1,
                                    star_filter_n=n):
            term = _leveled_glue(big_sig, frozenset(), big_amb,
                                 graph, twist, levels, c)
            if not term.is_zero():
                corr = corr.add(term.scale(Fraction(m, aut)))
        for lab in range(n + N, n, -1):
            corr = push_forget(corr, lab)
        result = result.add(corr.scale(Fraction(-1, factorial(N))))
        return result.scale(Fraction(1, 2))

    def _lift(self, c):
        """Coefficient of a non-full signature by appending one entry 3
        per unmarked double zero and pushing the extra markings down.
        Pole positions keep their (j, i) labels."""
        big_sig, drop, denom = [], [], Fraction(1)
        off = 0
        for (g, a) in self.sig:
            N = _unmarked(g, a)
            big_sig.append((g, a + (3,) * N))
            drop.extend(range(off + len(a) + 1, off + len(a) + N + 1))
            denom *= factorial(N)
            off += len(a) + N
        big = psq_series(tuple(big_sig), self.conditions)
        val = big.coefficient(c)
        for lab in sorted(drop, reverse=True):
            val = push_forget(val, lab)
        return val.scale(Fraction(1, denom))


# -- two-level boundary terms --------------------------------------------------


def _level_data(sig, graph, twist, levels):
    """Split a two-level graph over ``sig`` into level sub-signatures.

    Returns (order, sig0, sig1, pos, legpos) where ``order`` lists the
    level-0 vertices then the level -1 vertices, sig0/sig1 are the level
    sub-signatures, ``pos`` maps graph points to (level, comp, index)
    and ``legpos`` maps global leg labels likewise."""
    verts0 = [v for v in range(graph.n_vertices) if levels[v] == 0]
    verts1 = [v for v in range(graph.n_vertices) if levels[v] == -1]
    order = verts0 + verts1
    pos = {}
    sig0, sig1 = [], []
    for lvl, verts, bucket in ((0, verts0, sig0), (-1, verts1, sig1)):
        for cj, v in enumerate(verts):
            pts = graph.vertex_points(v)
            bucket.append((graph.genera[v],
                           tuple(twist[p] for p in pts)))
            for pi, p in enumerate(pts):
                pos[p] = (lvl, cj, pi)
    legpos = {l: pos[l] for (l, v) in graph.legs}
    return order, tuple(sig0), tuple(sig1), pos, legpos


def _grc_vertices(graph, twist, levels):
    """Level-0 vertices with edges and no marked pole legs: the
    residues of the lower differential at their edges sum to zero."""
    out = []
    for v in range(graph.n_vertices):
        if levels[v] != 0:
            continue
        if not graph.vertex_halfedges(v):
            continue
        if any(twist[l] < 0 for l in graph.vertex_legs(v)):
            continue
        out.append(v)
    return out


def _level0_part(sig, legpos, E):
    """Restriction of a residue condition to the poles sitting at level
    0; the pushed differential vanishes on level -1, so only this part
    constrains it."""
    offs, off = [], 0
    for (g, a) in sig:
        offs.append(off)
        off += len(a)
    return frozenset((j, i) for (j, i) in E
                     if legpos[offs[j] + i + 1][0] == 0)


def _ensures(sig, graph, twist, levels, conditions, E):
    """True when the residue condition E holds automatically on the
    two-level boundary stratum: its level-0 part must follow from the
    residue theorem on each level-0 vertex together with the level-0
    parts of the imposed conditions."""
    _, _, _, _, legpos = _level_data(sig, graph, twist, levels)
    offs, off = [], 0
    for (g, a) in sig:
        offs.append(off)
        off += len(a)
    rows = []
    for E2 in conditions:
        part = _level0_part(sig, legpos, E2)
        if part:
            rows.append(part)
    for v in range(graph.n_vertices):
        if levels[v] != 0:
            continue
        row = set()
        for l in graph.vertex_legs(v):
            if twist[l] < 0:
                for j in range(len(sig) - 1, -1, -1):
                    if l > offs[j]:
                        row.add((j, l - offs[j] - 1))
                        break
        if row:
            rows.append(frozenset(row))
    return _in_span(_level0_part(sig, legpos, E), rows)


def _permute_vertices(graph, order):
    newpos = {v: k for k, v in enumerate(order)}
    genera = [graph.genera[v] for v in order]
    comps = [graph.components[v] for v in order]
    legs = sorted((l, newpos[v]) for (l, v) in graph.legs)
    edges = [(newpos[a], newpos[b]) for (a, b) in graph.edges]
    return StableGraph(genera, legs, edges, comps, validate=False)


def _codim_base(sig, conditions):
    """Codimension of coefficient 0 of the series: genus minus one per
    pole-free component, minus one per unmarked zero, plus the rank of
    the conditions beyond the residue theorem, minus one per extra
    component of a joint projectivization."""
    b = 1 - len(sig) + _extra_rank(sig, conditions)
    for (g, a) in sig:
        b += g - (1 if all(x > 0 for x in a) else 0) - _unmarked(g, a)
    return b


def _leveled_glue(sig, conditions, ambient, graph, twist, levels, c):
    """Pushforward of the two-level boundary class: coefficient c of
    the level-0 sub-series times coefficient 0 of the level -1
    sub-series, glued along the graph.  Returns a TautClass on the
    parent ambient (no multiplicity or automorphism factor applied).

    Boundary terms of the induction identities have pure codimension
    one more than the parent series; graphs whose level classes land in
    any other degree do not arise as degeneration loci and give zero."""
    order, sig0, sig1, pos, legpos = _level_data(sig, graph, twist, levels)
    offs, off = [], 0
    for (g, a) in sig:
        offs.append(off)
        off += len(a)
    R0, R1 = set(), set()
    for E in conditions:
        mapped0, mapped1 = set(), set()
        for (j, i) in E:
            lvl, cj, pi = legpos[offs[j] + i + 1]
            (mapped0 if lvl == 0 else mapped1).add((cj, pi))
        if mapped0:
            # the pushed differential vanishes on level -1, so only the
            # level-0 part of a condition survives on the stratum
            R0.add(frozenset(mapped0))
        elif mapped1:
            # a condition supported entirely at level -1 descends to
            # the lower differential
            R1.add(frozenset(mapped1))
    # edges of pole-free level-0 vertices impose lower residue relations
    for v in _grc_vertices(graph, twist, levels):
        row = set()
        for (e, s) in graph.vertex_halfedges(v):
            other = graph.other_half((e, s))
            lvl, cj, pi = pos[other]
            row.add((cj, pi))
        if row:
            R1.add(frozenset(row))
    # The boundary term carries the locus of lower curves admitting a
    # suitable differential, which is the product of the per-component
    # stratum classes.  A lower condition coupling several components
    # only binds when all but one of its parts is already forced to
    # vanish, since the remaining scalings can absorb it otherwise.
    per = [set() for _ in sig1]
    pending = [frozenset(R) for R in R1]
    while True:
        keep, changed = [], False
        for row in pending:
            parts = {}
            for (cj, pi) in row:
                parts.setdefault(cj, set()).add((0, pi))
            live = []
            for cj, part in parts.items():
                g1, a1 = sig1[cj]
                rows = ([frozenset(x) for x in per[cj]]
                        + [frozenset((0, i) for i, x in enumerate(a1)
                                     if x < 0)])
                if not _in_span(frozenset(part), rows):
                    live.append((cj, part))
            if len(live) == 1:
                cj, part = live[0]
                per[cj].add(frozenset(part))
                changed = True
            elif len(live) > 1:
                keep.append(row)
        pending = keep
        if not changed:
            break
    deg = len(graph.edges) + _codim_base(sig0, frozenset(R0))
    for cj, (g1, a1) in enumerate(sig1):
        deg += _codim_base(((g1, a1),), frozenset(per[cj]))
    if deg != _codim_base(sig, conditions) + 1:
        return TautClass.zero(ambient)
    val0 = psq_series(sig0, frozenset(R0)).coefficient(c)
    if val0.is_zero():
        return TautClass.zero(ambient)
    vals = [val0]
    for cj, (g1, a1) in enumerate(sig1):
        v = psq_series(((g1, a1),), frozenset(per[cj])).coefficient(0)
        if v.is_zero():
            return TautClass.zero(ambient)
        vals.append(v)
    joint = tensor(vals)
    return push_glue_joint(_permute_vertices(graph, order), joint, ambient)


# -- reduction interface -------------------------------------------------------


class _FnSeries:
    """Lazy series defined by a coefficient function."""

    def __init__(self, ambient, fn):
        self.ambient = ambient
        self._fn = fn
        self._coeffs = {}

    def coefficient(self, c):
        if c not in self._coeffs:
            self._coeffs[c] = self._fn(c)
        return self._coeffs[c]


def psq_reduce(series, mode):
    """One explicit induction step applied to a stratum series.

    ``mode`` is ("zero_step", j, i) for the psi-twisted recursion at
    marking (j, i) of a full signature, ("residue_step", conditions) to
    impose further residue conditions, or ("unmarked_step",) for the
    entry-raising recursion at marking 1 of a single component."""
    kind = mode[0]
    sig = series.sig
    if kind == "zero_step":
        _, j, i = mode
        for (g, a) in sig:
            if _unmarked(g, a) != 0:
                raise StrataError("zero_step needs a full signature")

        def fn(c):
            if c == 0:
                return series.coefficient(0)
            return series._zero_step(j, i, c)
        return _FnSeries(series.ambient, fn)
    if kind == "residue_step":
        conds = _norm_conditions(sig, mode[1])
        return psq_series(sig, series.conditions | conds)
    if kind == "unmarked_step":
        if len(sig) != 1:
            raise StrataError("unmarked_step needs a single component")
        g, a = sig[0]
        if a[0] < -1 or any(x <= 0 for x in a[1:]):
            raise StrataError("unmarked_step needs a_1 >= -1 and the "
                              "other entries positive")
        target = (a[0] + 2,) + a[1:]
        return psq_series(((g, target),), series.conditions)
    raise StrataError("unknown reduction mode %r" % (kind,))


# -- strata classes and the star-graph expression --------------------------------


def strata_class_spin(a, g):
    """Signed class of the closure of the stratum of spin differentials
    with zeros of orders a_i - 1 at the markings; codimension g - 1.

    >>> strata_class_spin((1,), 1) == TautClass.fundamental(((1, 1),)).scale(-1)
    True
    """
    a = tuple(int(x) for x in a)
    n = len(a)
    if g == 0:
        return TautClass.zero(((0, n),))
    if any(x <= 0 or x % 2 == 0 for x in a):
        raise StrataError("entries must be odd and positive")
    if sum(a) != 2 * g - 2 + n:
        raise StrataError("sum(a) must equal 2g-2+n")
    return psq_series(((g, a),)).coefficient(0)


_MERO_CACHE = {}


def _stratum_class_mero(a, k, g):
    """Signed class of the closure of the stratum of k-differentials of
    type a with some entry outside kN: the spin double ramification
    class minus the star-graph boundary corrections."""
    a = tuple(int(x) for x in a)
    key = (a, k, g)
    if key in _MERO_CACHE:
        return _MERO_CACHE[key]
    if key in _ACTIVE:
        raise StrataRecursionError("cyclic stratum dependence %r" % (key,))
    _ACTIVE.add(key)
    try:
        n = len(a)
        ambient = ((g, n),)
        rs = r_window_start(a, k, g, g) + 2
        total = dr_spin(a, k, g, r_start=rs)
        for (graph, twist, aut, center) in \
                enumerate_simple_stars_odd(a, k, g):
            if graph.n_edges == 0:
                continue
            total = total - _star_term(graph, twist, aut, center,
                                       a, k, ambient)
    finally:
        _ACTIVE.discard(key)
    _MERO_CACHE[key] = total
    return total


def _star_term(graph, twist, aut, center, a, k, ambient):
    """One star-graph boundary term: edge-twist product over k^{#out}
    |Aut|, times the glued product of the central meromorphic stratum
    class and the outlying holomorphic ones."""
    coef = Fraction(1, k ** (graph.n_vertices - 1) * aut)
    for e in range(graph.n_edges):
        coef *= abs(twist[(e, 1)])
    per_vertex = []
    for v in range(graph.n_vertices):
        sv = tuple(twist[p] for p in graph.vertex_points(v))
        gv = graph.genera[v]
        if v == center:
            per_vertex.append(_stratum_class_mero(sv, k, gv))
        else:
            per_vertex.append(
                psq_series(((gv, tuple(x // k for x in sv)),))
                .coefficient(0))
    return push_glue(graph, per_vertex, ambient).scale(coef)


def stargraph_spin(a, k):
    """The star-graph expression for the spin double ramification
    class: sum over odd-twisted star graphs of the glued signed strata
    classes.  For signatures with every entry a positive multiple of k
    the trivial term is replaced by its psi-corrected expansion."""
    a = tuple(int(x) for x in a)
    n = len(a)
    if k <= 0 or k % 2 == 0 or any(x % 2 == 0 for x in a):
        raise StrataError("k and all entries of a must be odd")
    if (sum(a) + 2 * k - k * n) % (2 * k) != 0:
        raise StrataError("sum(a) must equal k(2g-2+n)")
    g = (sum(a) - k * (n - 2)) // (2 * k)
    if g < 0 or 2 * g - 2 + n <= 0:
        raise StrataError("no stable (g, n) fits the signature")
    ambient = ((g, n),)
    if all(x > 0 and x % k == 0 for x in a):
        if k > 1:
            raise StrataError(
                "holomorphic multiple signatures need the strictly "
                "k-canonical stratum class, available only for k = 1")
        # trivial star replaced: -a_1 psi_1 times the holomorphic
        # stratum class; the star sum keeps leg 1 on the centre
        hol = strata_class_spin(a, g)
        total = hol.mult_psi(1, 1).scale(-a[0])
        for (graph, twist, aut, center) in \
                enumerate_simple_stars_odd(a, k, g):
            if graph.n_edges == 0:
                continue
            if dict(graph.legs)[1] != center:
                continue
            total = total + _star_term(graph, twist, aut, center,
                                       a, k, ambient)
        return total
    total = TautClass.zero(ambient)
    for (graph, twist, aut, center) in enumerate_simple_stars_odd(a, k, g):
        if graph.n_edges == 0:
            total = total + _stratum_class_mero(a, k, g)
        else:
            total = total + _star_term(graph, twist, aut, center,
                                       a, k, ambient)
    return total
