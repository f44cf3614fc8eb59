"""Exact-rational algebra of decorated boundary strata.

A class is a finite sum of terms c * glue(Gamma, decoration): a stable
graph of the ambient space with kappa classes on vertices and psi powers
on legs and half-edges, pushed forward along the gluing map.  Terms are
stored by a canonical key so isomorphic presentations merge.  Products
use the excess-intersection rule over common degenerations.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from functools import lru_cache

from .graphs import (StableGraph, GraphError, canonicalize, isomorphisms,
                     automorphisms, contract, enumerate_stable_graphs)


# -- ambient ------------------------------------------------------------------


def ambient_dim(ambient):
    """Dimension of a product of moduli factors ((g1,n1), (g2,n2), ...)."""
    return sum(3 * g - 3 + n for (g, n) in ambient)


def ambient_legs(ambient):
    return sum(n for (_, n) in ambient)


def trivial_graph(ambient):
    """One smooth vertex per factor, legs labelled globally in order."""
    genera = [g for (g, _) in ambient]
    comps = list(range(len(ambient)))
    legs = []
    off = 0
    for j, (g, n) in enumerate(ambient):
        legs += [(off + i + 1, j) for i in range(n)]
        off += n
    return StableGraph(genera, legs, (), comps)


@lru_cache(maxsize=None)
def ambient_graphs(ambient, max_edges=None):
    """All stable graphs of a product ambient, canonical, deterministic.
    ``max_edges`` bounds the total edge count of the output graphs."""
    per = []
    off = 0
    for (g, n) in ambient:
        comp_graphs = []
        for graph in enumerate_stable_graphs(g, n, max_edges):
            legs = [(l + off, v) for (l, v) in graph.legs]
            comp_graphs.append((graph, legs))
        per.append(comp_graphs)
        off += n
    out = []
    for combo in itertools.product(*per):
        if max_edges is not None and sum(
                graph.n_edges for (graph, _) in combo) > max_edges:
            continue
        genera, legs, edges, comps = [], [], [], []
        voff = 0
        for j, (graph, relabeled) in enumerate(combo):
            genera += list(graph.genera)
            comps += [j] * graph.n_vertices
            legs += [(l, v + voff) for (l, v) in relabeled]
            edges += [(a + voff, b + voff) for (a, b) in graph.edges]
            voff += graph.n_vertices
        g = StableGraph(genera, sorted(legs), edges, comps, validate=False)
        canon, aut = canonicalize(g)
        out.append((canon, aut))
    out.sort(key=lambda pair: pair[0].cert())
    return tuple(out)


# -- canonical keys ------------------------------------------------------------


_canon_cache = {}


def _graph_canon(graph):
    """Memoized (canonical graph, aut order, all isos graph -> canonical)."""
    hit = _canon_cache.get(graph)
    if hit is None:
        canon, aut = canonicalize(graph)
        isos = isomorphisms(graph, canon)
        hit = (canon, aut, tuple(isos))
        _canon_cache[graph] = hit
    return hit


def canonical_term(graph, kappa, psi_leg, psi_he):
    """Least serialized form of a decorated graph over all isomorphisms.

    ``kappa``: per-vertex iterable of kappa degrees; ``psi_leg``: map leg
    label -> exponent; ``psi_he``: map half-edge -> exponent.
    """
    canon, _, isos = _graph_canon(graph)
    gfields = (canon.genera, canon.components, canon.legs, canon.edges)
    best = None
    for (vmap, emap) in isos:
        k = [()] * canon.n_vertices
        for v in range(graph.n_vertices):
            k[vmap[v]] = tuple(sorted(kappa[v]))
        pl = tuple(sorted((l, e) for l, e in psi_leg.items() if e))
        ph = tuple(sorted(((emap[e][0], s ^ emap[e][1]), x)
                          for (e, s), x in psi_he.items() if x))
        cand = (tuple(k), pl, ph)
        if best is None or cand < best:
            best = cand
    return gfields + best


def parse_term(key):
    """Inverse of canonical_term: (graph, kappa, psi_leg, psi_he)."""
    genera, components, legs, edges, kappa, pl, ph = key
    graph = StableGraph(genera, legs, edges, components, validate=False)
    return graph, list(kappa), dict(pl), dict(ph)


def term_degree(key):
    _, _, _, edges, kappa, pl, ph = key
    return (len(edges) + sum(sum(k) for k in kappa)
            + sum(e for _, e in pl) + sum(e for _, e in ph))


# -- the class ------------------------------------------------------------------


class TautClass:
    """Exact-rational combination of decorated boundary strata."""

    __slots__ = ("ambient", "terms")

    def __init__(self, ambient, terms=None):
        self.ambient = tuple((int(g), int(n)) for (g, n) in ambient)
        self.terms = dict(terms or {})

    # construction helpers

    @staticmethod
    def zero(ambient):
        return TautClass(ambient)

    @staticmethod
    def fundamental(ambient):
        g = trivial_graph(ambient)
        key = canonical_term(g, [()] * g.n_vertices, {}, {})
        return TautClass(ambient, {key: Fraction(1)})

    @staticmethod
    def psi(ambient, leg, power=1):
        g = trivial_graph(ambient)
        key = canonical_term(g, [()] * g.n_vertices, {leg: power}, {})
        return TautClass(ambient, {key: Fraction(1)})

    @staticmethod
    def kappa(ambient, m, component=0):
        g = trivial_graph(ambient)
        kap = [()] * g.n_vertices
        kap[component] = (m,)
        key = canonical_term(g, kap, {}, {})
        return TautClass(ambient, {key: Fraction(1)})

    @staticmethod
    def from_terms(ambient, items, truncate=True):
        """items: iterable of (graph, kappa, psi_leg, psi_he, coeff)."""
        dim = ambient_dim(ambient)
        terms = {}
        for (graph, kappa, psi_leg, psi_he, coeff) in items:
            if coeff == 0:
                continue
            key = canonical_term(graph, kappa, psi_leg, psi_he)
            if truncate and term_degree(key) > dim:
                continue
            c = terms.get(key, Fraction(0)) + coeff
            if c:
                terms[key] = c
            else:
                terms.pop(key, None)
        return TautClass(ambient, terms)

    # structure

    def is_zero(self):
        return not self.terms

    def degrees(self):
        return sorted({term_degree(k) for k in self.terms})

    def degree_part(self, d):
        return TautClass(self.ambient, {k: c for k, c in self.terms.items()
                                        if term_degree(k) == d})

    def __eq__(self, other):
        """Equality of canonical presentations (not of cycle classes)."""
        return (isinstance(other, TautClass)
                and self.ambient == other.ambient
                and self.terms == other.terms)

    def __repr__(self):
        return "TautClass(%r, %d terms)" % (self.ambient, len(self.terms))

    # linear operations

    def _check(self, other):
        if self.ambient != other.ambient:
            raise GraphError("ambient mismatch: %r vs %r"
                             % (self.ambient, other.ambient))

    def add(self, other):
        self._check(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            s = terms.get(k, Fraction(0)) + c
            if s:
                terms[k] = s
            else:
                terms.pop(k, None)
        return TautClass(self.ambient, terms)

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return TautClass(self.ambient)
        return TautClass(self.ambient,
                         {k: v * c for k, v in self.terms.items()})

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scale(-1))

    def __neg__(self):
        return self.scale(-1)

    # cheap products with pure psi and kappa monomials

    def mult_psi(self, leg, power=1):
        """Multiply by psi at a marked point of the ambient (exact: the
        gluing pullback of a marked-point psi is psi at that leg)."""
        dim = ambient_dim(self.ambient)
        out = {}
        for key, c in self.terms.items():
            graph, kappa, pl, ph = parse_term(key)
            pl[leg] = pl.get(leg, 0) + power
            nk = canonical_term(graph, kappa, pl, ph)
            if term_degree(nk) > dim:
                continue
            s = out.get(nk, Fraction(0)) + c
            if s:
                out[nk] = s
            else:
                out.pop(nk, None)
        return TautClass(self.ambient, out)

    def mult_kappa(self, m, component=0):
        """Multiply by kappa_m of one ambient factor: the gluing pullback
        is the sum of vertex kappa_m over that factor's vertices."""
        dim = ambient_dim(self.ambient)
        items = []
        for key, c in self.terms.items():
            graph, kappa, pl, ph = parse_term(key)
            for v in range(graph.n_vertices):
                if graph.components[v] != component:
                    continue
                kap = list(kappa)
                kap[v] = tuple(sorted(kap[v] + (m,)))
                items.append((graph, kap, pl, ph, c))
        cls = TautClass.from_terms(self.ambient, items)
        return cls

    # full product ------------------------------------------------------------

    def multiply(self, other):
        """Excess-intersection product over common degenerations."""
        self._check(other)
        dim = ambient_dim(self.ambient)
        items = []
        if self.is_zero() or other.is_zero():
            return TautClass.zero(self.ambient)
        bound = min(dim, max(len(k[3]) for k in self.terms)
                    + max(len(k[3]) for k in other.terms))
        graphs = ambient_graphs(self.ambient, bound)
        for keyA, cA in self.terms.items():
            GA, kapA, plA, phA = parse_term(keyA)
            dA = term_degree(keyA)
            for keyB, cB in other.terms.items():
                if dA + term_degree(keyB) > dim:
                    continue
                GB, kapB, plB, phB = parse_term(keyB)
                emax = GA.n_edges + GB.n_edges
                for (gamma, aut) in graphs:
                    if gamma.n_edges > emax:
                        continue
                    SA = _structures(gamma, GA)
                    if not SA:
                        continue
                    SB = _structures(gamma, GB)
                    if not SB:
                        continue
                    alledges = frozenset(range(gamma.n_edges))
                    for (ea, bijA, preA) in SA:
                        for (eb, bijB, preB) in SB:
                            if ea | eb != alledges:
                                continue
                            items += _combine(gamma, cA * cB / aut,
                                              (kapA, plA, phA, bijA, preA),
                                              (kapB, plB, phB, bijB, preB),
                                              ea & eb)
        return TautClass.from_terms(self.ambient, items)

    # serialization -------------------------------------------------------------

    def to_json_dict(self):
        out = []
        for key in sorted(self.terms):
            graph, kappa, pl, ph = parse_term(key)
            c = self.terms[key]
            dec = {
                "kappa": [[v, d] for v in range(graph.n_vertices)
                          for d in kappa[v]],
                "psi": ([[l, e] for (l, e) in sorted(pl.items())]
                        + [["h%d.%d" % h, e]
                           for (h, e) in sorted(ph.items())]),
            }
            out.append({"graph": graph.to_json_dict(),
                        "decoration": dec,
                        "coeff": "%d/%d" % (c.numerator, c.denominator)})
        return {"ambient": [[g, n] for (g, n) in self.ambient],
                "terms": out}

    @staticmethod
    def from_json_dict(doc):
        ambient = tuple((g, n) for (g, n) in doc["ambient"])
        items = []
        for t in doc["terms"]:
            graph = StableGraph.from_json_dict(t["graph"])
            kappa = [[] for _ in range(graph.n_vertices)]
            for (v, d) in t["decoration"]["kappa"]:
                kappa[v].append(d)
            pl, ph = {}, {}
            for (p, e) in t["decoration"]["psi"]:
                if isinstance(p, str) and p.startswith("h"):
                    a, b = p[1:].split(".")
                    ph[(int(a), int(b))] = e
                else:
                    pl[int(p)] = e
            num, den = t["coeff"].split("/")
            items.append((graph, kappa, pl, ph, Fraction(int(num), int(den))))
        return TautClass.from_terms(ambient, items, truncate=False)

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True)


# -- product machinery -----------------------------------------------------------


_structure_cache = {}


def _structures(big, small):
    """Ways of seeing ``small`` as a partial smoothing of ``big``.

    Each structure is (kept_edges, edge_bij, preimages): ``kept_edges``
    is the frozenset of edges of ``big`` corresponding to the edges of
    ``small``; ``edge_bij[e] = (E, flip)`` matches half-edges; and
    ``preimages[u]`` lists the vertices of ``big`` that merge into
    vertex u of ``small`` when the other edges are contracted.
    """
    ck = (big, small)
    hit = _structure_cache.get(ck)
    if hit is not None:
        return hit
    res = []
    if small.n_edges <= big.n_edges:
        for keep in itertools.combinations(range(big.n_edges),
                                           small.n_edges):
            drop = frozenset(range(big.n_edges)) - frozenset(keep)
            try:
                gc, vmap_q, kept = contract(big, drop)
            except GraphError:
                continue
            for (vmapA, emapA) in isomorphisms(small, gc):
                bij = tuple((kept[emapA[e][0]], emapA[e][1])
                            for e in range(small.n_edges))
                pre = tuple(tuple(v for v in range(big.n_vertices)
                                  if vmap_q[v] == vmapA[u])
                            for u in range(small.n_vertices))
                res.append((frozenset(keep), bij, pre))
    res = tuple(res)
    _structure_cache[ck] = res
    return res


def _combine(gamma, coeff, specA, specB, excess):
    """Terms of the product on the common degeneration ``gamma``."""
    (kapA, plA, phA, bijA, preA) = specA
    (kapB, plB, phB, bijB, preB) = specB
    pl = dict(plA)
    for l, e in plB.items():
        pl[l] = pl.get(l, 0) + e
    ph = {}
    for (src_ph, bij) in ((phA, bijA), (phB, bijB)):
        for (e, s), x in src_ph.items():
            E, flip = bij[e]
            h = (E, s ^ flip)
            ph[h] = ph.get(h, 0) + x
    # kappa factors distribute over preimage vertices
    factors = []
    for kap, pre in ((kapA, preA), (kapB, preB)):
        for u, degs in enumerate(kap):
            for d in degs:
                factors.append((d, pre[u]))
    items = []
    for choice in itertools.product(*(p for (_, p) in factors)):
        kappa = [[] for _ in range(gamma.n_vertices)]
        for (d, _), v in zip(factors, choice):
            kappa[v].append(d)
        # expand the excess factor prod_e -(psi_h + psi_h')
        sides = itertools.product(*(((e, 0), (e, 1)) for e in sorted(excess)))
        sign = Fraction(-1) ** len(excess)
        for pick in sides:
            ph2 = dict(ph)
            for h in pick:
                ph2[h] = ph2.get(h, 0) + 1
            items.append((gamma, [tuple(k) for k in kappa], dict(pl),
                          ph2, coeff * sign))
    return items


# -- gluing pushforward -----------------------------------------------------------


def push_glue(graph, per_vertex, ambient):
    """Graft per-vertex classes into ``graph`` and push forward.

    ``per_vertex[v]`` lives on the one-factor ambient ((g(v), n(v)),)
    with legs 1..n(v) matching ``graph.vertex_points(v)`` in order.  No
    automorphism factor is applied.
    """
    nv = graph.n_vertices
    for v in range(nv):
        want = ((graph.genera[v], graph.valence(v)),)
        if per_vertex[v].ambient != want:
            raise GraphError("vertex %d expects ambient %r, got %r"
                             % (v, want, per_vertex[v].ambient))
    items = []
    term_lists = [list(per_vertex[v].terms.items()) for v in range(nv)]
    for combo in itertools.product(*term_lists):
        coeff = Fraction(1)
        genera, comps, legs, edges = [], [], [], []
        kappa, pl, ph = [], {}, {}
        # anchor[v][local_point] = (vertex index in composite, psi exp)
        anchor = [None] * nv
        voff = 0
        for v in range(nv):
            key, c = combo[v]
            coeff *= c
            gv, kapv, plv, phv = parse_term(key)
            genera += list(gv.genera)
            comps += [graph.components[v]] * gv.n_vertices
            kappa += [tuple(k) for k in kapv]
            eoff = len(edges)
            edges += [(a + voff, b + voff) for (a, b) in gv.edges]
            for (e, s), x in phv.items():
                ph[(e + eoff, s)] = x
            points = graph.vertex_points(v)
            legmap = dict(gv.legs)
            amap = {}
            for i, pt in enumerate(points):
                local = i + 1
                w = legmap[local] + voff
                amap[pt] = (w, plv.get(local, 0))
            anchor[v] = amap
            voff += gv.n_vertices
        # now lay down the legs and edges of the outer graph
        for (l, v) in graph.legs:
            w, pexp = anchor[v][l]
            legs.append((l, w))
            if pexp:
                pl[l] = pexp
        for e, (a, b) in enumerate(graph.edges):
            w0, p0 = anchor[a][(e, 0)]
            w1, p1 = anchor[b][(e, 1)]
            E = len(edges)
            edges.append((w0, w1))
            if p0:
                ph[(E, 0)] = p0
            if p1:
                ph[(E, 1)] = p1
        comp_graph = StableGraph(genera, sorted(legs), edges, comps,
                                 validate=False)
        items.append((comp_graph, kappa, pl, ph, coeff))
    return TautClass.from_terms(ambient, items)


def relabel_legs(cls, mapping):
    """Rename leg labels according to ``mapping`` (a dict; labels not in
    the mapping are kept).  The ambient is unchanged, so the mapping must
    permute labels within each factor."""
    items = []
    for key, coeff in cls.terms.items():
        g, kap, pl, ph = parse_term(key)
        g2 = StableGraph(g.genera,
                         sorted((mapping.get(l, l), v) for (l, v) in g.legs),
                         g.edges, g.components, validate=False)
        pl2 = {mapping.get(l, l): e for l, e in pl.items()}
        items.append((g2, [tuple(k) for k in kap], pl2, dict(ph), coeff))
    return TautClass.from_terms(cls.ambient, items)


def push_glue_joint(graph, joint, ambient):
    """Graft a class on the product-of-vertices ambient into ``graph``.

    ``joint`` lives on the ambient ((g(v), n(v)) for v in vertex order)
    with the legs of factor v numbered consecutively after all legs of
    earlier factors, matching ``graph.vertex_points(v)`` in order.  No
    automorphism factor is applied.
    """
    nv = graph.n_vertices
    want = tuple((graph.genera[v], graph.valence(v)) for v in range(nv))
    if joint.ambient != want:
        raise GraphError("joint class expects ambient %r, got %r"
                         % (want, joint.ambient))
    offsets = [0] * nv
    for v in range(1, nv):
        offsets[v] = offsets[v - 1] + graph.valence(v - 1)
    items = []
    for key, coeff in joint.terms.items():
        gv, kapv, plv, phv = parse_term(key)
        genera = list(gv.genera)
        comps = [graph.components[gv.components[u]]
                 for u in range(gv.n_vertices)]
        kappa = [tuple(k) for k in kapv]
        edges = [(a, b) for (a, b) in gv.edges]
        ph = {(e, s): x for (e, s), x in phv.items()}
        legs, pl = [], {}
        legmap = dict(gv.legs)
        anchor = [None] * nv
        for v in range(nv):
            amap = {}
            for i, pt in enumerate(graph.vertex_points(v)):
                lab = offsets[v] + i + 1
                amap[pt] = (legmap[lab], plv.get(lab, 0))
            anchor[v] = amap
        for (l, v) in graph.legs:
            w, pexp = anchor[v][l]
            legs.append((l, w))
            if pexp:
                pl[l] = pexp
        for e, (a, b) in enumerate(graph.edges):
            w0, p0 = anchor[a][(e, 0)]
            w1, p1 = anchor[b][(e, 1)]
            E = len(edges)
            edges.append((w0, w1))
            if p0:
                ph[(E, 0)] = p0
            if p1:
                ph[(E, 1)] = p1
        comp_graph = StableGraph(genera, sorted(legs), edges, comps,
                                 validate=False)
        items.append((comp_graph, kappa, pl, ph, coeff))
    return TautClass.from_terms(ambient, items)


def tensor(classes):
    """External product: combine classes on separate ambients into one
    class on the concatenated ambient.  Leg labels of later factors are
    shifted by the number of earlier legs."""
    ambient = tuple(itertools.chain(*(c.ambient for c in classes)))
    items = []
    for combo in itertools.product(*(list(c.terms.items())
                                     for c in classes)):
        coeff = Fraction(1)
        genera, comps, legs, edges = [], [], [], []
        kappa, pl, ph = [], {}, {}
        voff = coff = loff = 0
        for cls, (key, c) in zip(classes, combo):
            coeff *= c
            gv, kapv, plv, phv = parse_term(key)
            genera += list(gv.genera)
            comps += [cc + coff for cc in gv.components]
            kappa += [tuple(k) for k in kapv]
            legs += [(l + loff, v + voff) for (l, v) in gv.legs]
            eoff = len(edges)
            edges += [(a + voff, b + voff) for (a, b) in gv.edges]
            for l, e in plv.items():
                pl[l + loff] = e
            for (e, s), x in phv.items():
                ph[(e + eoff, s)] = x
            voff += gv.n_vertices
            coff += len(cls.ambient)
            loff += ambient_legs(cls.ambient)
        g = StableGraph(genera, sorted(legs), edges, comps, validate=False)
        items.append((g, kappa, pl, ph, coeff))
    return TautClass.from_terms(ambient, items)


# -- forgetful transport -----------------------------------------------------------


def _forget_relabel(ambient, label):
    """New ambient and leg relabeling after dropping one leg."""
    comp, off = _leg_component(ambient, label)
    g, n = ambient[comp]
    if 2 * g - 2 + (n - 1) <= 0:
        raise GraphError("forgetting leg %d destabilizes factor %d"
                         % (label, comp))
    new_ambient = tuple((gg, nn - 1) if j == comp else (gg, nn)
                        for j, (gg, nn) in enumerate(ambient))
    relabel = {}
    for l in range(1, ambient_legs(ambient) + 1):
        if l == label:
            continue
        relabel[l] = l - 1 if l > label else l
    return new_ambient, relabel


def _leg_component(ambient, label):
    off = 0
    for j, (g, n) in enumerate(ambient):
        if off < label <= off + n:
            return j, off
        off += n
    raise GraphError("no leg %d in ambient %r" % (label, ambient))


def push_forget(cls, label):
    """Pushforward along the map forgetting one marked point.

    Kappa classes at the leg's vertex are rewritten through the
    comparison kappa_b = pull(kappa_b) + psi_f^b; then a pure psi_f^m
    integrates to kappa_{m-1} (with kappa_0 = 2g-2+n and kappa_{-1}
    handled by the string equation).
    """
    new_ambient, relabel = _forget_relabel(cls.ambient, label)
    items = []
    for key, coeff in cls.terms.items():
        graph, kappa, pl, ph = parse_term(key)
        v0 = dict(graph.legs)[label]
        fexp = pl.pop(label, 0)
        # kappa at v0: each factor kappa_b -> kappa_b or psi_f^b
        kv = kappa[v0]
        for stay_mask in itertools.product((0, 1), repeat=len(kv)):
            kept = tuple(b for b, m in zip(kv, stay_mask) if m == 0)
            extra = sum(b for b, m in zip(kv, stay_mask) if m == 1)
            m = fexp + extra
            kap = list(kappa)
            kap[v0] = kept
            items += _push_psi_power(graph, kap, dict(pl), dict(ph),
                                     coeff, label, v0, m, relabel)
    return TautClass.from_terms(new_ambient, items)


def _push_psi_power(graph, kappa, pl, ph, coeff, label, v0, m, relabel):
    """Integrate psi_label^m out of vertex v0 and drop the leg."""
    out = []
    if m >= 1:
        stays_stable = 2 * graph.genera[v0] - 2 + graph.valence(v0) - 1 > 0
        if not stays_stable:
            # positive-degree decoration on a vertex that contracts: the
            # only surviving case is m >= 1 on a (0,3) vertex, which has
            # no moduli, so psi vanishes
            return []
        newg, npl, nph = _drop_leg(graph, label, relabel, pl, ph)
        kap = list(kappa)
        if m == 1:
            g, n = graph.genera[v0], graph.valence(v0) - 1
            out.append((newg, kap, npl, nph,
                        coeff * (2 * g - 2 + n)))
        else:
            kap[v0] = tuple(sorted(kap[v0] + (m - 1,)))
            out.append((newg, kap, npl, nph, coeff))
        return out
    # m == 0: string equation over the points of v0
    stays_stable = 2 * graph.genera[v0] - 2 + graph.valence(v0) - 1 > 0
    if stays_stable:
        for pt in graph.vertex_points(v0):
            if pt == label:
                continue
            if isinstance(pt, tuple):
                if ph.get(pt, 0) >= 1:
                    nph = dict(ph)
                    nph[pt] -= 1
                    newg, npl, nph = _drop_leg(graph, label, relabel,
                                               dict(pl), nph)
                    out.append((newg, list(kappa), npl, nph, coeff))
            else:
                if pl.get(pt, 0) >= 1:
                    npl = dict(pl)
                    npl[pt] -= 1
                    newg, npl, nph = _drop_leg(graph, label, relabel,
                                               npl, dict(ph))
                    out.append((newg, list(kappa), npl, nph, coeff))
        return out
    # vertex contracts: must be (0,3) with no decoration left on it
    if graph.genera[v0] != 0 or graph.valence(v0) != 3:
        raise GraphError("cannot forget leg %d: vertex destabilizes"
                         % label)
    others = [p for p in graph.vertex_points(v0) if p != label]
    if any(isinstance(p, tuple) and ph.get(p, 0) for p in others):
        return []
    if any(not isinstance(p, tuple) and pl.get(p, 0) for p in others):
        return []
    if kappa[v0]:
        return []
    a, b = others
    if isinstance(a, tuple) and isinstance(b, tuple):
        if a[0] == b[0]:
            raise GraphError("contracting a loop on a (0,3) vertex")
        newg, vmap, emap, drop_fixups = _contract_pair(graph, v0, a, b)
        nkap = [kappa[v] for v in range(graph.n_vertices) if v != v0]
        npl = {relabel[l]: e for l, e in pl.items()}
        nph = {}
        for h, x in ph.items():
            nph[drop_fixups(h)] = x
        return [(newg, nkap, npl, nph, coeff)]
    # one half-edge and one leg (or two legs: impossible, graph connected
    # beyond v0 only through half-edges unless the graph is the vertex)
    if isinstance(a, tuple) or isinstance(b, tuple):
        he, lg = (a, b) if isinstance(a, tuple) else (b, a)
        far = graph.other_half(he)
        farv = graph.halfedge_vertex(far)
        e0 = he[0]
        genera = [g for v, g in enumerate(graph.genera) if v != v0]
        vmap = {v: (v if v < v0 else v - 1)
                for v in range(graph.n_vertices) if v != v0}
        legs = [(relabel[l], vmap[w]) for (l, w) in graph.legs
                if l != label and w != v0]
        legs.append((relabel[lg], vmap[farv]))
        edges = []
        emap = {}
        for e, (x, y) in enumerate(graph.edges):
            if e == e0:
                continue
            emap[e] = len(edges)
            edges.append((vmap[x], vmap[y]))
        comps = [c for v, c in enumerate(graph.components) if v != v0]
        newg = StableGraph(genera, sorted(legs), edges, comps,
                           validate=False)
        nkap = [kappa[v] for v in range(graph.n_vertices) if v != v0]
        npl = {relabel[l]: e for l, e in pl.items()}
        far_exp = ph.get(far, 0)
        if far_exp:
            npl[relabel[lg]] = npl.get(relabel[lg], 0) + far_exp
        nph = {(emap[e], s): x for (e, s), x in ph.items()
               if e != e0}
        return [(newg, nkap, npl, nph, coeff)]
    raise GraphError("cannot forget leg %d from a (0,3) component"
                     % label)


def _drop_leg(graph, label, relabel, pl, ph):
    legs = [(relabel[l], v) for (l, v) in graph.legs if l != label]
    newg = StableGraph(graph.genera, sorted(legs), graph.edges,
                       graph.components, validate=False)
    npl = {relabel[l]: e for l, e in pl.items() if e}
    nph = {h: x for h, x in ph.items() if x}
    return newg, npl, nph


def _contract_pair(graph, v0, ha, hb):
    """Replace the chain (edge a) - v0 - (edge b) by a single edge."""
    fa = graph.other_half(ha)
    fb = graph.other_half(hb)
    va, vb = graph.halfedge_vertex(fa), graph.halfedge_vertex(fb)
    vmap = {v: None for v in range(graph.n_vertices)}
    idx = 0
    for v in range(graph.n_vertices):
        if v == v0:
            continue
        vmap[v] = idx
        idx += 1
    edges = []
    emap = {}
    for e, (x, y) in enumerate(graph.edges):
        if e in (ha[0], hb[0]):
            continue
        emap[e] = len(edges)
        edges.append((vmap[x], vmap[y]))
    joined = len(edges)
    edges.append((vmap[va], vmap[vb]))
    genera = [g for v, g in enumerate(graph.genera) if v != v0]
    comps = [c for v, c in enumerate(graph.components) if v != v0]
    legs = [(l, vmap[w]) for (l, w) in graph.legs if w != v0]
    newg = StableGraph(genera, sorted(legs), edges, comps, validate=False)

    def fixup(h):
        if h == fa:
            return (joined, 0)
        if h == fb:
            return (joined, 1)
        return (emap[h[0]], h[1])

    return newg, vmap, emap, fixup


def pull_forget(cls, ambient_new=None):
    """Pullback along the map forgetting the last marked point of a
    one-factor ambient: the new leg gets the next label.

    psi_p^a at a point of the vertex acquiring the new leg corrects to
    psi_p^a minus a bubble term; kappa_b corrects to kappa_b -
    psi_new^b.
    """
    if len(cls.ambient) != 1:
        raise GraphError("pull_forget expects a one-factor ambient")
    g, n = cls.ambient[0]
    new_label = n + 1
    ambient = ((g, n + 1),)
    items = []
    for key, coeff in cls.terms.items():
        graph, kappa, pl, ph = parse_term(key)
        for v in range(graph.n_vertices):
            items += _pull_to_vertex(graph, kappa, pl, ph, coeff, v,
                                     new_label)
    return TautClass.from_terms(ambient, items)


def _pull_to_vertex(graph, kappa, pl, ph, coeff, v, new_label):
    newg = StableGraph(graph.genera,
                       sorted(graph.legs + ((new_label, v),)),
                       graph.edges, graph.components, validate=False)
    items = []
    kv = kappa[v]
    # decorated points of v
    points = []
    for pt in graph.vertex_points(v):
        exp = (ph.get(pt, 0) if isinstance(pt, tuple)
               else pl.get(pt, 0))
        if exp:
            points.append((pt, exp))
    for mask in itertools.product((0, 1), repeat=len(kv)):
        kept = tuple(b for b, m in zip(kv, mask) if m == 0)
        dropped = [b for b, m in zip(kv, mask) if m == 1]
        sign = Fraction(-1) ** len(dropped)
        extra_new = sum(dropped)
        kap = list(kappa)
        kap[v] = kept
        npl = dict(pl)
        if extra_new:
            npl[new_label] = extra_new
        items.append((newg, kap, npl, dict(ph), coeff * sign))
        if extra_new:
            continue  # psi_new kills all bubble corrections
        # one bubble correction per decorated point of v
        for (pt, exp) in points:
            items += _bubble_term(graph, kap, pl, ph, coeff * sign, v,
                                  pt, exp, new_label)
    return items


def _bubble_term(graph, kappa, pl, ph, coeff, v, pt, exp, new_label):
    """-glue(bubble graph, psi_h^{exp-1} at the long side)."""
    nv = graph.n_vertices
    bub = nv  # new (0,3) vertex
    genera = list(graph.genera) + [0]
    comps = list(graph.components) + [graph.components[v]]
    legs = [(l, w) for (l, w) in graph.legs]
    edges = list(graph.edges)
    npl = dict(pl)
    nph = dict(ph)
    if isinstance(pt, tuple):
        # move the half-edge pt to the bubble
        e, s = pt
        x, y = edges[e]
        pair = [x, y]
        pair[s] = bub
        edges[e] = tuple(pair)
        nph.pop(pt, None)
    else:
        legs = [(l, w if l != pt else bub) for (l, w) in legs]
        npl.pop(pt, None)
    legs.append((new_label, bub))
    E = len(edges)
    edges.append((v, bub))
    if exp > 1:
        nph[(E, 0)] = exp - 1
    newg = StableGraph(genera, sorted(legs), edges, comps, validate=False)
    return [(newg, list(kappa) + [()], npl, nph, -coeff)]


# -- formal series ------------------------------------------------------------------


class SeriesClass:
    """Polynomial in a formal variable t with TautClass coefficients."""

    __slots__ = ("ambient", "coeffs")

    def __init__(self, ambient, coeffs=None):
        self.ambient = tuple(ambient)
        self.coeffs = {d: c for d, c in (coeffs or {}).items()
                       if not c.is_zero()}

    @staticmethod
    def zero(ambient):
        return SeriesClass(ambient, {})

    @staticmethod
    def constant(cls):
        return SeriesClass(cls.ambient, {0: cls})

    def coefficient(self, d):
        return self.coeffs.get(d, TautClass.zero(self.ambient))

    def max_degree(self):
        return max(self.coeffs, default=-1)

    def add(self, other):
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            out[d] = out.get(d, TautClass.zero(self.ambient)).add(c)
        return SeriesClass(self.ambient, out)

    def scale(self, c):
        return SeriesClass(self.ambient,
                           {d: v.scale(c) for d, v in self.coeffs.items()})

    def shift(self, k):
        """Multiply by t^k."""
        return SeriesClass(self.ambient,
                           {d + k: v for d, v in self.coeffs.items()})

    def mul_series(self, other, max_deg):
        """Cauchy product using the full excess-intersection multiply."""
        out = {}
        for d1, c1 in self.coeffs.items():
            for d2, c2 in other.coeffs.items():
                d = d1 + d2
                if d > max_deg:
                    continue
                p = c1.multiply(c2)
                if not p.is_zero():
                    out[d] = out.get(d, TautClass.zero(self.ambient)).add(p)
        return SeriesClass(self.ambient, out)

    def mul_one_plus_t_psi(self, leg, sign, max_deg):
        """Multiply by (1 + sign * t * psi_leg)."""
        out = dict(self.coeffs)
        for d, c in self.coeffs.items():
            if d + 1 > max_deg:
                continue
            p = c.mult_psi(leg).scale(sign)
            if not p.is_zero():
                out[d + 1] = out.get(d + 1,
                                     TautClass.zero(self.ambient)).add(p)
        return SeriesClass(self.ambient, out)

    def solve_one_minus_t_psi(self, leg, max_deg):
        """Multiply by the geometric inverse of (1 - t * psi_leg)."""
        out = {}
        for d in range(0, max_deg + 1):
            acc = TautClass.zero(self.ambient)
            for d0, c in self.coeffs.items():
                if d0 > d:
                    continue
                k = d - d0
                acc = acc.add(c.mult_psi(leg, k) if k else c)
            if not acc.is_zero():
                out[d] = acc
        return SeriesClass(self.ambient, out)

    def truncate(self, max_deg):
        return SeriesClass(self.ambient,
                           {d: c for d, c in self.coeffs.items()
                            if d <= max_deg})
