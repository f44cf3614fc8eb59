"""Stable graphs and the combinatorial families the calculus sums over.

A stable graph is the dual graph of a nodal curve: vertices carry genera,
legs are labelled marked points, and edges are nodes.  Half-edges are
addressed as ``(edge_index, side)`` with ``side`` in {0, 1}.  This module
provides canonical forms and automorphism counts, plus enumerators for:

* all stable graphs of a given (g, n),
* loop-free graphs with positive-genus vertices only (tree sums),
* backbone graphs (star trees whose center carries the first leg),
* twisted star graphs with odd twists,
* modular weightings and their moment sums,
* two-level (bicolored) twisted graphs.
"""

from __future__ import annotations

import itertools
from functools import lru_cache


class GraphError(ValueError):
    """Raised when graph data violates a structural invariant."""


class StableGraph:
    """Immutable dual graph of a nodal curve.

    Parameters
    ----------
    genera : sequence of nonnegative ints, one per vertex.
    legs : sequence of (label, vertex) pairs with distinct labels.
    edges : sequence of (vertex_a, vertex_b) pairs; loops allowed.
    components : optional sequence assigning each vertex to a factor of a
        product ambient; defaults to all zero.  Edges never cross
        components and each component must be connected.

    >>> G = StableGraph((1,), ((1, 0),), ())
    >>> G.genus()
    1
    """

    __slots__ = ("genera", "legs", "edges", "components", "_hash")

    def __init__(self, genera, legs, edges, components=None, validate=True):
        genera = tuple(int(g) for g in genera)
        legs = tuple((int(l), int(v)) for (l, v) in legs)
        edges = tuple((int(a), int(b)) for (a, b) in edges)
        if components is None:
            components = (0,) * len(genera)
        components = tuple(int(c) for c in components)
        object.__setattr__(self, "genera", genera)
        object.__setattr__(self, "legs", legs)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "_hash", None)
        if validate:
            self._validate()

    # -- basic structure ------------------------------------------------

    def __setattr__(self, *a):
        raise AttributeError("StableGraph is immutable")

    def _validate(self):
        nv = len(self.genera)
        if nv == 0:
            raise GraphError("graph needs at least one vertex")
        if len(self.components) != nv:
            raise GraphError("component vector length mismatch")
        labels = [l for (l, _) in self.legs]
        if len(set(labels)) != len(labels):
            raise GraphError("duplicate leg labels")
        for (_, v) in self.legs:
            if not 0 <= v < nv:
                raise GraphError("leg attached to missing vertex")
        for (a, b) in self.edges:
            if not (0 <= a < nv and 0 <= b < nv):
                raise GraphError("edge endpoint out of range")
            if self.components[a] != self.components[b]:
                raise GraphError("edge crosses components")
        for g in self.genera:
            if g < 0:
                raise GraphError("negative genus")
        for v in range(nv):
            if 2 * self.genera[v] - 2 + self.valence(v) <= 0:
                raise GraphError("unstable vertex %d" % v)
        # connectivity within each component
        for comp in set(self.components):
            verts = [v for v in range(nv) if self.components[v] == comp]
            seen = {verts[0]}
            frontier = [verts[0]]
            while frontier:
                v = frontier.pop()
                for (a, b) in self.edges:
                    for (x, y) in ((a, b), (b, a)):
                        if x == v and y not in seen:
                            seen.add(y)
                            frontier.append(y)
            if seen != set(verts):
                raise GraphError("component %r not connected" % comp)

    @property
    def n_vertices(self):
        return len(self.genera)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_legs(self):
        return len(self.legs)

    def vertex_legs(self, v):
        """Sorted leg labels at vertex v."""
        return tuple(sorted(l for (l, w) in self.legs if w == v))

    def vertex_halfedges(self, v):
        """Half-edges at vertex v, ordered by (edge index, side)."""
        out = []
        for e, (a, b) in enumerate(self.edges):
            if a == v:
                out.append((e, 0))
            if b == v:
                out.append((e, 1))
        return tuple(out)

    def vertex_points(self, v):
        """All points at v: sorted leg labels first, then half-edges.

        This fixed order is the convention used when a vertex is viewed
        as a moduli factor with markings 1..n(v).
        """
        return self.vertex_legs(v) + self.vertex_halfedges(v)

    def valence(self, v):
        n = sum(1 for (_, w) in self.legs if w == v)
        for (a, b) in self.edges:
            n += (a == v) + (b == v)
        return n

    def halfedge_vertex(self, h):
        e, side = h
        return self.edges[e][side]

    def other_half(self, h):
        e, side = h
        return (e, 1 - side)

    def component_vertices(self, comp):
        return tuple(v for v in range(self.n_vertices)
                     if self.components[v] == comp)

    def component_genus(self, comp):
        verts = self.component_vertices(comp)
        e = sum(1 for (a, b) in self.edges if self.components[a] == comp)
        return sum(self.genera[v] for v in verts) + e - len(verts) + 1

    def genus(self):
        """Total genus of a single-component graph."""
        if len(set(self.components)) != 1:
            raise GraphError("genus() needs a single-component graph")
        return self.component_genus(self.components[0])

    def h1(self):
        return self.n_edges - self.n_vertices + len(set(self.components))

    # -- canonical form --------------------------------------------------

    def cert(self):
        """Structural certificate invariant under the stored labelling."""
        return (self.genera, self.components,
                tuple(sorted(self.legs)),
                tuple(sorted((min(a, b), max(a, b)) for (a, b) in self.edges)))

    @staticmethod
    def from_cert(cert):
        genera, components, legs, edges = cert
        return StableGraph(genera, legs, edges, components)

    def __eq__(self, other):
        return (isinstance(other, StableGraph)
                and self.genera == other.genera
                and self.legs == other.legs
                and self.edges == other.edges
                and self.components == other.components)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.genera, self.legs, self.edges, self.components))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return ("StableGraph(genera=%r, legs=%r, edges=%r, components=%r)"
                % (self.genera, self.legs, self.edges, self.components))

    # -- JSON -------------------------------------------------------------

    def to_json_dict(self, twist=None):
        doc = {
            "vertices": [{"genus": g, "component": c}
                         for g, c in zip(self.genera, self.components)],
            "legs": [{"label": l, "vertex": v} for (l, v) in self.legs],
            "edges": [[{"vertex": a}, {"vertex": b}]
                      for (a, b) in self.edges],
        }
        if twist is not None:
            enc = {}
            for key, val in sorted(twist.items(), key=lambda kv: str(kv[0])):
                if isinstance(key, tuple):
                    enc["h%d.%d" % key] = val
                else:
                    enc[str(key)] = val
            doc["twist"] = enc
        return doc

    @staticmethod
    def from_json_dict(doc):
        genera = [v["genus"] for v in doc["vertices"]]
        comps = [v.get("component", 0) for v in doc["vertices"]]
        legs = [(l["label"], l["vertex"]) for l in doc["legs"]]
        edges = [(e[0]["vertex"], e[1]["vertex"]) for e in doc["edges"]]
        return StableGraph(genera, legs, edges, comps)


# -- canonicalization and isomorphisms -----------------------------------


def _cert_under(graph, perm):
    """Certificate of the graph after renaming vertex v to perm[v]."""
    nv = graph.n_vertices
    genera = [0] * nv
    comps = [0] * nv
    for v in range(nv):
        genera[perm[v]] = graph.genera[v]
        comps[perm[v]] = graph.components[v]
    legs = tuple(sorted((l, perm[v]) for (l, v) in graph.legs))
    edges = tuple(sorted((min(perm[a], perm[b]), max(perm[a], perm[b]))
                         for (a, b) in graph.edges))
    return (tuple(genera), tuple(comps), legs, edges)


def _kernel_order(graph):
    """Automorphisms fixing every vertex: parallel-edge permutations and
    the half-edge swap of each loop."""
    order = 1
    pair_count = {}
    loop_count = {}
    for (a, b) in graph.edges:
        if a == b:
            loop_count[a] = loop_count.get(a, 0) + 1
        else:
            key = (min(a, b), max(a, b))
            pair_count[key] = pair_count.get(key, 0) + 1
    import math
    for m in pair_count.values():
        order *= math.factorial(m)
    for m in loop_count.values():
        order *= (2 ** m) * math.factorial(m)
    return order


def canonicalize(graph):
    """Return (canonical form, |Aut|) of a stable graph.

    The canonical form is the lexicographically least certificate over
    all vertex relabelings; |Aut| counts all automorphisms, including
    half-edge swaps of loops and permutations of parallel edges.

    >>> loop = StableGraph((0,), ((1, 0),), ((0, 0),))
    >>> canonicalize(loop)[1]
    2
    """
    nv = graph.n_vertices
    best = None
    count = 0
    for perm in itertools.permutations(range(nv)):
        cert = _cert_under(graph, perm)
        if best is None or cert < best:
            best = cert
            count = 1
        elif cert == best:
            count += 1
    canon = StableGraph.from_cert(best)
    return canon, count * _kernel_order(canon)


def aut_order(graph):
    return canonicalize(graph)[1]


def _vertex_invariant(graph, v):
    loops = sum(1 for (a, b) in graph.edges if a == b == v)
    return (graph.components[v], graph.genera[v], graph.vertex_legs(v),
            graph.valence(v), loops)


def isomorphisms(g1, g2):
    """All isomorphisms g1 -> g2.

    Each isomorphism is a pair (vmap, emap): ``vmap[v]`` is the image
    vertex and ``emap[e] = (f, flip)`` sends half-edge (e, s) of g1 to
    (f, s XOR flip) of g2.
    """
    if (g1.n_vertices != g2.n_vertices or g1.n_edges != g2.n_edges
            or sorted(l for l, _ in g1.legs) != sorted(l for l, _ in g2.legs)):
        return []
    inv1 = {}
    for v in range(g1.n_vertices):
        inv1.setdefault(_vertex_invariant(g1, v), []).append(v)
    inv2 = {}
    for v in range(g2.n_vertices):
        inv2.setdefault(_vertex_invariant(g2, v), []).append(v)
    if set(inv1) != set(inv2):
        return []
    if any(len(inv1[k]) != len(inv2[k]) for k in inv1):
        return []
    keys = sorted(inv1)
    out = []
    pools = [list(itertools.permutations(inv2[k])) for k in keys]
    for choice in itertools.product(*pools):
        vmap = [None] * g1.n_vertices
        for k, images in zip(keys, choice):
            for src, dst in zip(inv1[k], images):
                vmap[src] = dst
        # legs must match by label
        ok = all(vmap[v] == dict(g2.legs)[l] for (l, v) in g1.legs)
        if not ok:
            continue
        # group edges by image vertex pair
        groups1 = {}
        for e, (a, b) in enumerate(g1.edges):
            key = (min(vmap[a], vmap[b]), max(vmap[a], vmap[b]))
            groups1.setdefault(key, []).append(e)
        groups2 = {}
        for f, (a, b) in enumerate(g2.edges):
            key = (min(a, b), max(a, b))
            groups2.setdefault(key, []).append(f)
        if set(groups1) != set(groups2):
            continue
        if any(len(groups1[k]) != len(groups2[k]) for k in groups1):
            continue
        gkeys = sorted(groups1)
        per_group = []
        for k in gkeys:
            es = groups1[k]
            fs = groups2[k]
            assigns = []
            for fperm in itertools.permutations(fs):
                flip_options = []
                feasible = True
                for e, f in zip(es, fperm):
                    a, b = g1.edges[e]
                    x, y = g2.edges[f]
                    if a == b:
                        flip_options.append(((e, f, 0), (e, f, 1)))
                    elif vmap[a] == x and vmap[b] == y:
                        flip_options.append(((e, f, 0),))
                    elif vmap[a] == y and vmap[b] == x:
                        flip_options.append(((e, f, 1),))
                    else:
                        feasible = False
                        break
                if not feasible:
                    continue
                for combo in itertools.product(*flip_options):
                    assigns.append(combo)
            per_group.append(assigns)
        for combo in itertools.product(*per_group):
            emap = [None] * g1.n_edges
            for group in combo:
                for (e, f, flip) in group:
                    emap[e] = (f, flip)
            out.append((tuple(vmap), tuple(emap)))
    return out


def automorphisms(graph):
    return isomorphisms(graph, graph)


# -- contraction -----------------------------------------------------------


def contract(graph, edge_set):
    """Contract the edges in ``edge_set``.

    Returns (new_graph, vmap, kept): ``vmap[v]`` is the image vertex,
    ``kept[j]`` is the original index of the j-th surviving edge; the
    surviving edge keeps its side order, so half-edge (kept[j], s) maps
    to (j, s).
    """
    nv = graph.n_vertices
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edge_set:
        a, b = graph.edges[e]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    classes = {}
    vmap = [None] * nv
    for v in range(nv):
        r = find(v)
        if r not in classes:
            classes[r] = len(classes)
        vmap[v] = classes[r]
    ncls = len(classes)
    genera = [0] * ncls
    comps = [0] * ncls
    sizes = [0] * ncls
    internal = [0] * ncls
    for v in range(nv):
        genera[vmap[v]] += graph.genera[v]
        comps[vmap[v]] = graph.components[v]
        sizes[vmap[v]] += 1
    for e in edge_set:
        a, _ = graph.edges[e]
        internal[vmap[a]] += 1
    for c in range(ncls):
        genera[c] += internal[c] - sizes[c] + 1
    kept = [e for e in range(graph.n_edges) if e not in edge_set]
    edges = [(vmap[graph.edges[e][0]], vmap[graph.edges[e][1]]) for e in kept]
    legs = [(l, vmap[v]) for (l, v) in graph.legs]
    newg = StableGraph(genera, legs, edges, comps, validate=False)
    return newg, tuple(vmap), tuple(kept)


# -- enumeration of stable graphs -------------------------------------------


def _edge_multisets(n_vertices, n_edges):
    """All multisets of ``n_edges`` unordered vertex pairs (loops allowed)."""
    pairs = [(i, j) for i in range(n_vertices) for j in range(i, n_vertices)]
    return itertools.combinations_with_replacement(pairs, n_edges)


def _is_connected(n_vertices, edges):
    if n_vertices == 1:
        return True
    adj = {v: set() for v in range(n_vertices)}
    for (a, b) in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return len(seen) == n_vertices


@lru_cache(maxsize=None)
def enumerate_stable_graphs(g, n, max_edges=None):
    """All stable graphs of genus g with legs 1..n, one per isomorphism
    class, in a deterministic order.  ``max_edges`` restricts the
    output to graphs with at most that many edges.

    >>> len(enumerate_stable_graphs(0, 3))
    1
    >>> len(enumerate_stable_graphs(1, 1))
    2
    >>> len(enumerate_stable_graphs(2, 0))
    7
    """
    if 2 * g - 2 + n <= 0:
        raise GraphError("(g, n) = (%d, %d) is unstable" % (g, n))
    found = {}
    nv_cap = 2 * g - 2 + n
    if max_edges is not None:
        nv_cap = min(nv_cap, max_edges + 1)
    for nv in range(1, nv_cap + 1):
        for h1 in range(0, g + 1):
            ne = nv - 1 + h1
            if max_edges is not None and ne > max_edges:
                continue
            gsum = g - h1
            for genera in itertools.product(range(gsum + 1), repeat=nv):
                if sum(genera) != gsum:
                    continue
                for emul in _edge_multisets(nv, ne):
                    if not _is_connected(nv, emul):
                        continue
                    for assign in itertools.product(range(nv), repeat=n):
                        legs = [(i + 1, assign[i]) for i in range(n)]
                        ok = True
                        for v in range(nv):
                            val = sum(1 for x in assign if x == v)
                            for (a, b) in emul:
                                val += (a == v) + (b == v)
                            if 2 * genera[v] - 2 + val <= 0:
                                ok = False
                                break
                        if not ok:
                            continue
                        graph = StableGraph(genera, legs, emul,
                                            validate=False)
                        canon, aut = canonicalize(graph)
                        found[canon.cert()] = (canon, aut)
    return tuple(found[c][0] for c in sorted(found))


@lru_cache(maxsize=None)
def enumerate_star_trees(g, n):
    """Loop-free connected graphs with h1 = 0 and every vertex of
    positive genus (the index set of the tree sums).

    >>> len(enumerate_star_trees(2, 0))
    2
    >>> len(enumerate_star_trees(3, 0))
    3
    """
    out = []
    for graph in enumerate_stable_graphs(g, n):
        if graph.h1() != 0:
            continue
        if any(gv == 0 for gv in graph.genera):
            continue
        out.append(graph)
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_backbones(g, n):
    """Star trees whose central vertex carries leg 1.

    Returns (graph, center) pairs; the trivial one-vertex graph is
    included.  Every edge joins the center to a distinct leaf (h1 = 0).

    >>> [gr.n_vertices for gr, v0 in enumerate_backbones(2, 1)]
    [1, 2]
    """
    out = []
    for graph in enumerate_stable_graphs(g, n):
        if graph.h1() != 0:
            continue
        center = dict(graph.legs)[1]
        if any(center not in (a, b) or a == b for (a, b) in graph.edges):
            continue
        # leaves must touch exactly one edge (star shape, no chains)
        ok = True
        for v in range(graph.n_vertices):
            if v == center:
                continue
            deg = sum((a == v) + (b == v) for (a, b) in graph.edges)
            if deg != 1:
                ok = False
                break
        if ok:
            out.append((graph, center))
    return tuple(out)


# -- twisted star graphs -----------------------------------------------------


def _multiset_partitions(items):
    """All partitions of a list into nonempty blocks (as tuples of
    sorted tuples), deduplicated."""
    items = sorted(items)
    if not items:
        yield ()
        return
    seen = set()
    first, rest = items[0], items[1:]
    for mask in itertools.product((0, 1), repeat=len(rest)):
        block = [first] + [x for x, m in zip(rest, mask) if m]
        remainder = [x for x, m in zip(rest, mask) if not m]
        for sub in _multiset_partitions(remainder):
            part = tuple(sorted([tuple(sorted(block))] + list(sub)))
            if part not in seen:
                seen.add(part)
                yield part


def enumerate_simple_stars_odd(a, k, g):
    """All odd-twisted star graphs compatible with the vector ``a``.

    A star graph has a central vertex 0; every edge joins it to an
    outlying vertex whose edge twists are positive odd multiples of k.
    Vertex twist sums equal k(2g(v)-2+n(v)).  Items are
    (graph, twist, aut, center) with ``twist`` mapping leg labels and
    half-edges to integers; the edge-free graph is included.

    >>> stars = enumerate_simple_stars_odd((1,), 1, 1)
    >>> len(stars)
    1
    """
    a = tuple(a)
    n = len(a)
    if k <= 0 or k % 2 == 0:
        raise GraphError("k must be a positive odd integer")
    if any(x % 2 == 0 for x in a):
        raise GraphError("all entries of a must be odd")
    if sum(a) != k * (2 * g - 2 + n):
        raise GraphError("degree mismatch: sum(a) != k(2g-2+n)")
    out = []
    # trivial star: single vertex
    trivial = StableGraph((g,), [(i + 1, 0) for i in range(n)], ())
    twist = {i + 1: a[i] for i in range(n)}
    out.append((trivial, twist, 1, 0))

    # Each edge twist is at least k and the centre twist-sum equation
    # forces sum(twists) <= sum of positive a_i + 2k - k*ne, so the
    # number of edges is bounded by (sum of positive a_i + 2k) / (2k).
    budget = sum(x for x in a if x > 0) + 2 * k
    max_edges = budget // (2 * k)
    odd_vals = [v for v in range(k, budget + 1) if v % k == 0
                and (v // k) % 2 == 1]
    legs = list(range(1, n + 1))
    for ne in range(1, max_edges + 1):
        for twists in itertools.combinations_with_replacement(odd_vals, ne):
            if sum(twists) > budget:
                continue
            edge_items = list(enumerate(twists))  # distinct ids
            for part in _multiset_partitions(edge_items):
                # each block is one outlying vertex
                for leg_assign in itertools.product(
                        range(len(part) + 1), repeat=n):
                    # slot 0 = center, slot j >= 1 = outlying block j-1
                    out_data = []
                    feasible = True
                    gsum = 0
                    h1 = 0
                    for j, block in enumerate(part):
                        block_t = [t for (_, t) in block]
                        block_legs = [legs[i] for i in range(n)
                                      if leg_assign[i] == j + 1]
                        # every value at an outlying vertex must be a
                        # positive multiple of k, legs included
                        if any(a[l - 1] <= 0 or a[l - 1] % k != 0
                               for l in block_legs):
                            feasible = False
                            break
                        tot = sum(block_t) + sum(a[l - 1]
                                                 for l in block_legs)
                        nv = len(block_t) + len(block_legs)
                        # k(2gv - 2 + nv) = tot
                        num = tot + k * (2 - nv)
                        if num % (2 * k) != 0 or num < 0:
                            feasible = False
                            break
                        gv = num // (2 * k)
                        if 2 * gv - 2 + nv <= 0:
                            feasible = False
                            break
                        out_data.append((gv, block_legs, block_t))
                        gsum += gv
                        h1 += len(block_t) - 1
                    if not feasible:
                        continue
                    g0 = g - gsum - h1
                    if g0 < 0:
                        continue
                    center_legs = [legs[i] for i in range(n)
                                   if leg_assign[i] == 0]
                    n0 = len(center_legs) + ne
                    if 2 * g0 - 2 + n0 <= 0:
                        continue
                    s0 = sum(a[l - 1] for l in center_legs) - sum(twists)
                    if s0 != k * (2 * g0 - 2 + n0):
                        continue
                    # build graph: vertex 0 = center, then blocks
                    genera = [g0] + [d[0] for d in out_data]
                    leg_list = [(l, 0) for l in center_legs]
                    for j, (gv, bl, bt) in enumerate(out_data):
                        leg_list += [(l, j + 1) for l in bl]
                    edge_list = []
                    twist_map = {i + 1: a[i] for i in range(n)}
                    for j, (gv, bl, bt) in enumerate(out_data):
                        for t in bt:
                            e = len(edge_list)
                            edge_list.append((0, j + 1))
                            twist_map[(e, 0)] = -t
                            twist_map[(e, 1)] = t
                    graph = StableGraph(genera, sorted(leg_list), edge_list)
                    # dedupe by canonical descriptor
                    descr = (g0, tuple(sorted(center_legs)),
                             tuple(sorted((d[0], tuple(sorted(d[1])),
                                           tuple(sorted(d[2])))
                                          for d in out_data)))
                    out.append((graph, twist_map, descr, 0))
    # deduplicate nontrivial stars and compute twist-preserving |Aut|
    dedup = {}
    result = [out[0]]
    for item in out[1:]:
        graph, twist_map, descr, center = item
        if descr in dedup:
            continue
        dedup[descr] = True
        aut = _twisted_aut(graph, twist_map)
        result.append((graph, twist_map, aut, center))
    return result


def _twisted_aut(graph, twist_map):
    """Order of the automorphism group preserving the twist."""
    count = 0
    for (vmap, emap) in automorphisms(graph):
        ok = True
        for e in range(graph.n_edges):
            f, flip = emap[e]
            for s in (0, 1):
                if twist_map.get((e, s)) != twist_map.get((f, s ^ flip)):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            count += 1
    return count


# -- weightings ---------------------------------------------------------------


def odd_weightings(graph, a, k, r):
    """All odd weightings modulo 2r compatible with ``a``.

    A weighting assigns odd values in {1, 3, ..., 2r-1} to half-edges
    such that opposite halves sum to 2r and the values at each vertex
    sum (with the legs' a-values) to k(2g(v)-2+n(v)) mod 2r.  Yields
    dicts mapping half-edges to values.
    """
    m = 2 * r
    nv = graph.n_vertices
    ne = graph.n_edges
    # vertex targets
    target = []
    for v in range(nv):
        t = k * (2 * graph.genera[v] - 2 + graph.valence(v))
        t -= sum(a[l - 1] for l in graph.vertex_legs(v))
        target.append(t % m)
    # spanning tree over non-loop edges
    tree = []
    seen = {0}
    changed = True
    nonloop = [e for e, (x, y) in enumerate(graph.edges) if x != y]
    while changed and len(seen) < nv:
        changed = False
        for e in nonloop:
            x, y = graph.edges[e]
            if (x in seen) != (y in seen):
                tree.append(e)
                seen.update((x, y))
                changed = True
    free = [e for e in range(ne) if e not in tree]
    odd = list(range(1, m, 2))
    for vals in itertools.product(odd, repeat=len(free)):
        w = {}
        residual = list(target)
        for e, val in zip(free, vals):
            x, y = graph.edges[e]
            w[(e, 0)] = val
            w[(e, 1)] = m - val
            residual[x] = (residual[x] - val) % m
            residual[y] = (residual[y] - (m - val)) % m
        # solve tree edges from the leaves inward
        remaining = list(tree)
        deg = [0] * nv
        for e in remaining:
            x, y = graph.edges[e]
            deg[x] += 1
            deg[y] += 1
        ok = True
        while remaining:
            for idx, e in enumerate(remaining):
                x, y = graph.edges[e]
                if deg[x] == 1 or deg[y] == 1:
                    if deg[x] != 1:
                        x, y = y, x
                        s0, s1 = 1, 0
                    else:
                        s0, s1 = 0, 1
                    val = residual[x] % m
                    if val % 2 == 0:
                        ok = False
                        break
                    ex, ey = graph.edges[e]
                    w[(e, 0)] = val if ex == x else m - val
                    w[(e, 1)] = m - w[(e, 0)]
                    residual[x] = 0
                    residual[y] = (residual[y] - (m - val)) % m
                    deg[x] -= 1
                    deg[y] -= 1
                    remaining.pop(idx)
                    break
            else:
                ok = False
            if not ok:
                break
        if not ok:
            continue
        if any(residual[v] % m != 0 for v in range(nv)):
            continue
        yield w


def weighting_moment_sum(graph, a, k, r, edge_exponents):
    """Sum over odd weightings mod 2r of prod_e (w(h_e) w(h'_e))^{d_e}.

    >>> loop = StableGraph((0,), ((1, 0),), ((0, 0),))
    >>> weighting_moment_sum(loop, (1,), 1, 3, {})
    3
    """
    total = 0
    for w in odd_weightings(graph, a, k, r):
        term = 1
        for e, d in edge_exponents.items():
            term *= (w[(e, 0)] * w[(e, 1)]) ** d
        total += term
    return total


# -- bicolored graphs ---------------------------------------------------------


def enumerate_bicolored(components, leg_level_minus1=None,
                        star_filter_n=None):
    """Two-level odd-twisted graphs over a (possibly multi-component)
    signature.

    ``components`` is a list of (genus, a-vector) pairs; legs are
    labelled globally in order.  Conditions: every edge joins a
    positive-twist half at level 0 to a negative-twist half at level -1;
    at each vertex the twist values (legs included) sum to at most
    2g(v)-2+n(v); all twists odd; both levels nonempty.

    ``leg_level_minus1``: require this leg label at level -1.
    ``star_filter_n``: if set, keep only graphs whose stabilization
    after removing legs with labels > star_filter_n is not the trivial
    graph.

    Returns (graph, twist, levels, multiplicity, aut) tuples.
    """
    offsets = []
    off = 0
    for (gj, aj) in components:
        offsets.append(off)
        off += len(aj)
    pieces_per_comp = []
    for j, (gj, aj) in enumerate(components):
        pieces = _component_bicolored_pieces(gj, aj, offsets[j])
        pieces_per_comp.append(pieces)
    out = []
    seen = set()
    for combo in itertools.product(*pieces_per_comp):
        graph, twist, levels = _merge_pieces(combo)
        if not any(l == -1 for l in levels):
            continue
        if not any(l == 0 for l in levels):
            continue
        if leg_level_minus1 is not None:
            v = dict(graph.legs)[leg_level_minus1]
            if levels[v] != -1:
                continue
        if star_filter_n is not None:
            if _stabilization_trivial(graph, star_filter_n):
                continue
        key = _bicolored_key(graph, twist, levels)
        if key in seen:
            continue
        seen.add(key)
        m = 1
        for e in range(graph.n_edges):
            m *= abs(twist[(e, 0)])
        aut = _leveled_aut(graph, twist, levels)
        out.append((graph, twist, levels, m, aut))
    return out


def _component_bicolored_pieces(g, avec, offset):
    """Leveled twisted pieces for one component, including the edge-free
    single vertex at either level."""
    n = len(avec)
    pieces = []
    triv = StableGraph((g,), [(offset + i + 1, 0) for i in range(n)], ())
    base_twist = {offset + i + 1: avec[i] for i in range(n)}
    for lvl in (0, -1):
        if _vertex_condition(triv, 0, base_twist):
            pieces.append((triv, dict(base_twist), (lvl,)))
    for graph in enumerate_stable_graphs(g, n):
        if graph.n_edges == 0:
            continue
        relabel = {i + 1: offset + i + 1 for i in range(n)}
        gg = StableGraph(graph.genera,
                         [(relabel[l], v) for (l, v) in graph.legs],
                         graph.edges, graph.components)
        for levels in itertools.product((0, -1), repeat=gg.n_vertices):
            # every edge must cross levels
            if any(levels[a] == levels[b] for (a, b) in gg.edges):
                continue
            for tw in _edge_twist_choices(gg, base_twist, levels):
                pieces.append((gg, tw, levels))
    return pieces


def _edge_twist_choices(graph, base_twist, levels):
    """All odd edge twists with the positive half at level 0 and the
    vertex inequality satisfied everywhere."""
    # budget: at each level-0 vertex the positive values are bounded
    slack = []
    for v in range(graph.n_vertices):
        s = 2 * graph.genera[v] - 2 + graph.valence(v)
        s -= sum(base_twist[l] for l in graph.vertex_legs(v))
        slack.append(s)
    ne = graph.n_edges
    bounds = []
    for e, (a, b) in enumerate(graph.edges):
        v0 = a if levels[a] == 0 else b
        bounds.append(max(0, slack[v0]))
    choices = [range(1, b + 1, 2) for b in bounds]
    for vals in itertools.product(*choices):
        tw = dict(base_twist)
        ok = True
        for e, (a, b) in enumerate(graph.edges):
            if levels[a] == 0:
                tw[(e, 0)] = vals[e]
                tw[(e, 1)] = -vals[e]
            else:
                tw[(e, 0)] = -vals[e]
                tw[(e, 1)] = vals[e]
        for v in range(graph.n_vertices):
            tot = sum(base_twist[l] for l in graph.vertex_legs(v))
            tot += sum(tw[h] for h in graph.vertex_halfedges(v))
            if tot > 2 * graph.genera[v] - 2 + graph.valence(v):
                ok = False
                break
        if ok:
            yield tw


def _vertex_condition(graph, v, twist):
    tot = sum(twist[l] for l in graph.vertex_legs(v))
    tot += sum(twist[h] for h in graph.vertex_halfedges(v))
    return tot <= 2 * graph.genera[v] - 2 + graph.valence(v)


def _merge_pieces(combo):
    genera = []
    legs = []
    edges = []
    comps = []
    levels = []
    twist = {}
    voff = 0
    for j, (graph, tw, lv) in enumerate(combo):
        genera += list(graph.genera)
        comps += [j] * graph.n_vertices
        levels += list(lv)
        legs += [(l, v + voff) for (l, v) in graph.legs]
        eoff = len(edges)
        edges += [(a + voff, b + voff) for (a, b) in graph.edges]
        for key, val in tw.items():
            if isinstance(key, tuple):
                twist[(key[0] + eoff, key[1])] = val
            else:
                twist[key] = val
        voff += graph.n_vertices
    graph = StableGraph(genera, sorted(legs), edges, comps, validate=False)
    return graph, twist, tuple(levels)


def _bicolored_key(graph, twist, levels):
    best = None
    for perm in itertools.permutations(range(graph.n_vertices)):
        cert = _cert_under(graph, perm)
        lv = [0] * graph.n_vertices
        for v in range(graph.n_vertices):
            lv[perm[v]] = levels[v]
        # twist data keyed structurally: per-edge sorted endpoint info
        edata = tuple(sorted(
            (min(perm[a], perm[b]), max(perm[a], perm[b]),
             abs(twist[(e, 0)]),
             levels[graph.edges[e][0]] if twist[(e, 0)] > 0 else
             levels[graph.edges[e][1]])
            for e, (a, b) in enumerate(graph.edges)))
        key = (cert, tuple(lv), edata)
        if best is None or key < best:
            best = key
    return best


def _leveled_aut(graph, twist, levels):
    count = 0
    for (vmap, emap) in automorphisms(graph):
        if any(levels[vmap[v]] != levels[v]
               for v in range(graph.n_vertices)):
            continue
        ok = True
        for e in range(graph.n_edges):
            f, flip = emap[e]
            for s in (0, 1):
                if twist.get((e, s)) != twist.get((f, s ^ flip)):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            count += 1
    return count


def _stabilization_trivial(graph, n_keep):
    """True if forgetting legs with labels > n_keep and stabilizing
    yields the trivial (one-vertex, edge-free) graph."""
    genera = list(graph.genera)
    edges = list(graph.edges)
    legs = [(l, v) for (l, v) in graph.legs if l <= n_keep]
    # iteratively contract edges at unstable vertices
    changed = True
    while changed:
        changed = False
        nv = len(genera)
        val = [0] * nv
        for (_, v) in legs:
            val[v] += 1
        for (a, b) in edges:
            val[a] += 1
            val[b] += 1
        for v in range(nv):
            if 2 * genera[v] - 2 + val[v] <= 0 and genera[v] == 0:
                # contract one incident edge (or drop the vertex if bare)
                inc = [e for e, (a, b) in enumerate(edges)
                       if v in (a, b)]
                if not inc:
                    return False  # disconnected junk; cannot be trivial
                e = inc[0]
                a, b = edges[e]
                keep, drop = (a, b) if b == v else (b, a)
                if a == b:
                    genera[v] += 1
                    edges.pop(e)
                else:
                    # merge drop into keep
                    edges.pop(e)
                    edges = [(x if x != drop else keep,
                              y if y != drop else keep)
                             for (x, y) in edges]
                    legs = [(l, w if w != drop else keep)
                            for (l, w) in legs]
                    genera[keep] += genera[drop]
                    # reindex
                    idx = [w for w in range(nv) if w != drop]
                    remap = {w: i for i, w in enumerate(idx)}
                    genera = [genera[w] for w in idx]
                    edges = [(remap[x], remap[y]) for (x, y) in edges]
                    legs = [(l, remap[w]) for (l, w) in legs]
                changed = True
                break
    return len(genera) == 1 and not edges
