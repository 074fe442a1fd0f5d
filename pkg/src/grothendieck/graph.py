"""Simple undirected graphs, named families and small structural algorithms.

Vertices are numbered ``1..n`` in every public function and in serialized
data.  Edges are kept as sorted pairs ``(i, j)`` with ``i < j`` in
lexicographic order; the position of an edge in that order is its index in
every edge-indexed vector used by the rest of the package.
"""

from __future__ import annotations

import json
import math
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import networkx as nx
import numpy as np

from .errors import GuardExceeded, InvalidInput

__all__ = [
    "Graph",
    "Circuit",
    "make_family",
    "parse_family",
    "complete_graph",
    "cycle_graph",
    "path_graph",
    "complete_bipartite_graph",
    "grid_graph",
    "wheel_graph",
    "antiweb",
    "web",
    "cliqueweb_support",
    "band_edges",
    "band_circuits",
    "girth",
    "chordless_cycles",
    "has_minor",
    "clique_sum",
    "load_graph",
]

DEFAULT_CYCLE_BUDGET = 10**6
DEFAULT_MINOR_GUARD = 16


@dataclass(frozen=True)
class Graph:
    """A simple loopless graph on vertices ``1..n``.

    Edges may be given in any order or orientation; they are normalized to
    sorted pairs and sorted lexicographically.
    """

    n: int
    edges: tuple = ()

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInput(f"vertex count must be a positive integer, got {self.n!r}")
        norm = []
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise InvalidInput(f"loop at vertex {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise InvalidInput(f"edge ({i}, {j}) has a vertex outside 1..{self.n}")
            norm.append((min(i, j), max(i, j)))
        norm.sort()
        for a, b in zip(norm, norm[1:]):
            if a == b:
                raise InvalidInput(f"duplicate edge {a}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self):
        return len(self.edges)

    @cached_property
    def edge_index(self):
        return {e: k for k, e in enumerate(self.edges)}

    @cached_property
    def adjacency(self):
        """Tuple of neighbour sets; entry ``v`` (1-based) lists the neighbours of ``v``."""
        nbrs = [set() for _ in range(self.n + 1)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def edge_array(self):
        """``(m, 2)`` array of 0-based endpoints, for vectorized work."""
        arr = np.array(self.edges, dtype=np.intp).reshape(-1, 2) - 1
        arr.setflags(write=False)
        return arr

    def index(self, i, j):
        return self.edge_index[(min(i, j), max(i, j))]

    def has_edge(self, i, j):
        return (min(i, j), max(i, j)) in self.edge_index

    def degree(self, v):
        return len(self.adjacency[v])

    def weight_matrix(self, w):
        """Symmetric ``n x n`` matrix with ``w`` on the edge positions."""
        w = np.asarray(w)
        if w.shape != (self.m,):
            raise InvalidInput(f"expected {self.m} edge weights, got shape {w.shape}")
        mat = np.zeros((self.n, self.n), dtype=np.result_type(w.dtype, float))
        a, b = self.edge_array.T
        mat[a, b] = w
        mat[b, a] = w
        return mat

    def delete_edges(self, edges):
        drop = {(min(i, j), max(i, j)) for i, j in edges}
        missing = drop - set(self.edges)
        if missing:
            raise InvalidInput(f"edges not in graph: {sorted(missing)}")
        return Graph(self.n, tuple(e for e in self.edges if e not in drop))

    def add_edges(self, edges):
        return Graph(self.n, self.edges + tuple(edges))

    def is_clique(self, vertices):
        return all(self.has_edge(i, j) for i, j in combinations(vertices, 2))

    def to_dict(self):
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(int(data["n"]), tuple(tuple(e) for e in data["edges"]))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed graph object: {exc}") from exc


@dataclass(frozen=True)
class Circuit:
    """A cycle in a host graph, given by its cyclic vertex sequence."""

    vertices: tuple
    graph: Graph = field(repr=False, compare=False)

    def __post_init__(self):
        vs = tuple(self.vertices)
        if len(vs) < 3:
            raise InvalidInput("a circuit needs at least 3 vertices")
        if len(set(vs)) != len(vs):
            raise InvalidInput(f"circuit vertices are not distinct: {vs}")
        for a, b in zip(vs, vs[1:] + vs[:1]):
            if not self.graph.has_edge(a, b):
                raise InvalidInput(f"circuit step ({a}, {b}) is not an edge of the host graph")
        object.__setattr__(self, "vertices", vs)

    def __len__(self):
        return len(self.vertices)

    @property
    def edges(self):
        """Edges in cyclic order, each as a sorted pair."""
        vs = self.vertices
        return tuple((min(a, b), max(a, b)) for a, b in zip(vs, vs[1:] + vs[:1]))

    @property
    def edge_indices(self):
        return tuple(self.graph.index(*e) for e in self.edges)


# ---------------------------------------------------------------------------
# Families


def complete_graph(n):
    if n < 1:
        raise InvalidInput(f"complete graph needs n >= 1, got {n}")
    return Graph(n, tuple(combinations(range(1, n + 1), 2)))


def cycle_graph(n):
    if n < 3:
        raise InvalidInput(f"cycle needs n >= 3, got {n}")
    return Graph(n, tuple((i, i % n + 1) for i in range(1, n + 1)))


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(1, n)))


def complete_bipartite_graph(m, n):
    if m < 1 or n < 1:
        raise InvalidInput(f"complete bipartite graph needs m, n >= 1, got {m}, {n}")
    return Graph(m + n, tuple((i, m + j) for i in range(1, m + 1) for j in range(1, n + 1)))


def grid_graph(rows, cols):
    def vid(r, c):
        return r * cols + c + 1

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    return Graph(rows * cols, tuple(edges))


def wheel_graph(k):
    """Hub ``1`` joined to every vertex of a ``k``-cycle on ``2..k+1``."""
    if k < 3:
        raise InvalidInput(f"wheel needs a rim of length >= 3, got {k}")
    rim = [(1 + i, 1 + i % k + 1) for i in range(1, k + 1)]
    return Graph(k + 1, tuple(rim) + tuple((1, v) for v in range(2, k + 2)))


def band_edges(p, s):
    """Edges ``{i, i+s mod p}`` of ``K_p``.

    There are ``p`` of them, except for the diameter band ``s = p/2`` of an
    even ``p`` which has ``p/2``.
    """
    if p < 2 or not 1 <= s <= p // 2:
        raise InvalidInput(f"band index must satisfy 1 <= s <= p // 2 = {p // 2}, got s={s}")
    out = set()
    for i in range(1, p + 1):
        j = (i - 1 + s) % p + 1
        out.add((min(i, j), max(i, j)))
    return tuple(sorted(out))


def band_circuits(p, s):
    """Split band ``s`` of ``K_p`` into its ``gcd(p, s)`` vertex-disjoint cycles.

    Each cycle is returned as a vertex sequence of length ``p / gcd(p, s)``
    (length 2 for the diameter band).
    """
    band_edges(p, s)
    d = math.gcd(p, s)
    return [tuple((start + k * s) % p + 1 for k in range(p // d)) for start in range(d)]


def _check_antiweb_params(p, r):
    if r < 0:
        raise InvalidInput(f"r must be >= 0, got {r}")
    if p < 2 * r + 3:
        raise InvalidInput(f"antiweb/web needs p >= 2r+3 = {2 * r + 3}, got p={p}")


def antiweb(p, r):
    """First ``r`` bands of ``K_p``."""
    _check_antiweb_params(p, r)
    return Graph(p, tuple(e for s in range(1, r + 1) for e in band_edges(p, s)))


def web(p, r):
    """Complement of :func:`antiweb` in ``K_p``: bands ``r+1 .. p // 2``."""
    _check_antiweb_params(p, r)
    return Graph(p, tuple(e for s in range(r + 1, p // 2 + 1) for e in band_edges(p, s)))


def cliqueweb_support(q, r):
    """Support of the pure clique-web inequality with parameters ``q, r``.

    Vertices ``1..q`` form a clique, ``q+1..q+p`` carry the web ``W^r_p`` with
    ``p = q + 2r + 1``, and every clique vertex is joined to every web vertex.
    """
    if q < 2:
        raise InvalidInput(f"clique-web needs q >= 2, got {q}")
    if r < 0:
        raise InvalidInput(f"clique-web needs r >= 0, got {r}")
    p = q + 2 * r + 1
    clique = combinations(range(1, q + 1), 2)
    bip = ((i, q + j) for i in range(1, q + 1) for j in range(1, p + 1))
    webe = ((q + i, q + j) for i, j in web(p, r).edges)
    return Graph(p + q, tuple(clique) + tuple(bip) + tuple(webe))


_FAMILIES = {
    "complete": (complete_graph, ("n",)),
    "cycle": (cycle_graph, ("n",)),
    "path": (path_graph, ("n",)),
    "complete_bipartite": (complete_bipartite_graph, ("m", "n")),
    "grid": (grid_graph, ("rows", "cols")),
    "wheel": (wheel_graph, ("k",)),
    "antiweb": (antiweb, ("p", "r")),
    "web": (web, ("p", "r")),
    "cliqueweb_support": (cliqueweb_support, ("q", "r")),
}

_DSL = {
    "Kn": "complete",
    "Cn": "cycle",
    "Pn": "path",
    "Kmn": "complete_bipartite",
    "Grid": "grid",
    "Wheel": "wheel",
    "AW": "antiweb",
    "W": "web",
    "CW": "cliqueweb_support",
}


def make_family(kind, **params):
    """Build a named graph, e.g. ``make_family("antiweb", p=9, r=2)``."""
    try:
        builder, names = _FAMILIES[kind]
    except KeyError:
        raise InvalidInput(f"unknown graph family {kind!r}") from None
    if set(params) != set(names):
        raise InvalidInput(f"family {kind!r} takes parameters {names}, got {sorted(params)}")
    return builder(*(int(params[k]) for k in names))


def parse_family(text):
    """Parse the compact family syntax: ``Kn:5``, ``Kmn:3,4``, ``AW:p=9,r=2``..."""
    m = re.fullmatch(r"\s*(\w+)\s*:\s*(.+?)\s*", text)
    if not m or m.group(1) not in _DSL:
        raise InvalidInput(f"cannot parse graph family {text!r}")
    kind = _DSL[m.group(1)]
    names = _FAMILIES[kind][1]
    params = {}
    for pos, tok in enumerate(t.strip() for t in m.group(2).split(",")):
        key, sep, val = tok.partition("=")
        if not sep:
            if pos >= len(names):
                raise InvalidInput(f"too many parameters in {text!r}")
            key, val = names[pos], tok
        try:
            params[key.strip()] = int(val)
        except ValueError:
            raise InvalidInput(f"non-integer parameter {tok!r} in {text!r}") from None
    return make_family(kind, **params)


def load_graph(source):
    """Graph from a family string, a JSON file path, or a dict."""
    if isinstance(source, Graph):
        return source
    if isinstance(source, dict):
        return Graph.from_dict(source)
    if isinstance(source, str) and re.fullmatch(r"\s*\w+\s*:.*", source) and source.split(":")[0].strip() in _DSL:
        return parse_family(source)
    try:
        with open(source) as fh:
            data = json.load(fh)
    except OSError:
        raise InvalidInput(f"{source!r} is neither a known family string nor a readable file") from None
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return Graph.from_dict(data)


# ---------------------------------------------------------------------------
# Cycles


def girth(g):
    """Length of a shortest cycle, ``math.inf`` for forests."""
    best = math.inf
    adj = g.adjacency
    for root in range(1, g.n + 1):
        dist = {root: 0}
        parent = {root: 0}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif parent[u] != v:
                    best = min(best, dist[u] + dist[v] + 1)
    return best


def chordless_cycles(g, max_len=None, budget=DEFAULT_CYCLE_BUDGET):
    """All induced cycles of ``g``, shortest-vertex-first and deterministic.

    Each cycle is reported once, starting at its smallest vertex and walking
    towards the smaller of that vertex's two cycle neighbours.
    """
    adj = g.adjacency
    cap = g.n if max_len is None else max_len
    found = []

    def extend(path, on_path):
        start, last = path[0], path[-1]
        for u in sorted(adj[last]):
            if u <= start or u in on_path:
                continue
            # u may only touch the path at its end (and at the start, to close).
            if any(u in adj[x] for x in path[1:-1]):
                continue
            if len(path) >= 2 and start in adj[u]:
                if path[1] < u:
                    if len(found) >= budget:
                        raise GuardExceeded(
                            f"chordless cycle enumeration exceeded the budget of {budget} cycles",
                            guard="cycle_budget",
                        )
                    found.append(Circuit(tuple(path) + (u,), g))
                continue
            if len(path) + 1 < cap:
                on_path.add(u)
                path.append(u)
                extend(path, on_path)
                path.pop()
                on_path.discard(u)

    for v in range(1, g.n + 1):
        if cap >= 3:
            extend([v], {v})
    found.sort(key=lambda c: (len(c), c.vertices))
    return found


# ---------------------------------------------------------------------------
# Minors

_PATTERNS = {"K4": 4, "K5": 5}


def _reduce(adj):
    """Drop vertices of degree <= 1 and suppress degree-2 vertices, in place.

    Both operations preserve containment of K4 and K5 minors.
    """
    stack = list(adj)
    while stack:
        v = stack.pop()
        if v not in adj:
            continue
        nb = adj[v]
        if len(nb) <= 1:
            for u in nb:
                adj[u].discard(v)
                stack.append(u)
            del adj[v]
        elif len(nb) == 2:
            a, b = nb
            adj[a].discard(v)
            adj[b].discard(v)
            adj[a].add(b)
            adj[b].add(a)
            del adj[v]
            stack.extend((a, b))


def _canonical(adj):
    relabel = {v: k for k, v in enumerate(sorted(adj))}
    return frozenset((relabel[u], relabel[v]) for u in adj for v in adj[u] if u < v)


def _has_clique(adj, k):
    def grow(clique, cands):
        if len(clique) == k:
            return True
        for v in sorted(cands):
            if len(adj[v]) >= k - 1 and grow(clique + [v], {u for u in cands if u > v and u in adj[v]}):
                return True
        return False

    return grow([], set(adj))


def _minor_search(adj, k, memo):
    _reduce(adj)
    n = len(adj)
    if n < k:
        return False
    m = sum(len(s) for s in adj.values()) // 2
    if k == 4:
        # Everything left has minimum degree >= 3, which forces a K4 minor.
        return True
    if m < k * (k - 1) // 2:
        return False
    # Graphs without a K5 minor have at most 3n - 6 edges.
    if m > 3 * n - 6:
        return True
    key = _canonical(adj)
    if key in memo:
        return memo[key]
    memo[key] = False
    if _has_clique(adj, k):
        result = True
    elif nx.check_planarity(nx.Graph([(u, v) for u in adj for v in adj[u] if u < v]))[0]:
        result = False
    else:
        # Every minor is a subgraph of some contraction, so try each edge.
        result = False
        for u in sorted(adj):
            for v in sorted(x for x in adj[u] if x > u):
                contracted = {x: set(s) for x, s in adj.items()}
                for x in contracted.pop(v):
                    contracted[x].discard(v)
                    if x != u:
                        contracted[x].add(u)
                        contracted[u].add(x)
                if _minor_search(contracted, k, memo):
                    result = True
                    break
            if result:
                break
    memo[key] = result
    return result


def has_minor(g, pattern, max_n=DEFAULT_MINOR_GUARD):
    """Whether ``K4`` or ``K5`` (``pattern``) is a minor of ``g``.

    Vertices of degree at most two are pruned or suppressed, then every edge
    contraction is explored with memoization; planar graphs are rejected
    early for K5.  The search is exponential, so graphs with more than
    ``max_n`` vertices are refused.
    """
    if pattern not in _PATTERNS:
        raise InvalidInput(f"minor pattern must be one of {sorted(_PATTERNS)}, got {pattern!r}")
    if g.n > max_n:
        raise GuardExceeded(
            f"minor test limited to n <= {max_n} vertices (graph has {g.n}); "
            "raise the guard or assert minor-freeness explicitly",
            guard="minor_n",
        )
    adj = {v: set(g.adjacency[v]) for v in range(1, g.n + 1)}
    return _minor_search(adj, _PATTERNS[pattern], {})


def clique_sum(g1, g2, identification):
    """Glue ``g2`` onto ``g1`` along a common clique.

    ``identification`` maps vertices of ``g2`` to the vertices of ``g1`` they
    are glued to.  The result keeps ``g1``'s labels and appends the remaining
    vertices of ``g2`` in increasing order.
    """
    ident = {int(a): int(b) for a, b in dict(identification).items()}
    if len(set(ident.values())) != len(ident):
        raise InvalidInput("identification must be injective")
    if not all(1 <= a <= g2.n for a in ident) or not all(1 <= b <= g1.n for b in ident.values()):
        raise InvalidInput("identification refers to missing vertices")
    if not g2.is_clique(list(ident)):
        raise InvalidInput(f"identified vertices {sorted(ident)} are not a clique in the second graph")
    if not g1.is_clique(list(ident.values())):
        raise InvalidInput(f"identified vertices {sorted(ident.values())} are not a clique in the first graph")
    mapping = dict(ident)
    nxt = g1.n
    for v in range(1, g2.n + 1):
        if v not in mapping:
            nxt += 1
            mapping[v] = nxt
    edges = set(g1.edges)
    for i, j in g2.edges:
        a, b = mapping[i], mapping[j]
        edges.add((min(a, b), max(a, b)))
    return Graph(nxt, tuple(edges))
