"""Cut vectors, valid inequalities of the cut polytope and membership tests.

Edge vectors are plain numpy arrays in the edge order of their graph.  Cut
vectors and inequalities with integer data are kept in integer dtype so that
validity checks over all cuts are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import GuardExceeded, InvalidInput
from .graph import (
    DEFAULT_CYCLE_BUDGET,
    Circuit,
    Graph,
    chordless_cycles,
    cliqueweb_support,
    complete_graph,
)

DEFAULT_CUT_GUARD = 24


def as_weights(g, w):
    """Validate an edge vector for ``g`` and return it as a numpy array."""
    arr = np.asarray(w)
    if arr.dtype == object or arr.dtype.kind not in "iuf":
        arr = arr.astype(float)
    if arr.shape != (g.m,):
        raise InvalidInput(f"edge vector has shape {arr.shape}, graph has {g.m} edges")
    if arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
        raise InvalidInput("edge vector has non-finite entries")
    return arr


def _vertex_set(g, s):
    s = {int(v) for v in s}
    bad = [v for v in s if not 1 <= v <= g.n]
    if bad:
        raise InvalidInput(f"vertices {sorted(bad)} are outside 1..{g.n}")
    return s


def _cut_mask(g, s):
    """Boolean edge mask of the edges crossing ``(s, [n] - s)``."""
    side = np.zeros(g.n, dtype=bool)
    side[[v - 1 for v in s]] = True
    a, b = g.edge_array.T
    return side[a] != side[b]


@dataclass(frozen=True, eq=False)
class CutVector:
    """The ``+-1`` edge vector of a bipartition; vertex 1 always has sign +1."""

    graph: Graph = field(repr=False)
    sides: tuple

    @property
    def x(self):
        s = np.asarray(self.sides, dtype=np.int64)
        a, b = self.graph.edge_array.T
        return s[a] * s[b]

    @property
    def shore(self):
        """Vertices on the side opposite vertex 1."""
        return frozenset(v + 1 for v, sg in enumerate(self.sides) if sg < 0)

    def __eq__(self, other):
        return isinstance(other, CutVector) and self.graph == other.graph and self.sides == other.sides

    def __hash__(self):
        return hash((self.graph, self.sides))


@dataclass(frozen=True, eq=False)
class LinearInequality:
    """``coeffs . x <= rhs`` on the edge space of ``graph``."""

    graph: Graph = field(repr=False)
    coeffs: np.ndarray
    rhs: float
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        coeffs = as_weights(self.graph, self.coeffs)
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        if not np.any(coeffs) and self.rhs < 0:
            raise InvalidInput("zero left-hand side with negative right-hand side is infeasible")

    def lhs(self, x):
        return self.coeffs @ np.asarray(x)

    def slack(self, x):
        return self.rhs - self.lhs(x)

    def max_over_cuts(self, max_n=DEFAULT_CUT_GUARD):
        """Exact maximum of the left-hand side over all cut vectors."""
        return (cut_matrix(self.graph, max_n) @ self.coeffs).max()

    def is_valid(self, max_n=DEFAULT_CUT_GUARD):
        return self.max_over_cuts(max_n) <= self.rhs

    def to_dict(self):
        coeffs = [c.item() for c in self.coeffs]
        rhs = self.rhs.item() if hasattr(self.rhs, "item") else self.rhs
        return {
            "graph": self.graph.to_dict(),
            "coeffs": coeffs,
            "rhs": rhs,
            "family": self.family,
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, data):
        from .graph import load_graph

        try:
            g = load_graph(data["graph"])
            return cls(g, np.asarray(data["coeffs"]), data["rhs"], data.get("family", "custom"), data.get("params", {}))
        except KeyError as exc:
            raise InvalidInput(f"inequality object lacks field {exc}") from None


# ---------------------------------------------------------------------------
# Cuts and switching


def cut_vector(g, s):
    """Cut vector of ``(s, [n] - s)``; ``x_ij = -1`` exactly on crossing edges."""
    s = _vertex_set(g, s)
    if 1 in s:
        s = set(range(1, g.n + 1)) - s
    return CutVector(g, tuple(-1 if v in s else 1 for v in range(1, g.n + 1)))


def _check_cut_guard(g, max_n):
    if g.n > max_n:
        raise GuardExceeded(
            f"cut enumeration limited to n <= {max_n} (graph has {g.n} vertices)", guard="cut_n"
        )


def sign_matrix(n):
    """All ``2^(n-1)`` sign vectors with first entry +1, in binary-counter order.

    Row ``k`` puts vertex ``j + 2`` on the negative side iff bit ``j`` of ``k``
    is set.
    """
    k = np.arange(1 << (n - 1), dtype=np.int64)
    bits = (k[:, None] >> np.arange(n - 1)) & 1
    out = np.ones((k.size, n), dtype=np.int64)
    out[:, 1:] = 1 - 2 * bits
    return out


def cut_matrix(g, max_n=DEFAULT_CUT_GUARD):
    """``(2^(n-1), m)`` integer array whose rows are the cut vectors of ``g``."""
    _check_cut_guard(g, max_n)
    s = sign_matrix(g.n)
    a, b = g.edge_array.T
    return s[:, a] * s[:, b]


def enumerate_cut_vectors(g, max_n=DEFAULT_CUT_GUARD):
    _check_cut_guard(g, max_n)
    return [CutVector(g, tuple(row)) for row in sign_matrix(g.n).tolist()]


def switch(obj, s, graph=None):
    """Negate the entries on edges cut by ``(s, [n] - s)``.

    Works on cut vectors, inequalities (right-hand side unchanged) and raw
    edge vectors; the last need ``graph``.
    """
    if isinstance(obj, CutVector):
        g = obj.graph
        s = _vertex_set(g, s)
        sides = tuple(-sg if v + 1 in s else sg for v, sg in enumerate(obj.sides))
        if sides[0] < 0:
            sides = tuple(-sg for sg in sides)
        return CutVector(g, sides)
    if isinstance(obj, LinearInequality):
        g = obj.graph
        flip = np.where(_cut_mask(g, _vertex_set(g, s)), -1, 1)
        return LinearInequality(g, obj.coeffs * flip, obj.rhs, obj.family, dict(obj.params, switched=sorted(s)))
    if graph is None:
        raise InvalidInput("switching a raw edge vector needs its graph")
    w = as_weights(graph, obj)
    return np.where(_cut_mask(graph, _vertex_set(graph, s)), -w, w)


# ---------------------------------------------------------------------------
# Inequality families


def triangle_inequality(g, i, j, k, negated=(0, 1, 2)):
    """``-x_ij - x_ik - x_jk <= 1`` on a triangle of ``g``, switched so that the
    edges not listed in ``negated`` (positions 0: ij, 1: ik, 2: jk) get +1."""
    c = Circuit((i, j, k), g)
    tri = [(min(i, j), max(i, j)), (min(i, k), max(i, k)), (min(j, k), max(j, k))]
    f = [tri[t] for t in negated]
    ineq = circuit_inequality(c, f)
    return LinearInequality(g, ineq.coeffs, ineq.rhs, "triangle", {"vertices": [i, j, k]})


def circuit_inequality(c, f):
    """``x(C - F) - x(F) <= |C| - 2`` for an odd subset ``F`` of the circuit's edges."""
    g = c.graph
    f = {(min(a, b), max(a, b)) for a, b in f}
    edges = set(c.edges)
    if not f <= edges:
        raise InvalidInput(f"edges {sorted(f - edges)} are not on the circuit")
    if len(f) % 2 == 0:
        raise InvalidInput(f"F must have odd size, got {len(f)}")
    coeffs = np.zeros(g.m, dtype=np.int64)
    for e in edges:
        coeffs[g.index(*e)] = -1 if e in f else 1
    return LinearInequality(
        g, coeffs, len(c) - 2, "circuit", {"vertices": list(c.vertices), "F": [list(e) for e in sorted(f)]}
    )


def hypermetric_inequality(b):
    """``-sum_{i<j} b_i b_j x_ij <= (sum b_i^2 - 1) / 2`` on ``K_n``, ``n = len(b)``."""
    b = [int(v) for v in b]
    if sum(b) != 1:
        raise InvalidInput(f"hypermetric vector must sum to 1, got sum {sum(b)}")
    g = complete_graph(len(b))
    coeffs = np.array([-b[i - 1] * b[j - 1] for i, j in g.edges], dtype=np.int64)
    rhs = (sum(v * v for v in b) - 1) // 2
    return LinearInequality(g, coeffs, rhs, "hypermetric", {"b": b})


def cliqueweb_inequality(q, r, on_complete=False):
    """Pure clique-web inequality: ``-x(support) <= q(r+1)``.

    With ``on_complete`` the inequality lives on ``K_{p+q}`` and carries zero
    coefficients on the antiweb edges of the web part.
    """
    support = cliqueweb_support(q, r)
    params = {"q": q, "r": r, "p": q + 2 * r + 1}
    if not on_complete:
        return LinearInequality(support, -np.ones(support.m, dtype=np.int64), q * (r + 1), "cliqueweb", params)
    kn = complete_graph(support.n)
    coeffs = np.zeros(kn.m, dtype=np.int64)
    for e in support.edges:
        coeffs[kn.index(*e)] = -1
    return LinearInequality(kn, coeffs, q * (r + 1), "cliqueweb", params)


# ---------------------------------------------------------------------------
# Metric polytope and its relatives


@dataclass(frozen=True)
class MembershipResult:
    inside: bool
    certificate: LinearInequality | None = None
    violation: float = 0.0

    def __bool__(self):
        return self.inside


def _most_violated_on_cycle(c, x):
    """Odd ``F`` maximizing ``x(C - F) - x(F)`` on circuit ``c``, and that value."""
    idx = np.array(c.edge_indices)
    vals = x[idx]
    neg = vals < 0
    total = np.abs(vals).sum()
    if neg.sum() % 2 == 0:
        k = int(np.argmin(np.abs(vals)))
        neg[k] = not neg[k]
        total -= 2 * abs(vals[k])
    f = [c.edges[t] for t in np.flatnonzero(neg)]
    return f, total


def met_membership(g, x, tol=1e-9, budget=DEFAULT_CYCLE_BUDGET):
    """Test ``x`` against the box and circuit inequalities of the metric polytope.

    Only chordless cycles are used.  Returns the first violated inequality
    (box constraints first, then cycles in enumeration order, with the most
    violated odd subset on that cycle) together with the violation amount.
    """
    x = np.asarray(as_weights(g, x), dtype=float)
    over = np.abs(x) - 1
    k = int(np.argmax(over)) if g.m else 0
    if g.m and over[k] > tol:
        coeffs = np.zeros(g.m, dtype=np.int64)
        coeffs[k] = 1 if x[k] > 0 else -1
        return MembershipResult(False, LinearInequality(g, coeffs, 1, "box", {"edge": list(g.edges[k])}), float(over[k]))
    for c in chordless_cycles(g, budget=budget):
        f, val = _most_violated_on_cycle(c, x)
        excess = val - (len(c) - 2)
        if excess > tol:
            return MembershipResult(False, circuit_inequality(c, f), float(excess))
    return MembershipResult(True)


def met01_membership(g, y, tol=1e-9, budget=DEFAULT_CYCLE_BUDGET):
    """Membership in the [0,1]-scaled metric polytope, using ``x = 1 - 2y``.

    In ``y`` coordinates the circuit inequalities read
    ``y(F) - y(C - F) <= |F| - 1`` for odd ``F``.
    """
    y = np.asarray(as_weights(g, y), dtype=float)
    return met_membership(g, 1.0 - 2.0 * y, tol=2 * tol, budget=budget).inside


def cos_param_membership(g, x, tol=1e-9, budget=DEFAULT_CYCLE_BUDGET):
    """Whether ``x_e = cos(pi y_e)`` for some ``y`` in the scaled metric polytope."""
    x = np.asarray(as_weights(g, x), dtype=float)
    if np.any(np.abs(x) > 1 + tol):
        raise InvalidInput("entries must lie in [-1, 1] for the angle parametrization")
    y = np.arccos(np.clip(x, -1.0, 1.0)) / math.pi
    return met01_membership(g, y, tol=tol, budget=budget)


def constant_cycle_membership(p, c, tol=0.0):
    """Whether the constant vector ``c`` on ``C_p`` lies in the elliptope of ``C_p``."""
    if p < 3:
        raise InvalidInput(f"cycle length must be >= 3, got {p}")
    lower = -1.0 if p % 2 == 0 else -math.cos(math.pi / p)
    return lower - tol <= c <= 1.0 + tol


# ---------------------------------------------------------------------------
# Dilations of the cut polytope


@dataclass(frozen=True, eq=False)
class DilationResult:
    status: str  # "member", "non-member" or "inconclusive"
    distance: float
    distance_lower_bound: float
    point: np.ndarray
    cuts: np.ndarray  # rows: cut vectors (unscaled) in the combination
    weights: np.ndarray
    iterations: int

    @property
    def member(self):
        return self.status == "member"


def cut_dilation_membership(g, x, k, tol=1e-7, max_iter=100_000, max_n=DEFAULT_CUT_GUARD):
    """Decide whether ``x`` lies in ``k * CUT(g)`` by away-step Frank-Wolfe.

    Minimizes ``0.5 * ||x - z||^2`` over ``z`` in the dilated cut polytope.
    The linear subproblem is an exact maximization over all cut vectors.
    The Frank-Wolfe gap gives a certified lower bound on the distance, so
    the answer is "non-member" only when that bound exceeds ``tol``, and
    "inconclusive" when the budget runs out in between.
    """
    x = np.asarray(as_weights(g, x), dtype=float)
    if k < 0:
        raise InvalidInput(f"dilation factor must be >= 0, got {k}")
    cuts = cut_matrix(g, max_n)
    verts = k * cuts.astype(float)

    # Start from the cut that best aligns with x.
    first = int(np.argmax(cuts @ x))
    active = {first: 1.0}
    z = verts[first].copy()
    lower = 0.0
    it = 0
    for it in range(1, int(max_iter) + 1):
        grad = z - x
        dist = float(np.linalg.norm(grad))
        if dist <= tol:
            break
        scores = verts @ grad
        s = int(np.argmin(scores))
        gap = float(grad @ z - scores[s])
        lower = math.sqrt(max(0.0, 0.5 * dist * dist - gap) * 2.0)
        if lower > tol or gap <= 1e-15 * max(1.0, dist):
            break
        ids = list(active)
        a = ids[int(np.argmax(scores[ids]))]
        away_gain = float(scores[a] - grad @ z)
        if gap >= away_gain:
            d = verts[s] - z
            gmax = 1.0
            fw = True
        else:
            alpha = active[a]
            d = z - verts[a]
            gmax = alpha / (1.0 - alpha) if alpha < 1.0 else math.inf
            fw = False
        dd = float(d @ d)
        if dd == 0.0:
            break
        step = min(max(-float(grad @ d) / dd, 0.0), gmax)
        if fw:
            for key in active:
                active[key] *= 1.0 - step
            active[s] = active.get(s, 0.0) + step
            if step >= 1.0:
                active = {s: 1.0}
        else:
            for key in active:
                active[key] *= 1.0 + step
            active[a] -= step
            if step >= gmax or active[a] <= 1e-15:
                del active[a]
        active = {key: w for key, w in active.items() if w > 0.0}
        total = sum(active.values())
        ids = list(active)
        wts = np.array([active[i] / total for i in ids])
        active = dict(zip(ids, wts))
        z = wts @ verts[ids]

    ids = sorted(active)
    wts = np.array([active[i] for i in ids])
    dist = float(np.linalg.norm(z - x))
    if dist <= tol:
        status = "member"
    elif lower > tol:
        status = "non-member"
    else:
        status = "inconclusive"
    return DilationResult(status, dist, lower if status != "member" else 0.0, z, cuts[ids], wts, it)
