"""Exact integer optima, integrality ratios and the closed-form constants."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cutpoly import DEFAULT_CUT_GUARD, as_weights, circuit_inequality, hypermetric_inequality, sign_matrix
from .errors import GuardExceeded, InapplicableTheorem, InvalidInput, UndefinedRatio
from .graph import DEFAULT_MINOR_GUARD, Graph, chordless_cycles, cliqueweb_support, girth, has_minor
from .sdp import cliqueweb_closed_bounds, solve_cliqueweb_reduced, solve_elliptope_max

log = logging.getLogger(__name__)

# Largest block of assignments evaluated at once by the brute force.
_BLOCK_BITS = 16


@dataclass(frozen=True)
class IPResult:
    value: float
    signs: tuple  # +-1 per vertex, vertex 1 is +1

    @property
    def shore(self):
        return frozenset(v + 1 for v, s in enumerate(self.signs) if s < 0)


def ip_bruteforce(g, w, max_n=DEFAULT_CUT_GUARD):
    """``max_{x in {+-1}^n} sum_{ij in E} w_ij x_i x_j`` by exhaustive search.

    Vertex 1 is fixed to +1.  The remaining vertices are split into a block
    of up to 16 "low" vertices, whose assignments are evaluated together as
    a vector, and "high" vertices that are walked in Gray-code order so that
    each step updates the whole vector with one flip.  Integer weights give
    integer (exact) results.
    """
    w = as_weights(g, w)
    if g.n > max_n:
        raise GuardExceeded(f"brute-force ip limited to n <= {max_n} (graph has {g.n} vertices)", guard="ip_n")
    exact = w.dtype.kind in "iub"
    dtype = np.int64 if exact else float
    wmat = g.weight_matrix(w.astype(dtype)).astype(dtype)
    n = g.n
    if n == 1 or g.m == 0:
        return IPResult(0 if exact else 0.0, (1,) * n)

    nlow = min(n - 1, _BLOCK_BITS)
    low = np.arange(nlow + 1)
    high = np.arange(nlow + 1, n)
    s_low = sign_matrix(nlow + 1).astype(dtype)
    w_ll = wmat[np.ix_(low, low)]
    inner = ((s_low @ w_ll) * s_low).sum(axis=1)
    inner = inner // 2 if exact else inner / 2
    field_ = s_low @ wmat[np.ix_(low, high)]
    w_hh = wmat[np.ix_(high, high)]
    t = np.ones(high.size, dtype=dtype)
    vals = inner + field_.sum(axis=1) + (w_hh.sum() // 2 if exact else w_hh.sum() / 2)

    k = int(np.argmax(vals))
    best, best_row, best_t = vals[k], k, t.copy()
    for step in range(1, 1 << high.size):
        j = (step & -step).bit_length() - 1
        vals += -2 * t[j] * (field_[:, j] + w_hh[j] @ t)
        t[j] = -t[j]
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_row, best_t = vals[k], k, t.copy()

    signs = tuple(int(v) for v in s_low[best_row]) + tuple(int(v) for v in best_t)
    value = int(best) if exact else float(best)
    return IPResult(value, signs)


def laplacian(g, w):
    """``L = Diag(W e) - W``."""
    wmat = g.weight_matrix(as_weights(g, w))
    return np.diag(wmat.sum(axis=1)) - wmat


@dataclass(frozen=True)
class MaxCutResult:
    value: float
    shore: frozenset


def maxcut(g, w, max_n=DEFAULT_CUT_GUARD):
    """Exact maximum cut through ``mc(G, w) = (w(E) + ip(G, -w)) / 2``."""
    w = as_weights(g, w)
    res = ip_bruteforce(g, -w, max_n)
    total = w.sum() + res.value
    if w.dtype.kind in "iub":
        value = int(total) // 2
    else:
        value = float(total) / 2
    return MaxCutResult(value, res.shore)


def matrix_pm1_max(a, max_n=DEFAULT_CUT_GUARD):
    """``max x^T A x`` over ``x in {+-1}^n`` for a symmetric matrix."""
    a = np.asarray(a)
    n = a.shape[0]
    g = Graph(n, tuple((i + 1, j + 1) for i in range(n) for j in range(i + 1, n)))
    w = np.array([2 * a[i - 1, j - 1] for i, j in g.edges])
    return np.trace(a) + ip_bruteforce(g, w, max_n).value


# ---------------------------------------------------------------------------
# Integrality ratios


@dataclass(frozen=True)
class GapReport:
    instance: str
    ip_value: float
    sdp_value: float
    dual_bound: float
    mode: str = "full"
    formula_value: float | None = None
    bounds: dict = field(default_factory=dict)
    converged: bool = True

    @property
    def ratio(self):
        return self.sdp_value / self.ip_value

    @property
    def ratio_upper(self):
        return self.dual_bound / self.ip_value

    def to_dict(self):
        out = asdict(self)
        out["ratio"] = self.ratio
        out["ratio_upper"] = self.ratio_upper
        out["closed_bounds"] = out.pop("bounds")
        return out


def _ratio_report(instance, ip_value, sdp_value, dual_bound, **kw):
    if ip_value <= 0:
        raise UndefinedRatio(f"integer optimum of {instance} is {ip_value}; the ratio is undefined")
    return GapReport(instance, ip_value, sdp_value, max(dual_bound, sdp_value), **kw)


def kappa_ratio(g, ineq, seed=0, max_n=DEFAULT_CUT_GUARD, **opts):
    """``sdp / ip`` for the left-hand side of a valid inequality: a lower bound on kappa(G).

    Clique-web inequalities on their own support graph use the exact reduced
    solver; everything else goes through the factorized solver.
    """
    if ineq.graph != g:
        raise InvalidInput("inequality lives on a different graph")
    ipv = ip_bruteforce(g, ineq.coeffs, max_n).value
    name = f"{ineq.family}{ineq.params or ''}"
    if ipv <= 0:
        raise UndefinedRatio(f"inequality {name} has ip = {ipv}; the ratio is undefined")
    fam = ineq.family
    if fam == "cliqueweb" and g == cliqueweb_support(ineq.params["q"], ineq.params["r"]):
        sol = solve_cliqueweb_reduced(ineq.params["q"], ineq.params["r"])
        return _ratio_report(name, ipv, sol.value, sol.value, mode="reduced")
    res = solve_elliptope_max(g, ineq.coeffs, seed=seed, **opts)
    return _ratio_report(name, ipv, res.value, res.dual_bound, mode="full", converged=res.converged)


def kappa_circuit(n):
    """``(n / (n - 2)) cos(pi / n)``: the constant of the ``n``-cycle."""
    if int(n) != n or n < 3:
        raise InvalidInput(f"circuit length must be an integer >= 3, got {n}")
    return n / (n - 2) * math.cos(math.pi / n)


@dataclass(frozen=True)
class KappaFormula:
    value: float
    girth: float
    trivial: bool = False

    def __float__(self):
        return float(self.value)


def kappa_k5_minor_free(g, assume_k5_free=False, max_n=DEFAULT_MINOR_GUARD):
    """Closed-form constant of a graph without a K5 minor, in terms of its girth.

    Forests get 1 with ``trivial=True``.  Graphs too large for the minor test
    need ``assume_k5_free=True``.
    """
    if not assume_k5_free:
        if g.n > max_n:
            raise GuardExceeded(
                f"cannot certify K5-minor-freeness for n = {g.n} > {max_n}; pass assume_k5_free "
                "if the graph is known to be K5-minor-free",
                guard="minor_n",
            )
        if has_minor(g, "K5", max_n=max_n):
            raise InapplicableTheorem("graph has a K5 minor; only lower bounds from kappa_ratio apply")
    gi = girth(g)
    if math.isinf(gi):
        return KappaFormula(1.0, gi, trivial=True)
    return KappaFormula(kappa_circuit(gi), gi)


def bicycle_wheel_sdp(r):
    """Exact ``sdp(CW, -e)`` for ``q = 2``, ``p = 2r + 3``."""
    p = 2 * r + 3
    gamma = math.cos(math.pi / p)
    return -1 + p * (gamma + 1 / (gamma + 1))


def cliqueweb_gap(q, r, mode="reduced", seed=0, verify_ip_n=16, full_max_n=40, **opts):
    """Integrality ratio of the pure clique-web inequality.

    ``mode`` picks the sdp source: the exact reduced program, the full
    factorized solver, or (``q = 2`` only) the closed form.  The integer
    optimum is the right-hand side ``q(r+1)``; it is re-derived by brute
    force when the support has at most ``verify_ip_n`` vertices.
    """
    bounds = cliqueweb_closed_bounds(q, r)
    ipv = bounds["ip"]
    g = None
    n = 2 * q + 2 * r + 1
    if n <= verify_ip_n:
        g = cliqueweb_support(q, r)
        brute = ip_bruteforce(g, -np.ones(g.m, dtype=np.int64)).value
        if brute != ipv:
            raise AssertionError(f"brute-force ip {brute} differs from q(r+1) = {ipv}")
    formula = bicycle_wheel_sdp(r) if q == 2 else None
    converged = True
    if mode == "reduced":
        sdpv = dual = solve_cliqueweb_reduced(q, r).value
    elif mode == "full":
        if n > full_max_n:
            raise GuardExceeded(f"full clique-web solve limited to n <= {full_max_n} (needs {n})", guard="sdp_n")
        g = g or cliqueweb_support(q, r)
        res = solve_elliptope_max(g, -np.ones(g.m), seed=seed, **opts)
        sdpv, dual, converged = res.value, res.dual_bound, res.converged
    elif mode == "formula":
        if formula is None:
            raise InvalidInput("closed-form clique-web value is only known for q = 2")
        sdpv = dual = formula
    else:
        raise InvalidInput(f"unknown mode {mode!r}")
    report = _ratio_report(
        f"CW(q={q},r={r})", ipv, sdpv, dual, mode=mode, formula_value=formula, bounds=bounds, converged=converged
    )
    limit = bounds["gap_bound"]
    if q >= 2 * r + 1:
        limit = min(limit, bounds["ratio_trbound"])
    if report.ratio > limit + 1e-6:
        log.warning("clique-web ratio %.9g exceeds the proven bound %.9g", report.ratio, limit)
    return report


def is_triangle_type(b):
    nz = sorted(v for v in b if v != 0)
    return nz == [-1, 1, 1]


def hypermetric_gap(b, seed=0, **opts):
    """Integrality ratio of the hypermetric inequality for ``b``."""
    b = [int(v) for v in b]
    if sorted(abs(v) for v in b if v) == [1] and sum(b) == 1:
        raise InvalidInput("b is a unit vector; the hypermetric inequality is trivial")
    ineq = hypermetric_inequality(b)
    g = ineq.graph
    sq = sum(v * v for v in b)
    ipv = ip_bruteforce(g, ineq.coeffs).value
    if ipv != ineq.rhs:
        raise AssertionError(f"brute-force ip {ipv} differs from the right-hand side {ineq.rhs}")
    res = solve_elliptope_max(g, ineq.coeffs, seed=seed, **opts)
    bounds = {"sdp_bound": sq / 2, "gap_bound": 1.5, "triangle_type": is_triangle_type(b)}
    report = _ratio_report(
        f"hypermetric{tuple(b)}", ipv, res.value, res.dual_bound, mode="full", bounds=bounds, converged=res.converged
    )
    if res.value > sq / 2 + 1e-6:
        log.warning("hypermetric sdp %.9g exceeds sum(b^2)/2 = %.9g", res.value, sq / 2)
    return report


# ---------------------------------------------------------------------------
# Max-cut approximation checks


@dataclass(frozen=True)
class BoundCheck:
    status: str  # "holds", "violated" or "inapplicable"
    lhs: float = math.nan
    rhs: float = math.nan

    def __bool__(self):
        return self.status == "holds"


def gw_kappa_bound_check(g, w, kappa_upper, slack=1e-6, seed=0):
    """Check ``sdp_GW(G, w) <= kappa * mc(G, w)`` when ``w(E) >= 0`` and ``mc > 0``."""
    w = as_weights(g, w)
    mc = maxcut(g, w).value
    if w.sum() < 0 or mc <= 0:
        return BoundCheck("inapplicable")
    lhs = 0.5 * (float(w.sum()) + solve_elliptope_max(g, -w.astype(float), seed=seed).value)
    rhs = kappa_upper * mc
    return BoundCheck("holds" if lhs <= rhs + slack else "violated", lhs, rhs)


def gw_constant_check(g, w, factor=1.138, slack=1e-6, seed=0):
    """Check ``sdp_GW(G, w) <= 1.138 mc(G, w)`` for nonnegative weights."""
    w = as_weights(g, w)
    if np.any(w < 0):
        return BoundCheck("inapplicable")
    mc = maxcut(g, w).value
    lhs = 0.5 * (float(w.sum()) + solve_elliptope_max(g, -w.astype(float), seed=seed).value)
    rhs = factor * mc
    return BoundCheck("holds" if lhs <= rhs + slack else "violated", lhs, rhs)


def shortest_circuit_ratio(g, seed=0):
    """Ratio of the circuit inequality on a shortest cycle (a triangle when there is one)."""
    gi = girth(g)
    if math.isinf(gi):
        raise InvalidInput("forest has no circuit inequality")
    cyc = next(c for c in chordless_cycles(g, max_len=gi))
    ineq = circuit_inequality(cyc, cyc.edges[:1] if len(cyc) % 2 == 0 else cyc.edges)
    return kappa_ratio(g, ineq, seed=seed)


__all__ = [
    "IPResult",
    "ip_bruteforce",
    "laplacian",
    "maxcut",
    "matrix_pm1_max",
    "GapReport",
    "kappa_ratio",
    "kappa_circuit",
    "KappaFormula",
    "kappa_k5_minor_free",
    "bicycle_wheel_sdp",
    "cliqueweb_gap",
    "hypermetric_gap",
    "BoundCheck",
    "gw_kappa_bound_check",
    "gw_constant_check",
    "shortest_circuit_ratio",
]
