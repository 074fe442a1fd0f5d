"""Reproduction batteries behind ``grothendieck verify``.

Each suite returns a list of :class:`Check` records; a suite passes when all
of its checks do.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .constants import (
    cliqueweb_gap,
    hypermetric_gap,
    ip_bruteforce,
    kappa_circuit,
    kappa_k5_minor_free,
    laplacian,
    matrix_pm1_max,
    maxcut,
    shortest_circuit_ratio,
)
from .cutpoly import (
    constant_cycle_membership,
    cos_param_membership,
    cut_dilation_membership,
    cut_matrix,
    switch,
)
from .errors import InvalidInput
from .graph import (
    Graph,
    complete_bipartite_graph,
    complete_graph,
    cycle_graph,
    grid_graph,
    has_minor,
    wheel_graph,
)
from .sdp import block_embedding, matrix_elliptope_max, solve_elliptope_max


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float | None = None
    expected: float | None = None
    tolerance: float | None = None
    detail: str = ""

    def to_dict(self):
        return asdict(self)


def _close(name, measured, expected, tol, detail=""):
    measured, expected = float(measured), float(expected)
    return Check(name, abs(measured - expected) <= tol, measured, expected, tol, detail)


def circuit_weights(n):
    """``-e`` for odd ``n``; ``(-1, 1, ..., 1)`` for even ``n`` (both circuit facets)."""
    w = -np.ones(n, dtype=np.int64)
    if n % 2 == 0:
        w = np.ones(n, dtype=np.int64)
        w[0] = -1
    return w


def suite_circuits(nmax=11, seed=0, **_):
    checks = []
    for n in range(3, nmax + 1):
        g = cycle_graph(n)
        w = circuit_weights(n)
        ipv = ip_bruteforce(g, w).value
        res = solve_elliptope_max(g, w, seed=seed)
        checks.append(_close(f"ip(C{n})", ipv, n - 2, 0))
        checks.append(_close(f"sdp(C{n})", res.value, n * math.cos(math.pi / n), 1e-6 * n))
        checks.append(_close(f"kappa(C{n})", res.value / ipv, kappa_circuit(n), 1e-6))
    return checks


def k5free_graphs():
    return {
        "K4": complete_graph(4),
        "K2,4": complete_bipartite_graph(2, 4),
        "K3,3": complete_bipartite_graph(3, 3),
        "grid3x3": grid_graph(3, 3),
        "grid2x4": grid_graph(2, 4),
        "wheel4": wheel_graph(4),
        "wheel5": wheel_graph(5),
        "wheel6": wheel_graph(6),
    }


def suite_k5free(seed=0, **_):
    checks = []
    for name, g in k5free_graphs().items():
        checks.append(Check(f"no K5 minor in {name}", not has_minor(g, "K5")))
        formula = kappa_k5_minor_free(g)
        checks.append(_close(f"formula({name})", formula.value, kappa_circuit(formula.girth), 1e-12))
        lower = shortest_circuit_ratio(g, seed=seed).ratio
        checks.append(
            Check(f"circuit ratio <= formula on {name}", lower <= formula.value + 1e-6, lower, formula.value, 1e-6)
        )
    return checks


def suite_cliqueweb(qmax=6, rmax=3, seed=0, full_max_n=13, **_):
    checks = []
    for q in range(2, qmax + 1):
        for r in range(rmax + 1):
            rep = cliqueweb_gap(q, r)
            b = rep.bounds
            limit = 2 if q >= 2 * r + 1 else 3
            checks.append(Check(f"CW({q},{r}) ratio <= {limit}", rep.ratio <= limit + 1e-6, rep.ratio, limit, 1e-6))
            if q >= 2 * r + 1:
                checks.append(
                    Check(
                        f"CW({q},{r}) ratio <= trbound",
                        rep.ratio <= b["ratio_trbound"] + 1e-6,
                        rep.ratio,
                        b["ratio_trbound"],
                        1e-6,
                    )
                )
            if q == 2:
                checks.append(_close(f"CW(2,{r}) closed form", rep.sdp_value, rep.formula_value, 1e-5))
            if 2 * q + 2 * r + 1 <= full_max_n:
                full = cliqueweb_gap(q, r, mode="full", seed=seed)
                checks.append(_close(f"CW({q},{r}) reduced vs full", rep.sdp_value, full.sdp_value, 1e-5))
    return checks


def suite_hypermetric(seed=0, **_):
    checks = []
    for b in [(1, 1, -1), (1, 1, 1, -1, -1), (2, 1, -1, -1)]:
        rep = hypermetric_gap(b, seed=seed)
        bound = rep.bounds["sdp_bound"]
        checks.append(Check(f"sdp{b} <= sum b^2 / 2", rep.sdp_value <= bound + 1e-6, rep.sdp_value, bound, 1e-6))
        checks.append(Check(f"ratio{b} <= 3/2", rep.ratio <= 1.5 + 1e-6, rep.ratio, 1.5, 1e-6))
        if rep.bounds["triangle_type"]:
            checks.append(_close(f"ratio{b} == 3/2", rep.ratio, 1.5, 1e-6))
    return checks


def random_elliptope_point(g, rng, rank=None):
    u = rng.standard_normal((g.n, rank or g.n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    a, b = g.edge_array.T
    return np.einsum("ij,ij->i", u[a], u[b])


def suite_membership(samples=200, seed=0, **_):
    checks = []
    for p in (3, 5, 7, 9):
        edge = -math.cos(math.pi / p)
        checks.append(Check(f"C{p} constant {edge + 1e-4:.6f} inside", constant_cycle_membership(p, edge + 1e-4)))
        checks.append(Check(f"C{p} constant {edge - 1e-3:.6f} outside", not constant_cycle_membership(p, edge - 1e-3)))
    rng = np.random.default_rng(seed)
    for name, g in {"C5": cycle_graph(5), "C6": cycle_graph(6), "K4": complete_graph(4)}.items():
        bad = sum(not cos_param_membership(g, random_elliptope_point(g, rng), tol=1e-9) for _ in range(samples))
        checks.append(Check(f"elliptope samples of {name} pass the angle test", bad == 0, bad, 0, 0))
    g = cycle_graph(3)
    x = -0.5 * np.ones(3)
    inside = cut_dilation_membership(g, x, 1.5 + 1e-3, tol=1e-6)
    outside = cut_dilation_membership(g, x, 1.5 - 1e-2, tol=1e-6)
    checks.append(Check("-e/2 in 1.501 CUT(K3)", inside.status == "member", inside.distance, 0.0, 1e-6))
    checks.append(
        Check("-e/2 not in 1.49 CUT(K3)", outside.status == "non-member" and outside.distance > 1e-4, outside.distance)
    )
    return checks


def random_psd(rng, n, integral=True):
    m = rng.integers(-3, 4, size=(n, n)) if integral else rng.standard_normal((n, n))
    return m @ m.T


def suite_lemmas(samples=50, instances=100, seed=0, **_):
    rng = np.random.default_rng(seed)
    checks = []
    worst_pm, worst_ell = 0.0, 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 6))
        a = random_psd(rng, n)
        bmat = block_embedding(a)
        worst_pm = max(worst_pm, abs(matrix_pm1_max(bmat) - matrix_pm1_max(a)))
        if n > 1:
            ell_b, _ = matrix_elliptope_max(bmat, seed=seed)
            ell_a, _ = matrix_elliptope_max(a, seed=seed)
            worst_ell = max(worst_ell, abs(ell_b - ell_a))
    checks.append(Check("block embedding, +-1 maxima equal", worst_pm == 0, worst_pm, 0.0, 0.0))
    checks.append(Check("block embedding, elliptope maxima equal", worst_ell <= 1e-5, worst_ell, 0.0, 1e-5))

    worst_mc, worst_sdp, worst_sw_ip, worst_sw_sdp = 0, 0.0, 0, 0.0
    for _ in range(instances):
        g = random_graph(rng, int(rng.integers(3, 11)))
        w = rng.integers(-5, 6, size=g.m)
        direct = int(((1 - cut_matrix(g)) // 2 @ w).max())
        worst_mc = max(worst_mc, abs(maxcut(g, w).value - direct), abs(2 * direct - (w.sum() + ip_bruteforce(g, -w).value)))
        res = solve_elliptope_max(g, -w, seed=seed)
        # The Laplacian form 1/4 <L, X> at the optimal Gram matrix of sdp(G, -w).
        gw_direct = 0.25 * float(np.sum(laplacian(g, w) * res.config.gram()))
        worst_sdp = max(worst_sdp, abs(gw_direct - 0.5 * (w.sum() + res.value)))
        s = {int(v) for v in np.flatnonzero(rng.integers(0, 2, g.n)) + 1}
        ws = switch(w, s, graph=g)
        worst_sw_ip = max(worst_sw_ip, abs(ip_bruteforce(g, w).value - ip_bruteforce(g, ws).value))
        a = solve_elliptope_max(g, w, seed=seed).value
        b = solve_elliptope_max(g, ws, seed=seed + 1).value
        worst_sw_sdp = max(worst_sw_sdp, abs(a - b))
    checks.append(Check("mc = (w(E) + ip(-w)) / 2", worst_mc == 0, worst_mc, 0, 0))
    checks.append(Check("sdp_GW = (w(E) + sdp(-w)) / 2", worst_sdp <= 1e-9, worst_sdp, 0.0, 1e-9))
    checks.append(Check("switching leaves ip unchanged", worst_sw_ip == 0, worst_sw_ip, 0, 0))
    checks.append(Check("switching leaves sdp unchanged", worst_sw_sdp <= 1e-6, worst_sw_sdp, 0.0, 1e-6))
    return checks


def random_graph(rng, n, density=0.6):
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < density]
    if not edges:
        edges = [(1, 2)]
    return Graph(n, tuple(edges))


SUITES = {
    "circuits": suite_circuits,
    "k5free": suite_k5free,
    "cliqueweb": suite_cliqueweb,
    "hypermetric": suite_hypermetric,
    "membership": suite_membership,
    "lemmas": suite_lemmas,
}


def verify_suite(name, **params):
    try:
        suite = SUITES[name]
    except KeyError:
        raise InvalidInput(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return suite(**params)
