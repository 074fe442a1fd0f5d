"""Semidefinite side: maximization over the elliptope and certificates.

``solve_elliptope_max`` maximizes ``sum_{ij in E} w_ij <u_i, u_j>`` over unit
vectors by exact block-coordinate ascent on a low-rank factor and certifies
the result through the dual ``min sum_i z_i s.t. Diag(z) - W/2 >= 0``.
The clique-web program is also solved exactly in its symmetry-reduced form.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .cutpoly import as_weights
from .errors import InvalidInput
from .graph import Graph, cliqueweb_support

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UnitVectorConfig:
    """Rows of ``u`` are unit vectors; ``u @ u.T`` lies in the elliptope."""

    u: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.u, dtype=float))
        norms = np.linalg.norm(u, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise InvalidInput("configuration rows must have unit norm")
        object.__setattr__(self, "u", u)

    @property
    def n(self):
        return self.u.shape[0]

    @property
    def rank(self):
        return self.u.shape[1]

    def gram(self):
        return self.u @ self.u.T

    def edge_values(self, g):
        a, b = g.edge_array.T
        return np.einsum("ij,ij->i", self.u[a], self.u[b])


@dataclass(frozen=True)
class DualCertificate:
    y: np.ndarray = field(repr=False)
    min_eig: float
    dual_bound: float
    fallback: bool = False


@dataclass(frozen=True, eq=False)
class SolveResult:
    value: float
    config: UnitVectorConfig = field(repr=False)
    dual_bound: float
    restarts_used: int
    iterations: int
    converged: bool
    seed: int = 0

    @property
    def certificate_gap(self):
        return self.dual_bound - self.value

    def to_dict(self):
        return {
            "value": self.value,
            "dual_bound": self.dual_bound,
            "gap": self.certificate_gap,
            "converged": self.converged,
            "restarts": self.restarts_used,
            "iterations": self.iterations,
            "seed": self.seed,
            "rank": self.config.rank,
        }


def objective(g, w, cfg):
    """``sum_{ij in E} w_ij <u_i, u_j>`` for a configuration."""
    return float(as_weights(g, w) @ cfg.edge_values(g))


def dual_certificate(g, w, cfg):
    """Upper bound on the elliptope maximum from a (near) stationary configuration.

    With ``y_i = ||sum_j w_ij u_j||`` and ``mu = lambda_min(Diag(y) - W)`` the
    value ``(sum_i y_i - n * min(mu, 0)) / 2`` is a valid bound for any
    configuration, and it is tight at an optimum.
    """
    wmat = g.weight_matrix(as_weights(g, w).astype(float))
    y = np.linalg.norm(wmat @ cfg.u, axis=1)
    try:
        mu = float(np.linalg.eigvalsh(np.diag(y) - wmat)[0])
    except np.linalg.LinAlgError:
        log.warning("eigenvalue computation failed; using the row-sum bound instead")
        bound = 0.5 * (y.sum() + g.n * np.abs(wmat).sum(axis=1).max())
        return DualCertificate(y, math.nan, float(bound), fallback=True)
    return DualCertificate(y, mu, float(0.5 * (y.sum() - g.n * min(mu, 0.0))))


def default_rank(n):
    return min(n, math.ceil(math.sqrt(2 * n)) + 1)


# Sweeps allowed after the relative-change test passes, spent closing the dual gap.
_POLISH_SWEEPS = 1000


def _ascent(wmat, u, tol, gap_tol, max_iters, g, w):
    """Coordinate ascent sweeps until the dual gap closes or progress stops."""
    n = u.shape[0]
    rows = [wmat[i] for i in range(n)]
    f = 0.5 * float(np.sum((wmat @ u) * u))
    cert = None
    polish = None
    it = 0
    for it in range(1, max_iters + 1):
        for i in range(n):
            gi = rows[i] @ u
            nrm = math.sqrt(gi @ gi)
            if nrm > 0.0:
                u[i] = gi / nrm
        f_new = 0.5 * float(np.sum((wmat @ u) * u))
        rel = abs(f_new - f) / max(1.0, abs(f_new))
        f = f_new
        if polish is None and rel <= tol:
            polish = _POLISH_SWEEPS
        if polish is not None:
            cert = dual_certificate(g, w, UnitVectorConfig(u))
            if cert.dual_bound - f <= gap_tol * (1.0 + abs(f)):
                return f, cert, it, True
            polish -= 1
            if polish <= 0 or rel <= 1e-16:
                break
    if cert is None:
        cert = dual_certificate(g, w, UnitVectorConfig(u))
    return f, cert, it, cert.dual_bound - f <= gap_tol * (1.0 + abs(f))


def _round(wmat, u, rng, tries=8):
    """Best +-1 vector from hyperplane rounding of ``u`` followed by greedy single flips.

    Integral optima are reached only sublinearly by the ascent; a rounded
    vector can hit them exactly.
    """
    dirs = [np.linalg.svd(u, full_matrices=False)[2][0]]
    dirs += list(rng.standard_normal((tries, u.shape[1])))
    best_x, best_f = None, -math.inf
    for d in dirs:
        x = np.where(u @ d >= 0, 1.0, -1.0)
        while True:
            gain = -x * (wmat @ x)  # change of x^T W x / 2 is 2 * gain for flipping i
            i = int(np.argmax(gain))
            if gain[i] <= 1e-12:
                break
            x[i] = -x[i]
        f = 0.5 * float(x @ wmat @ x)
        if f > best_f:
            best_x, best_f = x, f
    return best_x, best_f


def solve_elliptope_max(g, w, rank=None, restarts=5, tol=1e-8, seed=0, max_iters=50_000, gap_tol=1e-12):
    """Maximize ``sum_{ij in E} w_ij <u_i, u_j>`` over unit vectors ``u_i``.

    Each restart draws a random rank-``rank`` factor and repeatedly replaces
    row ``i`` by the normalized gradient ``sum_j w_ij u_j`` (rows with zero
    gradient are left alone).  Restarts stop early once the dual certificate
    closes to ``gap_tol`` relative accuracy.  The best primal value and the
    smallest dual bound over all restarts are reported.
    """
    w = as_weights(g, w).astype(float)
    n = g.n
    rank = default_rank(n) if rank is None else int(rank)
    if rank < 1:
        raise InvalidInput(f"rank must be >= 1, got {rank}")
    if not np.any(w):
        u = np.zeros((n, rank))
        u[:, 0] = 1.0
        return SolveResult(0.0, UnitVectorConfig(u), 0.0, 0, 0, True, seed)

    wmat = g.weight_matrix(w)
    rng = np.random.default_rng(seed)
    best_val, best_u, best_dual = -math.inf, None, math.inf
    total_iters = 0
    used = 0
    for used in range(1, restarts + 1):
        u = rng.standard_normal((n, rank))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        f, cert, its, closed = _ascent(wmat, u, tol, gap_tol, max_iters, g, w)
        total_iters += its
        if not closed:
            x, fx = _round(wmat, u, rng)
            if fx >= f:
                u = np.zeros_like(u)
                u[:, 0] = x
                f, cert = fx, dual_certificate(g, w, UnitVectorConfig(u))
        best_dual = min(best_dual, cert.dual_bound)
        if f > best_val:
            best_val, best_u = f, u.copy()
        if best_dual - best_val <= gap_tol * (1.0 + abs(best_val)):
            break
    cfg = UnitVectorConfig(best_u)
    value = objective(g, w, cfg)
    converged = best_dual - value <= max(gap_tol, 1e-5) * (1.0 + abs(value))
    if not converged:
        log.warning("elliptope solve not certified: value %.10g, dual bound %.10g", value, best_dual)
    return SolveResult(value, cfg, max(best_dual, value), used, total_iters, converged, seed)


def gw_sdp(g, w, **opts):
    """Max-cut relaxation value ``(w(E) + sdp(G, -w)) / 2``."""
    w = as_weights(g, w).astype(float)
    return 0.5 * (w.sum() + solve_elliptope_max(g, -w, **opts).value)


def _support_graph(a):
    n = a.shape[0]
    edges = [(i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if a[i, j] != 0]
    return Graph(n, tuple(edges))


def matrix_elliptope_max(a, **opts):
    """``max <A, X>`` over correlation matrices ``X``, as ``(value, SolveResult)``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.allclose(a, a.T):
        raise InvalidInput("expected a symmetric square matrix")
    g = _support_graph(a)
    w = np.array([2.0 * a[i - 1, j - 1] for i, j in g.edges])
    res = solve_elliptope_max(g, w, **opts)
    return float(np.trace(a)) + res.value, res


def block_embedding(a, tol=1e-9):
    """``[[0, A/2], [A/2, 0]]`` for a positive semidefinite ``A``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.allclose(a, a.T, atol=1e-12):
        raise InvalidInput("expected a symmetric square matrix")
    if np.linalg.eigvalsh(a)[0] < -tol:
        raise InvalidInput("matrix is not positive semidefinite")
    n = a.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, n:] = a / 2
    out[n:, :n] = a / 2
    return out


# ---------------------------------------------------------------------------
# Symmetry-reduced clique-web program


def _check_qr(q, r):
    if q < 2 or r < 0 or int(q) != q or int(r) != r:
        raise InvalidInput(f"clique-web parameters need integers q >= 2 and r >= 0, got q={q}, r={r}")


def web_band_sizes(q, r):
    """Edge counts of the web bands ``s = r+1 .. p//2`` of ``W^r_p``."""
    _check_qr(q, r)
    p = q + 2 * r + 1
    return {s: (p // 2 if 2 * s == p else p) for s in range(r + 1, p // 2 + 1)}


def circulant_eigenvalues(p, c):
    """Eigenvalues of the symmetric circulant with unit diagonal and ``c[s-1]`` at distance ``s``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (p // 2,):
        raise InvalidInput(f"need {p // 2} circulant values for p={p}, got {c.shape}")
    k = np.arange(p)[:, None]
    s = np.arange(1, p // 2 + 1)[None, :]
    mult = 2.0 * np.cos(2.0 * math.pi * k * s / p)
    if p % 2 == 0:
        mult[:, -1] = (-1.0) ** np.arange(p)
    return 1.0 + mult @ c


@dataclass(frozen=True, eq=False)
class ReducedCliqueWebPoint:
    """Invariant correlation matrix of the clique-web program.

    ``beta = ((q-1) a + 1) / q`` encodes the common clique correlation ``a``,
    ``b`` is the clique-to-web correlation and ``c[s-1]`` the web correlation
    at cyclic distance ``s``.
    """

    q: int
    r: int
    beta: float
    b: float
    c: np.ndarray

    @property
    def p(self):
        return self.q + 2 * self.r + 1

    @property
    def gamma(self):
        return math.cos(math.pi / self.p) if self.p % 2 else 1.0

    @property
    def eigenvalues(self):
        return circulant_eigenvalues(self.p, self.c)

    def objective(self):
        q, p = self.q, self.p
        web = sum(size * self.c[s - 1] for s, size in web_band_sizes(q, self.r).items())
        return 0.5 * q * (1.0 - q * self.beta) - p * q * self.b - web

    def is_feasible(self, tol=1e-9):
        lam = self.eigenvalues
        return bool(
            -tol <= self.beta <= 1.0 + tol
            and abs(self.b) <= 1.0 + tol
            and np.all(np.abs(self.c) <= 1.0 + tol)
            and lam.min() >= -tol
            and self.beta * lam[0] >= self.p * self.b**2 - tol
        )

    def gram(self):
        """The full ``(q+p) x (q+p)`` matrix, clique first."""
        q, p = self.q, self.p
        a = (q * self.beta - 1.0) / (q - 1)
        x = np.empty((q + p, q + p))
        x[:q, :q] = a
        x[:q, q:] = self.b
        x[q:, :q] = self.b
        dist = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        dist = np.minimum(dist, p - dist)
        full_c = np.concatenate(([1.0], self.c))
        x[q:, q:] = full_c[dist]
        np.fill_diagonal(x, 1.0)
        return x


def reduce_gram(x, q, r):
    """Average a correlation matrix over ``Sym(q) x Cyclic(p)``.

    The clique-web objective is invariant under this group, so the averaged
    point has the same objective value.
    """
    _check_qr(q, r)
    p = q + 2 * r + 1
    x = np.asarray(x, dtype=float)
    if x.shape != (p + q, p + q):
        raise InvalidInput(f"expected a {(p + q, p + q)} matrix, got {x.shape}")
    cl = x[:q, :q]
    a = (cl.sum() - np.trace(cl)) / (q * (q - 1))
    b = x[:q, q:].mean()
    xp = x[q:, q:]
    c = np.empty(p // 2)
    idx = np.arange(p)
    for s in range(1, p // 2 + 1):
        c[s - 1] = 0.5 * (xp[idx, (idx + s) % p].mean() + xp[idx, (idx - s) % p].mean())
    beta = ((q - 1) * a + 1.0) / q
    return ReducedCliqueWebPoint(q, r, float(beta), float(b), c)


@dataclass(frozen=True, eq=False)
class CliqueWebSolution:
    value: float
    point: ReducedCliqueWebPoint
    converged: bool = True


def solve_cliqueweb_reduced(q, r):
    """Exact optimum of ``sdp(CW, -e)`` over invariant matrices.

    Writing the circulant web block through its eigenvalues ``lambda_k``
    (nonnegative, summing to ``p``) turns the web part of the objective into
    ``-sum_k lambda_k phi_k``.  For fixed ``t = lambda_0`` the best ``(beta, b)``
    on the border Schur constraint ``beta * t >= p b^2`` has the closed form
    ``g(t)``, and the remaining mass ``p - t`` goes to the eigenvalue with the
    smallest ``phi_k``.  What is left is a one-dimensional concave problem in
    ``t`` whose maximizer is among a handful of candidates.
    """
    _check_qr(q, r)
    p = q + 2 * r + 1
    sizes = web_band_sizes(q, r)
    k = np.arange(p)
    phi = np.zeros(p)
    for s, size in sizes.items():
        phi += size * np.cos(2.0 * math.pi * k * s / p) / p
    kstar = 1 + int(np.argmin(phi[1:]))
    phi0, phimin = phi[0], phi[kstar]
    knee = q * q / p

    def g(t):
        return 0.5 * p * t if t <= knee else q * math.sqrt(p * t) - 0.5 * q * q

    def total(t):
        return 0.5 * q + g(t) - t * phi0 - (p - t) * phimin

    cands = {0.0, float(p), min(knee, float(p))}
    delta = phi0 - phimin
    if delta > 0 and knee < p:
        tstar = (q * math.sqrt(p) / (2.0 * delta)) ** 2
        cands.add(min(max(tstar, knee), float(p)))
    t = max(sorted(cands), key=total)

    lam = np.zeros(p)
    lam[0] = t
    lam[kstar] += 0.5 * (p - t)
    lam[(p - kstar) % p] += 0.5 * (p - t)
    s = np.arange(1, p // 2 + 1)
    c = (lam[None, :] * np.cos(2.0 * math.pi * np.outer(s, k) / p)).sum(axis=1) / p
    c = np.clip(c, -1.0, 1.0)
    beta = min(1.0, t / knee) if t > 0 else 0.0
    b = -math.sqrt(beta * t / p)
    point = ReducedCliqueWebPoint(q, r, beta, b, c)
    value = point.objective()
    if abs(value - total(t)) > 1e-9 * (1.0 + abs(value)):
        log.warning("reduced clique-web point disagrees with its closed form: %.12g vs %.12g", value, total(t))
    return CliqueWebSolution(value, point)


def cliqueweb_closed_bounds(q, r):
    """Closed-form upper bounds on ``sdp(CW, -e)`` and on the clique-web gap.

    ``trbound`` comes from rewriting the inequality as ``-x(K_n) + x(AW)``;
    when ``q <= 2r`` the three branch values of the case analysis on
    ``beta`` are reported as well (with ``gamma = cos(pi/p)`` for even ``q``
    and ``gamma = 1`` for odd ``q``).
    """
    _check_qr(q, r)
    p = q + 2 * r + 1
    ip = q * (r + 1)
    out = {
        "ip": ip,
        "sdp_trbound": ip + (2 * r + 1) ** 2 / 2,
        "ratio_trbound": 1 + (2 * r + 1) ** 2 / (q * (2 * r + 2)),
    }
    if q >= 2 * r + 1:
        out["branch"] = "trbound"
        out["gap_bound"] = 2
        return out
    gamma = math.cos(math.pi / p) if q % 2 == 0 else 1.0
    branches = {
        "beta_zero": 0.5 * q * (p * gamma + 1),
        "beta_b2": float(ip),
        "interior": 0.5 * p * q * (gamma + 1 / (gamma + 1)) - 0.5 * q * (q - 1),
    }
    out.update(
        branch="beta_cases",
        gap_bound=3,
        gamma=gamma,
        branches=branches,
        sdp_case_bound=max(branches.values()),
        ratio_estimate=(q + 6 * r + 5) / (4 * (r + 1)),
    )
    return out


def cliqueweb_weights(q, r):
    """The support graph and all-minus-one weights of the clique-web instance."""
    g = cliqueweb_support(q, r)
    return g, -np.ones(g.m)
