import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grothendieck.constants import ip_bruteforce, matrix_pm1_max
from grothendieck.errors import InvalidInput
from grothendieck.graph import Graph, band_circuits, cliqueweb_support, complete_graph, cycle_graph
from grothendieck.sdp import (
    ReducedCliqueWebPoint,
    UnitVectorConfig,
    block_embedding,
    circulant_eigenvalues,
    cliqueweb_closed_bounds,
    default_rank,
    dual_certificate,
    gw_sdp,
    matrix_elliptope_max,
    objective,
    reduce_gram,
    solve_cliqueweb_reduced,
    solve_elliptope_max,
    web_band_sizes,
)


def random_config(rng, n, rank):
    u = rng.standard_normal((n, rank))
    return UnitVectorConfig(u / np.linalg.norm(u, axis=1, keepdims=True))


def random_graph(rng, n, density=0.6):
    edges = [e for e in itertools.combinations(range(1, n + 1), 2) if rng.random() < density]
    return Graph(n, tuple(edges or [(1, 2)]))


# ---------------------------------------------------------------------------
# Factorized solver


def test_triangle():
    res = solve_elliptope_max(cycle_graph(3), -np.ones(3))
    assert res.value == pytest.approx(1.5, abs=1e-9)
    assert res.converged and res.certificate_gap <= 1e-6


def test_odd_and_even_cycles():
    assert solve_elliptope_max(cycle_graph(5), -np.ones(5)).value == pytest.approx(4.0450850, abs=1e-7)
    w = np.ones(6)
    w[0] = -1
    assert solve_elliptope_max(cycle_graph(6), w).value == pytest.approx(6 * math.cos(math.pi / 6), abs=1e-7)


def test_zero_weights():
    res = solve_elliptope_max(complete_graph(4), np.zeros(6))
    assert res.value == 0 and res.dual_bound == 0 and res.converged


def test_result_is_recomputable_and_serializable():
    g = complete_graph(5)
    w = np.arange(10) - 4.5
    res = solve_elliptope_max(g, w, seed=3)
    assert res.value == pytest.approx(objective(g, w, res.config), abs=1e-12)
    assert res.config.rank == default_rank(5)
    d = res.to_dict()
    assert set(d) >= {"value", "dual_bound", "gap", "converged", "restarts", "seed", "rank"}


def test_same_seed_same_answer():
    g = complete_graph(6)
    w = np.random.default_rng(0).normal(size=g.m)
    a, b = solve_elliptope_max(g, w, seed=7), solve_elliptope_max(g, w, seed=7)
    assert a.value == b.value and np.array_equal(a.config.u, b.config.u)


def test_unit_vector_config_rejects_non_unit_rows():
    with pytest.raises(InvalidInput):
        UnitVectorConfig(np.array([[1.0, 0.0], [0.5, 0.5]]))


@pytest.mark.parametrize("seed", range(30))
def test_relaxation_dominates_integer_optimum(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(3, 9)))
    w = rng.integers(-5, 6, g.m)
    res = solve_elliptope_max(g, w, seed=seed)
    assert res.value >= ip_bruteforce(g, w).value - 1e-9
    assert res.value <= res.dual_bound + 1e-9
    if res.converged:
        assert res.certificate_gap <= 1e-5 * (1 + abs(res.value))


# ---------------------------------------------------------------------------
# Dual certificate


def test_dual_certificate_zero_weights():
    cert = dual_certificate(cycle_graph(4), np.zeros(4), random_config(np.random.default_rng(0), 4, 2))
    assert not cert.y.any() and cert.dual_bound == 0


def test_dual_certificate_tight_on_triangle():
    res = solve_elliptope_max(cycle_graph(3), -np.ones(3))
    cert = dual_certificate(cycle_graph(3), -np.ones(3), res.config)
    assert cert.dual_bound == pytest.approx(1.5, abs=1e-6)


@pytest.mark.parametrize("seed", range(100))
def test_dual_certificate_on_k4(seed):
    rng = np.random.default_rng(seed)
    g = complete_graph(4)
    w = rng.normal(size=6)
    res = solve_elliptope_max(g, w, seed=seed)
    assert res.dual_bound >= res.value - 1e-12
    assert res.converged and res.certificate_gap <= 1e-5


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_weak_duality_between_unrelated_configurations(seed):
    # the certificate computed at one configuration bounds the objective of any other
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 8)))
    w = rng.normal(size=g.m)
    cert = dual_certificate(g, w, random_config(rng, g.n, 3))
    for _ in range(5):
        assert objective(g, w, random_config(rng, g.n, g.n)) <= cert.dual_bound + 1e-9


# ---------------------------------------------------------------------------
# Max-cut relaxation and block embedding


def test_gw_sdp_examples():
    assert gw_sdp(cycle_graph(5), np.ones(5)) == pytest.approx(1.25 * (2 + 2 * math.cos(math.pi / 5)), abs=1e-7)
    assert gw_sdp(cycle_graph(5), np.zeros(5)) == 0
    assert gw_sdp(Graph(2, ((1, 2),)), [1.0]) == pytest.approx(1.0, abs=1e-9)


def test_block_embedding_examples():
    for a, expected in [(np.eye(2), 2.0), (np.ones((2, 2)), 4.0)]:
        b = block_embedding(a)
        assert matrix_pm1_max(b) == pytest.approx(expected) == matrix_pm1_max(a)
        assert matrix_elliptope_max(b)[0] == pytest.approx(expected, abs=1e-7)
        assert matrix_elliptope_max(a)[0] == pytest.approx(expected, abs=1e-7)


def test_block_embedding_rejects_indefinite_input():
    with pytest.raises(InvalidInput, match="semidefinite"):
        block_embedding(np.array([[1.0, 2.0], [2.0, 1.0]]))


@pytest.mark.parametrize("seed", range(10))
def test_block_embedding_random_psd(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 4))
    a = m @ m.T
    b = block_embedding(a)
    assert matrix_pm1_max(b) == pytest.approx(matrix_pm1_max(a), rel=1e-12)
    assert matrix_elliptope_max(b)[0] == pytest.approx(matrix_elliptope_max(a)[0], abs=1e-5)


def test_matrix_pm1_max_by_enumeration():
    rng = np.random.default_rng(5)
    a = rng.integers(-3, 4, (5, 5))
    a = a + a.T
    best = max(np.array(x) @ a @ np.array(x) for x in itertools.product([-1, 1], repeat=5))
    assert matrix_pm1_max(a) == best


# ---------------------------------------------------------------------------
# Circulants and the reduced clique-web program


@pytest.mark.parametrize("p", range(3, 12))
def test_circulant_eigenvalues_match_dense(p):
    rng = np.random.default_rng(p)
    c = rng.uniform(-1, 1, p // 2)
    full = np.concatenate(([1.0], c))
    idx = np.arange(p)
    dist = np.minimum(np.abs(idx[:, None] - idx[None, :]), p - np.abs(idx[:, None] - idx[None, :]))
    dense = full[dist]
    assert np.allclose(np.sort(circulant_eigenvalues(p, c)), np.linalg.eigvalsh(dense), atol=1e-10)


def test_web_band_sizes():
    # W^1_5: band 2 only; W^1_6: bands 2 and 3, the diameter band has 3 edges
    assert web_band_sizes(2, 1) == {2: 5}
    assert web_band_sizes(3, 1) == {2: 6, 3: 3}
    for q, r in [(2, 2), (3, 2), (4, 3)]:
        assert sum(web_band_sizes(q, r).values()) == cliqueweb_support(q, r).m - q * (q - 1) // 2 - q * (q + 2 * r + 1)


def reduced_points(q, r):
    """Random points of the reduced program, some feasible, some not."""
    p = q + 2 * r + 1

    @st.composite
    def build(draw):
        beta = draw(st.floats(0, 1))
        b = draw(st.floats(-1, 1))
        c = np.array(draw(st.lists(st.floats(-1, 1), min_size=p // 2, max_size=p // 2)))
        return ReducedCliqueWebPoint(q, r, beta, b, c)

    return build()


@pytest.mark.parametrize("q,r", [(2, 1), (3, 1), (4, 0)])
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_reduced_point_feasibility_is_psd_of_the_full_matrix(q, r, data):
    pt = data.draw(reduced_points(q, r))
    eig = np.linalg.eigvalsh(pt.gram()).min()
    if pt.is_feasible(tol=1e-9):
        assert eig >= -1e-7
    elif eig > 1e-7:
        pytest.fail(f"PSD point reported infeasible: {pt}")


@pytest.mark.parametrize("q,r", [(2, 1), (3, 2), (4, 1)])
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_reduced_objective_is_the_edge_sum(q, r, data):
    pt = data.draw(reduced_points(q, r))
    g = cliqueweb_support(q, r)
    x = pt.gram()
    assert pt.objective() == pytest.approx(-sum(x[i - 1, j - 1] for i, j in g.edges), abs=1e-9)


@pytest.mark.parametrize("p", [5, 7, 9, 11, 15])
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_band_values_respect_odd_cycle_bound(p, data):
    # any PSD circulant: sample nonnegative eigenvalues symmetric under k -> p-k summing to p
    weights = st.one_of(st.just(0.0), st.floats(1e-3, 1))
    half = np.array(data.draw(st.lists(weights, min_size=p // 2 + 1, max_size=p // 2 + 1)))
    if half.sum() == 0:
        return
    lam = np.empty(p)
    lam[: p // 2 + 1] = half
    lam[p // 2 + 1 :] = half[1 : (p + 1) // 2][::-1]
    lam *= p / lam.sum()
    k = np.arange(p)
    c = np.array([(lam * np.cos(2 * math.pi * k * s / p)).sum() / p for s in range(1, p // 2 + 1)])
    pt = ReducedCliqueWebPoint(2, (p - 3) // 2, 0.0, 0.0, c)
    assert pt.is_feasible(tol=1e-9)
    for s in range(1, p // 2 + 1):
        length = len(band_circuits(p, s)[0])
        if length % 2:
            assert c[s - 1] >= -math.cos(math.pi / length) - 1e-9


def bicycle(p):
    gamma = math.cos(math.pi / p)
    return -1 + p * (gamma + 1 / (gamma + 1))


def test_reduced_examples():
    assert solve_cliqueweb_reduced(2, 1).value == pytest.approx(5.8090170, abs=1e-7)
    assert solve_cliqueweb_reduced(2, 2).value == pytest.approx(bicycle(7), abs=1e-9)
    assert solve_cliqueweb_reduced(2, 2).value == pytest.approx(8.98911487, abs=1e-8)


@pytest.mark.parametrize("q,r", [(q, r) for q in (2, 3, 4) for r in range(4)])
def test_reduced_matches_full_solver(q, r):
    red = solve_cliqueweb_reduced(q, r)
    g = cliqueweb_support(q, r)
    full = solve_elliptope_max(g, -np.ones(g.m), seed=0)
    assert red.value == pytest.approx(full.value, abs=1e-5)
    assert red.point.is_feasible(tol=1e-9)
    assert np.linalg.eigvalsh(red.point.gram()).min() >= -1e-9
    assert red.point.objective() == pytest.approx(red.value, abs=1e-9)


@pytest.mark.parametrize("q,r", [(2, 1), (3, 1), (4, 2), (5, 0)])
def test_symmetrization_keeps_the_objective(q, r):
    g = cliqueweb_support(q, r)
    res = solve_elliptope_max(g, -np.ones(g.m), seed=1)
    pt = reduce_gram(res.config.gram(), q, r)
    assert pt.objective() == pytest.approx(res.value, abs=1e-9)
    assert pt.is_feasible(tol=1e-9)


@pytest.mark.parametrize("q,r", [(2, 0), (3, 0), (2, 1), (3, 2)])
def test_averaging_over_the_group_by_hand(q, r):
    # explicit Sym(q) x Cyclic(p) orbit average of a random correlation matrix
    p = q + 2 * r + 1
    rng = np.random.default_rng(q * 10 + r)
    u = rng.normal(size=(p + q, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    x = u @ u.T
    acc = np.zeros_like(x)
    count = 0
    for perm in itertools.permutations(range(q)):
        for shift in range(p):
            order = list(perm) + [q + (j + shift) % p for j in range(p)]
            acc += x[np.ix_(order, order)]
            count += 1
    avg = acc / count
    assert np.allclose(reduce_gram(x, q, r).gram(), avg, atol=1e-12)


def test_closed_bounds_branches():
    b = cliqueweb_closed_bounds(5, 2)
    assert b["gap_bound"] == 2 and b["ratio_trbound"] == pytest.approx(1 + 25 / 30)
    b = cliqueweb_closed_bounds(2, 1)
    assert b["gap_bound"] == 3
    gamma = math.cos(math.pi / 5)
    assert b["branches"]["interior"] == pytest.approx(5 * (gamma + 1 / (gamma + 1)) - 1)
    assert b["sdp_case_bound"] == pytest.approx(5.809017, abs=1e-6)
    assert cliqueweb_closed_bounds(3, 2)["gamma"] == 1.0


@pytest.mark.parametrize("q,r", [(q, r) for q in range(2, 7) for r in range(4)])
def test_reduced_value_below_closed_bounds(q, r):
    b = cliqueweb_closed_bounds(q, r)
    value = solve_cliqueweb_reduced(q, r).value
    assert value <= b["sdp_trbound"] + 1e-9
    if q <= 2 * r:
        assert value <= b["sdp_case_bound"] + 1e-9


def test_reduced_rejects_bad_parameters():
    with pytest.raises(InvalidInput):
        solve_cliqueweb_reduced(1, 0)
    with pytest.raises(InvalidInput):
        solve_cliqueweb_reduced(2, -1)
