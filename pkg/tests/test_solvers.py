import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bensonvs.cone import natural_cone
from bensonvs.errors import Infeasible
from bensonvs.instances import make_disk, make_ellipsoid, make_truss
from bensonvs.problem import VCP, affine, compile_p1, compile_p2, compile_probe
from bensonvs.solvers import derive_dual_weight, kkt_residuals, phase1, project_onto_inner, solve
from bensonvs.vselect import project_bruteforce


def bisect_diagonal(radii, center, lo=0.0, hi=1.0):
    """Largest t with (t,...,t) outside the upper image, i.e. the diagonal entry point."""
    def inside(t):
        return np.sum((np.minimum(t - center, 0) / radii) ** 2) <= 1
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if inside(mid) else (mid, hi)
    return hi


def test_p1_axis_tangency():
    vcp = make_ellipsoid(7)
    sol = solve(compile_p1(vcp, [1, 0, 0]))
    assert np.allclose(sol.x, [0, 1, 1], atol=1e-6)
    assert sol.value == pytest.approx(0, abs=1e-7)
    # stationarity: gradient of the constraint is parallel to e1 at x
    grad = np.array([2 * (sol.x[0] - 1), 2 * (sol.x[1] - 1) / 49, 2 * (sol.x[2] - 1) / 25])
    assert abs(grad[1]) + abs(grad[2]) < 1e-6


def test_p2_ellipsoid_diagonal():
    vcp = make_ellipsoid(7)
    c = np.ones(3)
    sp = compile_p2(vcp, np.zeros(3), c)
    sol = solve(sp)
    z_ref = bisect_diagonal(np.array([1, 7, 5.0]), np.ones(3))
    assert z_ref == pytest.approx(1 - (1 + 1 / 49 + 1 / 25) ** -0.5, abs=1e-12)
    assert sol.z == pytest.approx(z_ref, abs=1e-7)
    assert np.allclose(sol.x, sol.z, atol=1e-6)
    w = derive_dual_weight(sol, vcp.cone, c)
    assert np.allclose(w, [0.943033, 0.019246, 0.037721], atol=1e-6)
    assert w @ c == pytest.approx(1)
    res = kkt_residuals(sp, sol)
    assert res["stationarity"] < 1e-6 and res["feasibility"] < 1e-8 and res["dual_sign"] == 0
    # supporting hyperplane: no sampled image point lies below it
    rng = np.random.default_rng(0)
    from bensonvs.instances import oracle_for

    Y = oracle_for(vcp).sample(5000, rng)
    assert np.min(Y @ w) >= sol.z - 1e-9


def test_p2_disk():
    vcp = make_disk()
    c = np.ones(2) / np.sqrt(2)
    sol = solve(compile_p2(vcp, [-1, -1], c))
    assert sol.z == pytest.approx(np.sqrt(2) - 1, abs=1e-7)
    w = derive_dual_weight(sol, vcp.cone, c)
    assert np.allclose(w, np.ones(2) / np.sqrt(2), atol=1e-7)


def test_lp_path_matches_expected():
    vcp = make_truss()
    sp = compile_p1(vcp, [1, 0, 0, 0])
    assert sp.kind == "LP"
    sol = solve(sp)
    assert np.all(vcp.g(sol.x) <= 1e-6)
    assert vcp.F(sol.x)[0] == pytest.approx(sol.value, abs=1e-8)


def test_phase1_cases():
    box = VCP(2, natural_cone(2), [affine([1, 0]), affine([0, 1])], box=(np.zeros(2), np.ones(2)))
    y = phase1(compile_probe(box, np.zeros(2)))
    assert np.all((y[:2] > 0) & (y[:2] < 1))
    bad = VCP(1, natural_cone(2), [affine([1]), affine([-1])], [(affine([-1]), -1.0), (affine([1]), 0.0)])
    with pytest.raises(Infeasible):
        phase1(compile_probe(bad, np.zeros(1)))


def test_projection_example():
    V = np.array([[0, 1, 1], [1, -6, 1], [1, 1, -4.0]]).T
    s = np.array([0, -6, -4.0])
    pr = project_onto_inner(V, np.eye(3), s)
    p_ref, d_ref = project_bruteforce(V, np.eye(3), s)
    assert pr.dist == pytest.approx(d_ref, abs=1e-10)
    assert np.allclose(pr.point, p_ref, atol=1e-10)
    assert pr.lam.sum() == pytest.approx(1) and (pr.lam >= 0).all() and (pr.mu >= 0).all()


def test_projection_symmetric():
    pr = project_onto_inner(np.array([[-1.0, 0.0], [0.0, -1.0]]), np.eye(2), np.array([-1.0, -1.0]))
    assert pr.dist == pytest.approx(np.sqrt(0.5)) and np.allclose(pr.point, [-0.5, -0.5])


points = st.integers(2, 4).flatmap(
    lambda q: st.tuples(st.integers(1, 6), st.integers(0, 2**31)).map(lambda t: (q, *t))
)


@settings(max_examples=80, deadline=None)
@given(points)
def test_projection_nonexpansive_and_optimal(args):
    q, k, seed = args
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(q, k))
    D = np.eye(q)
    s, t = rng.normal(size=(2, q)) * 2
    ps, pt = project_onto_inner(V, D, s), project_onto_inner(V, D, t)
    assert np.linalg.norm(ps.point - pt.point) <= np.linalg.norm(s - t) + 1e-9
    # variational inequality against every generator direction
    for v in V.T:
        assert (s - ps.point) @ (v - ps.point) <= 1e-9
    for d in D.T:
        assert (s - ps.point) @ d <= 1e-9
    # warm start from a perturbed point returns the same answer
    warm = project_onto_inner(V, D, s, warm=(pt.lam, pt.mu))
    assert np.allclose(warm.point, ps.point, atol=1e-9)
