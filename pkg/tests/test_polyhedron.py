from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bensonvs._dd import extreme_rays
from bensonvs.cone import natural_cone
from bensonvs.errors import DimMismatch, EmptyResult, Infeasible, UnboundedBelow
from bensonvs.polyhedron import Halfspace, InnerPolyhedron, Polyhedron


def brute_vertices(W, g):
    q = W.shape[1]
    out = []
    for S in combinations(range(len(W)), q):
        A = W[list(S)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        y = np.linalg.solve(A, g[list(S)])
        if (W @ y - g >= -1e-9).all() and not any(np.linalg.norm(y - o) < 1e-8 for o in out):
            out.append(y)
    return np.array(out)


def same_rows(A, B, tol=1e-9):
    return len(A) == len(B) and all(np.min(np.linalg.norm(B - a, axis=1)) < tol for a in A)


def test_two_dimensional_example():
    hs = [Halfspace.make([1, 0], 0), Halfspace.make([0, 1], 0), Halfspace.make([1, 1], 1)]
    P = Polyhedron.from_halfspaces(hs, natural_cone(2))
    assert same_rows(P.vertices(), np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert same_rows(P.rays(), np.eye(2))
    assert P.contains([2, 2]) and not P.contains([0.2, 0.2])


def _box_corner():
    return Polyhedron.from_halfspaces(
        [Halfspace.make(e, g) for e, g in zip(np.eye(3), [0.0, -6.0, -4.0])], natural_cone(3)
    )


def test_corner_cut_creates_one_vertex_per_edge():
    P = _box_corner()
    assert same_rows(P.vertices(), np.array([[0.0, -6.0, -4.0]]))
    w = np.array([1.0, 1 / 49, 1 / 25])
    h = Halfspace.make(w, w @ np.full(3, 0.0289))
    rep = P.add_halfspace(h)
    assert rep.cut == [0] and rep.kept == [] and len(rep.new) == 3
    W = np.vstack([np.eye(3), h.w])
    g = np.array([0.0, -6.0, -4.0, h.gamma])
    assert same_rows(P.vertices(), brute_vertices(W, g))
    # new vertices lie on the edges leaving the old corner
    for v in P.vertices():
        d = v - np.array([0.0, -6.0, -4.0])
        assert np.count_nonzero(np.abs(d) > 1e-12) == 1


def test_redundant_cut_is_dropped():
    P = _box_corner()
    rep = P.add_halfspace(Halfspace.make([1, 1, 1], -100))
    assert rep.redundant and rep.kept == [0] and len(P.halfspaces) == 3


def test_ids_are_stable():
    P = _box_corner()
    P.add_halfspace(Halfspace.make([1, 1, 1], -9))
    before = {int(i): P.vertex(int(i)) for i in P.vertex_ids()}
    rep = P.add_halfspace(Halfspace.make([0, 1, 0], -5.5))
    for vid in rep.kept:
        assert np.allclose(P.vertex(vid), before[vid])
    with pytest.raises(KeyError):
        P.vertex(rep.cut[0])


def test_errors():
    with pytest.raises(UnboundedBelow):
        Polyhedron.from_halfspaces([Halfspace.make([1, 0], 0)])
    with pytest.raises(Infeasible):
        Polyhedron.from_halfspaces([Halfspace.make([1, 0], 1), Halfspace.make([-1, 0], 0), Halfspace.make([0, 1], 0)])
    with pytest.raises(DimMismatch):
        _box_corner().add_halfspace(Halfspace.make([1, 0], 0))
    P = Polyhedron.from_halfspaces([Halfspace.make([1, 0], 0), Halfspace.make([0, 1], 0), Halfspace.make([-1, 0], -1), Halfspace.make([0, -1], -1)])
    with pytest.raises(EmptyResult):
        P.add_halfspace(Halfspace.make([1, 1], 5))


def test_extreme_rays_of_orthant():
    R = extreme_rays(np.eye(3))
    assert same_rows(R, np.eye(3))


def test_inner_polyhedron():
    I = InnerPolyhedron([[-1.0, 0.0], [0.0, -1.0]], natural_cone(2))
    assert len(I) == 2
    assert not I.add_point([0.0, 0.0])  # dominated
    assert not I.add_point([-1.0, 1e-9])  # duplicate
    assert I.add_point([-0.8, -0.8])
    assert I.contains([-0.5, -0.5]) and not I.contains([-1, -1])
    hs = I.to_halfspaces()
    for y in np.random.default_rng(0).normal(size=(300, 2)):
        assert I.contains(y, tol=1e-9) == all(h.slack(y) >= -1e-9 for h in hs)
    with pytest.raises(ValueError):
        I.add_point([np.nan, 0])


halfspace_systems = st.integers(2, 4).flatmap(
    lambda q: st.tuples(
        st.just(q),
        st.lists(st.tuples(st.lists(st.floats(0.0, 1.0), min_size=q, max_size=q), st.floats(-2, 2)), min_size=1, max_size=8),
    )
)


@settings(max_examples=60, deadline=None)
@given(halfspace_systems)
def test_dd_matches_enumeration_incrementally(system):
    q, extra = system
    cone = natural_cone(q)
    hs = [Halfspace.make(e, -1.0) for e in np.eye(q)]
    P = Polyhedron.from_halfspaces(hs, cone)
    for w, g in extra:
        w = np.asarray(w) + 1e-3
        h = Halfspace.make(w, g)
        try:
            P.add_halfspace(h)
        except EmptyResult:  # cannot happen for normals in the dual cone
            raise
        hs.append(h)
    W = np.array([h.w for h in hs])
    gam = np.array([h.gamma for h in hs])
    assert same_rows(P.vertices(), brute_vertices(W, gam), tol=1e-7)
    # every vertex satisfies all halfspaces, and incidence is consistent
    Wk, gk = P.halfspace_arrays()
    S = P.vertices() @ Wk.T - gk
    assert (S >= -1e-9).all()
    assert ((np.abs(S) < 1e-7) == P.incidence()).all()
