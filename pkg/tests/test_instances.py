import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bensonvs.errors import BadParameter, BadShape, OracleUnavailable, SingularStiffness
from bensonvs.instances import (
    TrussParams, assemble_truss, make_elastic_net, make_ellipsoid, make_instance, make_truss, oracle_for, standardize,
)


def test_truss_shape():
    vcp = make_truss()
    assert (vcp.n, vcp.q, len(vcp.constraints)) == (8, 4, 20)
    assert vcp.eq[0].shape == (1, 8) and vcp.eq[1][0] == 150000.0
    assert vcp.box is None
    assert make_truss(TrussParams(nonneg_loads=True)).box is not None


def test_truss_stiffness_properties():
    t = assemble_truss()
    assert np.allclose(t.K, t.K.T)
    assert np.linalg.eigvalsh(t.K).min() > 0


def test_truss_load_splits():
    vcp = make_truss()
    one = np.zeros(8)
    one[7] = 150000.0  # everything on the last free node, vertical
    spread = np.zeros(8)
    spread[1::2] = 150000.0 / 4
    for p in (one, spread):
        d = np.linalg.solve(assemble_truss().K, p)
        F = vcp.F(p)
        assert np.allclose(F, [np.abs(d[2 * i : 2 * i + 2]).max() for i in range(4)])
    assert not np.allclose(vcp.F(one), vcp.F(spread))
    assert (vcp.g(spread) <= 0).all()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_truss_linearity(seed):
    t = assemble_truss()
    rng = np.random.default_rng(seed)
    p1, p2 = rng.normal(size=(2, 8)) * 1e4
    a = rng.normal()
    assert np.allclose(t.stresses(a * p1 + p2), a * t.stresses(p1) + t.stresses(p2), atol=1e-6)
    assert np.allclose(t.K @ t.displacements(p1), p1)


def test_truss_mirror_symmetry():
    """Mirroring about the mid-height axis flips vertical loads and swaps node pairs."""
    t = assemble_truss()
    rng = np.random.default_rng(3)
    p = rng.normal(size=8)
    # free nodes 2,3,4,5 -> pairs (2,3) and (4,5) swap; vertical components change sign
    perm = [2, 3, 0, 1, 6, 7, 4, 5]
    flip = np.array([1, -1] * 4, dtype=float)
    mp = flip * p[perm]
    d, dm = t.displacements(p), t.displacements(mp)
    assert np.allclose(dm, flip * d[perm], atol=1e-12)


def test_truss_bad_params():
    with pytest.raises(BadParameter):
        assemble_truss(TrussParams(radius=0))
    import bensonvs.instances as inst

    saved = inst.TRUSS_MEMBERS
    try:
        inst.TRUSS_MEMBERS = saved[:4]
        with pytest.raises(SingularStiffness):
            inst.assemble_truss()
    finally:
        inst.TRUSS_MEMBERS = saved


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(1, 8), st.integers(0, 1000))
def test_enet_scaling_invariants(m, n, seed):
    rng = np.random.default_rng(seed)
    A, b = standardize(rng.normal(size=(m, n)), rng.normal(size=m))
    assert abs(b.sum()) < 1e-10
    assert np.allclose(A.sum(axis=0), 0, atol=1e-10)
    assert np.allclose((A**2).sum(axis=0), 1)


def test_enet_errors_and_shape():
    with pytest.raises(BadShape):
        make_elastic_net(1, 3)
    vcp = make_elastic_net(20, 50, 1)
    assert (vcp.n, vcp.q) == (50, 3)


def test_ellipsoid_oracle():
    with pytest.raises(BadParameter):
        make_ellipsoid(-1)
    oracle = oracle_for(make_ellipsoid(7))
    rng = np.random.default_rng(0)
    Y = oracle.sample_boundary(400, rng)
    assert np.allclose(oracle.level(Y), 1)
    assert oracle.contains(Y[0] + 0.1) and not oracle.contains(Y[0] - 0.1)
    assert (oracle.level(oracle.sample(400, rng)) <= 1 + 1e-12).all()
    with pytest.raises(OracleUnavailable):
        oracle_for(make_truss())


def test_make_instance_dispatch():
    assert make_instance("ellipsoid", a=5).meta["a"] == 5
    assert make_instance("truss", load=1000.0).eq[1][0] == 1000.0
    with pytest.raises(BadParameter):
        make_instance("cube")
