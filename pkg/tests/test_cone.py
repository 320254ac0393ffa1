import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bensonvs.cone import cone_from_dict, make_cone, natural_cone
from bensonvs.errors import DimMismatch, EmptyInterior, NotInterior, RankDeficient

SKEW = np.array([[1.0, 0.6], [0.0, 0.8]])  # columns (1,0) and (3/5,4/5)


def test_skew_cone_primal_generators():
    cone = make_cone(SKEW)
    D = cone.D
    expected = [np.array([0.0, 1.0]), np.array([4.0, -3.0]) / 5]
    for e in expected:
        assert min(np.linalg.norm(D[:, j] - e) for j in range(D.shape[1])) < 1e-12
    # membership sampling agrees with the generator description
    rng = np.random.default_rng(0)
    for x in rng.normal(size=(500, 2)):
        inside = bool((cone.Z.T @ x >= 0).all())
        coef = np.linalg.solve(D, x)
        assert inside == bool((coef >= -1e-12).all())


def test_order_and_interior_examples():
    cone = make_cone(SKEW)
    assert not cone.leq([0, 0], [1, -1])
    assert cone.leq([0, 0], [1, 1])
    assert cone.in_interior([1, 1])
    assert not cone.in_interior([0, 1])
    assert cone.in_dual([1, 0]) and not cone.in_dual([0, -1])


def test_infimizer_constant_examples():
    cone = make_cone(SKEW)
    assert cone.infimizer_constant(np.ones(2) / np.sqrt(2)) == pytest.approx(np.sqrt(2), rel=1e-12)
    assert natural_cone(3).infimizer_constant(np.ones(3) / np.sqrt(3)) == pytest.approx(np.sqrt(3))
    with pytest.raises(NotInterior):
        natural_cone(2).infimizer_constant(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        natural_cone(2).infimizer_constant(np.array([1.0, 1.0]))


@pytest.mark.parametrize(
    "Z, err",
    [
        (np.array([[1.0], [0.0]]), RankDeficient),
        (np.array([[1.0, -1.0], [0.0, 0.0]]), RankDeficient),
        (np.array([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]]), EmptyInterior),
        (np.array([[1.0]]), DimMismatch),
    ],
)
def test_invalid_cones(Z, err):
    with pytest.raises(err):
        make_cone(Z)


def test_dimension_checks():
    with pytest.raises(DimMismatch):
        natural_cone(2).leq([0, 0, 0], [1, 1, 1])


def test_round_trip():
    for cone in (natural_cone(3), make_cone(SKEW)):
        back = cone_from_dict(cone.to_dict())
        assert np.allclose(back.Z, cone.Z) and np.allclose(back.D, cone.D)
    assert natural_cone(4).is_natural and not make_cone(SKEW).is_natural


cones = st.integers(2, 4).flatmap(
    lambda q: st.lists(st.floats(0.05, 1), min_size=q * (q + 1), max_size=q * (q + 1)).map(
        lambda v: np.eye(q, q + 1) + 0.5 * np.array(v).reshape(q, q + 1)
    )
)


@settings(max_examples=40, deadline=None)
@given(cones)
def test_duality_round_trip(Z):
    cone = make_cone(Z)
    assert (cone.Z.T @ cone.D >= -1e-9).all()
    # dualizing twice returns the extreme columns of Z; redundant columns stay inside
    back = make_cone(cone.D)
    for d in back.D.T:
        assert min(np.linalg.norm(cone.Z - d[:, None], axis=0)) < 1e-7
    for z in cone.Z.T:
        assert (back.Z.T @ z >= -1e-9).all()


@settings(max_examples=60, deadline=None)
@given(cones, st.integers(0, 2**31))
def test_order_is_transitive_and_reflexive(Z, seed):
    cone = make_cone(Z)
    rng = np.random.default_rng(seed)
    x = rng.normal(size=cone.dim)
    y = x + cone.D @ rng.random(cone.D.shape[1])
    z = y + cone.D @ rng.random(cone.D.shape[1])
    assert cone.leq(x, x)
    assert cone.leq(x, y) and cone.leq(y, z) and cone.leq(x, z)
    c = cone.interior_direction()
    assert cone.in_interior(c)
    assert cone.infimizer_constant(c) >= 1.0 - 1e-12
