import math

import numpy as np
import pytest

from lorentzlab import models
from lorentzlab.errors import DomainError, ParameterError
from lorentzlab.models import Bump, MinkowskiModel

POINTS = np.array([[0.0, 0.0], [0.2, 0.1], [0.3, -0.2], [0.5, 0.4]])


@pytest.fixture
def plane():
    return MinkowskiModel(2)


def test_model_errors(plane):
    with pytest.raises(ParameterError):
        MinkowskiModel(1)
    with pytest.raises(DomainError):
        plane.points([[0.0, 0.0, 0.0]])


def test_separation(plane):
    ell = plane.ell([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    assert ell[0] == pytest.approx(1.0)
    assert ell[1] == pytest.approx(0.0)
    assert ell[2] == -np.inf
    assert plane.chronological([[0.0, 0.0]], [[1.0, 0.5]]).tolist() == [True]


def test_time_coordinate_has_unit_modulus(plane):
    t = models.time_coordinate(plane)
    assert t(POINTS).tolist() == POINTS[:, 0].tolist()
    assert models.modulus(plane, t, POINTS) == pytest.approx(np.ones(len(POINTS)))


def test_distance_functions(plane):
    o = [1.0, 0.0]
    g = models.distance_to(plane, o)
    assert g([[0.0, 0.0]])[0] == pytest.approx(-1.0)
    assert models.modulus(plane, g, POINTS) == pytest.approx(np.ones(len(POINTS)))
    assert g.domain([[2.0, 0.0]]).tolist() == [False]
    h = models.distance_from(plane, [-1.0, 0.0])
    assert h([[0.0, 0.0]])[0] == pytest.approx(1.0)
    assert models.modulus(plane, h, POINTS) == pytest.approx(np.ones(len(POINTS)))


@pytest.mark.parametrize('q', [0.5, -1.0])
def test_potentials(plane, q):
    o = np.array([1.0, 0.0])
    f = models.potential_to(plane, o, q)
    ell = plane.ell(POINTS, o[None, :])
    assert f(POINTS) == pytest.approx(-ell ** q / q)
    assert models.modulus(plane, f, POINTS) == pytest.approx(ell ** (q - 1.0))
    assert f([[2.0, 0.0]])[0] == np.inf
    numeric, err = models.numeric_differential(f, POINTS)
    assert numeric == pytest.approx(f.differential(POINTS), rel=1e-6, abs=1e-8)
    assert np.all(err < 1e-6)
    g = models.potential_from(plane, -o, q)
    assert g([[-2.0, 0.0]])[0] == -np.inf
    assert models.modulus(plane, g, POINTS) == pytest.approx(plane.ell(-o[None, :], POINTS) ** (q - 1.0))


def test_bump(plane):
    phi = Bump([0.0, 0.0], 0.25, amplitude=2.0)
    assert phi([[0.0, 0.0]])[0] == pytest.approx(2.0 * math.exp(-2.0))
    assert phi([[0.3, 0.0]])[0] == 0.0
    assert phi.support_box().tolist() == [[-0.25, 0.25], [-0.25, 0.25]]
    X = np.array([[0.05, -0.1], [0.1, 0.1], [-0.2, 0.02]])
    numeric, _ = models.numeric_differential(phi, X, h=1e-3)
    assert numeric == pytest.approx(phi.differential(X), rel=1e-6, abs=1e-9)
    assert Bump.from_dict({'center': [0.0, 0.0]}).radius.tolist() == [0.1, 0.1]
    with pytest.raises(ParameterError):
        Bump([0.0, 0.0], [0.1, -0.1])


def test_combinators(plane):
    t = models.time_coordinate(plane)
    h = models.distance_from(plane, [-1.0, 0.0])
    total = t + h
    assert total(POINTS) == pytest.approx(t(POINTS) + h(POINTS))
    product = models.mul(t, h)
    numeric, _ = models.numeric_differential(product, POINTS[1:])
    assert numeric == pytest.approx(product.differential(POINTS[1:]), rel=1e-6)
    composed = models.compose(np.arctan, lambda s: 1.0 / (1.0 + s * s), h, name='arctan')
    assert composed.name == 'arctan(l(o,.))'
    assert models.scale(3.0, t).differential(POINTS)[:, 0] == pytest.approx(np.full(4, 3.0))
