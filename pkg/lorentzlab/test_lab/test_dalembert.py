import numpy as np
import pytest

from lorentzlab import dalembert, models
from lorentzlab.curvature import PAST
from lorentzlab.errors import (DomainError, ParameterError, PreconditionError,
                               UnsupportedDualityError)
from lorentzlab.models import Bump
from lorentzlab.transport import DiscreteMeasure

O = [1.0, 0.0]
SAMPLES = np.array([[0.0, 0.0], [0.2, 0.1], [0.3, -0.2], [0.5, 0.4]])


@pytest.fixture
def phi():
    return Bump([0.0, 0.0], 0.25)


def test_dalembert_argument_errors(phi):
    with pytest.raises(UnsupportedDualityError):
        dalembert.dalembert_verify(2, O, 0.5, -1.0, 0.0, 2.0, phi, family='hyperbolic_lp')
    with pytest.raises(ParameterError):
        dalembert.dalembert_verify(2, O, 0.5, 0.5, 0.0, 2.0, phi)
    with pytest.raises(ParameterError):
        dalembert.dalembert_verify(2, O, 3.0, None, 0.0, 2.0, phi, variant=dalembert.DISTANCE)
    with pytest.raises(ParameterError):
        dalembert.dalembert_verify(2, O, 0.5, -1.0, 0.0, 2.0, phi, direction='sideways')
    with pytest.raises(PreconditionError):
        dalembert.dalembert_verify(2, O, 0.5, -1.0, 0.0, 2.0, Bump([0.0, 0.0], 0.25, amplitude=-1.0))


def test_support_outside_the_cone(phi):
    with pytest.raises(PreconditionError):
        dalembert.dalembert_verify(2, [0.1, 0.0], 0.5, -1.0, 0.0, 2.0, phi)
    with pytest.raises(PreconditionError):
        dalembert.dalembert_verify(2, O, 0.5, -1.0, 0.0, 2.0, phi, direction=PAST)


def test_negative_curvature_bound(phi):
    report = dalembert.dalembert_verify(2, O, 0.5, -1.0, -1.0, 2.0, phi)
    assert report.check('inequality').passed()
    assert report.check('vertical quotient').passed()
    assert report.defect > 0
    assert [row['resolution'] for row in report.refinement_table] == [8, 16, 32]
    assert 'sharpness' not in [c.name for c in report.checks]


def test_flat_comparison_is_sharp(phi):
    report = dalembert.dalembert_verify(2, O, 0.5, -1.0, 0.0, 2.0, phi)
    assert report.check('inequality').passed()
    assert report.values['relative_defect'] <= 0.02
    assert 'sharpness' in [c.name for c in report.checks]


def test_past_direction(phi):
    report = dalembert.dalembert_verify(2, [-1.0, 0.0], 0.5, -1.0, -1.0, 2.0, phi, direction=PAST)
    assert report.check('inequality').passed()
    assert report.values['direction'] == PAST


def test_distance_variant(phi):
    report = dalembert.dalembert_verify(2, O, 0.5, None, -1.0, 2.0, phi, variant=dalembert.DISTANCE)
    assert report.check('inequality').passed()
    assert 'vertical quotient' not in [c.name for c in report.checks]


def test_vertical_quotient(phi):
    model = models.MinkowskiModel(2)
    f = models.potential_to(model, O, -1.0)
    X = np.array([[0.05, -0.1], [0.1, 0.1], [-0.2, 0.02]])
    cross = dalembert.vertical_quotient(model, f, phi, 0.5, X=X)
    assert cross['quotients'].shape == (3, 3)
    assert cross['limit'] == pytest.approx(cross['analytic'], rel=1e-4, abs=1e-6)
    with pytest.raises(ParameterError):
        dalembert.vertical_quotient(model, f, phi, 0.0, X=X)
    with pytest.raises(ParameterError):
        dalembert.vertical_quotient(model, f, phi, 0.5, eps_schedule=[1e-4], X=X)


@pytest.mark.parametrize('dim,q', [(2, 0.5), (3, -1.0), (4, 0.25)])
def test_metric_brenier_model(dim, q, rng):
    o = np.eye(dim)[0]
    X = o[None, :] - 0.5 * np.eye(dim)[0][None, :] + 0.1 * rng.uniform(-1.0, 1.0, (8, dim)) * \
        np.concatenate([[0.0], np.ones(dim - 1)])[None, :]
    report = dalembert.metric_brenier_check(dim, X, o, q)
    assert report.passed()
    assert report.values['numeric_max_relative_deviation'] < 1e-6
    assert len(report.tables['rays']) == 8


def test_metric_brenier_model_outside_the_past():
    with pytest.raises(DomainError):
        dalembert.metric_brenier_model(2, [[1.0, 0.0]], O, 0.5)
    with pytest.raises(ParameterError):
        dalembert.metric_brenier_model(2, [[0.0, 0.0]], O, 1.0)


def test_metric_brenier_grid(small_grid):
    o = small_grid.grid.nearest_index([0.9375, 0.0625])
    x = small_grid.grid.nearest_index([0.4375, 0.0625])
    report = dalembert.metric_brenier_check(small_grid, DiscreteMeasure.dirac(small_grid.n_points, x), o, 0.5)
    assert report.passed()
    assert report.values['l_min'] == pytest.approx(0.5)
    assert [row[0] for row in report.tables['levels']] == [4, 8, 16]
    with pytest.raises(DomainError):
        dalembert.metric_brenier_grid(small_grid, DiscreteMeasure.dirac(small_grid.n_points, o), o, 0.5)


def test_calculus_rules():
    model = models.MinkowskiModel(2)
    f = models.time_coordinate(model)
    g = models.distance_from(model, [-1.0, 0.0])
    report = dalembert.calculus_rules_check(2, f, g, SAMPLES,
                                            phi=(np.arctan, lambda s: 1.0 / (1.0 + s * s)))
    assert [c.name for c in report.checks] == ['concavity', 'homogeneity', 'leibniz', 'chain rule',
                                               'parallelogram identity']
    assert report.passed()
    assert report.values['concavity_gap_min'] >= -1e-10


def test_calculus_rules_errors():
    model = models.MinkowskiModel(2)
    f = models.time_coordinate(model)
    with pytest.raises(PreconditionError):
        dalembert.calculus_rules_check(2, f, models.scale(-1.0, f), SAMPLES)
    with pytest.raises(ParameterError):
        dalembert.calculus_rules_check(2, f, f, SAMPLES, lam=(-1.0, 1.0))
