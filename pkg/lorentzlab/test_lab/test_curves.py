import math

import numpy as np
import pytest

from lorentzlab import curves
from lorentzlab.curves import SampledCausalPath
from lorentzlab.errors import NonMonotonePathError, ParameterError
from lorentzlab.input_helper import read_path
from lorentzlab.norms import HyperbolicNorm
from lorentzlab.utils import lq_cost

from lorentzlab.test_lab.conftest import data_file

ELL = math.sqrt(0.75)


@pytest.fixture
def plane():
    return HyperbolicNorm.standard_minkowski(2)


@pytest.fixture
def affine(plane):
    return read_path(data_file('affine_path.txt'), norm=plane)


@pytest.fixture
def bent(plane):
    return read_path(data_file('bent_path.txt'), norm=plane)


def test_affine_path_is_a_geodesic(affine):
    assert float(affine.endpoint_separation()) == pytest.approx(ELL)
    assert float(curves.length_ell(affine, depth=6)) == pytest.approx(ELL)
    report = curves.geodesic_check(affine, 0.5, depth=6)
    assert report.classification == 'timelike geodesic'
    assert not report.inconsistent
    assert all(report.conditions.values())


def test_bent_path_is_not_a_geodesic(bent):
    length = float(curves.length_ell(bent, depth=4))
    assert length == pytest.approx(math.sqrt(0.32) + math.sqrt(0.07))
    assert length < ELL
    report = curves.geodesic_check(bent, 0.5, depth=4)
    assert report.classification == 'not a geodesic'
    assert not report.conditions['rough geodesic']
    assert not report.conditions['action saturation']


@pytest.mark.parametrize('q', [0.5, -1.0, 0.75])
def test_action_of_affine_path(affine, q):
    expected = float(lq_cost(affine.endpoint_separation(), q))
    assert float(curves.q_action(affine, q, depth=6)) == pytest.approx(expected, rel=1e-9)
    density = curves.q_action(affine, q, curves.DENSITY_INTEGRAL, h_levels=(16, 64))
    assert float(density) == pytest.approx(expected, rel=1e-9)


def test_action_is_below_endpoint_cost_for_bent_path(bent):
    # for 0 < q < 1 the action of a non-geodesic falls short of l01**q / q
    assert float(curves.q_action(bent, 0.5, depth=4)) < float(lq_cost(bent.endpoint_separation(), 0.5))


def test_speed_of_affine_path(affine):
    profile = curves.causal_speed(affine, (16, 64))
    assert np.allclose(profile.abs_density, ELL)
    assert profile.singular_mass.sum() == pytest.approx(0.0, abs=1e-9)
    assert float(profile.total) == pytest.approx(ELL)
    assert [row['n'] for row in profile.table] == [16, 64]
    assert profile.cumulative()[-1] == pytest.approx(ELL)


def test_speed_sees_a_jump(chain):
    path = SampledCausalPath.from_spacetime(chain, [0.0, 0.5, 1.0], [0, 0, 8])
    profile = curves.causal_speed(path)
    assert profile.singular_mass.sum() == pytest.approx(8.0)
    assert profile.singular_mass[-1] == pytest.approx(8.0)
    assert profile.table[-1]['max_density'] == pytest.approx(0.0)
    assert profile.table[-1]['atom_mass'] == pytest.approx(8.0)


def test_discrete_geodesic(chain):
    path = SampledCausalPath.from_spacetime(chain, [0.0, 0.25, 0.5, 0.75, 1.0], [0, 2, 4, 6, 8])
    assert float(curves.q_action(path, 0.5)) == pytest.approx(2.0 * math.sqrt(8.0))
    assert float(curves.length_ell(path)) == pytest.approx(8.0)
    report = curves.geodesic_check(path, 0.5)
    assert report.classification == 'timelike geodesic'


def test_uneven_discrete_path_is_not_a_geodesic(chain):
    path = SampledCausalPath.from_spacetime(chain, [0.0, 0.5, 1.0], [0, 1, 8])
    report = curves.geodesic_check(path, 0.5)
    assert not report.conditions['constant speed']
    assert not report.conditions['rough geodesic']
    assert report.conditions['lower bound'] is False


def test_null_path():
    space = HyperbolicNorm.standard_minkowski(2)
    path = SampledCausalPath.from_coordinates(space, [0.0, 1.0], [[0.0, 0.0], [1.0, 1.0]])
    report = curves.geodesic_check(path, 0.5)
    assert report.classification == 'null'
    assert report.conditions['null']


def test_non_monotone_path_rejected(chain, plane):
    with pytest.raises(NonMonotonePathError):
        SampledCausalPath.from_spacetime(chain, [0.0, 0.5, 1.0], [4, 2, 8])
    with pytest.raises(NonMonotonePathError):
        SampledCausalPath.from_coordinates(plane, [0.0, 1.0], [[0.0, 0.0], [0.2, 1.0]])


def test_sample_time_errors(chain):
    with pytest.raises(ParameterError):
        SampledCausalPath.from_spacetime(chain, [0.0, 0.7, 0.5, 1.0], [0, 1, 2, 3])
    with pytest.raises(ParameterError):
        SampledCausalPath.from_spacetime(chain, [0.1, 1.0], [0, 1])
    with pytest.raises(ParameterError):
        SampledCausalPath.from_spacetime(chain, [0.0, 1.0], [0, 1, 2])


def test_uniform_partition_fraction(chain):
    path = SampledCausalPath.from_spacetime(chain, [0.0, 0.5, 1.0], [0, 4, 8])
    fraction = curves.uniform_partition_fraction(path, 0.5, 2)
    assert 0.0 <= fraction <= 1.0
    with pytest.raises(ParameterError):
        curves.uniform_partition_fraction(path, 0.5, 0)


def test_unknown_action_mode(affine):
    with pytest.raises(ParameterError):
        curves.q_action(affine, 0.5, mode='riemann')


def test_discrete_paths_default_to_their_sample_partition(chain):
    path = SampledCausalPath.from_spacetime(chain, [0.0, 0.25, 0.5, 0.75, 1.0], [0, 2, 4, 6, 8])
    assert len(curves.action_table(path, 0.5)) == 1
    # one refinement halves the interval carrying each jump of l = 2
    assert [float(row[2]) for row in curves.action_table(path, 0.5, depth=1)] == \
        pytest.approx([2.0 * math.sqrt(8.0), 4.0])
    assert float(curves.q_action(path, 0.5, depth=1)) == pytest.approx(4.0)


def test_quadratic_reparametrization_loses_action(plane):
    v = np.array([1.0, 0.5])
    path = SampledCausalPath.from_curve(plane, lambda t: t ** 2 * v)
    exact = 2.0 * math.sqrt(2.0 * ELL) * 2.0 / 3.0
    partition = float(curves.q_action(path, 0.5))
    density = float(curves.q_action(path, 0.5, curves.DENSITY_INTEGRAL))
    endpoint = float(lq_cost(path.endpoint_separation(), 0.5))
    assert endpoint == pytest.approx(1.86121, abs=1e-5)
    assert partition == pytest.approx(exact, abs=1e-4)
    assert density == pytest.approx(exact, abs=1e-4)
    assert endpoint - partition > 1e-4
    assert endpoint - density > 1e-4
    assert not curves.geodesic_check(path, 0.5, depth=8).conditions['action saturation']


@pytest.mark.parametrize('curve', [
    lambda t: t * np.array([1.0, 0.5]),
    lambda t: t ** 2 * np.array([1.0, 0.5]),
    lambda t: np.array([t + 0.1 * math.sin(math.pi * t), 0.3 * t]),
], ids=['affine', 'quadratic', 'wave'])
def test_uniform_partition_fraction_tends_to_one(plane, curve):
    path = SampledCausalPath.from_curve(plane, curve)
    fractions = [curves.uniform_partition_fraction(path, 0.5, n, depth=8) for n in (4, 2000)]
    assert fractions[0] <= fractions[1]
    assert fractions[1] == 1.0
