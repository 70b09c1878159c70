import math

import numpy as np
import pytest

from lorentzlab import norms
from lorentzlab.errors import DomainError, ParameterError, UnsupportedDualityError
from lorentzlab.norms import DualityParams, HyperbolicNorm


@pytest.fixture
def minkowski():
    return HyperbolicNorm.standard_minkowski(3)


def test_minkowski_values(minkowski):
    assert float(minkowski([2.0, 1.0, 0.0])) == pytest.approx(math.sqrt(3.0))
    assert minkowski([1.0, 1.0, 0.0]).value == 0.0
    assert minkowski([-2.0, 1.0, 0.0]).is_neg_inf()
    assert minkowski([0.5, 1.0, 0.0]).is_neg_inf()
    assert minkowski([0.0, 0.0, 0.0]).value == 0.0


def test_lp_values():
    norm = HyperbolicNorm.lp(3, 2)
    assert float(norm([2.0, 1.0])) == pytest.approx(7.0 ** (1.0 / 3.0))
    assert float(norm([2.0, -1.0])) == pytest.approx(7.0 ** (1.0 / 3.0))
    assert norm([1.0, 2.0]).is_neg_inf()
    with pytest.raises(ParameterError):
        HyperbolicNorm.lp(0.5, 2)


def test_vectorized_matches_scalar(minkowski, rng):
    V = norms.sample_future(minkowski, rng, 50)
    values = minkowski.values(V)
    assert np.all(values > 0)
    for v, value in zip(V[:5], values[:5]):
        assert float(minkowski(v)) == pytest.approx(value)


def test_dimension_mismatch(minkowski):
    with pytest.raises(DomainError):
        minkowski([1.0, 0.0])


def test_conjugate_exponents():
    params = DualityParams(0.5)
    assert params.p == pytest.approx(-1.0)
    assert DualityParams.from_p(-1.0).q == pytest.approx(0.5)
    assert DualityParams(-1.0).p == pytest.approx(0.5)
    for q in (0.0, 1.0, 2.0):
        with pytest.raises(ParameterError):
            DualityParams(q)


@pytest.mark.parametrize('q', [0.5, -1.0, 0.25])
def test_fenchel_young(minkowski, rng, q):
    params = DualityParams(q)
    V = norms.sample_future(minkowski, rng, 20)
    Z = norms.sample_future(minkowski, rng, 20)
    for v, z in zip(V, Z):
        zeta = norms.legendre_covector(minkowski, params, v)
        assert abs(norms.fenchel_young_gap(minkowski, params, v, zeta)) <= 1e-9 * max(1.0, abs(zeta @ v))
        assert norms.fenchel_young_gap(minkowski, params, v, minkowski.g @ z) >= -1e-9


def test_lagrangian_and_hamiltonian(minkowski):
    params = DualityParams(0.5)
    assert float(norms.lagrangian(minkowski, params, [2.0, 0.0, 0.0])) == pytest.approx(2.0 * math.sqrt(2.0))
    assert norms.lagrangian(minkowski, params, [0.0, 1.0, 0.0]).is_neg_inf()
    assert float(norms.hamiltonian(minkowski, params, [2.0, 0.0, 0.0])) == pytest.approx(-0.5)
    # 0**q = +inf for q < 0
    assert norms.lagrangian(minkowski, DualityParams(-1.0), [1.0, 1.0, 0.0]).is_neg_inf()


def test_duality_needs_minkowski():
    norm = HyperbolicNorm.lp(3, 2)
    with pytest.raises(UnsupportedDualityError):
        norms.lagrangian(norm, DualityParams(0.5), [1.0, 0.0])
    with pytest.raises(UnsupportedDualityError):
        norm.dual_values([1.0, 0.0])


def test_polarization_recovers_scalar_product(minkowski, rng):
    V = norms.sample_future(minkowski, rng, 10)
    W = norms.sample_future(minkowski, rng, 10)
    for v, w in zip(V, W):
        assert norms.polarize(minkowski, v, w) == pytest.approx(minkowski.inner(v, w))
        assert abs(norms.parallelogram_defect(minkowski, v, w)) <= 1e-9 * float(minkowski(v + 2 * w)) ** 2


def test_parallelogram_law_on_many_pairs(minkowski, rng):
    V = norms.sample_future(minkowski, rng, 10 ** 4)
    W = norms.sample_future(minkowski, rng, 10 ** 4)
    worst = max(abs(norms.parallelogram_defect(minkowski, v, w)) / max(1.0, np.abs(v + 2 * w).sum() ** 2)
                for v, w in zip(V, W))
    assert worst <= 1e-10


@pytest.mark.parametrize('q', [0.5, -1.0])
def test_fenchel_young_on_many_pairs(minkowski, rng, q):
    params = DualityParams(q)
    V = norms.sample_future(minkowski, rng, 10 ** 3)
    Z = norms.sample_future(minkowski, rng, 10 ** 3)
    for v, z in zip(V, Z):
        zeta = minkowski.g @ z
        assert norms.fenchel_young_gap(minkowski, params, v, zeta) >= -1e-10 * max(1.0, abs(zeta @ v))
        zeta = norms.legendre_covector(minkowski, params, v)
        assert abs(norms.fenchel_young_gap(minkowski, params, v, zeta)) <= 1e-10 * max(1.0, abs(zeta @ v))


def test_lp_norm_is_not_polarizable():
    norm = HyperbolicNorm.lp(3, 2)
    assert abs(norms.parallelogram_defect(norm, [1.0, 0.0], [1.0, 0.5])) > 1e-3
    norm = HyperbolicNorm.lp(4, 2)
    assert abs(norms.parallelogram_defect(norm, [1.0, 0.0], [1.0, 0.5])) > 1e-3


def test_polarize_outside_cone(minkowski):
    with pytest.raises(DomainError):
        norms.polarize(minkowski, [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0])


def test_signature_diagnostic():
    assert norms.signature_diagnostic(np.diag([1.0, -1.0, -1.0])) == norms.LORENTZIAN
    assert norms.signature_diagnostic(np.eye(3)) == norms.POSITIVE_DEFINITE
    assert norms.signature_diagnostic(np.diag([1.0, 1.0, -1.0])) == norms.OTHER
    with pytest.raises(DomainError):
        norms.signature_diagnostic(np.diag([1.0, 0.0]))
    with pytest.raises(DomainError):
        norms.signature_diagnostic([[1.0, 2.0], [0.0, -1.0]])


@pytest.mark.parametrize('g, expected', [
    (np.diag([1.0, -1.0]), norms.LORENTZIAN),
    (np.diag([1.0, -1.0, -1.0, -1.0]), norms.LORENTZIAN),
    (np.eye(2), norms.POSITIVE_DEFINITE),
    (np.array([[2.0, 0.5], [0.5, -1.0]]), norms.LORENTZIAN),
])
def test_triangle_criterion_agrees_with_signature(g, expected, rng):
    result = norms.triangle_criterion(g, rng)
    assert result['classification'] == expected
    assert norms.signature_diagnostic(g) == expected
    assert result['pairs'] > 0


def test_non_lorentzian_scalar_product_rejected():
    with pytest.raises(ParameterError):
        HyperbolicNorm.minkowski(np.eye(2))
