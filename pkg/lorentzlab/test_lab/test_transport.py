import numpy as np
import pytest
from scipy.optimize import linprog

from lorentzlab import transport as tr
from lorentzlab.acceptance import enumerated_lq, random_transport_instance
from lorentzlab.errors import ParameterError, PreconditionError
from lorentzlab.spacetime import DiscreteSpacetime, lp_separation
from lorentzlab.transport import DiscreteMeasure
from lorentzlab.utils import NEG_INF, POS_INF, ExtendedTime


def _two_points(value):
    if value is None:
        return DiscreteSpacetime.from_entries(2, [])
    return DiscreteSpacetime.from_entries(2, [(0, 1, value)])


@pytest.mark.parametrize('q', [0.5, -1.0])
def test_dirac_chain(chain, q):
    value, coupling = tr.lq_distance(chain, DiscreteMeasure.dirac(9, 0), DiscreteMeasure.dirac(9, 8), q)
    assert float(value) == pytest.approx(8.0)
    assert coupling.support_pairs() == [(0, 8)]


@pytest.mark.parametrize('q', [0.5, -1.0])
def test_chain_measures(chain, chain_measures, q):
    mu, nu = chain_measures
    value, coupling = tr.lq_distance(chain, mu, nu, q, certify=True)
    assert float(value) == pytest.approx(4.0)
    assert coupling.support_pairs() == [(0, 4), (1, 5)]
    assert coupling.marginal_error(mu, nu) < 1e-12
    assert not coupling.degenerate
    assert float(tr.transport_value(chain, coupling, q)) == pytest.approx(4.0 ** q)


def _oracle(ell, a, b, q):
    m, k = ell.shape
    rows = np.zeros((m + k, m * k))
    for i in range(m):
        rows[i, i * k:(i + 1) * k] = 1.0
    for j in range(k):
        rows[m + j, j::k] = 1.0
    costs = (ell ** q).ravel()
    res = linprog(-costs if q > 0 else costs, A_eq=rows, b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method='highs')
    assert res.status == 0
    return abs(res.fun) ** (1.0 / q)


@pytest.mark.parametrize('q', [0.5, 0.25, -0.5, -2.0])
def test_random_minkowski_sets(rng, q):
    past = np.column_stack([rng.uniform(0.0, 0.3, 5), rng.uniform(-0.3, 0.3, 5)])
    future = np.column_stack([rng.uniform(1.0, 1.3, 4), rng.uniform(-0.3, 0.3, 4)])
    coords = np.vstack([past, future])
    tags, values = lp_separation(coords, 2.0)
    space = DiscreteSpacetime(tags, values, np.ones(9), coords=coords)
    a = rng.random(5) + 0.1
    a /= a.sum()
    b = rng.random(4) + 0.1
    b /= b.sum()
    mu = DiscreteMeasure(np.concatenate([a, np.zeros(4)]))
    nu = DiscreteMeasure(np.concatenate([np.zeros(5), b]))
    value, coupling = tr.lq_distance(space, mu, nu, q, certify=True)
    assert float(value) == pytest.approx(_oracle(values[:5, 5:], a, b, q), rel=1e-8)
    assert coupling.is_causal(space)


@pytest.mark.parametrize('q', [0.5, -1.0])
def test_matches_coupling_enumeration(rng, q):
    unrelated = 0
    for _ in range(50):
        space, mu, nu = random_transport_instance(rng)
        unrelated += int(not np.all(space.causal_mask()[np.ix_(mu.support, nu.support)]))
        value, _ = tr.lq_distance(space, mu, nu, q)
        expected = enumerated_lq(space, mu, nu, q)
        if np.isinf(expected):
            assert float(value) == expected
        else:
            assert float(value) == pytest.approx(expected, abs=1e-6)
    assert unrelated > 0


@pytest.mark.parametrize('separation,q,expected', [
    (None, 0.5, -np.inf), (None, -1.0, -np.inf),
    (0.0, 0.5, 0.0), (0.0, -1.0, 0.0),
    (np.inf, 0.5, np.inf), (np.inf, -1.0, np.inf),
])
def test_enumeration_edge_cases(separation, q, expected):
    space = _two_points(separation)
    mu, nu = DiscreteMeasure.dirac(2, 0), DiscreteMeasure.dirac(2, 1)
    assert enumerated_lq(space, mu, nu, q) == expected
    assert float(tr.lq_distance(space, mu, nu, q)[0]) == expected


@pytest.mark.parametrize('q', [0.5, -1.0])
def test_infinite_separation(q):
    value, coupling = tr.lq_distance(_two_points(np.inf), DiscreteMeasure.dirac(2, 0),
                                     DiscreteMeasure.dirac(2, 1), q)
    assert value == POS_INF
    assert coupling is not None


def test_forced_null_pair():
    space = _two_points(0.0)
    mu, nu = DiscreteMeasure.dirac(2, 0), DiscreteMeasure.dirac(2, 1)
    value, coupling = tr.lq_distance(space, mu, nu, -1.0)
    assert value == ExtendedTime(0.0)
    assert coupling.degenerate
    value, coupling = tr.lq_distance(space, mu, nu, 0.5)
    assert value == ExtendedTime(0.0)
    assert not coupling.degenerate


@pytest.mark.parametrize('q', [0.5, -1.0])
def test_no_causal_coupling(q):
    value, coupling = tr.lq_distance(_two_points(None), DiscreteMeasure.dirac(2, 0),
                                     DiscreteMeasure.dirac(2, 1), q)
    assert value == NEG_INF
    assert coupling is None


def test_bad_exponent(chain, chain_measures):
    with pytest.raises(ParameterError):
        tr.lq_distance(chain, chain_measures[0], chain_measures[1], 1.0)


def test_reverse_triangle(chain, chain_measures):
    mu, nu = chain_measures
    xi = DiscreteMeasure.uniform(9, [2, 3])
    for q in (0.5, -1.0):
        assert float(tr.reverse_triangle_lq(chain, mu, xi, nu, q)) >= -1e-9
        assert float(tr.reverse_triangle_lq(chain, DiscreteMeasure.dirac(9, 0), DiscreteMeasure.dirac(9, 4),
                                            DiscreteMeasure.dirac(9, 8), q)) == pytest.approx(0.0, abs=1e-9)


def test_cyclical_monotonicity(chain):
    report = tr.cyclical_monotonicity_check(chain, [(0, 4), (1, 5)], 0.5)
    assert report.passed()
    assert report.values['exhaustive']
    report = tr.cyclical_monotonicity_check(chain, [(0, 5), (1, 4)], 0.5)
    assert report.check('chronological pairs').passed()
    assert not report.check('cyclical monotonicity').passed()
    assert report.check('cyclical monotonicity').witnesses == [((0, 5), (1, 4))]


def test_potential_from_target(chain):
    f = tr.potential_from_target(chain, 8, 0.5)
    assert float(f[0]) == pytest.approx(-2.0 * np.sqrt(8.0))
    assert f[8].is_pos_inf()
    assert list(f.domain) == list(range(8))
    g = tr.kantorovich_transform(chain, f)
    assert float(g[8]) == pytest.approx(0.0)


def test_superdifferential(chain):
    f = tr.potential_from_target(chain, 8, 0.5)
    assert tr.superdifferential(chain, f, targets=[8]) == [(x, 8) for x in range(8)]


def test_strong_duality(chain, chain_measures):
    mu, _ = chain_measures
    f = tr.potential_from_target(chain, 8, 0.5)
    report = tr.duality_gap(chain, mu, DiscreteMeasure.dirac(9, 8), f, 0.5)
    assert report.passed()
    assert float(report.gap) == pytest.approx(0.0, abs=1e-9)


def test_weak_duality(chain, chain_measures):
    mu, nu = chain_measures
    f = tr.potential_from_target(chain, 7, 0.5)
    report = tr.duality_gap(chain, mu, nu, f, 0.5)
    assert report.check('weak duality').passed()
    assert float(report.gap) >= -1e-9


def test_duality_without_coupling():
    space = _two_points(None)
    f = tr.KantorovichPotential.from_array([0.0, np.inf], 0.5)
    report = tr.duality_gap(space, DiscreteMeasure.dirac(2, 0), DiscreteMeasure.dirac(2, 1), f, 0.5)
    assert not report.check('defined').passed()
    assert report.gap is None


def test_intermediate_measure(chain, chain_measures):
    mu, nu = chain_measures
    xi, first, second = tr.intermediate_measure(chain, mu, nu, 0.5, 0.5)
    assert xi.items() == [(2, 0.5), (3, 0.5)]
    assert first.support_pairs() == [(0, 2), (1, 3)]
    assert second.support_pairs() == [(2, 4), (3, 5)]
    xi, _, _ = tr.intermediate_measure(chain, mu, nu, 0.25, 0.5)
    assert [x for x, _ in xi.items()] == [1, 2]
    start, still, _ = tr.intermediate_measure(chain, mu, nu, 0.0, 0.5)
    assert start == mu
    assert still.support_pairs() == [(0, 0), (1, 1)]


def test_intermediate_measure_errors(chain, chain_measures):
    with pytest.raises(ParameterError):
        tr.intermediate_measure(chain, chain_measures[0], chain_measures[1], 1.5, 0.5)
    with pytest.raises(PreconditionError):
        tr.intermediate_measure(_two_points(0.0), DiscreteMeasure.dirac(2, 0),
                                DiscreteMeasure.dirac(2, 1), 0.5, 0.5)


def test_dyadic_interpolation_and_lift(chain):
    mu, nu = DiscreteMeasure.dirac(9, 0), DiscreteMeasure.dirac(9, 8)
    interpolation = tr.dyadic_interpolation(chain, mu, nu, 0.5, 2)
    assert [t for t, _ in interpolation] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert [m.items()[0][0] for _, m in interpolation] == [0, 2, 4, 6, 8]
    plan = tr.lift_to_plan(chain, interpolation, 0.5)
    assert len(plan) == 1
    assert plan.slice(2, 9) == DiscreteMeasure.dirac(9, 4)
    assert float(plan.action(0.5)) == pytest.approx(2.0 * np.sqrt(8.0))
    assert float(tr.dyadic_action(chain, interpolation, 0.5)) == pytest.approx(2.0 * np.sqrt(8.0))
    assert float(plan.endpoint_statistics(0.5)) == pytest.approx(np.sqrt(8.0))


def test_lift_rejects_non_dyadic_times(chain):
    mu, nu = DiscreteMeasure.dirac(9, 0), DiscreteMeasure.dirac(9, 8)
    with pytest.raises(ParameterError):
        tr.lift_to_plan(chain, [(0.0, mu), (1.0 / 3.0, DiscreteMeasure.dirac(9, 3)), (1.0, nu)], 0.5)
    with pytest.raises(ParameterError):
        tr.dyadic_interpolation(chain, mu, nu, 0.5, -1)


def test_measure_validation():
    with pytest.raises(ParameterError):
        DiscreteMeasure([0.5, 0.4])
    with pytest.raises(ParameterError):
        DiscreteMeasure([1.5, -0.5])
    with pytest.raises(ParameterError):
        DiscreteMeasure.uniform(3, [])
    assert DiscreteMeasure([2.0, 2.0], normalize=True).items() == [(0, 0.5), (1, 0.5)]
