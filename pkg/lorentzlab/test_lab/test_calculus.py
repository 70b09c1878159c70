import networkx as nx
import numpy as np
import pytest

from lorentzlab import calculus as calc
from lorentzlab.acceptance import enumerated_null_distances
from lorentzlab.errors import NotCausalError, NotSteepError, ParameterError, PreconditionError
from lorentzlab.spacetime import DiscreteSpacetime, generate_minkowski_grid

TIME = np.arange(9, dtype=float)


def test_causality(chain):
    assert calc.causality_check(chain, TIME) == []
    bad = calc.causality_check(chain, -TIME)
    assert bad[0] == (0, 1)
    assert len(bad) == 36
    with pytest.raises(ParameterError):
        calc.causality_check(chain, TIME[:4])


def test_closure(chain):
    result = calc.closure_check(chain, TIME, 2.0 * TIME)
    assert set(result) == set(['sum', 'min', 'max', 'arctan', 'product'])
    assert all(v == [] for v in result.values())
    result = calc.closure_check(chain, TIME, -TIME)
    assert 'product' not in result
    assert result['min'] != []


def test_envelopes(chain):
    lower, upper = calc.envelopes(chain, TIME)
    assert upper.as_array()[:8] == pytest.approx(TIME[:8] + 1.0)
    assert upper[8].is_pos_inf()
    assert lower.as_array()[1:] == pytest.approx(TIME[1:] - 1.0)
    assert lower[0].is_neg_inf()


def test_slopes_on_chain(chain):
    field = calc.slopes(chain, TIME)
    assert field.fwd[:8] == pytest.approx(np.ones(8))
    assert field.fwd[8] == np.inf
    assert field.bwd[1:] == pytest.approx(np.ones(8))
    assert field.bwd[0] == np.inf
    assert field.st == pytest.approx(np.ones(9))
    doubled = calc.slopes(chain, 2.0 * TIME)
    assert doubled.st == pytest.approx(np.full(9, 2.0))


def test_slopes_without_coordinates():
    space = DiscreteSpacetime.from_entries(3, [(0, 1, 1.0), (0, 2, 3.0), (1, 2, 2.0)])
    field = calc.slopes(space, [0.0, 2.0, 3.0])
    assert field.fwd.tolist() == [1.0, 0.5, np.inf]
    assert list(field.levels) == ['all']


def test_slopes_on_grid(small_grid):
    field = calc.slopes(small_grid, small_grid.coords[:, 0])
    below_top = small_grid.coords[:, 0] < 0.9
    assert np.allclose(field.fwd[below_top], 1.0)
    assert np.all(np.isinf(field.fwd[~below_top]))
    assert [row[0] for row in field.table] == [4, 8, 16]


def test_mcshane_extensions(chain):
    partial = {0: 0.0, 8: 8.0}
    lower = calc.mcshane_extend(chain, partial, 1.0, calc.LOWER)
    upper = calc.mcshane_extend(chain, partial, 1.0, calc.UPPER)
    assert lower.as_array() == pytest.approx(TIME)
    assert upper.as_array() == pytest.approx(TIME)
    assert calc.steepness_check(chain, lower, 1.0) == []


def test_mcshane_gap(chain):
    partial = {0: 0.0, 4: 6.0}
    lower = calc.mcshane_extend(chain, partial, 1.0, calc.LOWER).as_array()
    upper = calc.mcshane_extend(chain, partial, 1.0, calc.UPPER).as_array()
    assert lower.tolist() == [0.0, 1.0, 2.0, 3.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    assert upper[:5].tolist() == [0.0, 3.0, 4.0, 5.0, 6.0]
    assert np.all(np.isinf(upper[5:]))


def test_random_steep_extension(chain, rng):
    partial = {0: 0.0, 4: 6.0}
    f = calc.random_steep_extension(chain, partial, 1.0, rng)
    values = f.as_array()
    assert values[0] == 0.0 and values[4] == 6.0
    lower = calc.mcshane_extend(chain, partial, 1.0, calc.LOWER).as_array()
    upper = calc.mcshane_extend(chain, partial, 1.0, calc.UPPER).as_array()
    assert np.all(values >= lower - 1e-9)
    assert np.all(values <= upper + 1e-9)
    assert calc.steepness_check(chain, f, 1.0, tol=1e-9) == []


def test_mcshane_errors(chain):
    with pytest.raises(NotSteepError):
        calc.mcshane_extend(chain, {0: 0.0, 8: 4.0}, 1.0)
    with pytest.raises(ParameterError):
        calc.mcshane_extend(chain, {}, 1.0)
    with pytest.raises(ParameterError):
        calc.mcshane_extend(chain, {0: 0.0}, -1.0)
    with pytest.raises(ParameterError):
        calc.mcshane_extend(chain, {0: 0.0}, 1.0, mode='middle')
    looped = DiscreteSpacetime.from_entries(2, [(0, 0, 1.0), (0, 1, 1.0)])
    with pytest.raises(PreconditionError):
        calc.mcshane_extend(looped, {0: 0.0}, 1.0)


def test_duality_formula(chain):
    ell, best = calc.duality_formula_check(chain, 0, 4, [TIME, 2.0 * TIME])
    assert float(ell) == 4.0
    assert float(best) == pytest.approx(4.0)
    with pytest.raises(NotCausalError):
        calc.duality_formula_check(chain, 0, 4, [-TIME])


def test_duality_formula_needs_steep_candidates(chain):
    # causal but with slope 1/2, so f(4) - f(0) = 2 < l(0, 4)
    with pytest.raises(NotSteepError) as e:
        calc.duality_formula_check(chain, 0, 4, [TIME, 0.5 * TIME])
    assert 'candidate 1' in str(e.value)
    assert e.value.witness is not None


def test_null_distance(chain):
    graph = calc.null_graph(chain, TIME)
    expected = np.abs(TIME[:, None] - TIME[None, :])
    assert np.allclose(nx.floyd_warshall_numpy(graph, nodelist=range(9)), expected)
    assert np.allclose(calc.null_distance_matrix(chain, TIME), expected)
    assert calc.null_distance(chain, TIME, 8, 0) == pytest.approx(8.0)
    assert calc.null_lipschitz_constant(chain, TIME, 2.0 * TIME) == pytest.approx(2.0)


def test_null_distance_matches_path_enumeration():
    grid = generate_minkowski_grid(2, [[0.0, 1.0], [-0.5, 0.5]], 4)
    f = grid.coords[:, 0]
    d = calc.null_distance_matrix(grid, f)
    assert np.allclose(d, enumerated_null_distances(grid, f), rtol=0.0, atol=1e-12)
    causal = grid.causal_mask()
    jumps = f[None, :] - f[:, None]
    assert np.allclose(d[causal], jumps[causal], rtol=0.0, atol=1e-12)
    # some pairs are only joined through a zigzag of causal steps
    assert np.any(d[~(causal | causal.T)] > np.abs(jumps)[~(causal | causal.T)] + 1e-9)


def test_null_distance_needs_strict_causality(chain):
    with pytest.raises(NotCausalError):
        calc.null_graph(chain, np.zeros(9))


def test_null_distance_between_unrelated_points():
    space = DiscreteSpacetime.from_entries(2, [])
    assert calc.null_distance(space, [0.0, 0.0], 0, 1) == np.inf
    assert calc.null_lipschitz_constant(space, [0.0, 0.0], [1.0, 2.0]) == 0.0


def test_perturbations(chain):
    report = calc.perturbation_membership(chain, TIME, -TIME, [0.5, 1.0, 2.0])
    assert report.values['largest_eps'] == 1.0
    assert report.values['largest_eps_negative'] == 2.0
    assert report.values['symmetric_member']
    assert report.passed()
    assert report.tables['eps'][-1] == (2.0, 36, 0)


def test_perturbation_errors(chain):
    with pytest.raises(NotCausalError):
        calc.perturbation_membership(chain, -TIME, TIME, [1.0])
    with pytest.raises(ParameterError):
        calc.perturbation_membership(chain, TIME, TIME, [0.0, 1.0])
    g = TIME.copy()
    g[3] = np.inf
    with pytest.raises(ParameterError):
        calc.perturbation_membership(chain, TIME, g, [1.0])
