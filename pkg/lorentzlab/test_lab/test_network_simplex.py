import numpy as np
import pytest
from scipy.optimize import linprog

from lorentzlab.errors import ParameterError
from lorentzlab.network_simplex import solve_transportation
from lorentzlab.smt_oracle import exact_transport_value
from lorentzlab.vargenerator import Generator


def _linprog_value(supply, demand, tails, heads, costs):
    m, k = len(supply), len(demand)
    rows = np.zeros((m + k, len(costs)))
    rows[tails, np.arange(len(costs))] = 1.0
    rows[m + np.asarray(heads), np.arange(len(costs))] = 1.0
    res = linprog(costs, A_eq=rows, b_eq=np.concatenate([supply, demand]),
                  bounds=(0, None), method='highs')
    assert res.status == 0
    return res.fun


def _dense(m, k):
    tails, heads = np.divmod(np.arange(m * k), k)
    return tails, heads


@pytest.mark.parametrize('m,k', [(1, 1), (2, 3), (5, 4), (7, 7)])
def test_matches_linear_programming(m, k, rng):
    supply = rng.random(m) + 0.1
    supply /= supply.sum()
    demand = rng.random(k) + 0.1
    demand /= demand.sum()
    tails, heads = _dense(m, k)
    costs = rng.normal(size=m * k)
    solution = solve_transportation(supply, demand, tails, heads, costs)
    assert solution.feasible
    assert solution.objective == pytest.approx(_linprog_value(supply, demand, tails, heads, costs),
                                               abs=1e-9)
    assert np.all(solution.flows >= 0)
    assert np.bincount(tails, solution.flows, minlength=m) == pytest.approx(supply)
    assert np.bincount(heads, solution.flows, minlength=k) == pytest.approx(demand)


def test_maximize_restores_signs(rng):
    supply = np.array([0.5, 0.5])
    demand = np.array([0.5, 0.5])
    tails, heads = _dense(2, 2)
    weights = np.array([1.0, 2.0, 3.0, 1.0])
    best = solve_transportation(supply, demand, tails, heads, weights, maximize=True)
    worst = solve_transportation(supply, demand, tails, heads, weights)
    assert best.objective == pytest.approx(2.5)
    assert worst.objective == pytest.approx(1.0)
    assert exact_transport_value(supply, demand, tails, heads, weights) == pytest.approx(2.5)
    assert exact_transport_value(supply, demand, tails, heads, weights, maximize=False) == \
        pytest.approx(1.0)


def test_sparse_arcs():
    # source 1 can only reach sink 1, which forces the rest of the plan
    supply = np.array([0.5, 0.5])
    demand = np.array([0.5, 0.5])
    tails, heads = np.array([0, 0, 1]), np.array([0, 1, 1])
    solution = solve_transportation(supply, demand, tails, heads, np.array([4.0, 1.0, 2.0]),
                                    maximize=True)
    assert solution.feasible
    assert solution.flows == pytest.approx([0.5, 0.0, 0.5])
    assert solution.objective == pytest.approx(3.0)


def test_infeasible_support():
    supply = np.array([0.5, 0.5])
    demand = np.array([0.5, 0.5])
    tails, heads = np.array([0, 1]), np.array([0, 0])
    solution = solve_transportation(supply, demand, tails, heads, np.array([1.0, 1.0]))
    assert not solution.feasible
    assert solution.artificial_flow > 0
    assert exact_transport_value(supply, demand, tails, heads, [1.0, 1.0]) is None


def test_input_errors():
    tails, heads = _dense(1, 1)
    with pytest.raises(ParameterError):
        solve_transportation([1.0], [0.5], tails, heads, [1.0])
    with pytest.raises(ParameterError):
        solve_transportation([1.0], [1.0], tails, heads, [np.inf])
    with pytest.raises(ParameterError):
        solve_transportation([1.0], [1.0], tails, heads, [1.0, 2.0])
    with pytest.raises(ParameterError):
        exact_transport_value(np.ones(7) / 7, np.ones(7) / 7, *_dense(7, 7), weights=np.ones(49))


def test_pivots_are_deterministic(rng):
    supply = np.full(4, 0.25)
    demand = np.full(4, 0.25)
    tails, heads = _dense(4, 4)
    costs = rng.normal(size=16)
    first = solve_transportation(supply, demand, tails, heads, costs)
    second = solve_transportation(supply, demand, tails, heads, costs)
    assert first.pivots == second.pivots
    assert np.array_equal(first.flows, second.flows)


def test_oracle_variable_names():
    gen = Generator()
    assert gen.gen_coupling_var(2, 3) == 'pi_2_3'
    assert [gen.gen_objective_var() for _ in range(2)] == ['objective_1', 'objective_2']
    # the oracle has no potential variables
    assert not hasattr(gen, 'gen_potential_var')
