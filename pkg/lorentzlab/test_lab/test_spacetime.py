import numpy as np
import pytest

from lorentzlab import spacetime as st
from lorentzlab.errors import DomainError, ParameterError, PreconditionError, SpacetimeStructureError
from lorentzlab.utils import FINITE, NEG, ExtendedTime


def test_chain_satisfies_axioms(chain):
    report = st.validate(chain)
    assert report.is_valid()
    assert report.values['n_points'] == 9


def test_reverse_triangle_witness(violation):
    report = st.validate(violation)
    assert not report.is_valid()
    assert report.triangle() == [(0, 1, 2)]
    assert report.check('reverse triangle').count == 1
    assert report.diagonal() == []
    assert report.antisymmetry() == []


def test_exact_mode_rejects_tiny_defect():
    space = st.DiscreteSpacetime.from_entries(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0 - 1e-12)])
    assert st.validate(space).is_valid()
    assert not st.validate(space, tol=0).is_valid()


def test_antisymmetry_and_diagonal():
    space = st.DiscreteSpacetime.from_entries(2, [(0, 1, 1.0), (1, 0, 0.0), (0, 0, -np.inf)])
    report = st.validate(space)
    assert report.antisymmetry() == [(0, 1)]
    assert report.diagonal() == [0]


def test_infinite_separation_is_not_a_violation():
    space = st.DiscreteSpacetime.from_entries(3, [(0, 1, np.inf), (1, 2, 1.0), (0, 2, np.inf)])
    assert st.validate(space).is_valid()
    assert space.ell(0, 1) == ExtendedTime(np.inf)
    assert space.ell(2, 0).is_neg_inf()


def test_structure_errors():
    with pytest.raises(SpacetimeStructureError):
        st.DiscreteSpacetime.from_entries(2, [(0, 1, -1.0)])
    with pytest.raises(SpacetimeStructureError):
        st.DiscreteSpacetime(np.zeros((2, 3)), np.zeros((2, 3)), np.ones(2))
    with pytest.raises(SpacetimeStructureError):
        st.DiscreteSpacetime.from_entries(2, [], m_weights=[1.0, -1.0])
    with pytest.raises(DomainError):
        st.DiscreteSpacetime.from_matrix([[0.0, np.nan], [-np.inf, 0.0]], [1.0, 1.0])


def test_order_properties_of_chain(chain):
    props = st.order_properties(st.relations(chain))
    assert all(witnesses == [] for witnesses in props.values())


def test_push_up_failure_is_reported():
    # 0 << 1 <= 2 but 0 and 2 are only null related
    space = st.DiscreteSpacetime.from_entries(3, [(0, 1, 1.0), (1, 2, 0.0), (0, 2, 0.0)])
    props = st.order_properties(st.relations(space))
    assert props['push-up chronological then causal'] == [(0, 2)]
    assert props['transitive causal'] == []


def test_cones_and_emeralds(chain):
    assert st.future_past(chain, 3, st.I_PLUS).tolist() == [4, 5, 6, 7, 8]
    assert st.future_past(chain, 3, st.J_MINUS).tolist() == [0, 1, 2, 3]
    assert st.emerald(chain, [2], [5]).tolist() == [2, 3, 4, 5]
    assert st.chronological_emerald(chain, [2], [5]).tolist() == [3, 4]
    with pytest.raises(ParameterError):
        st.future_past(chain, 3, 'K+')
    with pytest.raises(PreconditionError):
        st.future_past(chain, 9, st.I_PLUS)


def test_time_reversal(chain):
    reversed_space = chain.time_reversed()
    assert reversed_space.ell(8, 0) == ExtendedTime(8.0)
    assert reversed_space.ell(0, 8).is_neg_inf()


def test_lp_separation():
    coords = np.array([[0.0, 0.0], [1.0, 0.5]])
    tags, values = st.lp_separation(coords, 2.0)
    assert tags[0, 1] == FINITE and tags[1, 0] == NEG
    assert values[0, 1] == pytest.approx(np.sqrt(0.75))
    tags, values = st.lp_separation(coords, 3.0)
    assert values[0, 1] == pytest.approx((1.0 - 0.125) ** (1.0 / 3.0))


def test_generated_grid(small_grid):
    assert small_grid.n_points == 64
    assert small_grid.grid.h == pytest.approx(0.125)
    assert np.allclose(small_grid.m_weights, 0.125 ** 2)
    assert st.validate(small_grid).is_valid()
    assert small_grid.grid.nearest_index([0.0625, -0.4375]) == 0
    assert small_grid.grid.nearest_index([2.0, 0.0]) is None


def test_generator_errors():
    with pytest.raises(ParameterError):
        st.generate({'family': 'de_sitter'})
    with pytest.raises(ParameterError):
        st.generate_hyperbolic_lp_grid(0.5, 2, [0.0, 1.0], 4)
    with pytest.raises(ParameterError):
        st.generate_minkowski_grid(2, [[0.0, 1.0], [1.0, 0.0]], 4)
