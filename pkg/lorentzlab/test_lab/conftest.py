import os

import numpy as np
import pytest

from lorentzlab import global_params
from lorentzlab import spacetime as st
from lorentzlab.input_helper import read_measure, read_spacetime
from lorentzlab.lorentzlab import _restore_params

from lorentzlab.test_lab.global_test_params import DATA_DIR


def data_file(name):
    return os.path.join(DATA_DIR, name)


@pytest.fixture(autouse=True)
def fresh_params():
    _restore_params()
    yield
    _restore_params()


@pytest.fixture
def chain():
    return read_spacetime(data_file('chain.txt'))


@pytest.fixture
def chain_measures(chain):
    return (read_measure(data_file('chain_mu.txt'), chain.n_points),
            read_measure(data_file('chain_nu.txt'), chain.n_points))


@pytest.fixture
def violation():
    return read_spacetime(data_file('three_point_violation.txt'))


@pytest.fixture
def small_grid():
    return st.generate_minkowski_grid(2, [[0.0, 1.0], [-0.5, 0.5]], 8)


@pytest.fixture
def rng():
    return np.random.default_rng(global_params.SEED)
