import numpy as np
import pytest
import scipy.sparse as sp

from dualalp.features import FeatureSpace
from dualalp.mdp import MdpModel, Policy


def random_mdp(rng, num_states, num_actions, sharpness=1.0):
    """Dense random MDP: Dirichlet transition rows, uniform losses in [0, 1]."""
    kernel = rng.dirichlet(np.full(num_states, sharpness),
                           size=(num_states, num_actions))
    loss = rng.random((num_states, num_actions))
    return MdpModel.from_dense(kernel, loss)


def random_policy(rng, num_states, num_actions):
    return Policy(rng.dirichlet(np.ones(num_actions), size=num_states))


def random_features(rng, model, dim, density=0.5, signed=True, normalize=False,
                    mu0=None):
    """Random sparse feature matrix; signed entries unless disabled."""
    mask = rng.random((model.num_pairs, dim)) < density
    vals = rng.random((model.num_pairs, dim)) + 0.05
    if signed:
        vals *= rng.choice([-1.0, 1.0], size=vals.shape)
    phi = sp.csr_matrix(np.where(mask, vals, 0.0))
    # keep every column nonempty so normalization is well defined
    for j in range(dim):
        if phi[:, j].nnz == 0:
            phi[rng.integers(model.num_pairs), j] = 1.0
    return FeatureSpace(model, sp.csr_matrix(phi), mu0=mu0, normalize=normalize)


def stationary_features(rng, model, dim, tol=1e-12):
    """Columns are exact stationary state-action distributions of random policies."""
    from dualalp.mdp import stationary_state_action
    cols = []
    for _ in range(dim):
        pi = random_policy(rng, model.num_states, model.num_actions)
        cols.append(stationary_state_action(model, pi, tol=tol))
    return FeatureSpace(model, sp.csr_matrix(np.column_stack(cols)))


@pytest.fixture
def desk_fixture():
    """The standard 4-state, 2-action, d=3 fixture used across solver tests."""
    rng = np.random.default_rng(71)
    model = random_mdp(rng, 4, 2)
    fs = random_features(rng, model, 3, density=0.7, signed=True, normalize=True)
    return model, fs
