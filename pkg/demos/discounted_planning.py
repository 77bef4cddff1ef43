"""Discounted-cost planning with visit-frequency features.

The feature columns are expected discounted visit counts of base policies,
including the optimal one, so the solver should recover a policy whose
discounted cost is close to optimal. Evaluation goes through both routes:
loss^T nu of the derived policy and alpha^T J from the value function.
"""
import numpy as np
import scipy.sparse as sp

from dualalp import (DiscSolverConfig, FeatureSpace, MdpModel, Policy,
                     discounted_visits, make_norm_proportional_sampling,
                     sgd_solve_disc, solve_optimal, value_function)


def main():
    rng = np.random.default_rng(3)
    num_states, num_actions = 6, 2
    gamma = 0.8
    alpha = np.full(num_states, 1.0 / num_states)
    kernel = rng.dirichlet(np.ones(num_states), size=(num_states, num_actions))
    loss = rng.random((num_states, num_actions))
    model = MdpModel.from_dense(kernel, loss)

    optimal = solve_optimal(model, "discounted", gamma=gamma, tol=1e-12)
    nu_star = discounted_visits(model, optimal.policy, gamma, alpha, tol=1e-12)
    columns = [nu_star]
    for _ in range(2):
        base = Policy(rng.dirichlet(np.ones(num_actions), size=num_states))
        columns.append(discounted_visits(model, base, gamma, alpha, tol=1e-12))
    fs = FeatureSpace(model, sp.csr_matrix(np.column_stack(columns)))
    print("column costs (first is optimal):",
          np.round([float(c @ model.loss) for c in columns], 4))

    sampler = make_norm_proportional_sampling(model, fs, kappa=gamma)
    cfg = DiscSolverConfig(discount=gamma, penalty=6.0, radius=1.3,
                           iterations=200000, initial_dist=alpha, seed=1)
    trace = sgd_solve_disc(model, fs, sampler, cfg)

    nu_hat = discounted_visits(model, trace.policy, gamma, alpha, tol=1e-10)
    j_hat = value_function(model, trace.policy, gamma, tol=1e-10)
    print("optimal discounted cost: ", round(float(nu_star @ model.loss), 5))
    print("solved policy, loss^T nu:", round(float(nu_hat @ model.loss), 5))
    print("solved policy, alpha^T J:", round(float(alpha @ j_hat), 5))
    print("final theta:", np.round(trace.theta, 4))


if __name__ == "__main__":
    main()
