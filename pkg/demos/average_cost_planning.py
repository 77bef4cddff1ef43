"""Average-cost planning in a feature subspace.

The feature columns are stationary state-action distributions of four base
policies, so every simplex mixture is exactly feasible and the best policy in
the class can be found by brute force. The demo runs a single penalized SGD
solve, then the penalty-grid meta-algorithm, and compares both against the
brute-force reference.
"""
import numpy as np
import scipy.sparse as sp

from dualalp import (AvgSolverConfig, FeatureSpace, MdpModel, Policy,
                     average_cost, make_norm_proportional_sampling,
                     meta_solve_avg, policy_from_occupancy, sgd_solve_avg,
                     stationary_state_action)


def main():
    rng = np.random.default_rng(7)
    num_states, num_actions, dim = 8, 2, 4
    kernel = rng.dirichlet(np.ones(num_states), size=(num_states, num_actions))
    loss = rng.random((num_states, num_actions))
    model = MdpModel.from_dense(kernel, loss)

    columns = []
    for _ in range(dim):
        base = Policy(rng.dirichlet(np.ones(num_actions), size=num_states))
        columns.append(stationary_state_action(model, base, tol=1e-12))
    fs = FeatureSpace(model, sp.csr_matrix(np.column_stack(columns)))
    sampler = make_norm_proportional_sampling(model, fs, kappa=1.0)

    # brute-force best mixture over a fine simplex grid
    best = np.inf
    ticks = np.arange(0.0, 1.0001, 0.05)
    for w1 in ticks:
        for w2 in ticks:
            for w3 in ticks:
                w4 = 1.0 - w1 - w2 - w3
                if w4 < -1e-12:
                    continue
                theta = np.array([w1, w2, w3, max(w4, 0.0)])
                pol = policy_from_occupancy(fs.phi @ theta, num_actions)
                best = min(best, average_cost(model, pol))
    print("brute-force best in class:", round(best, 5))

    cfg = AvgSolverConfig(penalty=4.0, radius=1.5, iterations=50000, seed=1)
    trace = sgd_solve_avg(model, fs, sampler, cfg)
    print("single SGD run  (H = 4):  ",
          round(average_cost(model, trace.policy), 5),
          "| final objective", round(trace.objective[-1], 5),
          "| estimated violation", f"{trace.v_hat[-1]:.2e}")

    result = meta_solve_avg(model, fs, sampler, violation_bound=0.15,
                            selection_weight=0.12, tolerance=0.05,
                            failure_prob=0.1, seed=1, radius=1.5)
    print(f"meta-algorithm over {len(result.grid_points)} penalty gains:",
          round(average_cost(model, result.policy), 5),
          "| chosen gain", round(result.chosen_penalty, 3))


if __name__ == "__main__":
    main()
