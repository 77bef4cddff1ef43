"""Tour of the exact small-scale oracles.

Builds a random 5-state MDP, evaluates a policy exactly under both criteria,
and checks the identities that connect occupancy vectors, visit frequencies,
and value functions.
"""
import numpy as np

from dualalp import (MdpModel, Policy, average_cost, bellman_average,
                     discounted_visits, policy_from_occupancy, solve_optimal,
                     stationary_state_action, value_function)


def main():
    rng = np.random.default_rng(0)
    num_states, num_actions = 5, 2
    kernel = rng.dirichlet(np.ones(num_states), size=(num_states, num_actions))
    loss = rng.random((num_states, num_actions))
    model = MdpModel.from_dense(kernel, loss)

    pi = Policy(rng.dirichlet(np.ones(num_actions), size=num_states))
    print("average cost of a random policy:", round(average_cost(model, pi), 6))

    # the stationary state-action distribution reproduces itself through its

    # conditional policy
    mu = stationary_state_action(model, pi, tol=1e-12)
    mu_again = stationary_state_action(model, policy_from_occupancy(mu, num_actions))
    print("stationary occupancy self-consistency (L1):",
          f"{np.abs(mu_again - mu).sum():.2e}")

    # discounted visit counts tie the two evaluation routes together
    gamma, alpha = 0.9, np.full(num_states, 0.2)
    nu = discounted_visits(model, pi, gamma, alpha, tol=1e-12)
    j = value_function(model, pi, gamma, tol=1e-12)
    print("visit mass vs 1/(1-gamma):", round(nu.sum(), 6), "=", round(1 / (1 - gamma), 6))
    print("loss^T nu vs alpha^T J:", round(float(nu @ model.loss), 6), "=",
          round(float(alpha @ j), 6))

    # optimal policies from the small-scale solvers
    avg_sol = solve_optimal(model, "average", tol=1e-10)
    print("optimal average loss:", round(avg_sol.average_loss, 6))
    print("Bellman residual at the optimum:",
          f"{np.abs(bellman_average(model, avg_sol.values) - avg_sol.values - avg_sol.average_loss).max():.2e}")
    disc_sol = solve_optimal(model, "discounted", gamma=gamma, tol=1e-10)
    print("optimal discounted values:", np.round(disc_sol.values, 4))


if __name__ == "__main__":
    main()
