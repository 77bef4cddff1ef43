"""Discounted-cost dual-ALP solver.

The surrogate is

    cost(theta) = loss^T Phi theta
                  + penalty * (negative mass of Phi theta)
                  + penalty * || (B - gamma P)^T Phi theta - alpha ||_1

over the ball Theta = {||theta||_2 <= radius} (an optional flag additionally
enforces sum(theta) = 1/(1-gamma)). The feasibility residual works through the
rows F[x] = (B - gamma P)^T_{:,x} Phi; note these are not sign flips of the
drift rows (P - gamma B)^T_{:,x} Phi once gamma < 1, so the two are cached
separately by the feature space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._sgd import (SgdProblem, as_seed_sequence, make_buffered_grad,
                   resolve_learning_rate, run_projected_sgd)
from .avgcost import _guard_exact, project_theta_avg
from .errors import ParameterError
from .features import FeatureSpace, SamplingPair, importance_weight_guard
from .grid import build_penalty_grid
from .mdp import MdpModel, _check_state_distribution, policy_from_occupancy
from .trace import MetaResult, RunTrace


@dataclass(frozen=True)
class DiscSolverConfig:
    """Knobs of one discounted-cost SGD run. ``initial_dist`` of None means the
    uniform distribution over states."""

    discount: float
    penalty: float
    radius: float
    iterations: int
    initial_dist: np.ndarray | None = None
    learning_rate: float | str = "auto"
    lr_halving_period: int | None = None
    minibatch: int = 1
    tolerance: float = 0.05
    failure_prob: float = 0.1
    seed: int = 0
    trace_stride: int | None = None
    trace_violation_samples: int = 64
    enforce_sum_constraint: bool = False

    def __post_init__(self):
        if not 0.0 < self.discount < 1.0:
            raise ParameterError("discount must lie in (0, 1)")
        if self.penalty <= 0.0:
            raise ParameterError("penalty must be positive")
        if self.iterations < 1:
            raise ParameterError("iterations must be >= 1")
        if self.minibatch < 1:
            raise ParameterError("minibatch must be >= 1")
        if not 0.0 < self.failure_prob < 1.0:
            raise ParameterError("failure_prob must lie in (0, 1)")


def violations_exact_disc(model: MdpModel, fs: FeatureSpace, gamma: float,
                          alpha: np.ndarray | None, theta: np.ndarray) -> tuple[float, float]:
    """Exact (negative-mass, feasibility-residual) pair by full enumeration."""
    _guard_exact(model)
    alpha = _check_state_distribution(model, alpha)
    values = fs.phi @ theta
    neg_mass = float(np.abs(np.minimum(values, 0.0)).sum())
    residual = float(np.abs(fs.feasibility_matrix(gamma) @ theta - alpha).sum())
    return neg_mass, residual


def surrogate_cost_exact_disc(model: MdpModel, fs: FeatureSpace, penalty: float,
                              gamma: float, alpha: np.ndarray | None,
                              theta: np.ndarray) -> float:
    """Exact discounted surrogate value (test oracle)."""
    v3, v4 = violations_exact_disc(model, fs, gamma, alpha, theta)
    return float(fs.loss_phi @ theta) + penalty * (v3 + v4)


def exact_subgradient_disc(model: MdpModel, fs: FeatureSpace, penalty: float,
                           gamma: float, alpha: np.ndarray | None,
                           theta: np.ndarray) -> np.ndarray:
    """Exact subgradient of the discounted surrogate (sign(0) = 0, strict
    negativity indicator)."""
    _guard_exact(model)
    alpha = _check_state_distribution(model, alpha)
    values = fs.phi @ theta
    active = (values < 0.0).astype(float)
    neg_term = fs.phi.T @ active
    feas = fs.feasibility_matrix(gamma)
    signs = np.sign(feas @ theta - alpha)
    return fs.loss_phi - penalty * neg_term + penalty * (feas.T @ signs)


def _grad_terms_disc(fs: FeatureSpace, sp: SamplingPair, penalty: float,
                     gamma: float, alpha: np.ndarray, theta: np.ndarray,
                     pair_idx: np.ndarray, state_idx: np.ndarray) -> np.ndarray:
    q_pair = sp.pair_prob(pair_idx)
    q_state = sp.state_prob(state_idx)
    importance_weight_guard(q_pair)
    importance_weight_guard(q_state)
    rows = fs.rows(pair_idx)
    w_neg = np.where(rows @ theta < 0.0, 1.0 / q_pair, 0.0)
    feas = fs.feasibility_rows(state_idx, gamma)
    w_feas = np.sign(feas @ theta - alpha[state_idx]) / q_state
    m = len(pair_idx)
    return (fs.loss_phi - (penalty / m) * (w_neg @ rows)
            + (penalty / m) * (w_feas @ feas))


def subgradient_estimate_disc(model: MdpModel, fs: FeatureSpace, sp: SamplingPair,
                              penalty: float, gamma: float,
                              alpha: np.ndarray | None, theta: np.ndarray,
                              rng: np.random.Generator | None = None,
                              pair_idx=None, state_idx=None) -> np.ndarray:
    """One unbiased subgradient draw for the discounted surrogate; explicit
    indices may replace the rng (support enumeration in tests)."""
    alpha = _check_state_distribution(model, alpha)
    if pair_idx is None or state_idx is None:
        if rng is None:
            raise ParameterError("either an rng or explicit indices are required")
        pair_idx = sp.sample_pairs(rng, 1)
        state_idx = sp.sample_states(rng, 1)
    return _grad_terms_disc(fs, sp, penalty, gamma, alpha, theta,
                            np.atleast_1d(pair_idx), np.atleast_1d(state_idx))


def project_theta_disc(theta: np.ndarray, radius: float) -> np.ndarray:
    """Radial shrink onto the ball of the given radius."""
    if radius <= 0:
        raise ParameterError("radius must be positive")
    theta = np.asarray(theta, dtype=float)
    norm = float(np.linalg.norm(theta))
    if norm <= radius:
        return theta
    return theta * (radius / norm)


def _violation_summands_disc(fs: FeatureSpace, sp: SamplingPair, gamma: float,
                             alpha: np.ndarray, theta: np.ndarray,
                             pair_idx: np.ndarray, state_idx: np.ndarray) -> np.ndarray:
    q_pair = sp.pair_prob(pair_idx)
    q_state = sp.state_prob(state_idx)
    importance_weight_guard(q_pair)
    importance_weight_guard(q_state)
    values = fs.rows(pair_idx) @ theta
    neg = np.abs(np.minimum(values, 0.0)) / q_pair
    resid = fs.feasibility_rows(state_idx, gamma) @ theta - alpha[state_idx]
    return neg + np.abs(resid) / q_state


def estimate_violations_disc(model: MdpModel, fs: FeatureSpace, sp: SamplingPair,
                             gamma: float, alpha: np.ndarray | None,
                             theta: np.ndarray, n: int, rng: np.random.Generator,
                             batch: int = 1 << 16) -> float:
    """Unbiased estimate of the discounted total violation from n draws."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    alpha = _check_state_distribution(model, alpha)
    total = 0.0
    remaining = n
    while remaining > 0:
        m = min(remaining, batch)
        pair_idx = sp.sample_pairs(rng, m)
        state_idx = sp.sample_states(rng, m)
        total += float(_violation_summands_disc(fs, sp, gamma, alpha, theta,
                                                pair_idx, state_idx).sum())
        remaining -= m
    return total / n


def _make_problem_disc(model: MdpModel, fs: FeatureSpace, sp: SamplingPair,
                       cfg: DiscSolverConfig, alpha: np.ndarray) -> SgdProblem:
    if cfg.minibatch == 1:
        gamma = cfg.discount
        grad_batch = make_buffered_grad(fs, sp, cfg.penalty,
                                        lambda states: fs.feasibility_rows(states, gamma),
                                        occ_base=np.zeros(model.num_pairs),
                                        res_base=-alpha)
    else:
        def grad_batch(theta, rng, m):
            pair_idx = sp.sample_pairs(rng, m)
            state_idx = sp.sample_states(rng, m)
            return _grad_terms_disc(fs, sp, cfg.penalty, cfg.discount, alpha, theta,
                                    pair_idx, state_idx)

    def violation_estimate(theta, rng):
        return estimate_violations_disc(model, fs, sp, cfg.discount, alpha, theta,
                                        cfg.trace_violation_samples, rng)

    def make_policy(theta):
        return policy_from_occupancy(fs.phi @ theta, model.num_actions)

    if cfg.enforce_sum_constraint:
        target = 1.0 / (1.0 - cfg.discount)
        project = lambda theta: project_theta_avg(theta, cfg.radius, target)
    else:
        project = lambda theta: project_theta_disc(theta, cfg.radius)

    return SgdProblem(dim=fs.dim, loss_phi=fs.loss_phi, objective_offset=0.0,
                      grad_batch=grad_batch, project=project,
                      violation_estimate=violation_estimate, make_policy=make_policy)


def sgd_solve_disc(model: MdpModel, fs: FeatureSpace, sp: SamplingPair,
                   cfg: DiscSolverConfig, eval_hook=None, iterate_hook=None) -> RunTrace:
    """Projected SGD on the discounted surrogate from theta_1 = 0."""
    alpha = _check_state_distribution(model, cfg.initial_dist)
    problem = _make_problem_disc(model, fs, sp, cfg, alpha)
    rate = resolve_learning_rate(cfg.learning_rate, cfg.radius, cfg.penalty,
                                 sp.c_pair, sp.c_state, fs.dim, cfg.iterations)
    return run_projected_sgd(problem, cfg.iterations, rate, cfg.seed,
                             minibatch=cfg.minibatch,
                             lr_halving_period=cfg.lr_halving_period,
                             trace_stride=cfg.trace_stride, eval_hook=eval_hook,
                             iterate_hook=iterate_hook)


def run_count_disc(penalty: float, radius: float, c_pair: float, c_state: float,
                   dim: int, tolerance: float, failure_prob: float) -> int:
    """Discounted per-point iteration budget, resolved by one fixed-point pass
    of the defining formula starting from T0 = S^2 H^2 / eps^2."""
    t0 = radius * radius * penalty * penalty / (tolerance * tolerance)
    inner = (penalty * (c_pair + c_state) + math.sqrt(dim)
             + 2.0 * math.sqrt(10.0 * math.log(1.0 / failure_prob))
             + 2.0 * math.sqrt(5.0 * dim * math.log1p(radius * radius * max(t0, 1.0) / dim)))
    return max(1, math.ceil(radius * radius / (tolerance * tolerance) * inner * inner))


def violation_sample_count_disc(radius: float, c_pair: float, c_state: float,
                                tolerance: float, failure_prob: float,
                                num_grid_points: int) -> int:
    """Estimation budget (S(C3 + 2 C4))^2 / (2 eps^2) * log(4K/delta)."""
    scale = radius * (c_pair + 2.0 * c_state)
    return max(1, math.ceil(scale * scale / (2.0 * tolerance * tolerance)
                            * math.log(4.0 * num_grid_points / failure_prob)))


def meta_solve_disc(model: MdpModel, fs: FeatureSpace, sp: SamplingPair, *,
                    gamma: float, alpha: np.ndarray | None, tolerance: float,
                    failure_prob: float, seed, radius: float,
                    violation_bound: float | None = None,
                    selection_weight: float | None = None,
                    learning_rate: float | str = "auto", minibatch: int = 1,
                    trace_stride: int | None = None, eval_hook=None,
                    enforce_sum_constraint: bool = False,
                    max_iterations_per_point: int | None = None) -> MetaResult:
    """Penalty-grid meta-algorithm for the discounted surrogate.

    Defaults: violation bound 4 sqrt(d) C S and selection weight
    6 sqrt(d) C S / (1 - gamma), with C the feature operator 1-norm bound.
    Selection minimizes  linear objective + (H + 1/(1-gamma)) * estimated
    violation + weight / (H (1-gamma)).

    The worst-case per-point iteration formula grows like (S H (C3+C4)/eps)^2
    and is far beyond what small instances need; ``max_iterations_per_point``
    caps it for budgeted runs (None keeps the formula).
    """
    if not 0.0 < gamma < 1.0:
        raise ParameterError("gamma must lie in (0, 1)")
    alpha = _check_state_distribution(model, alpha)
    scale = math.sqrt(fs.dim) * fs.column_norm_bound * radius
    if violation_bound is None:
        violation_bound = 4.0 * scale
    if selection_weight is None:
        selection_weight = 6.0 * scale / (1.0 - gamma)
    grid = build_penalty_grid(violation_bound, selection_weight, tolerance)
    num_points = len(grid)
    seeds = as_seed_sequence(seed).spawn(num_points)
    n_violation = violation_sample_count_disc(radius, sp.c_pair, sp.c_state,
                                              tolerance, failure_prob, num_points)
    traces, lin_objs, v_hats, run_counts = [], [], [], []
    for k, penalty in enumerate(grid.points):
        penalty = float(penalty)
        iterations = run_count_disc(penalty, radius, sp.c_pair, sp.c_state,
                                    fs.dim, tolerance, failure_prob)
        if max_iterations_per_point is not None:
            iterations = min(iterations, int(max_iterations_per_point))
        run_ss, est_ss = seeds[k].spawn(2)
        cfg = DiscSolverConfig(discount=gamma, penalty=penalty, radius=radius,
                               iterations=iterations, initial_dist=alpha,
                               learning_rate=learning_rate, minibatch=minibatch,
                               tolerance=tolerance, failure_prob=failure_prob,
                               seed=run_ss, trace_stride=trace_stride,
                               enforce_sum_constraint=enforce_sum_constraint)
        trace = sgd_solve_disc(model, fs, sp, cfg, eval_hook=eval_hook)
        traces.append(trace)
        run_counts.append(iterations)
        lin_objs.append(float(fs.loss_phi @ trace.theta))
        v_hats.append(estimate_violations_disc(model, fs, sp, gamma, alpha,
                                               trace.theta, n_violation,
                                               np.random.default_rng(est_ss)))
    points = np.asarray(grid.points, dtype=float)
    lin_objs = np.asarray(lin_objs)
    v_hats = np.asarray(v_hats)
    horizon = 1.0 / (1.0 - gamma)
    selection = lin_objs + (points + horizon) * v_hats + grid.weight / (points * (1.0 - gamma))
    chosen = int(np.argmin(selection))
    return MetaResult(grid_points=points, selection_weight=grid.weight, traces=traces,
                      linear_objectives=lin_objs, violation_estimates=v_hats,
                      selection_values=selection, chosen_index=chosen,
                      theta=traces[chosen].theta, policy=traces[chosen].policy,
                      iterations_per_point=np.asarray(run_counts, dtype=np.int64),
                      violation_samples=n_violation, discount=gamma)
