"""Feature subspace for the dual ALP: sparse feature matrix, baseline
occupancy, drift columns, and the importance-sampling distributions with their
coverage constants.

A feature matrix has one row per state-action pair (x-major flattening, as in
:mod:`dualalp.mdp`) and one column per feature. The drift of a feature column
at state x' under rate kappa is the d-vector (P - kappa*B)^T_{:,x'} Phi, i.e.
the one-step inflow minus kappa times the action-marginal at x'.

Feature spaces are immutable after construction apart from the internal memo
cache of drift/feasibility products, whose dict inserts are atomic, so sharing
one instance across threads is safe; samplers take the caller's generator, so
concurrent runs stay reproducible under per-run seeds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, InputShapeError, ParameterError, SamplingSupportError
from .mdp import MdpModel, _aggregation_matrix

ENUMERATION_GUARD = 10**6  # largest X*A for exhaustive constant computation
DENSE_CACHE_LIMIT = 2 * 10**7  # matrices below this many entries get dense caches


class FeatureSpace:
    """Feature matrix plus the precomputed products the solvers need.

    Parameters
    ----------
    model : MdpModel the features live on (drift columns use its kernel).
    phi : (X*A, d) sparse or dense feature matrix.
    mu0 : optional baseline occupancy (absent means the zero vector).
    normalize : divide every column by its absolute sum ("every feature sums
        to 1"); columns must not be identically zero when set.
    names : optional per-column labels, kept for reporting only.
    """

    def __init__(self, model: MdpModel, phi, mu0: np.ndarray | None = None,
                 normalize: bool = False, names: list[str] | None = None):
        self.model = model
        phi = sp.csr_matrix(phi, dtype=float)
        if phi.shape[0] != model.num_pairs:
            raise InputShapeError(
                f"phi must have {model.num_pairs} rows, got {phi.shape[0]}")
        if normalize:
            col_mass = np.asarray(abs(phi).sum(axis=0)).ravel()
            if np.any(col_mass <= 0):
                raise ParameterError("cannot normalize a feature column with zero mass")
            phi = (phi @ sp.diags(1.0 / col_mass)).tocsr()
        phi.sort_indices()
        self.phi = phi
        self.dim = phi.shape[1]
        if names is not None and len(names) != self.dim:
            raise InputShapeError("one name per feature column expected")
        self.names = list(names) if names is not None else None
        if mu0 is None:
            mu0 = np.zeros(model.num_pairs)
        else:
            mu0 = np.asarray(mu0, dtype=float)
            if mu0.shape != (model.num_pairs,):
                raise InputShapeError(f"mu0 must have length {model.num_pairs}")
        self.mu0 = mu0
        self.loss_phi = model.loss @ phi
        self.column_norm_bound = float(np.asarray(abs(phi).sum(axis=0)).max()) if phi.nnz else 0.0
        self._dense = phi.toarray() if phi.shape[0] * phi.shape[1] <= DENSE_CACHE_LIMIT else None
        self._drift_cache: dict = {}
        self._row_norms: np.ndarray | None = None

    # -- row access ---------------------------------------------------------

    def row(self, x: int, a: int) -> np.ndarray:
        """Dense copy of the feature row for pair (x, a)."""
        if not (0 <= x < self.model.num_states and 0 <= a < self.model.num_actions):
            raise InputShapeError(f"state-action ({x}, {a}) out of range")
        return self.rows(np.array([self.model.pair_index(x, a)]))[0]

    def rows(self, pair_idx: np.ndarray) -> np.ndarray:
        """(n, d) dense block of feature rows for the given pair indices."""
        if self._dense is not None:
            return self._dense[pair_idx]
        return self.phi[pair_idx].toarray()

    def row_norms(self) -> np.ndarray:
        """Euclidean norm of every feature row (length X*A)."""
        if self._row_norms is None:
            sq = self.phi.multiply(self.phi).sum(axis=1)
            self._row_norms = np.sqrt(np.asarray(sq).ravel())
        return self._row_norms

    # -- drift columns ------------------------------------------------------

    def _inflow_sparse(self) -> sp.csr_matrix:
        """(X, d) sparse P^T Phi: row x' aggregates feature rows of the pairs
        that flow into x', weighted by their transition probability."""
        cached = self._drift_cache.get("inflow")
        if cached is None:
            cached = (self.model.reverse_transitions @ self.phi).tocsr()
            self._drift_cache["inflow"] = cached
        return cached

    def _marginal_sparse(self) -> sp.csr_matrix:
        """(X, d) sparse B^T Phi: row x sums the feature rows of (x, a) over a."""
        cached = self._drift_cache.get("marginal")
        if cached is None:
            agg = _aggregation_matrix(self.model.num_states, self.model.num_actions)
            cached = (agg @ self.phi).tocsr()
            self._drift_cache["marginal"] = cached
        return cached

    def _combo_sparse(self, in_coef: float, marg_coef: float) -> sp.csr_matrix:
        key = ("sparse", float(in_coef), float(marg_coef))
        cached = self._drift_cache.get(key)
        if cached is None:
            cached = (in_coef * self._inflow_sparse()
                      + marg_coef * self._marginal_sparse()).tocsr()
            self._drift_cache[key] = cached
        return cached

    def _combo_matrix(self, in_coef: float, marg_coef: float) -> np.ndarray:
        key = ("matrix", float(in_coef), float(marg_coef))
        cached = self._drift_cache.get(key)
        if cached is None:
            cached = self._combo_sparse(in_coef, marg_coef).toarray()
            self._drift_cache[key] = cached
        return cached

    def drift_matrix(self, kappa: float) -> np.ndarray:
        """Dense (X, d) matrix whose row x' is (P - kappa*B)^T_{:,x'} Phi."""
        return self._combo_matrix(1.0, -kappa)

    def feasibility_matrix(self, kappa: float) -> np.ndarray:
        """Dense (X, d) matrix whose row x' is (B - kappa*P)^T_{:,x'} Phi.

        For kappa = 1 this is exactly the negated drift; for kappa < 1 the two
        operators are genuinely different and both are needed (the drift norm
        enters the coverage constants, the feasibility rows enter the
        discounted residual)."""
        return self._combo_matrix(-kappa, 1.0)

    def drift_column(self, x: int, kappa: float) -> np.ndarray:
        """(P - kappa*B)^T_{:,x} Phi as a dense d-vector; memoized per (x, kappa)."""
        return self._column(x, 1.0, -kappa)

    def feasibility_column(self, x: int, kappa: float) -> np.ndarray:
        """(B - kappa*P)^T_{:,x} Phi as a dense d-vector."""
        return self._column(x, -kappa, 1.0)

    def _column(self, x: int, in_coef: float, marg_coef: float) -> np.ndarray:
        if not 0 <= x < self.model.num_states:
            raise InputShapeError(f"state {x} out of range")
        if self._dense_drift_ok():
            return self._combo_matrix(in_coef, marg_coef)[x]
        key = (int(x), float(in_coef), float(marg_coef))
        cached = self._drift_cache.get(key)
        if cached is None:
            model = self.model
            inflow = (model.reverse_transitions[x] @ self.phi).toarray().ravel()
            base = x * model.num_actions
            marginal = np.asarray(
                self.phi[base:base + model.num_actions].sum(axis=0)).ravel()
            cached = in_coef * inflow + marg_coef * marginal
            self._drift_cache[key] = cached
        return cached

    def drift_rows(self, states: np.ndarray, kappa: float) -> np.ndarray:
        """(n, d) dense block of drift vectors for the given states."""
        if self._dense_drift_ok():
            return self.drift_matrix(kappa)[states]
        return np.stack([self.drift_column(int(x), kappa) for x in states])

    def feasibility_rows(self, states: np.ndarray, kappa: float) -> np.ndarray:
        """(n, d) dense block of feasibility vectors for the given states."""
        if self._dense_drift_ok():
            return self.feasibility_matrix(kappa)[states]
        return np.stack([self.feasibility_column(int(x), kappa) for x in states])

    def _dense_drift_ok(self) -> bool:
        return self.model.num_states * self.dim <= DENSE_CACHE_LIMIT

    # -- pointwise products -------------------------------------------------

    def occupancy_value(self, theta: np.ndarray, x: int, a: int) -> float:
        """mu0(x,a) + Phi_{(x,a),:} theta."""
        i = self.model.pair_index(x, a)
        return float(self.mu0[i] + self.row(x, a) @ theta)

    def occupancy_vector(self, theta: np.ndarray) -> np.ndarray:
        """Full mu0 + Phi theta over all pairs (dense, length X*A)."""
        return self.mu0 + self.phi @ theta


@dataclass(frozen=True)
class SamplingPair:
    """Constraint-sampling distributions over pairs and states.

    ``pair_probs`` / ``state_probs`` of None mean the uniform distribution.
    ``c_pair`` bounds max ||Phi_{(x,a),:}|| / q(x,a); ``c_state`` bounds
    max ||(P - kappa B)^T_{:,x} Phi|| / q(x) for this pair's kappa.
    """

    num_pairs: int
    num_states: int
    c_pair: float
    c_state: float
    kappa: float
    pair_probs: np.ndarray | None = None
    state_probs: np.ndarray | None = None

    def __post_init__(self):
        for name in ("pair_probs", "state_probs"):
            probs = getattr(self, name)
            if probs is not None:
                cum = np.cumsum(probs)
                cum[-1] = 1.0
                object.__setattr__(self, "_cum_" + name, cum)
            else:
                object.__setattr__(self, "_cum_" + name, None)

    def pair_prob(self, idx) -> np.ndarray:
        if self.pair_probs is None:
            return np.full(np.shape(idx), 1.0 / self.num_pairs)
        return self.pair_probs[idx]

    def state_prob(self, idx) -> np.ndarray:
        if self.state_probs is None:
            return np.full(np.shape(idx), 1.0 / self.num_states)
        return self.state_probs[idx]

    def sample_pairs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return _sample(self._cum_pair_probs, self.num_pairs, rng, size)

    def sample_states(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return _sample(self._cum_state_probs, self.num_states, rng, size)


def _sample(cum: np.ndarray | None, n: int, rng: np.random.Generator,
            size: int) -> np.ndarray:
    if cum is None:
        return rng.integers(0, n, size=size)
    return np.searchsorted(cum, rng.random(size), side="right").astype(np.int64)


def importance_weight_guard(prob: np.ndarray) -> None:
    """Raise if any sampled point carries zero sampling probability."""
    if np.any(prob <= 0.0):
        raise SamplingSupportError("sampled a point with zero sampling probability")


def _row_norms_sparse(matrix: sp.csr_matrix) -> np.ndarray:
    return np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())


def _drift_norms(fs: FeatureSpace, kappa: float) -> np.ndarray:
    """Per-state norm bound covering both one-step operators: the drift
    (P - kappa B)^T Phi and, when they differ (kappa < 1), the feasibility
    combination (B - kappa P)^T Phi used by the discounted residual."""
    norms = _row_norms_sparse(fs._combo_sparse(1.0, -kappa))
    if kappa != 1.0:
        feas = _row_norms_sparse(fs._combo_sparse(-kappa, 1.0))
        norms = np.maximum(norms, feas)
    return norms


def make_uniform_sampling(model: MdpModel, fs: FeatureSpace, kappa: float,
                          c_pair: float | None = None,
                          c_state: float | None = None) -> SamplingPair:
    """Uniform q over pairs and states. Coverage constants are computed by full
    enumeration when X*A is small enough, otherwise caller-supplied bounds are
    required."""
    if model.num_pairs > ENUMERATION_GUARD:
        if c_pair is None or c_state is None:
            raise CapacityError(
                "model too large to enumerate coverage constants; pass c_pair and c_state")
    else:
        if c_pair is None:
            c_pair = float(fs.row_norms().max(initial=0.0) * model.num_pairs)
        if c_state is None:
            c_state = float(_drift_norms(fs, kappa).max(initial=0.0) * model.num_states)
    return SamplingPair(num_pairs=model.num_pairs, num_states=model.num_states,
                        c_pair=float(c_pair), c_state=float(c_state), kappa=float(kappa))


def make_norm_proportional_sampling(model: MdpModel, fs: FeatureSpace,
                                    kappa: float) -> SamplingPair:
    """q over pairs proportional to feature-row norms, q over states
    proportional to the norm of the action-marginal of Phi at the state
    (one-step look-ahead choice). Requires positive normalizers and full
    coverage of the drift support."""
    if model.num_pairs > ENUMERATION_GUARD:
        raise CapacityError("norm-proportional sampling needs full enumeration")
    row_norms = fs.row_norms()
    z_pair = row_norms.sum()
    agg = _aggregation_matrix(model.num_states, model.num_actions)
    marg = agg @ fs.phi
    marg_norms = np.sqrt(np.asarray(marg.multiply(marg).sum(axis=1)).ravel())
    z_state = marg_norms.sum()
    if z_pair <= 0 or z_state <= 0:
        raise ParameterError("norm-proportional sampling needs a nonzero feature matrix")
    pair_probs = row_norms / z_pair
    state_probs = marg_norms / z_state
    drift_norms = _drift_norms(fs, kappa)
    covered = state_probs > 0
    if np.any(drift_norms[~covered] > 0):
        raise ParameterError(
            "state sampling distribution misses states with nonzero drift")
    c_pair = float(z_pair)  # ||row|| / (||row||/Z) = Z wherever q > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(covered, drift_norms / state_probs, 0.0)
    c_state = float(ratios.max(initial=0.0))
    return SamplingPair(num_pairs=model.num_pairs, num_states=model.num_states,
                        c_pair=c_pair, c_state=c_state, kappa=float(kappa),
                        pair_probs=pair_probs, state_probs=state_probs)
