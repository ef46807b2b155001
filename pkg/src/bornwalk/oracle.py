"""Exact absorption probabilities for lattice-discretized simplex walks.

The walk kernel restricted to the grid of integer compositions of Mends
up as a finite absorbing Markov chain: from a state with all coordinates
positive, a uniformly chosen pair exchanges one lattice unit, direction
by fair coin. A state with zero coordinates lives on a face and is the
same chain in fewer dimensions, so face states are resolved by recursion
and the vertices are the only terminal states. Absorption probabilities
come from direct sparse linear solves over the transient states, which
is the ground truth the Monte Carlo ensembles are compared against.
"""

from __future__ import annotations

import itertools
import json
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigInvalid, SizeExceeded, SolverFailure

DEFAULT_STATE_CAP = 200_000


def gamblers_ruin(start_k: int, M: int) -> float:
    """Probability the fair unit-step walk on {0..M} from start_k hits M before 0.

    Solves (I - Q) x = b over the transient states 1..M-1; the classical
    closed form start_k / M is what the tests pin this against.
    """
    if M < 1 or not (0 <= start_k <= M):
        raise ConfigInvalid(f"need 0 <= start_k <= M, got k={start_k}, M={M}", field="start_k")
    if start_k == 0:
        return 0.0
    if start_k == M:
        return 1.0
    size = M - 1
    main = np.ones(size)
    off = np.full(size - 1, -0.5)
    A = sp.diags([off, main, off], offsets=(-1, 0, 1), format="csc")
    b = np.zeros(size)
    b[-1] = 0.5  # one step from M-1 into the absorbing state M
    try:
        x = spla.spsolve(A, b)
    except Exception as exc:  # pragma: no cover - scipy failure surface
        raise SolverFailure(f"tridiagonal solve failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverFailure("tridiagonal solve produced non-finite values")
    return float(x[start_k - 1])


class LatticeChain:
    """Pair-transfer walk on compositions of M into n parts (h = 1/M)."""

    __slots__ = ("n", "M", "state_cap")

    def __init__(self, n: int, M: int, state_cap: int = DEFAULT_STATE_CAP):
        if n < 2:
            raise ConfigInvalid("need n >= 2", field="n")
        if M < 1:
            raise ConfigInvalid("need M >= 1", field="M")
        self.n = n
        self.M = M
        self.state_cap = state_cap

    def interior_states(self, n_active: int) -> list[tuple]:
        """Compositions of M into n_active strictly positive parts."""
        M = self.M
        return [
            c
            for c in itertools.product(range(1, M + 1), repeat=n_active - 1)
            if sum(c) < M
            for c in [(*c, M - sum(c))]
        ]

    def transitions(self, state: tuple):
        """(probability, successor) pairs for one step from an interior state."""
        na = len(state)
        pairs = [(i, j) for i in range(na) for j in range(i + 1, na)]
        p = 0.5 / len(pairs)
        out = []
        for i, j in pairs:
            up = list(state)
            up[i] += 1
            up[j] -= 1
            out.append((p, tuple(up)))
            dn = list(state)
            dn[i] -= 1
            dn[j] += 1
            out.append((p, tuple(dn)))
        return out


def _solve_dimension(chain: LatticeChain, n_active: int, lower: dict) -> dict:
    """Absorption matrix for every interior state with n_active positive parts.

    lower maps smaller-support states (as tuples of the positive parts) to
    their absorption vectors; vertices are the base case.
    """
    states = chain.interior_states(n_active)
    if not states:  # M < n_active: no interior, nothing to solve
        return {}
    if len(states) > chain.state_cap:
        raise SizeExceeded(
            f"{len(states)} transient states exceeds cap {chain.state_cap}"
        )
    index = {s: k for k, s in enumerate(states)}
    size = len(states)
    rows, cols, vals = [], [], []
    B = np.zeros((size, n_active))
    for s, k in index.items():
        for p, succ in chain.transitions(s):
            if 0 in succ:
                # face (or vertex) state: resolved by the smaller chain
                B[k] += p * _boundary_vector(succ, lower)
            else:
                rows.append(k)
                cols.append(index[succ])
                vals.append(p)
    Q = sp.csc_matrix((vals, (rows, cols)), shape=(size, size))
    A = sp.identity(size, format="csc") - Q
    try:
        X = spla.spsolve(A, B)
    except Exception as exc:  # pragma: no cover - scipy failure surface
        raise SolverFailure(f"absorption solve failed: {exc}") from exc
    X = np.atleast_2d(X)
    if X.shape != (size, n_active):
        X = X.reshape(size, n_active)
    if not np.all(np.isfinite(X)):
        raise SolverFailure("absorption solve produced non-finite values")
    return {s: X[k] for s, k in index.items()}


def _boundary_vector(state: tuple, lower: dict) -> np.ndarray:
    """Absorption vector of a state that just hit a face, in local coordinates."""
    na = len(state)
    support = [i for i, c in enumerate(state) if c > 0]
    out = np.zeros(na)
    if len(support) == 1:
        out[support[0]] = 1.0
        return out
    sub = tuple(state[i] for i in support)
    out[support] = lower[sub]
    return out


def lattice_absorption(chain: LatticeChain, start) -> np.ndarray:
    """Exact probability of ending at each vertex, starting from a lattice point.

    Face starts recurse into the sub-simplex chain; the martingale identity
    predicts the result equals start / M componentwise.
    """
    start = tuple(int(c) for c in start)
    if len(start) != chain.n or any(c < 0 for c in start) or sum(start) != chain.M:
        raise ConfigInvalid(
            f"start must be {chain.n} nonnegative integers summing to {chain.M}",
            field="start",
        )
    support = [i for i, c in enumerate(start) if c > 0]
    if len(support) == 1:
        out = np.zeros(chain.n)
        out[support[0]] = 1.0
        return out
    solutions: dict = {}
    for n_active in range(2, len(support) + 1):
        solutions.update(_solve_dimension(chain, n_active, solutions))
    out = np.zeros(chain.n)
    out[support] = solutions[tuple(start[i] for i in support)]
    return out


def absorption_to_json(chain: LatticeChain, start, absorption) -> str:
    doc = {
        "start": [int(c) for c in start],
        "absorption": [float(x) for x in absorption],
        "M": chain.M,
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def transition_matrix(chain: LatticeChain, n_active: int):
    """Row-stochastic transition matrix over interior states plus boundary mass.

    Returns (states, Q, R) where Q is interior-to-interior and R collects,
    per state, the one-step probability of leaving to each local vertex
    after resolving faces; rows of [Q | R] sum to 1.
    """
    states = chain.interior_states(n_active)
    if len(states) > chain.state_cap:
        raise SizeExceeded(f"{len(states)} transient states exceeds cap {chain.state_cap}")
    index = {s: k for k, s in enumerate(states)}
    size = len(states)
    Q = np.zeros((size, size))
    R = np.zeros((size, n_active))
    lower: dict = {}
    for na in range(2, n_active):
        lower.update(_solve_dimension(chain, na, lower))
    for s, k in index.items():
        for p, succ in chain.transitions(s):
            if 0 in succ:
                R[k] += p * _boundary_vector(succ, lower)
            else:
                Q[k, index[succ]] += p
    return states, Q, R
