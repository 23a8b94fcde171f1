"""Sequential multi-copy discrimination with Bayesian feedforward.

The signal is split into N identical copies of amplitude alpha/sqrt(N),
measured one after another.  Before each detection the currently favored
hypothesis (posterior >= 1/2, ties toward hypothesis 0) is displaced to the
vacuum and the single-shot receiver parameters are tuned for the current
posteriors; the observed click/no-click outcome then updates the posteriors
exactly.  All 2^N outcome histories are enumerated into an explicit tree,
so success probabilities are exact sums, not samples.

Two tuning policies are available.  The default greedy policy optimizes each
node's parameters for that node's own single-shot success.  The backward
policy (N <= 4, schemes without a squeezer) runs true backward induction
over a fixed 129-point displacement menu: each node's action maximizes the
exact expected value of the whole remaining subtree.  Greedy refines each
displacement continuously but myopically; backward optimizes globally over
the menu grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from cohdisc.fock import DEFAULT_POLICY, CutoffPolicy, choose_cutoff
from cohdisc.optimize import COARSE_1D
from cohdisc.receivers import (
    TS_SCHEMES,
    ReceiverSpec,
    _pipeline_states,
    optimize_receiver,
)

__all__ = [
    "TreeLeaf",
    "TreeNode",
    "OutcomeTree",
    "build_tree",
    "success_probability_tree",
]

MAX_DEPTH = 10
MAX_BACKWARD_DEPTH = 4


@dataclass(frozen=True)
class TreeLeaf:
    """Terminal history: joint probabilities q_h * P(history|h) and the MAP call."""

    joint: tuple[float, float]
    decision: int


@dataclass(frozen=True)
class TreeNode:
    """One detection step: posteriors, tuned parameters, branch probabilities."""

    priors: tuple[float, float]
    beta: float
    r: float
    p_no_click: tuple[float, float]
    no_click: Union["TreeNode", TreeLeaf]
    click: Union["TreeNode", TreeLeaf]


@dataclass(frozen=True)
class OutcomeTree:
    """Fully enumerated adaptive measurement plan of depth N."""

    scheme: str
    alpha: float
    q0: float
    depth: int
    g: float
    n: int
    mode: str
    root: Union[TreeNode, TreeLeaf]


def build_tree(
    scheme: str,
    alpha: float,
    q0: float = 0.5,
    N: int = 1,
    *,
    g: float = 1.0,
    n: int = 0,
    mode: str = "greedy",
    tolerance: float = 1e-7,
    max_evals: int = 10000,
    policy: CutoffPolicy = DEFAULT_POLICY,
) -> OutcomeTree:
    """Enumerate the N-copy adaptive receiver for the given scheme."""
    if not isinstance(N, int) or not 1 <= N <= MAX_DEPTH:
        raise ValueError(f"copy count must be an integer in [1, {MAX_DEPTH}], got {N!r}")
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
    if not 0.5 <= q0 <= 1.0:
        raise ValueError(f"favored prior must lie in [0.5, 1], got {q0!r}")
    if mode not in ("greedy", "backward"):
        raise ValueError(f"mode must be 'greedy' or 'backward', got {mode!r}")
    alpha_c = alpha / math.sqrt(N)
    if mode == "greedy":
        root = _grow_greedy(
            q0, 1.0 - q0, N, scheme, alpha_c, g, n, tolerance, max_evals, policy
        )
    else:
        if N > MAX_BACKWARD_DEPTH:
            raise ValueError(f"backward mode supports at most {MAX_BACKWARD_DEPTH} copies")
        if scheme in TS_SCHEMES:
            raise ValueError("backward mode does not cover squeezing schemes")
        root = _grow_backward(scheme, alpha_c, q0, N, g, n, policy)
    return OutcomeTree(
        scheme=scheme, alpha=alpha, q0=q0, depth=N, g=g, n=n, mode=mode, root=root
    )


def _grow_greedy(j0, j1, m, scheme, alpha_c, g, n, tolerance, max_evals, policy):
    if m == 0:
        return TreeLeaf(joint=(j0, j1), decision=0 if j0 >= j1 else 1)
    total = j0 + j1
    q0n = j0 / total if total > 0.0 else 0.5
    favored = 0 if q0n >= 0.5 else 1
    qf = q0n if favored == 0 else 1.0 - q0n
    beta, r, res = optimize_receiver(
        scheme, alpha_c, qf, g=g, n=n, tolerance=tolerance, max_evals=max_evals, policy=policy
    )
    if favored == 0:
        pnc = (res.p_no_click_h0, res.p_no_click_h1)
    else:
        pnc = (res.p_no_click_h1, res.p_no_click_h0)
    kid_nc = _grow_greedy(
        j0 * pnc[0], j1 * pnc[1], m - 1, scheme, alpha_c, g, n, tolerance, max_evals, policy
    )
    kid_c = _grow_greedy(
        j0 * (1.0 - pnc[0]),
        j1 * (1.0 - pnc[1]),
        m - 1,
        scheme,
        alpha_c,
        g,
        n,
        tolerance,
        max_evals,
        policy,
    )
    return TreeNode(
        priors=(q0n, 1.0 - q0n), beta=beta, r=r, p_no_click=pnc, no_click=kid_nc, click=kid_c
    )


class _MenuPlanner:
    """Backward induction over a fixed displacement menu.

    The two channel outputs are fixed for the whole tree (every node sees the
    same pair of candidate states in its own nulling frame), so the menu's
    no-click probabilities are two length-129 tables.  Values are memoized on
    the exact node posterior so materializing the tree reuses the search.
    """

    def __init__(self, scheme, alpha_c, g, n, policy):
        bhi = 3.0 * alpha_c + 1.0
        d = choose_cutoff(2.0 * alpha_c + bhi, policy)
        template = ReceiverSpec(scheme=scheme, g=g, n=n)
        rho0, rho1 = _pipeline_states(template, alpha_c, d)
        self.menu = np.linspace(-bhi, bhi, COARSE_1D)
        probes = np.empty((COARSE_1D, d))
        probes[:, 0] = np.exp(-self.menu**2 / 2.0)
        for k in range(1, d):
            probes[:, k] = probes[:, k - 1] * self.menu / math.sqrt(k)
        self.p0 = np.clip(np.einsum("ij,jk,ik->i", probes, rho0.matrix, probes).real, 0.0, 1.0)
        self.p1 = np.clip(np.einsum("ij,jk,ik->i", probes, rho1.matrix, probes).real, 0.0, 1.0)
        self._memo: dict[tuple[float, int], tuple[float, int]] = {}

    def _tables(self, q: float):
        # Null the favored hypothesis: swap the conditional tables when the
        # posterior favors hypothesis 1.
        if q >= 0.5:
            return self.p0, self.p1
        return self.p1, self.p0

    def _value_vec(self, qs: np.ndarray, m: int) -> np.ndarray:
        if m == 0:
            return np.maximum(qs, 1.0 - qs)
        return np.array([self.node(float(q), m)[0] for q in qs])

    def node(self, q: float, m: int) -> tuple[float, int]:
        """Best expected success (value, menu index) with m copies left."""
        if m == 0:
            return max(q, 1.0 - q), -1
        key = (q, m)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        t0, t1 = self._tables(q)
        t_nc = q * t0 + (1.0 - q) * t1
        t_c = 1.0 - t_nc
        q_nc = np.divide(q * t0, t_nc, out=np.full_like(t_nc, 0.5), where=t_nc > 0.0)
        q_c = np.divide(q * (1.0 - t0), t_c, out=np.full_like(t_c, 0.5), where=t_c > 0.0)
        if m == 1:
            vals = t_nc * np.maximum(q_nc, 1.0 - q_nc) + t_c * np.maximum(q_c, 1.0 - q_c)
        else:
            vals = t_nc * self._value_vec(q_nc, m - 1) + t_c * self._value_vec(q_c, m - 1)
        best = int(np.argmax(vals))
        out = (float(vals[best]), best)
        self._memo[key] = out
        return out

    def materialize(self, j0: float, j1: float, m: int):
        if m == 0:
            return TreeLeaf(joint=(j0, j1), decision=0 if j0 >= j1 else 1)
        total = j0 + j1
        q = j0 / total if total > 0.0 else 0.5
        _, best = self.node(q, m)
        t0, t1 = self._tables(q)
        pnc = (float(t0[best]), float(t1[best]))
        kid_nc = self.materialize(j0 * pnc[0], j1 * pnc[1], m - 1)
        kid_c = self.materialize(j0 * (1.0 - pnc[0]), j1 * (1.0 - pnc[1]), m - 1)
        return TreeNode(
            priors=(q, 1.0 - q),
            beta=float(self.menu[best]),
            r=0.0,
            p_no_click=pnc,
            no_click=kid_nc,
            click=kid_c,
        )


def _grow_backward(scheme, alpha_c, q0, N, g, n, policy):
    planner = _MenuPlanner(scheme, alpha_c, g, n, policy)
    return planner.materialize(q0, 1.0 - q0, N)


def success_probability_tree(tree: OutcomeTree) -> float:
    """Probability that the MAP call at the reached leaf names the true state."""

    def walk(node):
        if isinstance(node, TreeLeaf):
            return node.joint[node.decision]
        return walk(node.no_click) + walk(node.click)

    return walk(tree.root)
