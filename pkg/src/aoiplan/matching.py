"""Per-slot resource-block assignment as min-cost bipartite b-matching.

Each slot's assignment subproblem is a linear program over 0/1-relaxed
variables with unit capacity on the RB side and a load cap on the BS side.
Its constraint matrix is totally unimodular, so an integral optimum always
exists; this module finds one directly with a successive-shortest-path
min-cost flow that only augments along negative-cost paths (the empty
assignment is feasible, so positive-weight edges are never selected).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

__all__ = ["AssignmentProblem", "BinaryAssignment", "min_cost_b_matching", "limit_assignments"]


@dataclass(frozen=True)
class AssignmentProblem:
    """weights[n, k] is the cost of giving RB k to BS n; cap bounds each row."""

    weights: np.ndarray
    bs_capacity: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2:
            raise ValueError("weights must be an (N, K) matrix")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not (isinstance(self.bs_capacity, (int, np.integer)) and self.bs_capacity >= 1):
            raise ValueError(f"bs_capacity must be an integer >= 1, got {self.bs_capacity!r}")
        object.__setattr__(self, "weights", w)


@dataclass
class BinaryAssignment:
    select: np.ndarray  # (N, K) of {0, 1}
    total_weight: float


def _ssp(weights: np.ndarray, cap: int) -> np.ndarray:
    """Successive-shortest-path min-cost flow on the strictly-negative edges."""
    N, K = weights.shape
    pairs = [(n, k) for n in range(N) for k in range(K) if weights[n, k] < 0.0]
    select = np.zeros((N, K), dtype=np.int8)
    if not pairs:
        return select

    SRC = 0
    SNK = 1 + N + K
    nnode = N + K + 2
    head = [[] for _ in range(nnode)]
    eto, ecap, ecost = [], [], []

    def add(u, v, c, w):
        head[u].append(len(eto)); eto.append(v); ecap.append(c); ecost.append(w)
        head[v].append(len(eto)); eto.append(u); ecap.append(0); ecost.append(-w)

    rows = sorted({n for n, _ in pairs})
    cols = sorted({k for _, k in pairs})
    for n in rows:
        add(SRC, 1 + n, cap, 0.0)
    pair_edges = []
    for n, k in pairs:
        pair_edges.append((len(eto), n, k))
        add(1 + n, 1 + N + k, 1, float(weights[n, k]))
    for k in cols:
        add(1 + N + k, SNK, 1, 0.0)

    # valid initial potentials: forward shortest distances in the s->BS->RB->t DAG
    pot = [0.0] * nnode
    rb_dist = {k: 0.0 for k in cols}
    for n, k in pairs:
        w = float(weights[n, k])
        if w < rb_dist[k]:
            rb_dist[k] = w
    for k, d in rb_dist.items():
        pot[1 + N + k] = d
    pot[SNK] = min(rb_dist.values())

    stop_tol = 1e-12 * (1.0 + float(np.abs(weights).max()))
    INF = float("inf")

    while True:
        dist = [INF] * nnode
        prev = [-1] * nnode
        done = [False] * nnode
        dist[SRC] = 0.0
        heap = [(0.0, SRC)]
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            pu = pot[u]
            for e in head[u]:
                if ecap[e] <= 0:
                    continue
                v = eto[e]
                if done[v]:
                    continue
                rc = ecost[e] + pu - pot[v]
                if rc < 0.0:
                    rc = 0.0  # clip FP noise; true reduced costs are >= 0
                nd = d + rc
                if nd < dist[v]:
                    dist[v] = nd
                    prev[v] = e
                    heapq.heappush(heap, (nd, v))
        if dist[SNK] == INF:
            break
        true_cost = dist[SNK] + pot[SNK] - pot[SRC]
        if true_cost >= -stop_tol:
            break
        d_snk = dist[SNK]
        for v in range(nnode):
            pot[v] += dist[v] if dist[v] < d_snk else d_snk
        v = SNK
        while v != SRC:
            e = prev[v]
            ecap[e] -= 1
            ecap[e ^ 1] += 1
            v = eto[e ^ 1]

    for eid, n, k in pair_edges:
        if ecap[eid] == 0:
            select[n, k] = 1
    return select


def min_cost_b_matching(problem: AssignmentProblem) -> BinaryAssignment:
    """Minimize sum(w * a) over binary assignments with both capacity families.

    Only strictly negative edges can appear in an optimum (dropping a
    non-negative edge never hurts), so all-positive weights yield the empty
    assignment.  Ties break toward the lowest (n, k) index.
    """
    w = problem.weights
    cap = int(problem.bs_capacity)
    N, K = w.shape

    col_min = w.min(axis=0)
    active_cols = col_min < 0.0
    if not active_cols.any():
        return BinaryAssignment(np.zeros((N, K), dtype=np.int8), 0.0)

    # fast path: per-column best row, valid whenever it respects the row cap
    best_row = np.argmin(w, axis=0)
    counts = np.bincount(best_row[active_cols], minlength=N)
    if counts.max() <= cap:
        select = np.zeros((N, K), dtype=np.int8)
        select[best_row[active_cols], np.nonzero(active_cols)[0]] = 1
    else:
        select = _ssp(w, cap)
    total = float(np.sum(w[select.astype(bool)]))
    return BinaryAssignment(select, total)


def limit_assignments(level: float, weight_fn, bs_capacity: int,
                      rel_eps: float = 1e-7, abs_floor: float = 1e-12):
    """Left/right-limit assignments around a water level.

    Evaluates the matching at level*(1 -/+ eps) with a relative
    perturbation (absolute floor guards level ~ 0), approximating the
    one-sided limits at a critical point.  Away from criticals both sides
    coincide.
    """
    eps = max(abs(level) * rel_eps, abs_floor)
    lo = min_cost_b_matching(AssignmentProblem(weight_fn(level - eps), bs_capacity))
    hi = min_cost_b_matching(AssignmentProblem(weight_fn(level + eps), bs_capacity))
    return lo, hi
