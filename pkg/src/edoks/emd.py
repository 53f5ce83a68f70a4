"""
Earth Mover's Distance between signatures via the transportation simplex.

The solver follows the classic formulation: northwest-corner start,
dual potentials from the basis tree, Bland's rule for both the entering
and the leaving cell. Unequal total weights are handled by a zero-cost
dummy row or column, which yields the partial matching where the total
flow equals the smaller total weight.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError, SolverError

EPS = 1e-12


def ground_distance(u, v):
    """L1 distance between two centroid vectors."""
    u = np.ravel(np.asarray(u, dtype=np.float64))
    v = np.ravel(np.asarray(v, dtype=np.float64))
    if u.shape != v.shape:
        raise DimensionMismatchError(f"vector sizes differ: {u.size} vs {v.size}")
    return float(np.abs(u - v).sum())


def l2_distance(u, v):
    u = np.ravel(np.asarray(u, dtype=np.float64))
    v = np.ravel(np.asarray(v, dtype=np.float64))
    if u.shape != v.shape:
        raise DimensionMismatchError(f"vector sizes differ: {u.size} vs {v.size}")
    return float(np.sqrt(((u - v) ** 2).sum()))


GROUND_DISTANCES = {"l1": ground_distance, "l2": l2_distance}


@dataclass(frozen=True)
class FlowMatrix:
    flows: np.ndarray
    total_flow: float


@dataclass(frozen=True)
class EmdResult:
    value: float
    flow: FlowMatrix
    cost: np.ndarray
    iterations: int = 0


def cost_matrix(a, b, distance=ground_distance):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(f"centroid dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    if distance is ground_distance:
        return np.abs(a[:, None, :] - b[None, :, :]).sum(axis=2)
    return np.array([[distance(u, v) for v in b] for u in a])


def _northwest_corner(supply, demand):
    n, m = len(supply), len(demand)
    s = supply.copy()
    d = demand.copy()
    flow = np.zeros((n, m))
    basis = []
    i = j = 0
    while True:
        x = min(s[i], d[j])
        flow[i, j] = x
        basis.append((i, j))
        s[i] -= x
        d[j] -= x
        if i == n - 1 and j == m - 1:
            break
        if j == m - 1 or (i < n - 1 and s[i] <= d[j]):
            i += 1
        else:
            j += 1
    return flow, basis


def _potentials(cost, basis, n, m):
    rows = [[] for _ in range(n)]
    cols = [[] for _ in range(m)]
    for (i, j) in basis:
        rows[i].append(j)
        cols[j].append(i)
    u = np.full(n, np.nan)
    v = np.full(m, np.nan)
    u[0] = 0.0
    queue = deque([("r", 0)])
    while queue:
        kind, idx = queue.popleft()
        if kind == "r":
            for j in rows[idx]:
                if np.isnan(v[j]):
                    v[j] = cost[idx, j] - u[idx]
                    queue.append(("c", j))
        else:
            for i in cols[idx]:
                if np.isnan(u[i]):
                    u[i] = cost[i, idx] - v[idx]
                    queue.append(("r", i))
    if np.isnan(u).any() or np.isnan(v).any():
        raise SolverError("basis does not span all rows and columns")
    return u, v


def _cycle(basis, n, entering):
    """Basis cells on the tree path closing a cycle with ``entering``.

    Row nodes are 0..n-1, column nodes are n..n+m-1. The path runs from
    the entering row to the entering column; its cells alternate
    minus, plus, ..., minus.
    """
    adj = {}
    for (i, j) in basis:
        adj.setdefault(i, []).append((n + j, (i, j)))
        adj.setdefault(n + j, []).append((i, (i, j)))
    start, goal = entering[0], n + entering[1]
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt, cell in adj.get(node, ()):
            if nxt not in prev:
                prev[nxt] = (node, cell)
                queue.append(nxt)
    if goal not in prev:
        raise SolverError(f"no cycle through entering cell {entering}")
    path = []
    node = goal
    while prev[node] is not None:
        node, cell = prev[node]
        path.append(cell)
    path.reverse()
    return path


def transport(supply, demand, cost, max_iter=10000):
    """Solve a balanced transportation problem. Returns (flow, iterations)."""
    supply = np.asarray(supply, dtype=np.float64)
    demand = np.asarray(demand, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    n, m = len(supply), len(demand)
    flow, basis = _northwest_corner(supply, demand)
    basis_set = set(basis)

    for it in range(max_iter):
        u, v = _potentials(cost, basis, n, m)
        reduced = cost - u[:, None] - v[None, :]
        entering = None
        # Bland: lowest-index improving cell enters.
        for i in range(n):
            for j in range(m):
                if (i, j) not in basis_set and reduced[i, j] < -EPS:
                    entering = (i, j)
                    break
            if entering is not None:
                break
        if entering is None:
            return flow, it

        path = _cycle(basis, n, entering)
        minus = path[0::2]
        theta = min(flow[c] for c in minus)
        # Bland: among the cells reaching zero, the lowest index leaves.
        leaving = min(c for c in minus if flow[c] - theta <= EPS)
        flow[entering] += theta
        for k, c in enumerate(path):
            flow[c] += -theta if k % 2 == 0 else theta
        for c in minus:
            if flow[c] < 0:
                flow[c] = 0.0
        flow[leaving] = 0.0
        basis.remove(leaving)
        basis_set.discard(leaving)
        basis.append(entering)
        basis_set.add(entering)

    raise SolverError(f"transportation simplex did not converge in {max_iter} iterations (n={n}, m={m})")


def _canonical_key(sig):
    return (sig.k, tuple(sig.weights.tolist()), tuple(sig.centroids.ravel().tolist()))


def _solve(wx, wy, cost):
    sx, sy = wx.sum(), wy.sum()
    if sx <= 0 or sy <= 0:
        raise InvalidInputError("signatures must carry positive total weight")
    n, m = len(wx), len(wy)
    if abs(sx - sy) <= EPS * max(sx, sy):
        # Absorb rounding so the problem is exactly balanced.
        wy = wy * (sx / sy)
        flow, its = transport(wx, wy, cost)
    elif sx > sy:
        c = np.hstack([cost, np.zeros((n, 1))])
        flow, its = transport(wx, np.append(wy, sx - sy), c)
        flow = flow[:, :m]
    else:
        c = np.vstack([cost, np.zeros((1, m))])
        flow, its = transport(np.append(wx, sy - sx), wy, c)
        flow = flow[:n, :]
    return flow, its


def emd(sx, sy, distance=ground_distance):
    """Earth Mover's Distance between two signatures.

    The value is the optimal transport cost divided by the total flow.
    Argument order does not change the result: the pair is solved in a
    canonical order and the flow transposed back when needed.
    """
    swap = _canonical_key(sy) < _canonical_key(sx)
    a, b = (sy, sx) if swap else (sx, sy)
    cost = cost_matrix(a.centroids, b.centroids, distance)
    flow, its = _solve(a.weights, b.weights, cost)
    total = float(flow.sum())
    value = float((cost * flow).sum() / total)
    if swap:
        flow = flow.T
        cost = cost.T
    return EmdResult(value, FlowMatrix(flow, total), cost, its)
