"""
Primal network simplex for uncapacitated transportation problems.

Nodes are laid out as sources 0..m-1, sinks m..m+k-1 and an artificial root
R = m + k. Every source ships to R and R ships to every sink along big-M
arcs, which gives a feasible star-shaped starting tree. Entering and leaving
arcs follow Bland's smallest-index rule, so the pivot sequence is
deterministic and cannot cycle.
"""

import logging
from collections import deque

import numpy as np

from lorentzlab import global_params
from lorentzlab.errors import NumericalError, ParameterError

log = logging.getLogger(__name__)


class FlowSolution:
    def __init__(self, flows, potentials, objective, pivots, residual, feasible, artificial_flow):
        self.flows = flows
        self.potentials = potentials
        self.objective = objective
        self.pivots = pivots
        self.residual = residual
        self.feasible = feasible
        self.artificial_flow = artificial_flow

    def __repr__(self):
        return '<FlowSolution feasible=%s objective=%r pivots=%d>' % (
            self.feasible, self.objective, self.pivots)


class NetworkSimplex:
    def __init__(self, supply, demand, tails, heads, costs, eps=1e-12):
        """
        :param supply: length-m nonnegative source masses.
        :param demand: length-k nonnegative sink masses with the same total.
        :param tails: source index of each arc.
        :param heads: sink index of each arc.
        :param costs: finite arc costs to be minimized.
        """
        self.supply = np.asarray(supply, dtype=float)
        self.demand = np.asarray(demand, dtype=float)
        self.m = len(self.supply)
        self.k = len(self.demand)
        tails = np.asarray(tails, dtype=int)
        heads = np.asarray(heads, dtype=int)
        costs = np.asarray(costs, dtype=float)
        if not (tails.shape == heads.shape == costs.shape):
            raise ParameterError("arc arrays differ in length")
        if np.any(~np.isfinite(costs)):
            raise ParameterError("arc costs must be finite")
        if np.any(self.supply < 0) or np.any(self.demand < 0):
            raise ParameterError("supplies and demands must be nonnegative")
        gap = abs(self.supply.sum() - self.demand.sum())
        if gap > global_params.MARGINAL_TOL * max(1.0, self.supply.sum()):
            raise ParameterError("supply and demand totals differ", witness=gap)
        self.eps = eps
        self.n_real = len(costs)
        self.root = self.m + self.k
        big_m = (self.m + self.k + 1) * (np.abs(costs).max() if costs.size else 0.0) + 1.0
        self.big_m = big_m

        # real arcs first, then source->root, then root->sink
        self.tail = np.concatenate([tails, np.arange(self.m), np.full(self.k, self.root)])
        self.head = np.concatenate([self.m + heads, np.full(self.m, self.root),
                                    self.m + np.arange(self.k)])
        self.cost = np.concatenate([costs, np.full(self.m + self.k, big_m)])
        demand = self.demand
        if demand.sum() > 0:
            # conservation at the root must hold exactly
            demand = demand * (self.supply.sum() / demand.sum())
        self.flow = np.concatenate([np.zeros(self.n_real), self.supply, demand])
        self.in_tree = np.zeros(len(self.cost), dtype=bool)
        self.in_tree[self.n_real:] = True
        self.pivots = 0
        self._rebuild()

    def _rebuild(self):
        n_nodes = self.root + 1
        adjacency = [[] for _ in range(n_nodes)]
        for a in np.flatnonzero(self.in_tree):
            u, v = int(self.tail[a]), int(self.head[a])
            adjacency[u].append((int(a), v))
            adjacency[v].append((int(a), u))
        self.parent = np.full(n_nodes, -1)
        self.parent_arc = np.full(n_nodes, -1)
        self.depth = np.zeros(n_nodes, dtype=int)
        self.pi = np.zeros(n_nodes)
        seen = np.zeros(n_nodes, dtype=bool)
        seen[self.root] = True
        queue = deque([self.root])
        while queue:
            x = queue.popleft()
            for a, y in adjacency[x]:
                if seen[y]:
                    continue
                seen[y] = True
                self.parent[y] = x
                self.parent_arc[y] = a
                self.depth[y] = self.depth[x] + 1
                # reduced cost c - pi_tail + pi_head vanishes on tree arcs
                if self.tail[a] == y:
                    self.pi[y] = self.cost[a] + self.pi[x]
                else:
                    self.pi[y] = self.pi[x] - self.cost[a]
                queue.append(y)
        if not seen.all():
            raise NumericalError("spanning tree lost connectivity")

    def reduced_costs(self):
        return self.cost - self.pi[self.tail] + self.pi[self.head]

    def _entering(self):
        rc = self.reduced_costs()
        tol = self.eps * max(1.0, self.big_m)
        candidates = np.flatnonzero((rc < -tol) & ~self.in_tree)
        return int(candidates[0]) if candidates.size else None

    def _cycle(self, e):
        """Arcs of the pivot cycle as (arc, forward) pairs."""
        u, v = int(self.tail[e]), int(self.head[e])
        v_side = []
        u_side = []
        x, y = v, u
        while x != y:
            if self.depth[x] >= self.depth[y]:
                a = int(self.parent_arc[x])
                v_side.append((a, int(self.tail[a]) == x))
                x = int(self.parent[x])
            else:
                a = int(self.parent_arc[y])
                u_side.append((a, int(self.head[a]) == y))
                y = int(self.parent[y])
        return v_side + u_side

    def pivot(self, e):
        cycle = self._cycle(e)
        backward = [(a, self.flow[a]) for a, forward in cycle if not forward]
        if not backward:
            raise NumericalError("unbounded pivot cycle")
        delta = min(f for _, f in backward)
        leaving = min(a for a, f in backward if f <= delta)
        for a, forward in cycle:
            self.flow[a] += delta if forward else -delta
        self.flow[e] += delta
        self.flow[self.flow < 0] = 0.0
        self.in_tree[leaving] = False
        self.in_tree[e] = True
        self.pivots += 1
        self._rebuild()

    def solve(self):
        cap = max(global_params.PIVOT_FACTOR * len(self.cost), 100)
        while True:
            e = self._entering()
            if e is None:
                break
            if self.pivots >= cap:
                raise NumericalError("network simplex exceeded %d pivots" % cap)
            self.pivot(e)
        artificial_flow = float(self.flow[self.n_real:self.n_real + self.m].sum())
        flows = self.flow[:self.n_real].copy()
        rc = self.reduced_costs()[:self.n_real]
        dual_violation = float(np.maximum(-rc, 0.0).max()) if rc.size else 0.0
        slack = np.abs(rc[flows > self.eps])
        residual = max(dual_violation, float(slack.max()) if slack.size else 0.0)
        feasible = artificial_flow <= global_params.MARGINAL_TOL
        objective = float(self.cost[:self.n_real] @ flows)
        log.debug("network simplex: %d arcs, %d pivots, objective %r, artificial flow %g",
                  self.n_real, self.pivots, objective, artificial_flow)
        return FlowSolution(flows, self.pi.copy(), objective, self.pivots, residual, feasible,
                            artificial_flow)


def solve_transportation(supply, demand, tails, heads, costs, maximize=False):
    """
    Optimal flow of an uncapacitated transportation problem.

    :return: FlowSolution; objective and potentials refer to the costs as
             given (signs restored when maximize=True).
    """
    costs = np.asarray(costs, dtype=float)
    solver = NetworkSimplex(supply, demand, tails, heads, -costs if maximize else costs)
    solution = solver.solve()
    if maximize:
        solution.objective = -solution.objective
        solution.potentials = -solution.potentials
    if solution.feasible and solution.residual > global_params.SLACKNESS_TOL * max(1.0, solver.big_m):
        log.warning("complementary slackness residual %g above tolerance", solution.residual)
    return solution
