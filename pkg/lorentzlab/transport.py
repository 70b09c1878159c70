"""
l_q Lorentz-Wasserstein transport between discrete measures.

The optimal causal coupling is found by the network simplex of
network_simplex.py on the bipartite graph of causal pairs; non-causal pairs
are simply not arcs. Infinite separations are handled by staged solves so no
infinite cost ever reaches the solver.
"""

import itertools
import logging
from fractions import Fraction

import numpy as np

from lorentzlab import global_params
from lorentzlab.curves import SampledCausalPath, q_action
from lorentzlab.errors import (IntermediatePointError, NumericalError,
                               ParameterError, PlanLiftError, PreconditionError)
from lorentzlab.network_simplex import solve_transportation
from lorentzlab.report import CyclicalMonotonicityReport, DualityReport
from lorentzlab.smt_oracle import exact_transport_value
from lorentzlab.utils import (FINITE, NEG, POS, ExtendedReal, ExtendedTime,
                              NEG_INF, POS_INF, check_transport_exponent,
                              ext_add_arrays, ext_power, ext_sub, lq_cost,
                              lq_cost_arrays, make_rng)

log = logging.getLogger(__name__)


class DiscreteMeasure:
    def __init__(self, weights, normalize=False):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size == 0:
            raise ParameterError("measure weights must be a nonempty vector")
        if np.any(~np.isfinite(weights)) or np.any(weights < 0):
            raise ParameterError("measure weights must be finite and nonnegative")
        total = weights.sum()
        if normalize and total > 0:
            weights = weights / total
        elif abs(total - 1.0) > global_params.MEASURE_TOL:
            raise ParameterError("measure weights must sum to 1", witness=float(total))
        self.weights = np.array(weights, copy=True)
        self.weights.setflags(write=False)

    @classmethod
    def dirac(cls, n, i):
        w = np.zeros(int(n))
        w[int(i)] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, n, indices):
        indices = sorted(set(int(i) for i in indices))
        if not indices:
            raise ParameterError("uniform measure needs a nonempty support")
        w = np.zeros(int(n))
        w[indices] = 1.0 / len(indices)
        return cls(w, normalize=True)

    @classmethod
    def from_pairs(cls, n, pairs, normalize=False):
        w = np.zeros(int(n))
        for i, weight in pairs:
            w[int(i)] += float(weight)
        return cls(w, normalize=normalize)

    @property
    def n_points(self):
        return len(self.weights)

    @property
    def support(self):
        return np.flatnonzero(self.weights > 0)

    def integrate(self, tags, values):
        """Integral of an extended-valued function (tags, values) over the support."""
        spt = self.support
        t = np.asarray(tags)[spt]
        if np.any(t == POS) and np.any(t == NEG):
            return None
        if np.any(t == POS):
            return ExtendedReal(tag=POS)
        if np.any(t == NEG):
            return ExtendedReal(tag=NEG)
        return ExtendedReal(float(np.asarray(values)[spt] @ self.weights[spt]))

    def items(self):
        return [(int(i), float(self.weights[i])) for i in self.support]

    def __eq__(self, other):
        return isinstance(other, DiscreteMeasure) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return '<DiscreteMeasure support=%d>' % len(self.support)


class Coupling:
    """Transport plan on support(mu) x support(nu); pi[r, c] pairs rows[r] with cols[c]."""

    def __init__(self, rows, cols, pi, potentials=None, info=None):
        self.rows = np.asarray(rows, dtype=int)
        self.cols = np.asarray(cols, dtype=int)
        self.pi = np.asarray(pi, dtype=float)
        self.potentials = potentials
        self.info = dict(info or {})

    @classmethod
    def from_entries(cls, entries, info=None):
        """Aggregate (x, y, mass) triples."""
        masses = {}
        for x, y, mass in entries:
            masses[(int(x), int(y))] = masses.get((int(x), int(y)), 0.0) + float(mass)
        rows = sorted(set(x for x, _ in masses))
        cols = sorted(set(y for _, y in masses))
        r_pos = dict((x, k) for k, x in enumerate(rows))
        c_pos = dict((y, k) for k, y in enumerate(cols))
        pi = np.zeros((len(rows), len(cols)))
        for (x, y), mass in masses.items():
            pi[r_pos[x], c_pos[y]] = mass
        return cls(rows, cols, pi, info=info)

    @property
    def degenerate(self):
        return bool(self.info.get('degenerate', False))

    def entries(self):
        return [(int(self.rows[r]), int(self.cols[c]), float(self.pi[r, c]))
                for r, c in np.argwhere(self.pi > 0)]

    def support_pairs(self):
        return [(x, y) for x, y, _ in self.entries()]

    def marginals(self, n_points):
        first = np.zeros(n_points)
        second = np.zeros(n_points)
        first[self.rows] = self.pi.sum(axis=1)
        second[self.cols] = self.pi.sum(axis=0)
        return first, second

    def marginal_error(self, mu, nu):
        first, second = self.marginals(mu.n_points)
        return max(float(np.abs(first - mu.weights).max()), float(np.abs(second - nu.weights).max()))

    def is_causal(self, spacetime):
        return all(spacetime.tags[x, y] != NEG for x, y in self.support_pairs())

    def __repr__(self):
        return '<Coupling %dx%d%s>' % (len(self.rows), len(self.cols),
                                       ' degenerate' if self.degenerate else '')


class DiscretePlan:
    """Dynamical plan: weighted causal paths through a dyadic interpolation."""

    def __init__(self, times, atoms, couplings):
        self.times = np.asarray(times, dtype=float)
        self.atoms = atoms
        self.couplings = couplings

    def slice(self, k, n_points):
        w = np.zeros(n_points)
        for path, weight in self.atoms:
            w[path.indices[k]] += weight
        return DiscreteMeasure(w, normalize=True)

    def action(self, q, depth=0):
        total = ExtendedReal(0.0)
        for path, weight in self.atoms:
            total = total + q_action(path, q, depth=depth) * ExtendedReal(weight)
        return total

    def endpoint_statistics(self, q):
        """Sum over atoms of weight * l(gamma_0, gamma_1)**q."""
        total = ExtendedReal(0.0)
        for path, weight in self.atoms:
            total = total + ext_power(path.endpoint_separation(), q) * ExtendedReal(weight)
        return total

    def __len__(self):
        return len(self.atoms)


class KantorovichPotential:
    """Extended-valued function on the points; +inf marks points outside its domain."""

    def __init__(self, tags, values, q):
        self.tags = np.asarray(tags, dtype=np.int8)
        self.values = np.where(self.tags == FINITE, np.asarray(values, dtype=float), 0.0)
        self.q = float(q)

    @classmethod
    def from_array(cls, arr, q):
        arr = np.asarray(arr, dtype=float)
        tags = np.zeros(arr.shape, dtype=np.int8)
        tags[arr == np.inf] = POS
        tags[arr == -np.inf] = NEG
        return cls(tags, np.where(np.isfinite(arr), arr, 0.0), q)

    @property
    def domain(self):
        return np.flatnonzero(self.tags == FINITE)

    def __getitem__(self, i):
        return ExtendedReal(self.values[i], int(self.tags[i]))

    def as_array(self):
        out = self.values.copy()
        out[self.tags == POS] = np.inf
        out[self.tags == NEG] = -np.inf
        return out


# ---------------------------------------------------------------------------
# Optimal couplings
# ---------------------------------------------------------------------------

def _block(spacetime, rows, cols):
    return spacetime.tags[np.ix_(rows, cols)], spacetime.values[np.ix_(rows, cols)]


def _solve(a, b, mask, weights, maximize):
    r, c = np.nonzero(mask)
    costs = weights[r, c] if r.size else np.zeros(0)
    solution = solve_transportation(a, b, r, c, costs, maximize=maximize)
    pi = np.zeros(mask.shape)
    flows = np.where(solution.flows > 1e-15, solution.flows, 0.0)
    pi[r, c] = flows
    return solution, pi, (r, c, costs)


def _coupling(rows, cols, pi, solution, **info):
    m = len(rows)
    potentials = (solution.potentials[:m].copy(), solution.potentials[m:m + len(cols)].copy())
    info.setdefault('pivots', solution.pivots)
    info.setdefault('residual', solution.residual)
    return Coupling(rows, cols, pi, potentials=potentials, info=info)


def _certify(a, b, arcs, objective, maximize):
    r, c, costs = arcs
    if max(len(a), len(b)) > global_params.EXACT_ORACLE_LIMIT:
        log.info("support too large for the exact oracle, certification skipped")
        return None
    exact = exact_transport_value(a, b, r, c, costs, maximize=maximize)
    if exact is None:
        raise NumericalError("exact oracle found no coupling where the network simplex did")
    if abs(exact - objective) > global_params.SLACKNESS_TOL * max(1.0, abs(exact)):
        raise NumericalError("network simplex optimum %r differs from the exact optimum %r"
                             % (objective, exact))
    return exact


def lq_distance(spacetime, mu, nu, q, certify=False):
    """
    l_q(mu, nu) = sup over causal couplings of (int l**q dpi)**(1/q).

    :return: (ExtendedTime, Coupling); the coupling is None when no causal
             coupling exists and the distance is -inf.
    """
    check_transport_exponent(q)
    q = float(q)
    rows, cols = mu.support, nu.support
    a, b = mu.weights[rows], nu.weights[cols]
    tags, values = _block(spacetime, rows, cols)
    causal = tags != NEG

    if q > 0:
        infinite = tags == POS
        if infinite.any():
            sol, pi, _ = _solve(a, b, causal, infinite.astype(float), True)
            if not sol.feasible:
                return NEG_INF, None
            if sol.objective > global_params.MARGINAL_TOL:
                log.info("l_q is +inf: %g of the mass can ride infinite separations", sol.objective)
                return POS_INF, _coupling(rows, cols, pi, sol, infinite_mass=sol.objective)
        finite = causal & (tags == FINITE)
        weights = np.where(finite, values, 0.0) ** q
        sol, pi, arcs = _solve(a, b, finite, weights, True)
        if not sol.feasible:
            return NEG_INF, None
        objective = max(sol.objective, 0.0)
        if certify:
            _certify(a, b, arcs, sol.objective, True)
        return ExtendedTime(objective ** (1.0 / q)), _coupling(rows, cols, pi, sol, objective=objective)

    chronological = (tags == POS) | ((tags == FINITE) & (values > 0))
    weights = np.where(tags == FINITE, np.where(values > 0, values, 1.0), 1.0) ** q
    weights = np.where(tags == POS, 0.0, weights)
    sol, pi, arcs = _solve(a, b, chronological, weights, False)
    if sol.feasible:
        if certify:
            _certify(a, b, arcs, sol.objective, False)
        if sol.objective <= 0.0:
            return POS_INF, _coupling(rows, cols, pi, sol, objective=0.0)
        return (ExtendedTime(sol.objective ** (1.0 / q)),
                _coupling(rows, cols, pi, sol, objective=sol.objective))
    sol, pi, _ = _solve(a, b, causal, np.zeros(causal.shape), False)
    if not sol.feasible:
        return NEG_INF, None
    log.warning("every causal coupling charges a null pair; l_q = 0 with a degenerate coupling")
    return ExtendedTime(0.0), _coupling(rows, cols, pi, sol, degenerate=True, objective=np.inf)


def transport_value(spacetime, coupling, q):
    """int l**q dpi with 0**q = +inf for q < 0; -inf if the coupling is not causal."""
    total = ExtendedReal(0.0)
    for x, y, mass in coupling.entries():
        ell = spacetime.ell(x, y)
        if ell.is_neg_inf():
            return ExtendedReal(tag=NEG)
        total = total + ext_power(ell, q) * ExtendedReal(mass)
    return total


def reverse_triangle_lq(spacetime, mu, xi, nu, q, tol=None):
    """
    l_q(mu, nu) - l_q(mu, xi) - l_q(xi, nu) under the infinity conventions.
    A defect below -tol is logged.
    """
    tol = global_params.TOL if tol is None else tol
    direct, _ = lq_distance(spacetime, mu, nu, q)
    first, _ = lq_distance(spacetime, mu, xi, q)
    second, _ = lq_distance(spacetime, xi, nu, q)
    defect = ext_sub(ext_sub(direct, first), second)
    if defect < -tol:
        log.warning("l_q reverse triangle defect %s below tolerance", defect)
    return defect


# ---------------------------------------------------------------------------
# Cyclical monotonicity, potentials and duality
# ---------------------------------------------------------------------------

def _cycles(n, rng):
    if n <= global_params.CYCLE_EXHAUSTIVE_LIMIT:
        for k in range(2, n + 1):
            for subset in itertools.combinations(range(n), k):
                first = subset[0]
                for rest in itertools.permutations(subset[1:]):
                    yield (first,) + rest
    else:
        for _ in range(global_params.CYCLE_SAMPLES):
            k = int(rng.integers(2, n + 1))
            yield tuple(int(i) for i in rng.permutation(n)[:k])


def cyclical_monotonicity_check(spacetime, pairs, q, tol=None, rng=None):
    """
    Check sum c(x_i, y_i) >= sum c(x_{i+1}, y_i) over cycles of the pairs for
    the cost c = l**q / q: every cycle for at most CYCLE_EXHAUSTIVE_LIMIT
    pairs, CYCLE_SAMPLES random cycles above.
    """
    check_transport_exponent(q)
    tol = global_params.TOL if tol is None else float(tol)
    rng = make_rng() if rng is None else rng
    pairs = [(int(x), int(y)) for x, y in pairs]
    report = CyclicalMonotonicityReport(tolerances={'cycle': tol})
    xs = np.array([x for x, _ in pairs], dtype=int)
    ys = np.array([y for _, y in pairs], dtype=int)
    ctags, cvalues = lq_cost_arrays(spacetime.tags[np.ix_(xs, ys)], spacetime.values[np.ix_(xs, ys)], q)

    def cost(i, j):
        return ExtendedReal(cvalues[i, j], int(ctags[i, j]))

    nonpositive = [pairs[i] for i in range(len(pairs))
                   if not spacetime.chronological_mask()[pairs[i]]]
    report.add_check('chronological pairs', nonpositive)

    witnesses = []
    count = 0
    cycles = 0
    for cycle in _cycles(len(pairs), rng):
        cycles += 1
        lhs = ExtendedReal(0.0)
        rhs = ExtendedReal(0.0)
        for pos, i in enumerate(cycle):
            nxt = cycle[(pos + 1) % len(cycle)]
            lhs = lhs + cost(i, i)
            rhs = rhs + cost(nxt, i)
        if rhs > lhs + tol:
            count += 1
            if len(witnesses) < global_params.MAX_WITNESSES:
                witnesses.append(tuple(pairs[i] for i in cycle))
    report.add_check('cyclical monotonicity', witnesses, tol=tol, count=count)
    report.values['cycles'] = cycles
    report.values['exhaustive'] = len(pairs) <= global_params.CYCLE_EXHAUSTIVE_LIMIT
    return report


def _sup_rows(tags, values):
    """Extended supremum down each column; an empty column gives -inf."""
    if tags.shape[0] == 0:
        return np.full(tags.shape[1], NEG, dtype=np.int8), np.zeros(tags.shape[1])
    any_pos = np.any(tags == POS, axis=0)
    finite = tags == FINITE
    any_finite = np.any(finite, axis=0)
    best = np.where(finite, values, -np.inf).max(axis=0)
    out_tags = np.where(any_pos, POS, np.where(any_finite, FINITE, NEG)).astype(np.int8)
    return out_tags, np.where(out_tags == FINITE, best, 0.0)


def kantorovich_transform(spacetime, f):
    """
    f^(c)(y) = sup over x <= y in the finite domain of f of f(x) + l(x, y)**q / q.
    """
    dom = f.domain
    ctags, cvalues = lq_cost_arrays(spacetime.tags[dom], spacetime.values[dom], f.q)
    stags, svalues = ext_add_arrays(ctags, cvalues,
                                    np.zeros((len(dom), 1), dtype=np.int8), f.values[dom][:, None])
    tags, values = _sup_rows(stags, svalues)
    return KantorovichPotential(tags, values, f.q)


def potential_from_target(spacetime, o, q):
    """f^o = -l(., o)**q / q on I^-(o) and +inf elsewhere."""
    check_transport_exponent(q)
    spacetime._check_index(o)
    column_tags = spacetime.tags[:, o]
    column_values = spacetime.values[:, o]
    ctags, cvalues = lq_cost_arrays(column_tags, column_values, q)
    tags = -ctags
    values = -cvalues
    outside = ~spacetime.chronological_mask()[:, o]
    tags = np.where(outside, POS, tags).astype(np.int8)
    values = np.where(tags == FINITE, values, 0.0)
    return KantorovichPotential(tags, values, q)


def superdifferential(spacetime, f, targets=None, tol=None):
    """
    Pairs (x, y) with x <= y, x in the domain of f and
    f^(c)(y) = f(x) + l(x, y)**q / q finite (within tol).
    """
    tol = global_params.TOL if tol is None else float(tol)
    g = kantorovich_transform(spacetime, f)
    dom = f.domain
    ys = np.arange(spacetime.n_points) if targets is None else np.asarray(sorted(set(targets)), dtype=int)
    ys = ys[g.tags[ys] == FINITE]
    if dom.size == 0 or ys.size == 0:
        return []
    ctags, cvalues = lq_cost_arrays(spacetime.tags[np.ix_(dom, ys)], spacetime.values[np.ix_(dom, ys)], f.q)
    lhs = f.values[dom][:, None] + cvalues
    hit = (ctags == FINITE) & (np.abs(lhs - g.values[ys][None, :]) <= tol * np.maximum(1.0, np.abs(lhs)))
    return [(int(dom[i]), int(ys[j])) for i, j in np.argwhere(hit)]


def duality_gap(spacetime, mu, nu, f, q, tol=None):
    """
    Gap (int f^(c) dnu - int f dmu) - l_q(mu, nu)**q / q, nonnegative by weak
    duality and zero exactly for strong Kantorovich potentials.
    """
    check_transport_exponent(q)
    tol = global_params.TOL if tol is None else float(tol)
    report = DualityReport(tolerances={'weak duality': tol, 'strong duality': tol})
    lq, coupling = lq_distance(spacetime, mu, nu, q)
    report.values['lq'] = lq
    if lq.is_neg_inf():
        report.add_check('defined', [('l_q', '-inf')],
                         note='no causal coupling; the duality gap is undefined')
        return report
    g = kantorovich_transform(spacetime, f)
    dual_nu = nu.integrate(g.tags, g.values)
    dual_mu = mu.integrate(f.tags, f.values)
    if dual_nu is None or dual_mu is None:
        report.add_check('defined', [('integral', 'inf - inf')],
                         note='potential integrals are undefined')
        return report
    primal = lq_cost(lq, q)
    dual = ext_sub(dual_nu, dual_mu)
    report.gap = ext_sub(dual, primal)
    report.values.update({'primal': primal, 'dual': dual, 'gap': report.gap})
    report.add_check('defined', [])
    report.add_check('weak duality', [] if report.gap >= -tol else [float(report.gap)], tol=tol)
    report.add_check('strong duality', [] if report.gap <= tol else [float(report.gap)], tol=tol)
    return report


# ---------------------------------------------------------------------------
# Interpolation and plans
# ---------------------------------------------------------------------------

def _intermediate_tolerance(spacetime, tol):
    if tol is not None:
        return float(tol)
    if spacetime.grid is not None:
        return global_params.GRID_TOL_FACTOR * spacetime.grid.h
    return global_params.TOL


def _intermediate_errors(spacetime, x, y, t, candidates=None):
    ell = spacetime.values[x, y]
    z = np.arange(spacetime.n_points) if candidates is None else np.asarray(candidates, dtype=int)
    first = np.where(spacetime.tags[x, z] == FINITE, np.abs(spacetime.values[x, z] - t * ell), np.inf)
    second = np.where(spacetime.tags[z, y] == FINITE,
                      np.abs(spacetime.values[z, y] - (1.0 - t) * ell), np.inf)
    return z, np.maximum(first, second)


def intermediate_point(spacetime, x, y, t, tol=None):
    """
    A t-intermediate point z of (x, y): l(x, z) = t l(x, y), l(z, y) = (1 - t) l(x, y).

    On embedded spacetimes the nearest point to the affine interpolant is
    tried first; otherwise the point of least defect is used.

    :return: (z, error)
    """
    tol = _intermediate_tolerance(spacetime, tol)
    if spacetime.tags[x, y] != FINITE:
        raise IntermediatePointError("intermediate points need a finite separation", witness=(x, y))
    if spacetime.coords is not None:
        target = (1.0 - t) * spacetime.coords[x] + t * spacetime.coords[y]
        z = spacetime.grid.nearest_index(target) if spacetime.grid is not None else None
        if z is None:
            z = int(np.argmin(np.linalg.norm(spacetime.coords - target, axis=1)))
        _, err = _intermediate_errors(spacetime, x, y, t, [z])
        if err[0] <= tol:
            return int(z), float(err[0])
    zs, errs = _intermediate_errors(spacetime, x, y, t)
    best = int(np.argmin(errs))
    if errs[best] > tol:
        raise IntermediatePointError(
            "no %g-intermediate point within tolerance %g; refine the grid" % (t, tol),
            witness=(x, y))
    return int(zs[best]), float(errs[best])


def intermediate_measure(spacetime, mu, nu, t, q, tol=None):
    """
    t-intermediate point measure xi between mu and nu and the two couplings
    (mu, xi), (xi, nu) glued from an optimal coupling of (mu, nu).
    """
    check_transport_exponent(q)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ParameterError("t must lie in [0, 1]", witness=t)
    lq, coupling = lq_distance(spacetime, mu, nu, q)
    if t == 0.0 or t == 1.0:
        end = mu if t == 0.0 else nu
        still = Coupling.from_entries([(x, x, w) for x, w in end.items()])
        if coupling is None:
            raise PreconditionError("no causal coupling between the measures")
        return (end, still, coupling) if t == 0.0 else (end, coupling, still)
    if not lq.is_finite() or lq.value <= 0:
        raise PreconditionError("intermediate measures need 0 < l_q < inf", witness=str(lq))
    first, second, xi = [], [], np.zeros(spacetime.n_points)
    worst = 0.0
    for x, y, mass in coupling.entries():
        z, err = intermediate_point(spacetime, x, y, t, tol)
        worst = max(worst, err)
        first.append((x, z, mass))
        second.append((z, y, mass))
        xi[z] += mass
    info = {'snap_error': worst, 't': t}
    log.debug("intermediate measure at t=%g: %d pairs, snap error %g", t, len(first), worst)
    return (DiscreteMeasure(xi, normalize=True), Coupling.from_entries(first, info),
            Coupling.from_entries(second, info))


def dyadic_interpolation(spacetime, mu, nu, q, levels, tol=None):
    """Measures at t = k / 2**levels by iterated midpoints."""
    levels = int(levels)
    if levels < 0:
        raise ParameterError("levels must be nonnegative", witness=levels)
    measures = [mu, nu]
    for _ in range(levels):
        refined = [measures[0]]
        for left, right in zip(measures[:-1], measures[1:]):
            middle, _, _ = intermediate_measure(spacetime, left, right, 0.5, q, tol)
            refined.extend([middle, right])
        measures = refined
    n = len(measures) - 1
    return [(k / float(n), m) for k, m in enumerate(measures)]


def _is_dyadic(t):
    frac = Fraction(t).limit_denominator(2 ** 30)
    return abs(float(frac) - t) < 1e-15 and (frac.denominator & (frac.denominator - 1)) == 0


def lift_to_plan(spacetime, interpolation, q):
    """
    Glue optimal couplings of consecutive measures into weighted causal paths
    by disintegration along the shared marginals.
    """
    check_transport_exponent(q)
    interpolation = sorted(interpolation, key=lambda item: item[0])
    times = [float(t) for t, _ in interpolation]
    if len(times) < 2 or times[0] != 0.0 or times[-1] != 1.0:
        raise ParameterError("interpolation must start at t=0 and end at t=1")
    for t in times:
        if not _is_dyadic(t):
            raise ParameterError("interpolation times must be dyadic", witness=t)
    measures = [m for _, m in interpolation]
    paths = dict(((x,), w) for x, w in measures[0].items())
    couplings = []
    for level, (left, right) in enumerate(zip(measures[:-1], measures[1:])):
        value, coupling = lq_distance(spacetime, left, right, q)
        if coupling is None:
            raise PlanLiftError("no causal coupling between consecutive measures at level %d" % level,
                                witness=(times[level], times[level + 1]))
        couplings.append(coupling)
        conditional = {}
        for x, y, mass in coupling.entries():
            conditional.setdefault(x, []).append((y, mass / left.weights[x]))
        glued = {}
        for sequence, weight in paths.items():
            for y, ratio in conditional.get(sequence[-1], []):
                w = weight * ratio
                if w > 1e-15:
                    key = sequence + (y,)
                    glued[key] = glued.get(key, 0.0) + w
        paths = glued
    atoms = [(SampledCausalPath.from_spacetime(spacetime, times, list(seq)), w)
             for seq, w in sorted(paths.items())]
    log.info("lifted %d measures to a plan with %d paths", len(measures), len(atoms))
    return DiscretePlan(times, atoms, couplings)


def dyadic_action(spacetime, interpolation, q):
    """Sum over consecutive measures of l_q**q * dt**(1 - q) / q."""
    total = ExtendedReal(0.0)
    interpolation = sorted(interpolation, key=lambda item: item[0])
    for (s, left), (t, right) in zip(interpolation[:-1], interpolation[1:]):
        value, _ = lq_distance(spacetime, left, right, q)
        total = total + lq_cost(value, q) * ExtendedReal((t - s) ** (1.0 - q))
    return total
