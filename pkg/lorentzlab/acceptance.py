"""
Acceptance drivers. Each criterion is a seeded, self-contained run at the
sizes of the acceptance table and returns an AcceptanceReport whose rows
the 'acceptance' subcommand writes to acceptance.csv.
"""

import itertools
import logging
import math

import numpy as np
import six

from lorentzlab import calculus
from lorentzlab import curvature
from lorentzlab import curves
from lorentzlab import dalembert
from lorentzlab import global_params
from lorentzlab import norms
from lorentzlab import spacetime as st
from lorentzlab.errors import ParameterError
from lorentzlab.models import Bump
from lorentzlab.report import AcceptanceReport
from lorentzlab.transport import DiscreteMeasure, lq_distance
from lorentzlab.utils import lq_cost, make_rng

log = logging.getLogger(__name__)

EXTENT = [[0.0, 1.0], [-0.5, 0.5]]
GRID_RESOLUTIONS = (10, 20, 40)
INTERPOLATION_TIMES = (0.25, 0.5, 0.75)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def random_transport_instance(rng, max_support=4):
    """
    Random sources below t = 0.45 and targets above t = 0.55 in R^{1,1};
    wide spatial spread leaves some pairs causally unrelated.

    :return: (DiscreteSpacetime, mu, nu)
    """
    m, n = (int(k) for k in rng.integers(1, max_support + 1, size=2))
    sources = np.column_stack([rng.uniform(0.0, 0.45, m), rng.uniform(-0.5, 0.5, m)])
    targets = np.column_stack([rng.uniform(0.55, 1.0, n), rng.uniform(-0.5, 0.5, n)])
    coords = np.vstack([sources, targets])
    tags, values = st.lp_separation(coords, 2.0)
    space = st.DiscreteSpacetime(tags, values, np.ones(m + n), coords=coords)
    mu = np.zeros(m + n)
    nu = np.zeros(m + n)
    mu[:m] = rng.dirichlet(np.ones(m))
    nu[m:] = rng.dirichlet(np.ones(n))
    return space, DiscreteMeasure(mu, normalize=True), DiscreteMeasure(nu, normalize=True)


def coupling_vertices(a, b):
    """
    Every vertex of the transportation polytope of (a, b). The marginal
    equations minus the last one are independent, so each vertex solves a
    square system on len(a) + len(b) - 1 cells; all of them are tried.

    :return: list of (len(a), len(b)) arrays
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = len(a), len(b)
    size = m + n - 1
    A = np.zeros((m + n, m * n))
    for i in range(m):
        for j in range(n):
            A[i, i * n + j] = 1.0
            A[m + j, i * n + j] = 1.0
    A, rhs = A[:-1], np.concatenate([a, b])[:-1]
    bases = np.array(list(itertools.combinations(range(m * n), size)), dtype=int)
    systems = A[:, bases].transpose(1, 0, 2)
    # the incidence matrix is totally unimodular: determinants are 0 or +-1
    regular = np.abs(np.linalg.det(systems)) > 0.5
    bases, systems = bases[regular], systems[regular]
    x = np.linalg.solve(systems, np.broadcast_to(rhs[:, None], (len(bases), size, 1)))[:, :, 0]
    feasible = x.min(axis=1) >= -1e-12
    vertices = {}
    for basis, values in zip(bases[feasible], x[feasible]):
        pi = np.zeros(m * n)
        pi[basis] = np.where(values > 1e-12, values, 0.0)
        vertices[tuple(np.round(pi, 12))] = pi.reshape(m, n)
    return list(vertices.values())


def enumerated_lq(spacetime, mu, nu, q):
    """
    l_q(mu, nu) as a float by exhaustive search over the coupling vertices.
    Couplings on a set of allowed pairs form a face of the polytope, so the
    vertices that vanish off the allowed pairs are all that is searched.
    """
    rows, cols = mu.support, nu.support
    block = spacetime.ell_matrix()[np.ix_(rows, cols)]
    vertices = coupling_vertices(mu.weights[rows], nu.weights[cols])

    def on(allowed):
        return [pi for pi in vertices if not np.any(pi[~allowed] > 0)]

    causal = block > -np.inf
    if q > 0:
        candidates = on(causal)
        if not candidates:
            return -math.inf
        cost = np.where(causal & np.isfinite(block), block, 0.0) ** q
        if np.any(np.isposinf(block)) and any(np.any(pi[np.isposinf(block)] > 0) for pi in candidates):
            return math.inf
        best = max(float(np.sum(pi * cost)) for pi in candidates)
        return max(best, 0.0) ** (1.0 / q)
    candidates = on(block > 0)
    if candidates:
        cost = np.where(np.isfinite(block) & (block > 0), block, 1.0) ** q
        cost = np.where(np.isposinf(block), 0.0, cost)
        best = min(float(np.sum(pi * cost)) for pi in candidates)
        return math.inf if best <= 0 else best ** (1.0 / q)
    return 0.0 if on(causal) else -math.inf


def enumerated_null_distances(spacetime, f):
    """
    Null distances by depth-first enumeration of simple paths in the
    symmetrized causal graph; a branch is cut once it is no shorter than a
    known path to its end.
    """
    f = np.asarray(f, dtype=float)
    n = spacetime.n_points
    adjacent = spacetime.causal_mask()
    adjacent = adjacent | adjacent.T
    np.fill_diagonal(adjacent, False)
    jump = np.abs(f[:, None] - f[None, :])
    out = np.full((n, n), np.inf)
    for source in range(n):
        best = out[source]
        best[source] = 0.0
        stack = [(source, 0.0, frozenset([source]))]
        while stack:
            x, length, visited = stack.pop()
            for y in np.flatnonzero(adjacent[x]):
                y = int(y)
                total = length + jump[x, y]
                if y in visited or total >= best[y]:
                    continue
                best[y] = total
                stack.append((y, total, visited | {y}))
    return out


def _diamond_setup(resolution, center=(0.3, 0.0), radius=0.2, target=(0.95, 0.0)):
    """Uniform measure on a diamond of a Minkowski grid and the Dirac target cell."""
    space = st.generate_minkowski_grid(2, EXTENT, resolution)
    mask = np.abs(space.coords - np.asarray(center)).sum(axis=1) <= radius + 1e-12
    mu0 = DiscreteMeasure(np.where(mask, space.m_weights, 0.0), normalize=True)
    return space, mu0, space.grid.nearest_index(np.asarray(target))


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def lq_oracle(instances=50, max_support=4, qs=(0.5, -1.0), tol=1e-6):
    report = AcceptanceReport(1, 'l_q against coupling enumeration',
                              ('instance', 'q', 'sources', 'targets', 'l_q', 'enumerated', 'error'),
                              tolerances={'enumeration': tol})
    rng = make_rng()
    bad = []
    unrelated = 0
    for k in range(instances):
        space, mu, nu = random_transport_instance(rng, max_support)
        block = space.tags[np.ix_(mu.support, nu.support)]
        unrelated += int(np.any(block == st.NEG))
        for q in qs:
            value, _ = lq_distance(space, mu, nu, q)
            value = float(value)
            expected = enumerated_lq(space, mu, nu, q)
            if value == expected:
                err = 0.0
            elif math.isinf(value) or math.isinf(expected):
                err = math.inf
            else:
                err = abs(value - expected)
            report.rows.append((k, q, len(mu.support), len(nu.support), value, expected, err))
            if err > tol:
                bad.append((k, q, value, expected))
    report.add_check('enumeration', bad, tol=tol)
    report.values.update({'instances': instances, 'with_unrelated_pairs': unrelated})
    return report


def action_saturation(qs=(-1.0, 0.5, 0.75), depth=12, rel_tol=1e-9, margin=1e-4):
    report = AcceptanceReport(2, 'geodesic action saturation',
                              ('curve', 'q', 'action', 'endpoint_cost', 'deviation'),
                              tolerances={'affine': rel_tol, 'reparametrized': margin})
    plane = norms.HyperbolicNorm.standard_minkowski(2)
    v = np.array([1.0, 0.5])
    affine = curves.SampledCausalPath.from_curve(plane, lambda t: t * v)
    off = []
    for q in qs:
        a = float(curves.q_action(affine, q, depth=depth))
        closed = float(lq_cost(affine.endpoint_separation(), q))
        rel = abs(a - closed) / abs(closed)
        report.rows.append(('affine', q, a, closed, rel))
        if rel > rel_tol:
            off.append((q, a, closed))
    report.add_check('affine', off, tol=rel_tol)
    quadratic = curves.SampledCausalPath.from_curve(plane, lambda t: t * t * v)
    a = float(curves.q_action(quadratic, 0.5, depth=depth))
    closed = float(lq_cost(quadratic.endpoint_separation(), 0.5))
    report.rows.append(('quadratic', 0.5, a, closed, closed - a))
    report.add_check('reparametrized', [] if closed - a > margin else [(a, closed)], tol=margin)
    return report


def entropy_convexity(resolutions=GRID_RESOLUTIONS, N=2.0):
    report = AcceptanceReport(3, 'K=0 entropy convexity',
                              ('resolution', 'h', 't', 'N', 'entropy', 'bound', 'defect'))
    negative = []
    for r in resolutions:
        space, mu0, x1 = _diamond_setup(r)
        geodesic = [(0.0, mu0)] + [(t, curvature.affine_interpolant(space, mu0, x1, t)[0])
                                   for t in INTERPOLATION_TIMES]
        tmcp = curvature.tmcp_check(space, geodesic, x1, 0.0, N)
        report.absorb(tmcp, 'resolution %d' % r)
        h = space.grid.h
        for t, n_prime, lhs, rhs, defect, _, _ in tmcp.rows:
            report.rows.append((r, h, t, n_prime, lhs, rhs, defect))
        negative.append((r, h, max(0.0, -min(row[4] for row in tmcp.rows))))
    r0, h0, d0 = negative[0]
    C = d0 / h0
    slow = [(r, d, C * h) for r, h, d in negative[1:] if d > C * h + global_params.TOL]
    report.add_check('linear shrink', slow, tol=global_params.TOL,
                     note='C fitted at %d cells per axis' % r0)
    report.values.update({'C': C, 'negative_defects': [d for _, _, d in negative]})
    return report


def density_bound(resolutions=GRID_RESOLUTIONS, times=INTERPOLATION_TIMES, N=2.0, q=0.5):
    report = AcceptanceReport(4, 'good-geodesic density bound',
                              ('resolution', 'h', 't', 'peak_density', 'bound', 'moves'))
    bad = []
    for r in resolutions:
        space, mu0, x1 = _diamond_setup(r)
        h = space.grid.h
        l_min = float(space.values[mu0.support, x1].min())
        slack = 1.0 + global_params.DENSITY_SLACK_CELLS * h / l_min
        for t in times:
            # one step of size t lands on nu_t directly
            _, gg = curvature.good_geodesic(space, mu0, x1, 0.0, N, q, t, 1)
            report.absorb(gg, 'resolution %d t=%g' % (r, t))
            _, peak, _, moves, _ = gg.rows[0]
            bound = (1.0 - t) ** (-N) * gg.values['rho0_max'] * slack
            report.rows.append((r, h, t, peak, bound, moves))
            if peak > bound + global_params.TOL:
                bad.append((r, t, peak, bound))
    report.add_check('density bound', bad)
    return report


def brenier(resolution=16, qs=(0.5, -1.0), samples=64):
    report = AcceptanceReport(5, 'metric Brenier identity',
                              ('source', 'q', 'points', 'max_relative_deviation', 'bound'))
    rng = make_rng()
    for dim in (2, 3):
        o = np.eye(dim)[0]
        norm = norms.HyperbolicNorm.standard_minkowski(dim)
        for q in qs:
            V = norms.sample_future(norm, rng, samples)
            scale = rng.uniform(0.2, 1.0, size=len(V)) / norm.values(V)
            X = o[None, :] - V * scale[:, None]
            sub = dalembert.metric_brenier_model(dim, X, o, q, tol=1e-10)
            report.absorb(sub, 'model %dd q=%g' % (dim, q))
            report.rows.append(('model %dd' % dim, q, len(X), sub.values['max_relative_deviation'], 1e-10))
    space, mu0, o = _diamond_setup(resolution, center=(0.35, 0.0), radius=0.1)
    for q in qs:
        sub = dalembert.metric_brenier_grid(space, mu0, o, q, factor=3.0)
        report.absorb(sub, 'grid q=%g' % q)
        report.rows.append(('grid %d' % resolution, q, len(mu0.support),
                            sub.values['max_relative_deviation'], sub.check('backward slope').tol))
    return report


DALEMBERT_CASES = ((2, 0.5, curvature.FUTURE), (2, -1.0, curvature.FUTURE),
                   (3, 0.5, curvature.FUTURE), (3, -1.0, curvature.FUTURE),
                   (2, 0.5, curvature.PAST))


def dalembert_sharpness(resolutions=dalembert.DEFAULT_RESOLUTIONS):
    report = AcceptanceReport(6, "d'Alembert sharpness",
                              ('dim', 'p', 'direction', 'resolution', 'lhs', 'rhs', 'defect'))
    for dim, p, direction in DALEMBERT_CASES:
        q = p / (p - 1.0)
        o = [1.0 if direction == curvature.FUTURE else -1.0] + [0.0] * (dim - 1)
        phi = Bump([0.0] * dim, 0.25)
        sub = dalembert.dalembert_verify(dim, o, p, q, 0.0, float(dim), phi, resolutions, direction)
        report.absorb(sub, '%dd p=%g %s' % (dim, p, direction))
        for row in sub.refinement_table:
            report.rows.append((dim, p, direction, row['resolution'], row['lhs'], row['rhs'], row['defect']))
    return report


def distortion_coefficients(sweep=10 ** 4, rel_tol=1e-6):
    report = AcceptanceReport(7, 'distortion coefficients',
                              ('kind', 'K', 'N', 'theta', 'analytic', 'numeric', 'deviation'),
                              tolerances={'derivatives': rel_tol})
    rng = make_rng()
    linear = []
    for N in (1.5, 2.0, 3.0, 4.0):
        for t in np.linspace(0.0, 1.0, 11):
            for theta in (0.0, 0.5, 2.0, 10.0):
                params = curvature.DistortionParams(0.0, N, t, theta)
                s, r = float(curvature.sigma(params)), float(curvature.tau(params))
                if s != t or r != t:
                    linear.append((N, t, theta, s, r))
    report.add_check('flat coefficients', linear)

    K = rng.uniform(-4.0, 4.0, sweep)
    N = rng.uniform(1.05, 8.0, sweep)
    t = rng.uniform(0.0, 1.0, sweep)
    theta = rng.uniform(0.0, 4.0, sweep)
    below = []
    for k in range(sweep):
        params = curvature.DistortionParams(K[k], N[k], t[k], theta[k])
        s, r = float(curvature.sigma(params)), float(curvature.tau(params))
        if not (r >= s or r >= s - 1e-12 * max(1.0, abs(s))):
            below.append((K[k], N[k], t[k], theta[k], s, r))
    report.add_check('tau dominates sigma', below, note='%d tuples' % sweep)

    off = []
    for Kk, Nn, th in itertools.product((-2.0, -1.0, 0.0, 1.0), (2.0, 3.0, 5.0), (0.5, 1.0, 1.5)):
        for kind, analytic, numeric in (
                ('tau_tilde', curvature.tau_tilde, curvature.tau_tilde_numeric),
                ('sigma_tilde', curvature.sigma_tilde, curvature.sigma_tilde_numeric)):
            exact = analytic(Kk, Nn, th)
            approx = numeric(Kk, Nn, th, h=1e-2, levels=5)
            dev = abs(approx - exact) / max(abs(exact), 1e-300)
            report.rows.append((kind, Kk, Nn, th, exact, approx, dev))
            if dev > rel_tol:
                off.append((kind, Kk, Nn, th, dev))
    report.add_check('derivatives', off, tol=rel_tol)

    cutoff = []
    for Kk, Nn in ((1.0, 2.0), (2.0, 3.0), (4.0, 1.5)):
        edge = math.pi * math.sqrt(Nn / Kk)
        for th in (0.9 * edge, edge, 1.1 * edge, 2.0 * edge):
            infinite = curvature.sigma(curvature.DistortionParams(Kk, Nn, 0.5, th)).is_pos_inf()
            if infinite != (Kk * th ** 2 >= Nn * math.pi ** 2):
                cutoff.append((Kk, Nn, th))
    report.add_check('curvature cutoff', cutoff)
    return report


def norm_dichotomy(pairs=10 ** 4, tol=1e-10):
    report = AcceptanceReport(8, 'hyperbolic norm dichotomy',
                              ('norm', 'pairs', 'max_abs_defect'), tolerances={'parallelogram': tol})
    rng = make_rng()
    minkowski = norms.HyperbolicNorm.standard_minkowski(3)
    V = norms.sample_future(minkowski, rng, pairs)
    W = norms.sample_future(minkowski, rng, pairs)
    worst = 0.0
    law = []
    for k, (v, w) in enumerate(zip(V, W)):
        defect = norms.parallelogram_defect(minkowski, v, w)
        worst = max(worst, abs(defect))
        if abs(defect) > tol * max(1.0, float(np.abs(v + 2 * w).sum()) ** 2):
            law.append((k, defect))
    report.add_check('parallelogram law', law, tol=tol)
    report.rows.append(('minkowski 3d', pairs, worst))

    lp4 = norms.HyperbolicNorm.lp(4, 2)
    candidates = [(np.array([1.0, 0.0]), np.array([1.0, 0.5]))]
    candidates += list(zip(norms.sample_future(lp4, rng, 100), norms.sample_future(lp4, rng, 100)))
    largest = max(abs(norms.parallelogram_defect(lp4, v, w)) for v, w in candidates)
    report.add_check('l4 not polarizable', [] if largest > 1e-3 else [largest], tol=1e-3)
    report.rows.append(('l4 2d', len(candidates), largest))

    disagree = []
    for n in (2, 3, 4):
        g = np.diag([1.0] + [-1.0] * (n - 1))
        signature = norms.signature_diagnostic(g)
        criterion = norms.triangle_criterion(g, rng)['classification']
        if not signature == criterion == norms.LORENTZIAN:
            disagree.append((n, signature, criterion))
    report.add_check('signature agreement', disagree)
    return report


def null_distance(resolution=4):
    report = AcceptanceReport(9, 'null distance', ('x', 'y', 'dijkstra', 'enumerated', 'jump'))
    space = st.generate_minkowski_grid(2, EXTENT, resolution)
    f = space.coords[:, 0].copy()
    d = calculus.null_distance_matrix(space, f)
    brute = enumerated_null_distances(space, f)
    causal = space.causal_mask()
    mismatch, jumps = [], []
    n = space.n_points
    for x in range(n):
        for y in range(n):
            jump = f[y] - f[x]
            report.rows.append((x, y, d[x, y], brute[x, y], jump if causal[x, y] else ''))
            if not abs(d[x, y] - brute[x, y]) <= 1e-12:
                mismatch.append((x, y, d[x, y], brute[x, y]))
            if causal[x, y] and abs(d[x, y] - jump) > 1e-12:
                jumps.append((x, y, d[x, y], jump))
    report.add_check('enumeration', mismatch, tol=1e-12)
    report.add_check('causal pairs', jumps, tol=1e-12)
    return report


def mcshane_extremality(points=10, given=4, samples=50, L=1.0):
    report = AcceptanceReport(10, 'McShane extremality', ('sample', 'x', 'lower', 'value', 'upper'))
    rng = make_rng()
    coords = np.column_stack([rng.uniform(0.0, 1.0, points), rng.uniform(-0.3, 0.3, points)])
    tags, values = st.lp_separation(coords, 2.0)
    space = st.DiscreteSpacetime(tags, values, np.ones(points), coords=coords)
    # the time coordinate is 1-steep
    f_partial = dict((int(k), float(coords[k, 0])) for k in range(given))
    lower = calculus.mcshane_extend(space, f_partial, L, calculus.LOWER).as_array()
    upper = calculus.mcshane_extend(space, f_partial, L, calculus.UPPER).as_array()
    tol = global_params.MEASURE_TOL
    outside, steep, moved = [], [], []
    for s in range(samples):
        g = calculus.random_steep_extension(space, f_partial, L, rng)
        values_ = g.as_array()
        moved += [(s, x) for x, value in six.iteritems(f_partial) if values_[x] != value]
        steep += [(s,) + pair for pair in calculus.steepness_check(space, g, L, tol=tol)]
        for x in range(points):
            report.rows.append((s, x, lower[x], values_[x], upper[x]))
            if values_[x] < lower[x] - tol or values_[x] > upper[x] + tol:
                outside.append((s, x))
    report.add_check('sandwich', outside, tol=tol)
    report.add_check('steep samples', steep, tol=tol)
    report.add_check('extends', moved)
    return report


def fenchel_young(pairs=10 ** 3, qs=(0.5, -1.0), tol=1e-10):
    report = AcceptanceReport(11, 'Fenchel-Young inequality', ('q', 'pairs', 'min_gap', 'max_aligned_gap'),
                              tolerances={'gap': tol, 'aligned': tol})
    rng = make_rng()
    norm = norms.HyperbolicNorm.standard_minkowski(3)
    negative, aligned = [], []
    for q in qs:
        params = norms.DualityParams(q)
        V = norms.sample_future(norm, rng, pairs)
        Z = norms.sample_future(norm, rng, pairs)
        gaps, scale = np.empty(pairs), np.empty(pairs)
        tight, tight_scale = np.empty(pairs), np.empty(pairs)
        for k, (v, z) in enumerate(zip(V, Z)):
            zeta = norm.g @ z
            gaps[k] = norms.fenchel_young_gap(norm, params, v, zeta)
            scale[k] = max(1.0, abs(zeta @ v))
            zeta = norms.legendre_covector(norm, params, v)
            tight[k] = norms.fenchel_young_gap(norm, params, v, zeta)
            tight_scale[k] = max(1.0, abs(zeta @ v))
        # rounding grows with the pairing zeta(v)
        negative += [(q, int(k), float(gaps[k])) for k in np.flatnonzero(gaps < -tol * scale)]
        aligned += [(q, int(k), float(tight[k])) for k in np.flatnonzero(np.abs(tight) > tol * tight_scale)]
        report.rows.append((q, pairs, float(gaps.min()), float(np.abs(tight).max())))
    report.add_check('gap', negative, tol=tol)
    report.add_check('aligned', aligned, tol=tol)
    return report


CRITERIA = {
    1: lq_oracle,
    2: action_saturation,
    3: entropy_convexity,
    4: density_bound,
    5: brenier,
    6: dalembert_sharpness,
    7: distortion_coefficients,
    8: norm_dichotomy,
    9: null_distance,
    10: mcshane_extremality,
    11: fenchel_young,
}

REFINED = (3, 4, 6)


def run_criterion(criterion, resolutions=None):
    criterion = int(criterion)
    if criterion not in CRITERIA:
        raise ParameterError("unknown acceptance criterion", witness=criterion)
    kwargs = {}
    if resolutions:
        if criterion not in REFINED:
            log.warning("criterion %d has no refinement levels; ignoring resolutions", criterion)
        else:
            kwargs['resolutions'] = tuple(int(r) for r in resolutions)
    report = CRITERIA[criterion](**kwargs)
    log.info("%s: %s", report.name, 'PASS' if report.passed() else 'FAIL')
    return report
