"""
Sampled causal paths: causal speed, q-actions, the l-length and geodesic
characterizations.

A path is known through its two-point function T(s, t) = l(gamma_s, gamma_t).
Paths on a DiscreteSpacetime are piecewise constant between sample times
(gamma_t is the sample at the greatest t_i <= t). Paths in a generated model
space are given by a coordinate map t -> R^n and a hyperbolic norm, and
T(s, t) = n(gamma_t - gamma_s).
"""

import logging

import numpy as np

from lorentzlab import global_params
from lorentzlab.errors import NonMonotonePathError, ParameterError
from lorentzlab.report import GeodesyReport
from lorentzlab.utils import (FINITE, NEG, POS, ExtendedReal, ExtendedTime,
                              check_transport_exponent, ext_sum, lq_cost,
                              lq_cost_arrays, split_extended)

log = logging.getLogger(__name__)

PARTITION_INFIMUM = 'partition_infimum'
DENSITY_INTEGRAL = 'density_integral'

# exponents standing in for "every q" in the geodesic characterization
REFERENCE_EXPONENTS = (-1.0, 0.5, 0.75)


class SampledCausalPath:
    def __init__(self, times, spacetime=None, indices=None, norm=None, curve=None):
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or len(times) < 2:
            raise ParameterError("a path needs at least two samples")
        if times[0] != 0.0 or times[-1] != 1.0:
            raise ParameterError("sample times must start at 0 and end at 1",
                                 witness=(times[0], times[-1]))
        if np.any(np.diff(times) <= 0):
            raise ParameterError("sample times must be strictly increasing",
                                 witness=int(np.flatnonzero(np.diff(times) <= 0)[0]))
        self.times = times
        self.spacetime = spacetime
        self.norm = norm
        self.curve = curve
        if spacetime is not None:
            indices = np.asarray(indices, dtype=int)
            if indices.shape != times.shape:
                raise ParameterError("one point index per sample time is required")
            for i in indices:
                spacetime._check_index(i)
            self.indices = indices
        else:
            if norm is None or curve is None:
                raise ParameterError("a continuum path needs a norm and a curve")
            self.indices = None
        self._cache = {}
        self._positions = {}
        self._check_monotone()

    @classmethod
    def from_spacetime(cls, spacetime, times, indices):
        return cls(times, spacetime=spacetime, indices=indices)

    @classmethod
    def from_curve(cls, norm, curve, times=None):
        if times is None:
            times = np.linspace(0.0, 1.0, 17)
        return cls(times, norm=norm, curve=curve)

    @classmethod
    def from_coordinates(cls, norm, times, coords):
        """Piecewise-linear curve through sampled coordinates."""
        times = np.asarray(times, dtype=float)
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (len(times), norm.n):
            raise ParameterError("coordinate samples must be %d x %d" % (len(times), norm.n),
                                 witness=coords.shape)

        def curve(t):
            return np.array([np.interp(t, times, coords[:, k]) for k in range(coords.shape[1])])

        return cls(times, norm=norm, curve=curve)

    @property
    def is_discrete(self):
        return self.spacetime is not None

    def point_at(self, t):
        """Point index (discrete paths) or coordinates (continuum paths) at time t."""
        if self.is_discrete:
            k = int(np.clip(np.searchsorted(self.times, t, side='right') - 1, 0, len(self.times) - 1))
            return int(self.indices[k])
        return self._position(t)

    def _position(self, t):
        t = float(t)
        if t not in self._positions:
            self._positions[t] = np.asarray(self.curve(t), dtype=float)
        return self._positions[t]

    def separation_arrays(self, s, t):
        """Vectorized T(s, t) as (tags, values) arrays."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.is_discrete:
            m = len(self.times)
            i = np.clip(np.searchsorted(self.times, s, side='right') - 1, 0, m - 1)
            j = np.clip(np.searchsorted(self.times, t, side='right') - 1, 0, m - 1)
            a, b = self.indices[i], self.indices[j]
            return self.spacetime.tags[a, b], self.spacetime.values[a, b]
        s, t = np.broadcast_arrays(s, t)
        start = np.array([self._position(x) for x in s.ravel()]).reshape(s.shape + (self.norm.n,))
        stop = np.array([self._position(x) for x in t.ravel()]).reshape(t.shape + (self.norm.n,))
        return split_extended(self.norm.values(stop - start))

    def T(self, s, t):
        key = (float(s), float(t))
        if key not in self._cache:
            tags, values = self.separation_arrays(np.array([s]), np.array([t]))
            self._cache[key] = ExtendedTime(float(values[0]), int(tags[0]))
        return self._cache[key]

    def endpoint_separation(self):
        return self.T(0.0, 1.0)

    def _check_monotone(self):
        tags, _ = self.separation_arrays(self.times[:-1], self.times[1:])
        bad = np.flatnonzero(tags == NEG)
        if bad.size:
            k = int(bad[0])
            raise NonMonotonePathError("path is not causal between consecutive samples",
                                       witness=(float(self.times[k]), float(self.times[k + 1])))
        if self.T(0.0, 1.0).is_neg_inf():
            raise NonMonotonePathError("path endpoints are not causally related", witness=(0.0, 1.0))

    def __repr__(self):
        kind = 'discrete' if self.is_discrete else 'continuum'
        return '<SampledCausalPath %s samples=%d>' % (kind, len(self.times))


class SpeedProfile:
    """
    Estimate of the causal speed |gamma'| on the finest uniform level.

    abs_density[k] is the density on [edges[k], edges[k+1]]; singular_mass[i]
    is the atom attributed to sample i; table holds one convergence row per
    level (n, h, total, max density, atom mass).
    """

    def __init__(self, edges, abs_density, singular_mass, total, table, infinite_region):
        self.edges = edges
        self.abs_density = abs_density
        self.singular_mass = singular_mass
        self.total = total
        self.table = table
        self.infinite_region = infinite_region

    def interval_mass(self):
        h = np.diff(self.edges)
        return np.where(np.isfinite(self.abs_density), self.abs_density * h, np.inf)

    def cumulative(self):
        return np.cumsum(self.interval_mass())


def _level_masses(path, n):
    edges = np.linspace(0.0, 1.0, n + 1)
    tags, values = path.separation_arrays(edges[:-1], edges[1:])
    if np.any(tags == NEG):
        k = int(np.flatnonzero(tags == NEG)[0])
        raise NonMonotonePathError("path is not causal on a refinement interval",
                                   witness=(float(edges[k]), float(edges[k + 1])))
    return edges, tags, values


def _excess(tags, values):
    """Mass of each interval beyond the larger of its finite neighbors."""
    n = len(values)
    left = np.full(n, -np.inf)
    right = np.full(n, -np.inf)
    left[1:] = np.where(tags[:-1] == FINITE, values[:-1], -np.inf)
    right[:-1] = np.where(tags[1:] == FINITE, values[1:], -np.inf)
    neighbor = np.maximum(left, right)
    neighbor = np.where(np.isfinite(neighbor), neighbor, 0.0)
    return np.where(tags == FINITE, values - neighbor, 0.0), neighbor


def _merge_intervals(edges, mask):
    region = []
    for k in np.flatnonzero(mask):
        lo, hi = float(edges[k]), float(edges[k + 1])
        if region and region[-1][1] == lo:
            region[-1] = (region[-1][0], hi)
        else:
            region.append((lo, hi))
    return region


def causal_speed(path, h_levels=None, tol=None):
    """
    Maximal-measure estimate of the causal speed from uniform levels.

    :param path: SampledCausalPath.
    :param h_levels: increasing step counts; the last one is the reported level.
    :param tol: atom threshold scale; an interval carries an atom when its
                excess over its neighbors exceeds 10 * tol and at least
                ATOM_PERSISTENCE of the excess seen on the next coarser level.
    :return: SpeedProfile
    """
    tol = global_params.TOL if tol is None else float(tol)
    levels = sorted(set(int(n) for n in (h_levels or global_params.SPEED_LEVELS)))
    if not levels or levels[0] < 2:
        raise ParameterError("speed levels need at least 2 steps", witness=levels)

    table = []
    previous = None
    for n in levels:
        edges, tags, values = _level_masses(path, n)
        h = 1.0 / n
        excess, neighbor = _excess(tags, values)
        candidate = excess > 10.0 * tol
        if previous is not None:
            prev_edges, prev_excess = previous
            mids = 0.5 * (edges[:-1] + edges[1:])
            parent = np.clip(np.searchsorted(prev_edges, mids, side='right') - 1, 0, len(prev_excess) - 1)
            candidate &= excess >= global_params.ATOM_PERSISTENCE * prev_excess[parent]
        atoms = np.where(candidate, excess, 0.0)
        density = np.where(tags == FINITE, (values - atoms) / h, np.inf)
        infinite = tags == POS
        total = ExtendedTime(tag=POS) if infinite.any() else ExtendedTime(float(values.sum()))
        finite_density = density[np.isfinite(density)]
        table.append({
            'n': n,
            'h': h,
            'total': total,
            'max_density': float(finite_density.max()) if finite_density.size else 0.0,
            'atom_mass': float(atoms.sum()),
        })
        previous = (edges, excess)

    singular = np.zeros(len(path.times))
    mids = 0.5 * (edges[:-1] + edges[1:])
    for k in np.flatnonzero(atoms > 0):
        nearest = int(np.argmin(np.abs(path.times - mids[k])))
        singular[nearest] += atoms[k]
    region = _merge_intervals(edges, infinite)
    if region:
        log.info("two-point function is infinite on %d interval(s) of the finest level", len(region))
    return SpeedProfile(edges, density, singular, total, table, region)


def _dyadic_points(times, level):
    pieces = 2 ** level
    frac = np.arange(pieces) / float(pieces)
    starts = times[:-1, None] + np.diff(times)[:, None] * frac[None, :]
    return np.append(starts.ravel(), times[-1])


def _partition_sum(path, q, level):
    """Sum of T(r_i, r_{i+1})**q / (q (r_{i+1} - r_i)**(q - 1)) on a dyadic refinement."""
    r = _dyadic_points(path.times, level)
    tags, values = path.separation_arrays(r[:-1], r[1:])
    if q == 1.0:
        ctags, cvalues = tags.copy(), values.copy()
    else:
        ctags, cvalues = lq_cost_arrays(tags, values, q)
    cvalues = np.where(ctags == FINITE, cvalues * np.diff(r) ** (1.0 - q), 0.0)
    return ext_sum(ctags, cvalues), len(r)


def _default_depth(path, depth):
    # discrete paths jump at their sample times; refining would squeeze each
    # jump into a shorter interval and only rescale its term
    if depth is not None:
        return int(depth)
    return 0 if path.is_discrete else global_params.PARTITION_DEPTH


def action_table(path, q, depth=None):
    """Partition sums level by level: rows (level, points, sum)."""
    depth = _default_depth(path, depth)
    rows = []
    for level in range(depth + 1):
        value, points = _partition_sum(path, q, level)
        rows.append((level, points, value))
    return rows


def q_action(path, q, mode=PARTITION_INFIMUM, depth=None, h_levels=None):
    """
    The q-action A_q of a path.

    partition_infimum minimizes the partition sums over dyadic refinements of
    the sample grid up to depth; density_integral integrates rho**q / q of the
    causal speed on its finest level.

    depth defaults to PARTITION_DEPTH for curves and to 0 for discrete paths
    (spacetime point sequences). Those are read as piecewise constant, so the
    default action is the single partition sum over consecutive samples. An
    explicit positive depth moves every jump into a shorter subinterval and
    rescales its term by that length to the power 1 - q.
    """
    check_transport_exponent(q)
    q = float(q)
    if mode == PARTITION_INFIMUM:
        rows = action_table(path, q, depth)
        best = min(row[2] for row in rows)
        log.debug("A_%g over %d levels: %s", q, len(rows), best)
        return best
    if mode == DENSITY_INTEGRAL:
        profile = causal_speed(path, h_levels)
        h = np.diff(profile.edges)
        tags, values = split_extended(profile.abs_density)
        ctags, cvalues = lq_cost_arrays(tags, values, q)
        return ext_sum(ctags, np.where(ctags == FINITE, cvalues * h, 0.0))
    raise ParameterError("unknown action mode", witness=mode)


def length_ell(path, depth=None):
    """L_l: infimum of sum T(t_i, t_{i+1}) over dyadic refinements of the sample grid."""
    depth = _default_depth(path, depth)
    return min(_partition_sum(path, 1.0, level)[0] for level in range(depth + 1))


def _extended_T(path, s, t):
    """Two-point function extended from [0, 1] to the whole line."""
    if (s < 0 and t < 0) or (s > 1 and t > 1):
        return ExtendedTime(0.0)
    return path.T(max(s, 0.0), min(t, 1.0))


def uniform_partition_fraction(path, q, n, offsets=None, eps=1e-3, depth=None):
    """
    Fraction of offsets t in [0, 1/n) whose shifted uniform partition sum
    f_n(t) lies below A_q + eps.
    """
    check_transport_exponent(q)
    n = int(n)
    if n < 1:
        raise ParameterError("n must be positive", witness=n)
    if offsets is None:
        offsets = (np.arange(32) + 0.5) / (32.0 * n)
    target = ExtendedReal(q_action(path, q, depth=depth)) + eps
    step = 1.0 / n
    hits = 0
    for t in offsets:
        terms = []
        for j in range(-1, n):
            lo = t + j * step
            terms.append(lq_cost(_extended_T(path, lo, lo + step), q) * ExtendedReal(step ** (1.0 - q)))
        total = terms[0]
        for term in terms[1:]:
            total = total + term
        if total < target:
            hits += 1
    return hits / float(len(offsets))


def geodesic_check(path, q, tol=None, depth=None):
    """
    Evaluate the equivalent geodesic characterizations at sample resolution.

    Conditions: 'rough geodesic' l(g_s, g_t) = (t - s) l01; 'lower bound'
    l(g_s, g_t) >= (t - s) l01; 'constant speed'; 'action saturation' for q
    and 'action saturation for all q' on the reference exponents. A null
    path (l01 = 0) is classified as such without the timelike conditions.
    """
    check_transport_exponent(q)
    tol = global_params.TOL if tol is None else float(tol)
    report = GeodesyReport(tolerances={'absolute': tol, 'relative action': tol})
    l01 = path.endpoint_separation()
    report.values['l01'] = l01
    times = path.times
    si, ti = np.triu_indices(len(times), k=1)
    tags, values = path.separation_arrays(times[si], times[ti])

    if l01 == ExtendedTime(0.0):
        report.classification = 'null'
        positive = np.flatnonzero((tags != FINITE) | (values > tol))
        report.add_check('null', [(float(times[si[k]]), float(times[ti[k]])) for k in positive])
        report.conditions['null'] = report.check('null').passed()
        return report
    if not l01.is_finite():
        report.classification = 'unbounded'
        report.add_check('finite endpoint separation', [(0.0, 1.0)])
        return report

    ell = l01.value
    abs_tol = tol * max(1.0, ell)
    expected = (times[ti] - times[si]) * ell
    finite = tags == FINITE

    def pairs(mask):
        return [(float(times[si[k]]), float(times[ti[k]])) for k in np.flatnonzero(mask)]

    low = (~finite & (tags == NEG)) | (finite & (values < expected - abs_tol))
    off = ~finite | (np.abs(values - expected) > abs_tol)
    report.add_check('rough geodesic', pairs(off), tol=abs_tol)
    report.add_check('lower bound', pairs(low), tol=abs_tol)

    step_tags, step_values = path.separation_arrays(times[:-1], times[1:])
    step_expected = np.diff(times) * ell
    uneven = (step_tags != FINITE) | (np.abs(step_values - step_expected) > abs_tol)
    speed_witnesses = [(float(times[k]), float(times[k + 1])) for k in np.flatnonzero(uneven)]
    if not path.is_discrete:
        profile = causal_speed(path, tol=tol)
        grid_tol = global_params.GRID_TOL_FACTOR * tol * max(1.0, ell) * len(profile.abs_density)
        dev = np.abs(profile.abs_density - ell) > grid_tol
        speed_witnesses += [(float(profile.edges[k]), float(profile.edges[k + 1]))
                            for k in np.flatnonzero(dev)]
        if profile.singular_mass.sum() > 10.0 * tol:
            speed_witnesses.append(('atom', float(profile.singular_mass.sum())))
    report.add_check('constant speed', speed_witnesses, tol=abs_tol)

    def saturation(qq):
        a = q_action(path, qq, depth=depth)
        closed = lq_cost(l01, qq)
        if not a.is_finite():
            return a, closed, False
        return a, closed, abs(a.value - closed.value) <= tol * max(1.0, abs(closed.value))

    a, closed, ok = saturation(q)
    report.values['A_q'] = a
    report.values['l01^q/q'] = closed
    report.add_check('action saturation', [] if ok else [(q, float(a), float(closed))], tol=tol)
    missing = []
    for qq in REFERENCE_EXPONENTS:
        a_ref, closed_ref, ok_ref = saturation(qq)
        if not ok_ref:
            missing.append((qq, float(a_ref), float(closed_ref)))
    report.add_check('action saturation for all q', missing, tol=tol)

    for c in report.checks:
        report.conditions[c.name] = c.passed()
    outcomes = set(report.conditions.values())
    report.inconsistent = len(outcomes) > 1
    if report.inconsistent:
        log.warning("geodesic characterizations disagree: %s", report.conditions)
        report.classification = 'inconsistent'
    else:
        report.classification = 'timelike geodesic' if True in outcomes else 'not a geodesic'
    return report
