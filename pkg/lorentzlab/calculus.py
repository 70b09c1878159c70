"""
Causal functions on a discrete spacetime: order preservation, slopes,
steepness, McShane extensions, null distance and perturbation cones.

Forward and backward slopes are certified lower bounds of the maximal weak
subslope; its exact value is only available on the smooth models of
models.py.
"""

import logging

import networkx as nx
import numpy as np

from lorentzlab import global_params
from lorentzlab.errors import NotCausalError, NotSteepError, ParameterError, PreconditionError
from lorentzlab.report import PerturbationReport
from lorentzlab.utils import (FINITE, NEG, POS, ExtendedReal, ext_add_arrays,
                              ext_sub_arrays, join_extended, split_extended)

log = logging.getLogger(__name__)

LOWER = 'lower'
UPPER = 'upper'


class CausalFunction:
    """Extended-valued function on the points of a spacetime."""

    def __init__(self, tags, values):
        self.tags = np.asarray(tags, dtype=np.int8)
        self.values = np.where(self.tags == FINITE, np.asarray(values, dtype=float), 0.0)

    @classmethod
    def from_array(cls, arr):
        return cls(*split_extended(np.asarray(arr, dtype=float)))

    @property
    def n_points(self):
        return len(self.tags)

    @property
    def domain(self):
        return np.flatnonzero(self.tags == FINITE)

    def __getitem__(self, i):
        return ExtendedReal(self.values[i], int(self.tags[i]))

    def as_array(self):
        return join_extended(self.tags, self.values)

    def __repr__(self):
        return '<CausalFunction n=%d finite=%d>' % (self.n_points, len(self.domain))


def _as_function(f):
    if isinstance(f, CausalFunction):
        return f
    return CausalFunction.from_array(f)


def _ext_less(ta, va, tb, vb, tol=0.0):
    """Elementwise a < b - tol in the extended order."""
    finite = (ta == FINITE) & (tb == FINITE)
    return (ta < tb) | (finite & (va < vb - tol))


def _pairs(mask):
    return [tuple(int(v) for v in w) for w in np.argwhere(mask)]


# ---------------------------------------------------------------------------
# Causality and closure
# ---------------------------------------------------------------------------

def _violations(spacetime, f, tol):
    causal = spacetime.causal_mask() & ~np.eye(spacetime.n_points, dtype=bool)
    # f(y) < f(x) for x <= y
    bad = _ext_less(f.tags[None, :], f.values[None, :], f.tags[:, None], f.values[:, None], tol)
    return causal & bad


def causality_check(spacetime, f, tol=0.0):
    """All causal pairs (x, y) with f(x) > f(y); empty iff f is causal."""
    f = _as_function(f)
    if f.n_points != spacetime.n_points:
        raise ParameterError("function must be defined on every point", witness=f.n_points)
    return _pairs(_violations(spacetime, f, tol))


def closure_check(spacetime, f, g, tol=0.0):
    """
    Causal functions are closed under sums, products of nonnegatives,
    nondecreasing post-composition, min and max. Each combination is
    checked on the points where both f and g are finite.

    :return: dict combination -> violation list
    """
    f, g = _as_function(f), _as_function(g)
    both = (f.tags == FINITE) & (g.tags == FINITE)
    idx = np.flatnonzero(both)
    a, b = f.values, g.values
    combos = {
        'sum': a + b,
        'min': np.minimum(a, b),
        'max': np.maximum(a, b),
        'arctan': np.arctan(a),
    }
    if np.all(a[idx] >= 0) and np.all(b[idx] >= 0):
        combos['product'] = a * b
    sub = spacetime.causal_mask()[np.ix_(idx, idx)] & ~np.eye(len(idx), dtype=bool)
    out = {}
    for name, h in combos.items():
        hv = h[idx]
        bad = sub & (hv[None, :] < hv[:, None] - tol)
        out[name] = [(int(idx[i]), int(idx[j])) for i, j in np.argwhere(bad)]
    return out


def envelopes(spacetime, f):
    """
    (f-, f+) with f+(y) = inf of f over I+(y) and f-(y) = sup over I-(y);
    inf over the empty set is +inf and sup is -inf.
    """
    f = _as_function(f)
    F = f.as_array()
    ll = spacetime.chronological_mask() & ~np.eye(spacetime.n_points, dtype=bool)
    upper = np.where(ll, F[None, :], np.inf).min(axis=1)
    lower = np.where(ll, F[:, None], -np.inf).max(axis=0)
    return CausalFunction.from_array(lower), CausalFunction.from_array(upper)


# ---------------------------------------------------------------------------
# Slopes
# ---------------------------------------------------------------------------

class SlopeField:
    def __init__(self, fwd, bwd, levels=None, table=None):
        self.fwd = np.asarray(fwd, dtype=float)
        self.bwd = np.asarray(bwd, dtype=float)
        self.levels = levels or {}
        self.table = table or []

    @property
    def st(self):
        return np.minimum(self.fwd, self.bwd)


def _difference_quotients(spacetime, f, forward):
    """
    Quotients (f(y) - f(x)) / l(x, y) over chronological competitors, as an
    n x n matrix with +inf where y is not a competitor of x.
    """
    n = spacetime.n_points
    tags, values = spacetime.tags, spacetime.values
    if not forward:
        tags, values = tags.T, values.T
    competitor = ((tags == POS) | ((tags == FINITE) & (values > 0))) & ~np.eye(n, dtype=bool)
    if forward:
        dt, dv = ext_sub_arrays(f.tags[None, :], f.values[None, :], f.tags[:, None], f.values[:, None])
    else:
        dt, dv = ext_sub_arrays(f.tags[:, None], f.values[:, None], f.tags[None, :], f.values[None, :])
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(tags == FINITE, dv / np.where(tags == FINITE, values, 1.0), 0.0)
    # finite difference over an infinite separation gives 0; infinite differences give +inf
    ratio = np.where(dt == FINITE, ratio, np.inf)
    ratio = np.where(dt == NEG, -np.inf, ratio)
    return np.where(competitor, ratio, np.inf), competitor


def _neighbor_order(spacetime):
    coords = spacetime.coords
    d = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=-1)
    return np.argsort(d, axis=1, kind='stable')


def slopes(spacetime, f, schedule=None):
    """
    Forward and backward slopes. On embedded spacetimes the infimum is taken
    over the k nearest chronological competitors for each k of the schedule
    and the largest k is reported; otherwise over every competitor.
    No competitor gives +inf.
    """
    f = _as_function(f)
    schedule = tuple(global_params.SLOPE_SCHEDULE if schedule is None else schedule)
    fwd_q, fwd_c = _difference_quotients(spacetime, f, True)
    bwd_q, bwd_c = _difference_quotients(spacetime, f, False)
    if spacetime.coords is None:
        fwd = fwd_q.min(axis=1)
        bwd = bwd_q.min(axis=1)
        table = [('all', _finite_mean(fwd), _finite_mean(bwd), int(np.isfinite(fwd).sum()))]
        return SlopeField(fwd, bwd, {'all': (fwd, bwd)}, table)
    order = _neighbor_order(spacetime)
    levels = {}
    table = []
    rows = np.arange(spacetime.n_points)[:, None]
    for k in schedule:
        per_level = []
        for quotients, competitors in ((fwd_q, fwd_c), (bwd_q, bwd_c)):
            ranked = competitors[rows, order]
            rank = np.cumsum(ranked, axis=1)
            keep = ranked & (rank <= k)
            per_level.append(np.where(keep, quotients[rows, order], np.inf).min(axis=1))
        levels[k] = tuple(per_level)
        table.append((k, _finite_mean(per_level[0]), _finite_mean(per_level[1]),
                      int(np.isfinite(per_level[0]).sum())))
        log.debug("slopes with %d nearest competitors: mean fwd %g", k, table[-1][1])
    fwd, bwd = levels[schedule[-1]]
    return SlopeField(fwd, bwd, levels, table)


def _finite_mean(arr):
    finite = arr[np.isfinite(arr)]
    return float(finite.mean()) if finite.size else float('nan')


# ---------------------------------------------------------------------------
# Steepness and McShane extensions
# ---------------------------------------------------------------------------

def _scaled_separation(spacetime, L, rows=None, cols=None):
    """L * l under 0 * inf = 0, restricted to rows x cols."""
    tags, values = spacetime.tags, spacetime.values
    if rows is not None:
        tags, values = tags[np.ix_(rows, cols)], values[np.ix_(rows, cols)]
    if L == 0:
        return np.where(tags == NEG, NEG, FINITE).astype(np.int8), np.zeros(values.shape)
    return tags, np.where(tags == FINITE, L * values, 0.0)


def _steep_violations(spacetime, f, L, region, tol):
    region = np.asarray(region, dtype=int)
    st, sv = _scaled_separation(spacetime, L, region, region)
    dt, dv = ext_sub_arrays(f.tags[region][None, :], f.values[region][None, :],
                            f.tags[region][:, None], f.values[region][:, None])
    causal = (spacetime.tags[np.ix_(region, region)] != NEG) & ~np.eye(len(region), dtype=bool)
    bad = causal & _ext_less(dt, dv, st, sv, tol)
    return [(int(region[i]), int(region[j])) for i, j in np.argwhere(bad)]


def steepness_check(spacetime, f, L, region=None, tol=0.0):
    """Pairs x <= y of the region with f(y) - f(x) < L l(x, y)."""
    f = _as_function(f)
    L = float(L)
    if L < 0:
        raise ParameterError("steepness constant must be nonnegative", witness=L)
    region = np.arange(spacetime.n_points) if region is None else np.asarray(sorted(set(region)), dtype=int)
    return _steep_violations(spacetime, f, L, region, tol)


def mcshane_extend(spacetime, f_partial, L, mode=LOWER, tol=0.0):
    """
    Extremal L-steep extension of f given on W.

    lower: f(y) = sup { f(x) + L l(x, y) : x in W, x <= y, f(x) > -inf }
    upper: f(y) = inf { f(z) - L l(y, z) : z in W, y <= z, f(z) < +inf }

    :param f_partial: dict point -> value on W
    """
    L = float(L)
    if L < 0:
        raise ParameterError("steepness constant must be nonnegative", witness=L)
    diag_tags = np.diag(spacetime.tags)
    diag_values = np.diag(spacetime.values)
    off = np.flatnonzero((diag_tags != FINITE) | (diag_values != 0.0))
    if off.size:
        raise PreconditionError("McShane extensions need l to vanish on the diagonal",
                                witness=int(off[0]))
    W = np.asarray(sorted(int(k) for k in f_partial), dtype=int)
    if W.size == 0:
        raise ParameterError("McShane extension needs a nonempty set W")
    fw_tags, fw_values = split_extended(np.array([float(f_partial[k]) for k in W]))
    partial = CausalFunction(np.full(spacetime.n_points, NEG, dtype=np.int8), np.zeros(spacetime.n_points))
    partial.tags[W] = fw_tags
    partial.values[W] = fw_values
    bad = _steep_violations(spacetime, partial, L, W, tol)
    if bad:
        raise NotSteepError("function is not %g-steep on W" % L, witness=bad[0])

    n = spacetime.n_points
    if mode == LOWER:
        keep = fw_tags != NEG
        src = W[keep]
        st, sv = _scaled_separation(spacetime, L, src, np.arange(n))
        ct, cv = ext_add_arrays(fw_tags[keep][:, None], fw_values[keep][:, None], st, sv)
        ct = np.where(spacetime.tags[src] == NEG, NEG, ct)
        best = np.where(ct == FINITE, cv, np.where(ct == POS, np.inf, -np.inf))
        out = best.max(axis=0) if src.size else np.full(n, -np.inf)
    elif mode == UPPER:
        keep = fw_tags != POS
        dst = W[keep]
        st, sv = _scaled_separation(spacetime, L, np.arange(n), dst)
        ct, cv = ext_sub_arrays(fw_tags[keep][None, :], fw_values[keep][None, :], st, sv)
        ct = np.where(spacetime.tags[:, dst] == NEG, POS, ct)
        best = np.where(ct == FINITE, cv, np.where(ct == POS, np.inf, -np.inf))
        out = best.min(axis=1) if dst.size else np.full(n, np.inf)
    else:
        raise ParameterError("mode must be 'lower' or 'upper'", witness=mode)
    log.debug("McShane %s extension from %d points", mode, len(W))
    return CausalFunction.from_array(out)


def random_steep_extension(spacetime, f_partial, L, rng, tol=1e-12):
    """
    A random L-steep extension of f_partial, built point by point by drawing
    each new value between the current lower and upper McShane extensions.
    """
    values = dict((int(k), float(v)) for k, v in f_partial.items())
    for y in rng.permutation(spacetime.n_points):
        y = int(y)
        if y in values:
            continue
        low = mcshane_extend(spacetime, values, L, LOWER, tol).as_array()[y]
        high = mcshane_extend(spacetime, values, L, UPPER, tol).as_array()[y]
        if np.isfinite(low) and np.isfinite(high):
            values[y] = low + rng.random() * (high - low)
        elif np.isfinite(low):
            values[y] = low + rng.random()
        elif np.isfinite(high):
            values[y] = high - rng.random()
        else:
            values[y] = float(rng.normal())
    return CausalFunction.from_array(np.array([values[k] for k in range(spacetime.n_points)]))


def duality_formula_check(spacetime, x, y, candidates, include_extension=True, tol=0.0):
    """
    Compare l(x, y) with the infimum of f(y) - f(x) over causal candidates
    whose slopes are at least 1, i.e. 1-steep: f(b) - f(a) >= l(a, b) for a <= b.
    With include_extension the lower McShane extension of l(x, .) from
    J+(x) joins the candidates and attains the infimum.

    :return: (l(x, y) as ExtendedReal, infimum as ExtendedReal)
    """
    spacetime._check_index(x)
    spacetime._check_index(y)
    functions = [_as_function(f) for f in candidates]
    for k, f in enumerate(functions):
        bad = causality_check(spacetime, f, tol)
        if bad:
            raise NotCausalError("candidate %d is not causal" % k, witness=bad[0])
        steep = steepness_check(spacetime, f, 1.0, tol=tol)
        if steep:
            raise NotSteepError("candidate %d has slope below 1" % k, witness=steep[0])
    if include_extension:
        future = np.flatnonzero(spacetime.tags[x] == FINITE)
        ell_from_x = dict((int(z), float(spacetime.values[x, z])) for z in future)
        functions.append(mcshane_extend(spacetime, ell_from_x, 1.0, LOWER, max(tol, global_params.TOL)))
    best = ExtendedReal(tag=POS)
    for f in functions:
        diff = f[y] - f[x]
        if diff < best:
            best = diff
    return ExtendedReal(spacetime.values[x, y], int(spacetime.tags[x, y])), best


# ---------------------------------------------------------------------------
# Null distance
# ---------------------------------------------------------------------------

def _check_strictly_causal(spacetime, f):
    n = spacetime.n_points
    strict = spacetime.causal_mask() & ~np.eye(n, dtype=bool)
    ge = ~_ext_less(f.tags[:, None], f.values[:, None], f.tags[None, :], f.values[None, :])
    bad = np.argwhere(strict & ge)
    if bad.size:
        raise NotCausalError("null distance needs a strictly causal function",
                             witness=tuple(int(v) for v in bad[0]))


def null_graph(spacetime, f):
    """Symmetrized causal graph weighted by |f(b) - f(a)|; infinite jumps are dropped."""
    f = _as_function(f)
    _check_strictly_causal(spacetime, f)
    graph = nx.Graph()
    graph.add_nodes_from(range(spacetime.n_points))
    finite = f.tags == FINITE
    edges = spacetime.causal_mask() & ~np.eye(spacetime.n_points, dtype=bool)
    edges &= finite[:, None] & finite[None, :]
    a, b = np.nonzero(edges)
    weights = np.abs(f.values[b] - f.values[a])
    graph.add_weighted_edges_from(zip(a.tolist(), b.tolist(), weights.tolist()))
    return graph


def null_distance(spacetime, f, x, y):
    """Infimum of the null length over piecewise causal chains from x to y; +inf if none."""
    spacetime._check_index(x)
    spacetime._check_index(y)
    graph = null_graph(spacetime, f)
    try:
        return float(nx.dijkstra_path_length(graph, int(x), int(y), weight='weight'))
    except nx.NetworkXNoPath:
        return float('inf')


def null_distance_matrix(spacetime, f):
    graph = null_graph(spacetime, f)
    n = spacetime.n_points
    out = np.full((n, n), np.inf)
    for source, lengths in nx.all_pairs_dijkstra_path_length(graph, weight='weight'):
        for target, d in lengths.items():
            out[source, target] = d
    return out


def null_lipschitz_constant(spacetime, f, g):
    """sup |g(x) - g(y)| / d_f(x, y) over pairs at finite positive null distance."""
    d = null_distance_matrix(spacetime, f)
    g = np.asarray(_as_function(g).as_array(), dtype=float)
    ok = np.isfinite(d) & (d > 0)
    if not ok.any():
        return 0.0
    with np.errstate(invalid='ignore'):
        ratios = np.abs(g[:, None] - g[None, :])[ok] / d[ok]
    return float(np.nanmax(ratios))


# ---------------------------------------------------------------------------
# Perturbations
# ---------------------------------------------------------------------------

def perturbation_membership(spacetime, f, g, eps_schedule, tol=0.0):
    """
    Largest scheduled eps with f + eps g causal, the same for f - eps g,
    and star-shapedness around zero on the schedule.
    """
    f = _as_function(f)
    g = _as_function(g)
    if np.any(g.tags != FINITE):
        raise ParameterError("perturbations must be finite everywhere")
    if causality_check(spacetime, f, tol):
        raise NotCausalError("perturbation cones are defined for causal functions",
                             witness=causality_check(spacetime, f, tol)[0])
    schedule = sorted(float(e) for e in eps_schedule)
    if not schedule or schedule[0] <= 0:
        raise ParameterError("eps schedule must hold positive values", witness=schedule)
    report = PerturbationReport(tolerances={'causality': tol})
    rows = []
    causal = {1: [], -1: []}
    for eps in schedule:
        counts = []
        for sign in (1, -1):
            tags, values = ext_add_arrays(f.tags, f.values, g.tags, sign * eps * g.values)
            n_bad = int(_violations(spacetime, CausalFunction(tags, values), tol).sum())
            causal[sign].append(n_bad == 0)
            counts.append(n_bad)
        rows.append((eps, counts[0], counts[1]))
    report.tables['eps'] = rows

    def largest(flags):
        hits = [e for e, ok in zip(schedule, flags) if ok]
        return max(hits) if hits else 0.0

    def star_witnesses(flags):
        return [schedule[i] for i in range(len(schedule)) if flags[i] and not all(flags[:i])]

    report.values['largest_eps'] = largest(causal[1])
    report.values['largest_eps_negative'] = largest(causal[-1])
    report.values['member'] = any(causal[1])
    report.values['symmetric_member'] = any(causal[1]) and any(causal[-1])
    report.add_check('star-shaped', star_witnesses(causal[1]) + star_witnesses(causal[-1]))
    return report
