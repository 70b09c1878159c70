#!/usr/bin/env python
# Entry point of the lab. main() parses the global flags and one subcommand,
# merges the run configuration file into the parsed arguments, stores the
# tunables in global_params and runs the subcommand, which writes its CSV
# artifacts and a summary.json into the output directory.

import argparse
import json
import logging
import os
import sys

import numpy as np
import six

from lorentzlab import __version__
from lorentzlab import acceptance
from lorentzlab import calculus
from lorentzlab import curvature
from lorentzlab import curves
from lorentzlab import dalembert
from lorentzlab import global_params
from lorentzlab import norms
from lorentzlab import spacetime as st
from lorentzlab import transport
from lorentzlab.errors import (EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, LabError,
                               ParameterError, ParseError, PreconditionError)
from lorentzlab.input_helper import InputHelper, load_config, norm_from_args, read_function, write_measure
from lorentzlab.models import Bump
from lorentzlab.report import (McShaneReport, NormReport, NullDistanceReport, SlopeReport,
                               SpeedReport, TransportReport)
from lorentzlab.utils import (NEG, Timeout, check_transport_exponent, format_value, lq_cost,
                              make_rng, to_jsonable, write_csv)

log = logging.getLogger(__name__)

OUT_ENV = 'LORENTZLAB_OUT'
DEFAULT_OUT = 'lorentzlab_out'

_PARAMS = dict((k, v) for k, v in six.iteritems(vars(global_params)) if k.isupper())

GLOBAL_KEYS = ('seed', 'tol', 'out', 'quiet', 'verbose', 'timeout', 'remote_url')

# Config sections consulted by each subcommand, in precedence order
COMMAND_SECTIONS = {
    'validate': ('core_spacetime',),
    'lq': ('core_spacetime', 'transport'),
    'interpolate': ('core_spacetime', 'transport'),
    'lift': ('core_spacetime', 'transport'),
    'duality': ('core_spacetime', 'transport'),
    'good-geodesic': ('core_spacetime', 'curvature', 'transport'),
    'tmcp-check': ('core_spacetime', 'curvature', 'transport'),
    'curve-speed': ('core_spacetime', 'curves', 'hyperbolic_norms'),
    'slopes': ('core_spacetime', 'calculus', 'transport'),
    'mcshane': ('core_spacetime', 'calculus'),
    'null-dist': ('core_spacetime', 'calculus'),
    'dalembert': ('calculus', 'curvature'),
    'brenier': ('core_spacetime', 'calculus', 'transport'),
    'norms': ('hyperbolic_norms',),
    'acceptance': ('acceptance',),
}

COMMAND_DEFAULTS = {
    'lq': {'q': 0.5, 'certify': False},
    'interpolate': {'q': 0.5, 't': [0.25, 0.5, 0.75]},
    'lift': {'q': 0.5, 'levels': 2},
    'duality': {'q': 0.5},
    'good-geodesic': {'q': 0.5, 'K': 0.0, 'lam': 0.5, 'depth': 3,
                      'direction': curvature.FUTURE, 'reduced': False},
    'tmcp-check': {'q': 0.5, 'K': 0.0, 't': [0.25, 0.5, 0.75],
                   'direction': curvature.FUTURE, 'reduced': False},
    'curve-speed': {'q': list(curves.REFERENCE_EXPONENTS), 'kind': norms.MINKOWSKI, 'dim': 2,
                    'geodesic': False},
    'slopes': {'q': 0.5, 'time': False},
    'mcshane': {'L': 1.0, 'mode': 'both', 'samples': 0},
    'null-dist': {'q': 0.5, 'time': False},
    'dalembert': {'dim': 2, 'K': 0.0, 'direction': curvature.FUTURE, 'variant': dalembert.POWER,
                  'family': 'minkowski', 'resolutions': list(dalembert.DEFAULT_RESOLUTIONS),
                  'radius': 0.25, 'amplitude': 1.0},
    'brenier': {'q': 0.5, 'samples': 64},
    'norms': {'kind': norms.MINKOWSKI, 'dim': 2, 'input': '-'},
    'acceptance': {'resolutions': []},
}


class Run:
    """Artifacts and reports of one subcommand execution."""

    def __init__(self, command, out):
        self.command = command
        self.out = out
        self.reports = []
        self.artifacts = []

    def csv(self, name, header, rows):
        path = write_csv(os.path.join(self.out, name + '.csv'), header, rows)
        self.artifacts.append(os.path.basename(path))
        return path

    def measure(self, name, measure):
        path = write_measure(measure, os.path.join(self.out, name + '.txt'))
        self.artifacts.append(os.path.basename(path))
        return path

    def passed(self):
        return all(r.passed() for r in self.reports)

    def write_summary(self, exit_code, error=None):
        tolerances = dict((k, getattr(global_params, k)) for k in
                          ('TOL', 'NORM_TOL', 'MARGINAL_TOL', 'SLACKNESS_TOL', 'MEASURE_TOL',
                           'GRID_TOL_FACTOR', 'WEAK_FORM_REL_TOL'))
        for r in self.reports:
            tolerances[r.name] = r.tolerances
        summary = {
            'command': self.command,
            'passed': self.passed() and error is None,
            'exit_code': exit_code,
            'seed': global_params.SEED,
            'tolerances': tolerances,
            'artifacts': self.artifacts,
            'reports': [r.summary() for r in self.reports],
        }
        if error is not None:
            summary['error'] = str(error)
        path = os.path.join(self.out, 'summary.json')
        with open(path, 'w', newline='') as f:
            f.write(json.dumps(to_jsonable(summary), sort_keys=True, indent=2) + '\n')
        return path


def _restore_params():
    for k, v in six.iteritems(_PARAMS):
        setattr(global_params, k, v)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _has_spacetime(args):
    return bool(args.remote_url or getattr(args, 'spacetime', None) or getattr(args, 'generator', None))


def _load_spacetime(args):
    if args.remote_url:
        helper = InputHelper(InputHelper.REMOTE, url=args.remote_url, keep=args.keep or '')
    elif getattr(args, 'spacetime', None):
        helper = InputHelper(InputHelper.SPACETIME_FILE, source=args.spacetime)
    elif getattr(args, 'generator', None):
        if not isinstance(args.generator, dict):
            raise ParseError("generator must be a JSON object", 'generator')
        helper = InputHelper(InputHelper.GENERATOR, stanza=args.generator)
    else:
        raise ParseError("no spacetime given (use --spacetime, --generator or --remote-url)")
    space = helper.get_inputs()
    log.info("loaded %r", space)
    return space


def _point(spec, space, what='point'):
    """A point index, or coordinates 'x0,x1,...' snapped to the nearest point."""
    if isinstance(spec, (list, tuple)) or (isinstance(spec, six.string_types) and ',' in spec):
        raw = spec.split(',') if isinstance(spec, six.string_types) else spec
        try:
            coords = np.array([float(v) for v in raw])
        except (TypeError, ValueError):
            raise ParseError("bad coordinates %r" % (spec,), what)
        if space.coords is None or coords.shape != (space.coords.shape[1],):
            raise ParseError("coordinates %r do not match the spacetime" % (spec,), what)
        if space.grid is not None:
            idx = space.grid.nearest_index(coords)
            if idx is None:
                raise ParseError("coordinates %r lie outside the grid" % (spec,), what)
            return idx
        return int(np.argmin(np.linalg.norm(space.coords - coords, axis=1)))
    try:
        idx = int(spec)
    except (TypeError, ValueError):
        raise ParseError("expected a point index or coordinates, got %r" % (spec,), what)
    if not 0 <= idx < space.n_points:
        raise ParseError("point index %d out of range" % idx, what)
    return idx


def _region(space, body, kind, what):
    if space.coords is None:
        raise ParseError("%s measures need point coordinates" % kind, what)
    try:
        numbers = [float(v) for v in body.split(',')]
    except ValueError:
        raise ParseError("bad %s description %r" % (kind, body), what)
    dim = space.coords.shape[1]
    if kind == 'diamond':
        if len(numbers) != dim + 1:
            raise ParseError("diamond needs %d center coordinates and a radius" % dim, what)
        center, radius = np.array(numbers[:dim]), numbers[dim]
        return np.abs(space.coords - center).sum(axis=1) <= radius + 1e-12
    if len(numbers) != 2 * dim:
        raise ParseError("box needs a (lo, hi) pair per axis", what)
    box = np.array(numbers).reshape(dim, 2)
    return np.all((space.coords >= box[:, 0] - 1e-12) & (space.coords <= box[:, 1] + 1e-12), axis=1)


def _load_measure(spec, space, what):
    """
    Measure from 'dirac:<point>', 'uniform:<i>,<j>,...', 'diamond:<c0>,...,<r>',
    'box:<lo0>,<hi0>,...' or a measure file.
    """
    if spec is None:
        raise ParseError("missing measure", what)
    spec = str(spec)
    kind, _, body = spec.partition(':')
    n = space.n_points
    if kind == 'dirac' and body:
        return transport.DiscreteMeasure.dirac(n, _point(body, space, what))
    if kind == 'uniform' and body:
        return transport.DiscreteMeasure.uniform(n, [_point(tok, space, what) for tok in body.split(',')])
    if kind in ('diamond', 'box') and body:
        mask = _region(space, body, kind, what)
        if not mask.any():
            raise ParseError("%s %r contains no point" % (kind, body), what)
        weights = np.where(mask, space.m_weights, 0.0)
        if weights.sum() <= 0:
            weights = mask.astype(float)
        return transport.DiscreteMeasure(weights, normalize=True)
    return InputHelper(InputHelper.MEASURE, source=spec, n_points=n).get_inputs()


def _load_function(args, space, default=-np.inf):
    if getattr(args, 'function', None):
        values, _ = read_function(args.function, space.n_points, default)
        return values
    if getattr(args, 'target', None) is not None:
        o = _point(args.target, space, 'target')
        return transport.potential_from_target(space, o, args.q).as_array()
    if getattr(args, 'time', False):
        if space.coords is None:
            raise ParseError("the time function needs point coordinates", 'time')
        return space.coords[:, 0].copy()
    raise ParseError("no function given (use --function, --target or --time)")


def _dimension_parameter(args, space):
    if args.N is not None:
        return float(args.N)
    if space.coords is not None:
        return float(space.coords.shape[1])
    raise ParameterError("N is required on spacetimes without coordinates")


def _witness_text(witness):
    if isinstance(witness, (tuple, list)):
        return ' '.join(_witness_text(w) for w in witness)
    return format_value(witness)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args, run):
    space = _load_spacetime(args)
    report = st.validate(space, args.tol)
    for name, witnesses in six.iteritems(st.order_properties(st.relations(space))):
        report.add_check(name, witnesses)
    rows = []
    for c in report.checks:
        if not c.witnesses:
            rows.append((c.name, c.count, ''))
        for w in c.witnesses:
            rows.append((c.name, c.count, _witness_text(w)))
    run.reports.append(report)
    run.csv('validate', ('check', 'violations', 'witness'), rows)


def cmd_lq(args, run):
    space = _load_spacetime(args)
    mu = _load_measure(args.mu, space, 'mu')
    nu = _load_measure(args.nu, space, 'nu')
    q = float(args.q)
    value, coupling = transport.lq_distance(space, mu, nu, q, certify=bool(args.certify))
    report = TransportReport(tolerances={'marginals': global_params.MARGINAL_TOL})
    report.values.update({'q': q, 'l_q': value, 'cost': lq_cost(value, q)})
    err = None
    degenerate = None
    entries = []
    if coupling is None:
        report.values['coupling'] = 'none'
    else:
        err = coupling.marginal_error(mu, nu)
        degenerate = coupling.degenerate
        report.add_check('marginals', [] if err <= global_params.MARGINAL_TOL else [err],
                         tol=global_params.MARGINAL_TOL)
        report.add_check('causal support', [(x, y) for x, y in coupling.support_pairs()
                                            if space.tags[x, y] == NEG])
        report.values['degenerate'] = degenerate
        report.values['transport_value'] = transport.transport_value(space, coupling, q)
        entries = [(x, y, m, space.ell(x, y)) for x, y, m in coupling.entries()]
    run.reports.append(report)
    run.csv('lq', ('q', 'l_q', 'cost', 'degenerate', 'marginal_error'),
            [(q, value, lq_cost(value, q), degenerate, err)])
    run.csv('lq_coupling', ('x', 'y', 'mass', 'ell'), entries)
    if coupling is not None and value.is_finite() and not degenerate:
        pairs = coupling.support_pairs()
        if all(space.chronological_mask()[pair] for pair in pairs):
            run.reports.append(transport.cyclical_monotonicity_check(space, pairs, q, args.tol))


def _splitting_tolerance(args, space, full):
    if args.tol is not None:
        return float(args.tol)
    base = global_params.GRID_TOL_FACTOR * space.grid.h if space.grid is not None else global_params.TOL
    return base * max(1.0, abs(full.value))


def cmd_interpolate(args, run):
    space = _load_spacetime(args)
    mu = _load_measure(args.mu, space, 'mu')
    nu = _load_measure(args.nu, space, 'nu')
    q = float(args.q)
    pieces = []
    if args.levels is not None:
        for t, xi in transport.dyadic_interpolation(space, mu, nu, q, args.levels, args.tol):
            if 0.0 < t < 1.0:
                pieces.append((t, xi, None))
    else:
        for t in args.t:
            xi, first, _ = transport.intermediate_measure(space, mu, nu, float(t), q, args.tol)
            pieces.append((float(t), xi, first.info.get('snap_error')))
    full, _ = transport.lq_distance(space, mu, nu, q)
    tol = _splitting_tolerance(args, space, full)
    report = TransportReport(tolerances={'splitting': tol})
    report.values['l_q'] = full
    rows, witnesses = [], []
    for t, xi, snap in pieces:
        first, _ = transport.lq_distance(space, mu, xi, q)
        second, _ = transport.lq_distance(space, xi, nu, q)
        expected_first, expected_second = t * full.value, (1.0 - t) * full.value
        rows.append((t, first, second, expected_first, expected_second, snap))
        if not (first.is_finite() and second.is_finite()) or \
                abs(first.value - expected_first) > tol or abs(second.value - expected_second) > tol:
            witnesses.append((t, first, second))
        run.measure('interpolate_t%s' % format_value(t), xi)
    report.add_check('splitting', witnesses, tol=tol)
    run.reports.append(report)
    run.csv('interpolate', ('t', 'lq_first', 'lq_second', 'expected_first', 'expected_second',
                            'snap_error'), rows)


def cmd_lift(args, run):
    space = _load_spacetime(args)
    mu = _load_measure(args.mu, space, 'mu')
    nu = _load_measure(args.nu, space, 'nu')
    q = float(args.q)
    pieces = transport.dyadic_interpolation(space, mu, nu, q, args.levels, args.tol)
    plan = transport.lift_to_plan(space, pieces, q)
    tol = global_params.TOL if args.tol is None else float(args.tol)
    report = TransportReport(tolerances={'slices': tol})
    bad = []
    for k, (t, measure) in enumerate(pieces):
        err = float(np.abs(plan.slice(k, space.n_points).weights - measure.weights).max())
        if err > tol:
            bad.append((t, err))
    report.add_check('slices', bad, tol=tol)
    report.values.update({'paths': len(plan), 'plan_action': plan.action(q),
                          'dyadic_action': transport.dyadic_action(space, pieces, q),
                          'endpoint_statistics': plan.endpoint_statistics(q)})
    rows = [(k, weight, ' '.join(str(int(i)) for i in path.indices), path.endpoint_separation(),
             curves.q_action(path, q)) for k, (path, weight) in enumerate(plan.atoms)]
    run.reports.append(report)
    run.csv('lift', ('path', 'weight', 'points', 'ell', 'action'), rows)


def cmd_duality(args, run):
    space = _load_spacetime(args)
    mu = _load_measure(args.mu, space, 'mu')
    nu = _load_measure(args.nu, space, 'nu')
    q = float(args.q)
    if args.potential:
        values, _ = read_function(args.potential, space.n_points, default=np.inf)
        f = transport.KantorovichPotential.from_array(values, q)
    elif args.target is not None:
        f = transport.potential_from_target(space, _point(args.target, space, 'target'), q)
    else:
        raise ParseError("duality needs --potential or --target")
    report = transport.duality_gap(space, mu, nu, f, q, args.tol)
    g = transport.kantorovich_transform(space, f)
    pairs = transport.superdifferential(space, f, targets=nu.support, tol=args.tol)
    if report.passed():
        _, coupling = transport.lq_distance(space, mu, nu, q)
        inside = set(pairs)
        report.add_check('support in superdifferential',
                         [pair for pair in coupling.support_pairs() if pair not in inside])
    f_values, g_values = f.as_array(), g.as_array()
    run.reports.append(report)
    run.csv('duality', ('x', 'f', 'f_c'),
            [(x, f_values[x], g_values[x]) for x in range(space.n_points)])
    run.csv('duality_superdifferential', ('x', 'y'), pairs)


def cmd_good_geodesic(args, run):
    space = _load_spacetime(args)
    mu0 = _load_measure(args.mu, space, 'mu')
    x1 = _point(args.target, space, 'target')
    N = _dimension_parameter(args, space)
    steps, report = curvature.good_geodesic(space, mu0, x1, float(args.K), N, float(args.q),
                                            float(args.lam), int(args.depth), args.direction,
                                            bool(args.reduced), args.tol)
    run.reports.append(report)
    run.csv('good-geodesic', ('t', 'peak_density', 'bound', 'iterations', 'coupling_value'),
            report.rows)
    for t, measure in steps:
        run.measure('good-geodesic_t%s' % format_value(t), measure)


def cmd_tmcp_check(args, run):
    space = _load_spacetime(args)
    ref = _load_measure(args.mu, space, 'mu')
    x1 = _point(args.target, space, 'target')
    N = _dimension_parameter(args, space)
    q = float(args.q)
    dirac = transport.DiscreteMeasure.dirac(space.n_points, x1)
    future = args.direction == curvature.FUTURE
    geodesic = [(0.0, ref)] if future else [(1.0, ref)]
    for t in args.t:
        t = float(t)
        if space.grid is not None:
            measure, _ = curvature.affine_interpolant(space, ref, x1, t if future else 1.0 - t)
        elif future:
            measure, _, _ = transport.intermediate_measure(space, ref, dirac, t, q, args.tol)
        else:
            measure, _, _ = transport.intermediate_measure(space, dirac, ref, t, q, args.tol)
        geodesic.append((t, measure))
    report = curvature.tmcp_check(space, geodesic, x1, float(args.K), N, args.N_range,
                                  args.direction, bool(args.reduced), args.tol)
    run.reports.append(report)
    run.csv('tmcp-check', ('t', 'N', 'entropy', 'bound', 'defect', 'peak_density', 'density_bound'),
            report.rows)


def cmd_curve_speed(args, run):
    if _has_spacetime(args):
        space = _load_spacetime(args)
        helper = InputHelper(InputHelper.PATH, source=args.path, spacetime=space)
    else:
        norm = norm_from_args(args.kind, args.p, args.dim, args.g)
        helper = InputHelper(InputHelper.PATH, source=args.path, norm=norm)
    path = helper.get_inputs()
    qs = [float(q) for q in args.q]
    profile = curves.causal_speed(path, args.levels, args.tol)
    l01 = path.endpoint_separation()
    length = curves.length_ell(path, args.depth)
    tol = global_params.TOL if args.tol is None else float(args.tol)
    report = SpeedReport(tolerances={'length bound': tol})
    report.add_check('length bound', [] if not length > l01 + tol else [(length, l01)], tol=tol)
    report.values.update({'l01': l01, 'length': length, 'total': profile.total,
                          'atom_mass': float(profile.singular_mass.sum()),
                          'infinite_region': profile.infinite_region})
    if args.uniform:
        report.values['uniform_partition_fraction'] = curves.uniform_partition_fraction(
            path, qs[0], args.uniform, depth=args.depth)
    actions = []
    for q in qs:
        density = '' if path.is_discrete else curves.q_action(path, q, curves.DENSITY_INTEGRAL,
                                                              h_levels=args.levels)
        actions.append((q, curves.q_action(path, q, depth=args.depth), density, lq_cost(l01, q)))
    run.reports.append(report)
    if args.geodesic:
        run.reports.append(curves.geodesic_check(path, qs[0], args.tol, args.depth))
    run.csv('curve-speed', ('n', 'h', 'total', 'max_density', 'atom_mass'),
            [(r['n'], r['h'], r['total'], r['max_density'], r['atom_mass']) for r in profile.table])
    run.csv('curve-speed_action', ('q', 'partition_infimum', 'density_integral', 'l01_cost'), actions)


def cmd_slopes(args, run):
    space = _load_spacetime(args)
    f = _load_function(args, space)
    field = calculus.slopes(space, f, args.schedule)
    tol = 0.0 if args.tol is None else float(args.tol)
    report = SlopeReport(tolerances={'causality': tol})
    report.add_check('causal function', calculus.causality_check(space, f, tol), tol=tol)
    report.values['levels'] = [row[0] for row in field.table]
    run.reports.append(report)
    run.csv('slopes', ('x', 'f', 'forward', 'backward', 'slope'),
            [(x, f[x], field.fwd[x], field.bwd[x], field.st[x]) for x in range(space.n_points)])
    run.csv('slopes_levels', ('k', 'mean_forward', 'mean_backward', 'points'), field.table)


def cmd_mcshane(args, run):
    space = _load_spacetime(args)
    _, given = read_function(args.function, space.n_points)
    L = float(args.L)
    tol = global_params.TOL if args.tol is None else float(args.tol)
    report = McShaneReport(tolerances={'steep': tol})
    modes = (calculus.LOWER, calculus.UPPER) if args.mode == 'both' else (args.mode,)
    extensions = {}
    for mode in modes:
        ext = calculus.mcshane_extend(space, given, L, mode, tol)
        extensions[mode] = ext.as_array()
        report.add_check('steep %s' % mode, calculus.steepness_check(space, ext, L, tol=tol), tol=tol)
        report.add_check('extends %s' % mode, [x for x, v in six.iteritems(given)
                                                if abs(extensions[mode][x] - v) > tol * max(1.0, abs(v))])
    if args.samples:
        if args.mode != 'both':
            raise ParameterError("random extensions are compared against both McShane extensions")
        rng = make_rng()
        lower, upper = extensions[calculus.LOWER], extensions[calculus.UPPER]
        outside = []
        for s in range(int(args.samples)):
            g = calculus.random_steep_extension(space, given, L, rng).as_array()
            for x in np.flatnonzero((g < lower - tol) | (g > upper + tol)):
                outside.append((s, int(x)))
        report.add_check('sandwich', outside, tol=tol)
        report.values['samples'] = int(args.samples)
    blank = np.full(space.n_points, np.nan)
    lower = extensions.get(calculus.LOWER, blank)
    upper = extensions.get(calculus.UPPER, blank)
    run.reports.append(report)
    run.csv('mcshane', ('x', 'given', 'lower', 'upper'),
            [(x, given.get(x), lower[x], upper[x]) for x in range(space.n_points)])


def cmd_null_dist(args, run):
    space = _load_spacetime(args)
    f = _load_function(args, space)
    d = calculus.null_distance_matrix(space, f)
    tol = global_params.TOL if args.tol is None else float(args.tol)
    report = NullDistanceReport(tolerances={'causal pairs': tol})
    causal = space.causal_mask()
    bad = []
    for x, y in np.argwhere(causal & np.isfinite(f)[:, None] & np.isfinite(f)[None, :]):
        jump = f[y] - f[x]
        if abs(d[x, y] - jump) > tol * max(1.0, abs(jump)):
            bad.append((int(x), int(y), float(d[x, y]), float(jump)))
    report.add_check('causal pairs', bad, tol=tol)
    if args.lipschitz:
        g, _ = read_function(args.lipschitz, space.n_points)
        report.values['lipschitz'] = calculus.null_lipschitz_constant(space, f, g)
    n = space.n_points
    run.reports.append(report)
    run.csv('null-dist', ('x', 'y', 'distance'), [(x, y, d[x, y]) for x in range(n) for y in range(n)])


def _conjugate_pair(args):
    p, q = args.p, args.q
    if args.variant == dalembert.DISTANCE:
        return (0.5 if p is None else float(p)), q
    if p is None and q is None:
        p = 0.5
    if q is None:
        p = float(p)
        if p == 0 or p >= 1:
            raise ParameterError("dual exponent must satisfy 0 != p < 1", witness=p)
        q = p / (p - 1.0)
    if p is None:
        p = check_transport_exponent(q)
    return float(p), float(q)


def cmd_dalembert(args, run):
    dim = int(args.dim)
    p, q = _conjugate_pair(args)
    N = float(dim) if args.N is None else float(args.N)
    if args.o is not None:
        o = [float(v) for v in args.o]
    else:
        o = [1.0 if args.direction == curvature.FUTURE else -1.0] + [0.0] * (dim - 1)
    center = [0.0] * dim if args.center is None else [float(v) for v in args.center]
    phi = Bump(center, args.radius, args.amplitude)
    report = dalembert.dalembert_verify(dim, o, p, q, float(args.K), N, phi, args.resolutions,
                                        args.direction, args.variant, args.family, args.tol)
    run.reports.append(report)
    run.csv('dalembert', ('resolution', 'h', 'lhs', 'rhs', 'defect', 'points'),
            [(r['resolution'], r['h'], r['lhs'], r['rhs'], r['defect'], r['points'])
             for r in report.refinement_table])


def cmd_brenier(args, run):
    q = float(args.q)
    if args.model:
        dim = int(args.model)
        o = np.array([float(v) for v in args.o]) if args.o else np.eye(dim)[0]
        norm = norms.HyperbolicNorm.standard_minkowski(dim)
        rng = make_rng()
        V = norms.sample_future(norm, rng, int(args.samples))
        scale = rng.uniform(0.2, 1.0, size=len(V)) / norm.values(V)
        X = o[None, :] - V * scale[:, None]
        kwargs = {} if args.tol is None else {'tol': float(args.tol)}
        report = dalembert.metric_brenier_check(dim, X, o, q, **kwargs)
        header = ('point', 'ell', 'expected', 'analytic', 'numeric')
    else:
        space = _load_spacetime(args)
        mu0 = _load_measure(args.mu, space, 'mu')
        o = _point(args.target, space, 'target')
        report = dalembert.metric_brenier_check(space, mu0, o, q, factor=global_params.GRID_TOL_FACTOR)
        header = ('point', 'ell', 'expected', 'backward_slope')
        run.csv('brenier_levels', ('k', 'max_relative_deviation'), report.tables['levels'])
    run.reports.append(report)
    run.csv('brenier', header, report.tables['rays'])


def _read_vector(words, norm, source, line):
    try:
        v = np.array([float(w) for w in words])
    except ValueError:
        raise ParseError("expected numbers", source, line)
    if v.shape != (norm.n,):
        raise ParseError("expected %d components" % norm.n, source, line)
    return v


def cmd_norms(args, run):
    norm = norm_from_args(args.kind, args.p, args.dim, args.g)
    if args.input == '-':
        text, source = sys.stdin.read(), '<stdin>'
    else:
        with open(args.input, 'r') as f:
            text, source = f.read(), args.input
    tol = global_params.NORM_TOL if args.tol is None else float(args.tol)
    report = NormReport(tolerances={'parallelogram law': tol})
    rows, defects, law = [], [], []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        left, bar, right = line.partition('|')
        v = _read_vector(left.split(), norm, source, number)
        if not bar:
            rows.append((number, norms.eval_norm(norm, v), '', '', ''))
            continue
        w = _read_vector(right.split(), norm, source, number)
        defect = norms.parallelogram_defect(norm, v, w)
        scale = max(1.0, float(norm.values(v + 2 * w)) ** 2)
        defects.append(abs(defect))
        if abs(defect) > tol * scale:
            law.append((number, defect))
        rows.append((number, norms.eval_norm(norm, v), norms.eval_norm(norm, w),
                     norms.polarize(norm, v, w), defect))
    report.values['kind'] = norm.kind
    report.values['max_parallelogram_defect'] = max(defects) if defects else 0.0
    if norm.kind == norms.MINKOWSKI:
        signature = norms.signature_diagnostic(norm.g)
        criterion = norms.triangle_criterion(norm.g, make_rng())
        report.values['signature'] = signature
        report.add_check('signature agreement', [] if signature == criterion['classification']
                         else [(signature, criterion['classification'])])
        report.add_check('parallelogram law', law, tol=tol)
    else:
        report.values['polarizable'] = not law
    run.reports.append(report)
    run.csv('norms', ('line', 'n_v', 'n_w', 'polarization', 'parallelogram_defect'), rows)


def cmd_acceptance(args, run):
    if args.criterion is None:
        raise ParameterError("acceptance needs --criterion", witness=None)
    report = acceptance.run_criterion(args.criterion, args.resolutions)
    run.reports.append(report)
    run.csv('acceptance', report.header, report.rows)


HANDLERS = {
    'validate': cmd_validate,
    'lq': cmd_lq,
    'interpolate': cmd_interpolate,
    'lift': cmd_lift,
    'duality': cmd_duality,
    'good-geodesic': cmd_good_geodesic,
    'tmcp-check': cmd_tmcp_check,
    'curve-speed': cmd_curve_speed,
    'slopes': cmd_slopes,
    'mcshane': cmd_mcshane,
    'null-dist': cmd_null_dist,
    'dalembert': cmd_dalembert,
    'brenier': cmd_brenier,
    'norms': cmd_norms,
    'acceptance': cmd_acceptance,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _json_object(text):
    try:
        value = json.loads(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("expected a JSON object")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog='lorentzlab')
    parser.add_argument("--version", action="version", version="lorentzlab version %s" % __version__)
    parser.add_argument("-c",  "--config",     help="Run configuration file, one [section] per module", type=str)
    parser.add_argument("-s",  "--seed",       help="Seed for every randomized check", type=int)
    parser.add_argument("-t",  "--tol",        help="Global tolerance override", type=float)
    parser.add_argument("-o",  "--out",        help="Output directory (LORENTZLAB_OUT overrides it)", type=str)
    parser.add_argument("-q",  "--quiet",      help="Only print warnings and failures", action="store_true", default=None)
    parser.add_argument("-v",  "--verbose",    help="Verbose output, print everything.", action="store_true", default=None)
    parser.add_argument("-glt", "--timeout",   help="Timeout for the whole run in secs", type=int)
    parser.add_argument("-ru", "--remote-url", help="Fetch the spacetime file from a URL", type=str, dest="remote_url")

    space = argparse.ArgumentParser(add_help=False)
    space.add_argument("--spacetime", help="Spacetime file (explicit entries or generator stanza)", type=str)
    space.add_argument("--generator", help="Generator stanza as a JSON object", type=_json_object)
    space.add_argument("--keep",      help="Store the fetched remote spacetime in this file", type=str)

    transport_opts = argparse.ArgumentParser(add_help=False)
    transport_opts.add_argument("--mu", help="Source measure: file, dirac:i, uniform:i,j, diamond:c..,r or box:lo,hi,..", type=str)
    transport_opts.add_argument("--nu", help="Target measure, same forms as --mu", type=str)
    transport_opts.add_argument("--q",  help="Transport exponent, 0 != q < 1", type=float)

    sub = parser.add_subparsers(dest='command', metavar='<subcommand>')

    sub.add_parser('validate', parents=[space], help="Check the spacetime axioms and order properties")

    p = sub.add_parser('lq', parents=[space, transport_opts], help="l_q distance and optimal coupling")
    p.add_argument("--certify", help="Cross-check the optimum with the exact rational oracle",
                   action="store_true", default=None)

    p = sub.add_parser('interpolate', parents=[space, transport_opts], help="t-intermediate measures")
    p.add_argument("--t", help="Interpolation times", type=float, nargs='+')
    p.add_argument("--levels", help="Dyadic midpoint levels instead of --t", type=int)

    p = sub.add_parser('lift', parents=[space, transport_opts], help="Lift a dyadic interpolation to a plan")
    p.add_argument("--levels", help="Dyadic midpoint levels", type=int)

    p = sub.add_parser('duality', parents=[space, transport_opts], help="Kantorovich duality gap")
    p.add_argument("--potential", help="Potential file 'index value'; unlisted points are +inf", type=str)
    p.add_argument("--target", help="Use f^o for this target point", type=str)

    curvature_opts = argparse.ArgumentParser(add_help=False)
    curvature_opts.add_argument("--target", help="Dirac target point (index or coordinates)", type=str)
    curvature_opts.add_argument("--K", help="Curvature lower bound", type=float)
    curvature_opts.add_argument("--N", help="Dimension upper bound (default: coordinate dimension)", type=float)
    curvature_opts.add_argument("--direction", help="future or past", choices=(curvature.FUTURE, curvature.PAST))
    curvature_opts.add_argument("--reduced", help="Use sigma in place of tau", action="store_true", default=None)

    p = sub.add_parser('good-geodesic', parents=[space, transport_opts, curvature_opts],
                       help="Construct a good geodesic toward a Dirac mass")
    p.add_argument("--lam", help="Step fraction in (0, 1)", type=float)
    p.add_argument("--depth", help="Number of steps", type=int)

    p = sub.add_parser('tmcp-check', parents=[space, transport_opts, curvature_opts],
                       help="Entropy inequality along a geodesic to a Dirac mass")
    p.add_argument("--t", help="Interpolation times", type=float, nargs='+')
    p.add_argument("--N-range", help="Values N' >= N to test", type=float, nargs='+', dest='N_range')

    p = sub.add_parser('curve-speed', parents=[space], help="Causal speed, q-actions and length of a path")
    p.add_argument("--path", help="Path file", type=str, required=True)
    p.add_argument("--q", help="Action exponents", type=float, nargs='+')
    p.add_argument("--depth", help="Dyadic refinement depth", type=int)
    p.add_argument("--levels", help="Uniform step counts of the speed estimate", type=int, nargs='+')
    p.add_argument("--uniform", help="Uniform partition size for the shifted-partition fraction", type=int)
    p.add_argument("--geodesic", help="Also run the geodesic characterizations", action="store_true", default=None)
    p.add_argument("--kind", help="Norm of a coordinate path", choices=(norms.MINKOWSKI, norms.LP))
    p.add_argument("--p", help="Exponent of a hyperbolic l^p norm", type=float)
    p.add_argument("--dim", help="Dimension of a coordinate path", type=int)
    p.add_argument("--g", help="Scalar product as a JSON matrix", type=json.loads)

    function_opts = argparse.ArgumentParser(add_help=False)
    function_opts.add_argument("--function", help="Function file 'index value'; unlisted points are -inf", type=str)
    function_opts.add_argument("--time", help="Use the time coordinate", action="store_true", default=None)
    function_opts.add_argument("--target", help="Use the potential f^o of this point", type=str)
    function_opts.add_argument("--q", help="Exponent of the potential", type=float)

    p = sub.add_parser('slopes', parents=[space, function_opts], help="Forward and backward slopes")
    p.add_argument("--schedule", help="k-nearest competitor counts", type=int, nargs='+')

    p = sub.add_parser('mcshane', parents=[space], help="Extremal steep extensions")
    p.add_argument("--function", help="Partial function file 'index value'", type=str, required=True)
    p.add_argument("--L", help="Steepness constant", type=float)
    p.add_argument("--mode", help="lower, upper or both", choices=(calculus.LOWER, calculus.UPPER, 'both'))
    p.add_argument("--samples", help="Random steep extensions to sandwich", type=int)

    p = sub.add_parser('null-dist', parents=[space, function_opts], help="Null distance of a strictly causal function")
    p.add_argument("--lipschitz", help="Function file whose null Lipschitz constant is reported", type=str)

    p = sub.add_parser('dalembert', help="Weak-form p-d'Alembert comparison on the Minkowski model")
    p.add_argument("--dim", help="Model dimension", type=int)
    p.add_argument("--o", help="Base point", type=float, nargs='+')
    p.add_argument("--p", help="Operator exponent", type=float)
    p.add_argument("--q", help="Conjugate transport exponent", type=float)
    p.add_argument("--K", help="Curvature lower bound", type=float)
    p.add_argument("--N", help="Dimension upper bound (default: dim)", type=float)
    p.add_argument("--direction", help="future or past", choices=(curvature.FUTURE, curvature.PAST))
    p.add_argument("--variant", help="power or distance", choices=(dalembert.POWER, dalembert.DISTANCE))
    p.add_argument("--family", help="Model family", type=str)
    p.add_argument("--resolutions", help="Cells per axis at each refinement level", type=int, nargs='+')
    p.add_argument("--center", help="Test function center", type=float, nargs='+')
    p.add_argument("--radius", help="Test function radius", type=float)
    p.add_argument("--amplitude", help="Test function amplitude", type=float)

    p = sub.add_parser('brenier', parents=[space], help="Metric Brenier identity")
    p.add_argument("--model", help="Check on the Minkowski model of this dimension", type=int)
    p.add_argument("--o", help="Model base point", type=float, nargs='+')
    p.add_argument("--samples", help="Model sample points", type=int)
    p.add_argument("--mu", help="Grid measure whose support is checked", type=str)
    p.add_argument("--target", help="Grid target point", type=str)
    p.add_argument("--q", help="Transport exponent", type=float)

    p = sub.add_parser('norms', help="Evaluate a hyperbolic norm on vectors 'v' or pairs 'v | w'")
    p.add_argument("--kind", help="minkowski or lp", choices=(norms.MINKOWSKI, norms.LP))
    p.add_argument("--p", help="Exponent of a hyperbolic l^p norm", type=float)
    p.add_argument("--dim", help="Dimension", type=int)
    p.add_argument("--g", help="Scalar product as a JSON matrix", type=json.loads)
    p.add_argument("--input", help="Vector file, '-' for stdin", type=str)

    p = sub.add_parser('acceptance', help="Seeded acceptance run of one criterion")
    p.add_argument("--criterion", help="Criterion number", type=int, choices=sorted(acceptance.CRITERIA))
    p.add_argument("--resolutions", help="Cells per axis at each refinement level", type=int, nargs='+')
    return parser


def apply_config(args, config):
    """Fill unset arguments from the config sections of the command, then from the defaults."""
    for key, value in six.iteritems(config.get('cli', {})):
        key = key.replace('-', '_')
        if key not in GLOBAL_KEYS:
            log.warning("ignoring unknown key %r in section 'cli'", key)
        elif getattr(args, key) is None:
            setattr(args, key, value)
    for section in COMMAND_SECTIONS[args.command]:
        for key, value in six.iteritems(config.get(section, {})):
            key = key.replace('-', '_')
            if not hasattr(args, key):
                log.debug("key %r of section %r is not used by %s", key, section, args.command)
            elif getattr(args, key) is None:
                setattr(args, key, value)
    for key, default in six.iteritems(COMMAND_DEFAULTS.get(args.command, {})):
        if getattr(args, key, None) is None:
            setattr(args, key, default)


def main(argv=None):
    _restore_params()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_PARSE

    logging.basicConfig()
    rootLogger = logging.getLogger(None)

    try:
        config = load_config(args.config) if args.config else {}
        apply_config(args, config)
    except ParseError as e:
        logging.critical(str(e))
        return EXIT_PARSE

    if args.verbose:
        rootLogger.setLevel(level=logging.DEBUG)
    elif args.quiet:
        rootLogger.setLevel(level=logging.WARNING)
    else:
        rootLogger.setLevel(level=logging.INFO)

    if args.seed is not None:
        global_params.SEED = int(args.seed)
    if args.tol is not None:
        global_params.TOL = float(args.tol)
    if args.timeout is not None:
        global_params.GLOBAL_TIMEOUT = int(args.timeout)

    out = os.environ.get(OUT_ENV) or args.out or DEFAULT_OUT
    if not os.path.isdir(out):
        os.makedirs(out)
    run = Run(args.command, out)
    error = None
    try:
        with Timeout(global_params.GLOBAL_TIMEOUT,
                     "run exceeded the global timeout of %d s" % global_params.GLOBAL_TIMEOUT):
            HANDLERS[args.command](args, run)
    except LabError as e:
        error = e
        exit_code = e.exit_code
        logging.critical(str(e))
        if isinstance(e, PreconditionError) and e.witness is not None and global_params.PRINT_WITNESSES:
            six.print_("witness: %s" % _witness_text(e.witness))
    except (IOError, OSError) as e:
        error = e
        exit_code = EXIT_PARSE
        logging.critical(str(e))
    else:
        exit_code = EXIT_OK if run.passed() else EXIT_PRECONDITION
        for report in run.reports:
            log.info(report.name + ': ' + ('PASS' if report.passed() else 'FAIL'))
            if not report.passed() and global_params.PRINT_WITNESSES:
                six.print_(str(report))

    if global_params.STORE_RESULT:
        run.write_summary(exit_code, error)
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
