"""
Weak-form d'Alembert comparison, vertical differential quotients, the
metric Brenier identity and pointwise calculus rules.

On the Minkowski model |df| is the dual norm of df and
d+phi(grad f)|df|^(p-2) is the smooth pairing g^-1(dphi, df)|df|^(p-2);
the vertical difference quotient is kept as a cross-check.
"""

import logging

import numpy as np

from lorentzlab import global_params
from lorentzlab import models
from lorentzlab.calculus import slopes
from lorentzlab.curvature import FUTURE, PAST, tau_tilde
from lorentzlab.errors import DomainError, ParameterError, PreconditionError, UnsupportedDualityError
from lorentzlab.report import BrenierReport, CalculusRulesReport, WeakFormReport
from lorentzlab.spacetime import cell_centers
from lorentzlab.transport import potential_from_target
from lorentzlab.utils import FINITE, check_transport_exponent

log = logging.getLogger(__name__)

POWER = 'power'
DISTANCE = 'distance'

DEFAULT_EPS = (1e-4, 5e-5, 2.5e-5)
DEFAULT_RESOLUTIONS = (8, 16, 32)


def _weight(modulus, p):
    """|df|^(p-2), 0 where |df| is infinite."""
    out = np.zeros_like(modulus)
    finite = np.isfinite(modulus) & (modulus > 0)
    out[finite] = modulus[finite] ** (p - 2.0)
    return out


def analytic_pairing(model, f, g, p, X):
    """dg(grad f) |df|^(p-2) through the scalar product of the model."""
    df = f.differential(X)
    return model.pairing(g.differential(X), df) * _weight(model.modulus(df), p)


def vertical_quotient(model, f, g, p, eps_schedule=DEFAULT_EPS, X=None):
    """
    (|d(f + eps g)|^p - |df|^p) / (p eps) per sample and eps, with -inf at an
    eps where f + eps g is not causal, and the limit eps -> 0 extrapolated
    linearly from the two smallest eps.

    :return: dict with keys eps, quotients (k x len(eps)), limit, analytic,
             monotone (list of (sample, eps) where the quotient increases)
    """
    p = float(p)
    if p == 0:
        raise ParameterError("p must be nonzero", witness=p)
    X = model.points(X)
    eps = np.array(sorted(float(e) for e in eps_schedule))
    if eps.size < 2 or eps[0] <= 0:
        raise ParameterError("need at least two positive eps values", witness=eps.tolist())
    base = model.modulus(f.differential(X))
    quotients = np.empty((len(X), len(eps)))
    for j, e in enumerate(eps):
        m = model.modulus(f.differential(X) + e * g.differential(X))
        causal = np.isfinite(m) & (m >= 0)
        with np.errstate(divide='ignore', invalid='ignore'):
            qv = (np.where(causal, m, 1.0) ** p - base ** p) / (p * e)
        qv = np.where(causal, qv, -np.inf)
        # convention: 0 where |df| is infinite
        quotients[:, j] = np.where(np.isinf(base), 0.0, qv)
    monotone = []
    for j in range(1, len(eps)):
        worse = quotients[:, j] > quotients[:, j - 1] + 1e-9 * np.maximum(1.0, np.abs(quotients[:, j - 1]))
        monotone.extend((int(i), float(eps[j])) for i in np.flatnonzero(worse))
    e1, e2 = eps[0], eps[1]
    q1, q2 = quotients[:, 0], quotients[:, 1]
    limit = q1 - e1 * (q2 - q1) / (e2 - e1)
    return {'eps': eps.tolist(), 'quotients': quotients, 'limit': limit,
            'analytic': analytic_pairing(model, f, g, p, X), 'monotone': monotone}


# ---------------------------------------------------------------------------
# Weak-form comparison
# ---------------------------------------------------------------------------

def _check_support(model, phi, o, direction, margin):
    box = phi.support_box()
    lo, hi = box[:, 0] - margin, box[:, 1] + margin
    corners = np.array(np.meshgrid(*[(a, b) for a, b in zip(lo, hi)], indexing='ij')).reshape(model.dim, -1).T
    o = np.asarray(o, dtype=float)[None, :]
    if direction == FUTURE:
        inside = model.chronological(corners, o)
    else:
        inside = model.chronological(o, corners)
    if not np.all(inside):
        raise PreconditionError("test function support is not inside the %s cone of o with margin %g"
                                % ('past' if direction == FUTURE else 'future', margin),
                                witness=corners[np.flatnonzero(~inside)[0]].tolist())


def _tau_tilde_array(K, N, ell):
    return np.array([tau_tilde(K, N, float(v)) for v in ell])


def _weak_form_level(model, o, p, q, K, N, phi, direction, variant, resolution):
    box = phi.support_box()
    X, spacing = cell_centers(model.dim, box, resolution)
    dm = float(np.prod(spacing))
    o_row = np.asarray(o, dtype=float)[None, :]
    if direction == FUTURE:
        ell = model.ell(X, o_row)
        f = models.potential_to(model, o, q) if variant == POWER else models.distance_to(model, o)
    else:
        ell = model.ell(o_row, X)
        f = models.potential_from(model, o, q) if variant == POWER else models.distance_from(model, o)
    weight_p = p if variant == POWER else 2.0
    integrand = analytic_pairing(model, f, phi, weight_p, X)
    lhs = float(integrand.sum() * dm)
    factor = N * _tau_tilde_array(K, N, ell)
    if variant == DISTANCE:
        factor = (factor - 1.0) / ell
    bound = float((factor * phi(X)).sum() * dm)
    if direction == FUTURE:
        rhs, defect = bound, bound - lhs
    else:
        rhs = -bound
        defect = lhs - rhs
    return {'resolution': resolution, 'h': float(spacing.max()), 'lhs': lhs, 'rhs': rhs,
            'defect': defect, 'points': len(X)}


def dalembert_verify(dim, o, p, q, K, N, phi, resolutions=DEFAULT_RESOLUTIONS,
                     direction=FUTURE, variant=POWER, family='minkowski', tol=None):
    """
    Weak-form comparison on the Minkowski model.

    future: int dphi(grad f^o)|df^o|^(p-2) dm <= int N tau_tilde(l(., o)) phi dm
    past:   int dphi(grad f_o)|df_o|^(p-2) dm >= -int N tau_tilde(l(o, .)) phi dm
    The distance variant uses g^o = -l(., o) (g_o = l(o, .)) and the bound
    (N tau_tilde - 1) / l. Defect is the signed slack, nonnegative when the
    inequality holds.
    """
    if family != 'minkowski':
        raise UnsupportedDualityError("the weak-form comparison needs a smooth gradient; "
                                      "only the minkowski model is supported", witness=family)
    if direction not in (FUTURE, PAST):
        raise ParameterError("direction must be 'future' or 'past'", witness=direction)
    if variant not in (POWER, DISTANCE):
        raise ParameterError("variant must be 'power' or 'distance'", witness=variant)
    if variant == POWER:
        expected_p = check_transport_exponent(q)
        if abs(expected_p - float(p)) > 1e-12 * max(1.0, abs(expected_p)):
            raise ParameterError("p and q must be conjugate", witness=(p, q))
    elif float(p) > 2 or float(p) == 0:
        raise ParameterError("distance variant needs p <= 2, p != 0", witness=p)
    if phi.amplitude <= 0:
        raise PreconditionError("test function must be nonnegative", witness=phi.amplitude)
    model = models.MinkowskiModel(dim)
    resolutions = [int(r) for r in resolutions]
    box = phi.support_box()
    margin = global_params.CONE_MARGIN_CELLS * float(((box[:, 1] - box[:, 0]) / resolutions[0]).max())
    _check_support(model, phi, o, direction, margin)

    report = WeakFormReport()
    for r in resolutions:
        row = _weak_form_level(model, o, float(p), q, K, N, phi, direction, variant, r)
        report.refinement_table.append(row)
        log.info("d'Alembert %s %s at %d cells/axis: lhs=%.12g rhs=%.12g defect=%.3g",
                 direction, variant, r, row['lhs'], row['rhs'], row['defect'])
    if tol is None:
        tol = global_params.WEAK_FORM_REL_TOL * abs(report.rhs)
    tol = float(tol)
    defects = [abs(row['defect']) for row in report.refinement_table]
    report.add_check('inequality', [] if report.defect >= -tol else [report.defect], tol=tol)
    report.values.update({'lhs': report.lhs, 'rhs': report.rhs, 'defect': report.defect,
                          'relative_defect': abs(report.defect) / max(abs(report.rhs), 1e-300),
                          'monotone_refinement': all(b <= a + 1e-12 * max(1.0, abs(report.rhs))
                                                     for a, b in zip(defects, defects[1:])),
                          'direction': direction, 'variant': variant, 'K': K, 'N': N, 'p': p})
    if K == 0 and N == dim:
        sharp = report.values['relative_defect'] <= global_params.WEAK_FORM_REL_TOL
        report.add_check('sharpness', [] if sharp and report.values['monotone_refinement'] else defects,
                         tol=global_params.WEAK_FORM_REL_TOL)

    if variant == POWER:
        X, _ = cell_centers(dim, box, max(2, resolutions[0] // 2))
        X = X[phi(X) > 0]
        f = models.potential_to(model, o, q) if direction == FUTURE else models.potential_from(model, o, q)
        cross = vertical_quotient(model, f, phi, float(p), DEFAULT_EPS, X)
        err = np.abs(cross['limit'] - cross['analytic'])
        scale_ = np.maximum(1.0, np.abs(cross['analytic']))
        bad = [(int(i), float(err[i])) for i in np.flatnonzero(err > 1e-4 * scale_)]
        report.add_check('vertical quotient', bad, tol=1e-4)
        report.add_check('quotient monotonicity', cross['monotone'])
        report.values['vertical_max_error'] = float(err.max()) if err.size else 0.0
    return report


# ---------------------------------------------------------------------------
# Metric Brenier identity
# ---------------------------------------------------------------------------

def metric_brenier_model(dim, X, o, q, tol=1e-10):
    """|df^o|(x) against l(x, o)^(q-1) on the model, analytic and by Ridders differences."""
    check_transport_exponent(q)
    model = models.MinkowskiModel(dim)
    X = model.points(X)
    o_row = np.asarray(o, dtype=float)[None, :]
    ell = model.ell(X, o_row)
    if np.any(~(ell > 0)):
        raise DomainError("sample points must lie in I-(o)", witness=int(np.flatnonzero(~(ell > 0))[0]))
    f = models.potential_to(model, o, q)
    expected = ell ** (q - 1.0)
    analytic = models.modulus(model, f, X)
    numeric, _ = models.numeric_differential(f, X, h=0.05 * float(ell.min()))
    numeric = model.modulus(numeric)
    rel = np.abs(analytic - expected) / expected
    rel_numeric = np.abs(numeric - expected) / expected
    report = BrenierReport(tolerances={'analytic': tol})
    report.add_check('analytic', [(int(i), float(rel[i])) for i in np.flatnonzero(rel > tol)], tol=tol)
    report.values.update({'max_relative_deviation': float(rel.max()),
                          'numeric_max_relative_deviation': float(rel_numeric.max()),
                          'points': len(X)})
    report.tables['rays'] = [(int(i), float(ell[i]), float(expected[i]), float(analytic[i]),
                              float(numeric[i])) for i in range(len(X))]
    return report


def metric_brenier_grid(spacetime, mu0, o, q, factor=3.0):
    """
    Backward slope of f^o at the support of mu0 against l(x, o)^(q-1);
    the relative deviation is held to factor * h / l_min.
    """
    check_transport_exponent(q)
    spt = mu0.support
    chrono = spacetime.chronological_mask()[spt, o]
    if not np.all(chrono) or np.any(spacetime.tags[spt, o] != FINITE):
        bad = spt[np.flatnonzero(~chrono | (spacetime.tags[spt, o] != FINITE))[0]]
        raise DomainError("support of mu0 must lie in I-(o)", witness=int(bad))
    f = potential_from_target(spacetime, o, q)
    field = slopes(spacetime, f.as_array())
    ell = spacetime.values[spt, o]
    expected = ell ** (q - 1.0)
    report = BrenierReport()
    rows = []
    for k, (_, bwd) in field.levels.items():
        rel = np.abs(bwd[spt] - expected) / expected
        rows.append((k, float(np.max(rel))))
    rel = np.abs(field.bwd[spt] - expected) / expected
    h = spacetime.grid.h if spacetime.grid is not None else 0.0
    bound = factor * h / float(ell.min()) if h > 0 else global_params.TOL
    report.add_check('backward slope', [(int(spt[i]), float(rel[i])) for i in np.flatnonzero(rel > bound)],
                     tol=bound)
    report.values.update({'max_relative_deviation': float(rel.max()), 'h': h,
                          'l_min': float(ell.min())})
    report.tables['levels'] = rows
    report.tables['rays'] = [(int(spt[i]), float(ell[i]), float(expected[i]), float(field.bwd[spt[i]]))
                             for i in range(len(spt))]
    return report


def metric_brenier_check(source, mu0, o, q, **kwargs):
    """Dispatch on a model dimension (int) or a DiscreteSpacetime."""
    if isinstance(source, int):
        return metric_brenier_model(source, mu0, o, q, **kwargs)
    return metric_brenier_grid(source, mu0, o, q, **kwargs)


# ---------------------------------------------------------------------------
# Calculus rules
# ---------------------------------------------------------------------------

def calculus_rules_check(dim, f, g, X, lam=(0.7, 1.3), phi=None, tol=1e-10):
    """
    Pointwise rules for |d.| on the Minkowski model: concavity and Leibniz
    as inequalities, homogeneity, the chain rule and the parallelogram
    identity as equalities.

    :param phi: optional (phi, phi_prime) with phi_prime >= 0 on the range of f
    """
    model = models.MinkowskiModel(dim)
    X = model.points(X)
    l1, l2 = float(lam[0]), float(lam[1])
    if l1 < 0 or l2 < 0:
        raise ParameterError("concavity weights must be nonnegative", witness=lam)
    df = models.modulus(model, f, X)
    dg = models.modulus(model, g, X)
    if np.any(df < 0) or np.any(dg < 0):
        raise PreconditionError("f and g must have future-directed differentials on the samples")
    report = CalculusRulesReport(tolerances={'equality': tol})

    def close(a, b):
        return np.abs(a - b) <= tol * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))

    combo = models.modulus(model, models.add(models.scale(l1, f), models.scale(l2, g)), X)
    gap = combo - (l1 * df + l2 * dg)
    report.add_check('concavity', [int(i) for i in np.flatnonzero(gap < -tol)], tol=tol)
    report.values['concavity_gap_min'] = float(gap.min())
    report.values['concavity_gap_max'] = float(gap.max())

    hom = models.modulus(model, models.scale(l1, f), X)
    report.add_check('homogeneity', [int(i) for i in np.flatnonzero(~close(hom, l1 * df))], tol=tol)

    fv, gv = f(X), g(X)
    if np.all(fv >= 0) and np.all(gv >= 0):
        leibniz = models.modulus(model, models.mul(f, g), X) - (fv * dg + gv * df)
        report.add_check('leibniz', [int(i) for i in np.flatnonzero(leibniz < -tol)], tol=tol)
    if phi is not None:
        func, deriv = phi
        composed = models.modulus(model, models.compose(func, deriv, f), X)
        report.add_check('chain rule', [int(i) for i in np.flatnonzero(~close(composed, deriv(fv) * df))],
                         tol=tol)

    sum_fg = models.modulus(model, models.add(f, g), X)
    two_f_g = models.modulus(model, models.add(models.scale(2.0, f), g), X)
    lhs = 2.0 * df ** 2 + 2.0 * sum_fg ** 2
    rhs = dg ** 2 + two_f_g ** 2
    report.add_check('parallelogram identity', [int(i) for i in np.flatnonzero(~close(lhs, rhs))], tol=tol)
    return report
