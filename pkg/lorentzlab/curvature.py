"""
Synthetic timelike curvature: Renyi entropy, distortion coefficients, the
timelike measure contraction inequality and good geodesics with density
bounds.
"""

import logging
import math

import numpy as np

from lorentzlab import global_params
from lorentzlab.errors import DomainError, ParameterError, PreconditionError
from lorentzlab.report import GoodGeodesicReport, TMCPReport
from lorentzlab.transport import (DiscreteMeasure, intermediate_measure,
                                  lq_distance)
from lorentzlab.utils import (FINITE, ExtendedReal, ExtendedTime,
                              check_transport_exponent, ext_power, make_rng,
                              richardson_derivative)

log = logging.getLogger(__name__)

FUTURE = 'future'
PAST = 'past'


class DistortionParams:
    def __init__(self, K, N, t, theta):
        self.K = float(K)
        self.N = float(N)
        self.t = float(t)
        self.theta = float(theta)
        if not self.N > 1:
            raise ParameterError("dimension parameter N must exceed 1", witness=N)
        if not 0.0 <= self.t <= 1.0:
            raise ParameterError("t must lie in [0, 1]", witness=t)
        if not self.theta >= 0:
            raise ParameterError("theta must be nonnegative", witness=theta)

    def finite_sigma(self):
        return self.K * self.theta ** 2 < self.N * math.pi ** 2


class EntropyValue:
    def __init__(self, value, N, singular_mass=0.0):
        self.value = float(value)
        self.N = float(N)
        self.singular_mass = float(singular_mass)

    def __float__(self):
        return self.value

    def __repr__(self):
        return 'EntropyValue(%r, N=%r)' % (self.value, self.N)


def sin_kappa(kappa, theta):
    """Generalized sine: sin, identity or sinh according to the sign of kappa."""
    if theta < 0:
        raise DomainError("theta must be nonnegative", witness=theta)
    if kappa > 0:
        r = math.sqrt(kappa)
        return math.sin(r * theta) / r
    if kappa < 0:
        r = math.sqrt(-kappa)
        return math.sinh(r * theta) / r
    return float(theta)


def _sigma_raw(K, N, t, theta):
    if K * theta ** 2 >= N * math.pi ** 2:
        return math.inf
    if theta == 0.0 or K == 0.0:
        return t
    return sin_kappa(K / N, t * theta) / sin_kappa(K / N, theta)


def _tau_raw(K, N, t, theta):
    if K == 0.0:
        return t
    s = _sigma_raw(K, N - 1.0, t, theta)
    if t == 0.0:
        return 0.0
    if math.isinf(s):
        return math.inf
    return t ** (1.0 / N) * s ** ((N - 1.0) / N)


def sigma(params):
    """sigma^(t)_{K,N}(theta), +inf once K theta**2 >= N pi**2."""
    return ExtendedTime(_sigma_raw(params.K, params.N, params.t, params.theta))


def tau(params):
    """tau^(t)_{K,N}(theta) = t**(1/N) sigma^(t)_{K,N-1}(theta)**((N-1)/N)."""
    return ExtendedTime(_tau_raw(params.K, params.N, params.t, params.theta))


def _cot_term(kappa, theta):
    """theta sqrt(kappa) cot(theta sqrt(kappa)), coth for kappa < 0, 1 at kappa = 0."""
    if kappa == 0 or theta == 0:
        return 1.0
    if kappa > 0:
        x = math.sqrt(kappa) * theta
        if x >= math.pi:
            return -math.inf
        return x / math.tan(x)
    x = math.sqrt(-kappa) * theta
    return x / math.tanh(x)


def tau_tilde(K, N, theta):
    """Derivative of r -> tau^(r)_{K,N}(theta) at r = 1."""
    N = float(N)
    if not N > 1:
        raise ParameterError("N must exceed 1", witness=N)
    if theta < 0 or (K > 0 and theta > math.pi * math.sqrt((N - 1.0) / K)):
        raise DomainError("theta outside the domain of tau_tilde", witness=theta)
    return 1.0 / N + (N - 1.0) / N * _cot_term(K / (N - 1.0), theta)


def sigma_tilde(K, N, theta):
    """Derivative of r -> sigma^(r)_{K,N}(theta) at r = 1."""
    N = float(N)
    if not N > 1:
        raise ParameterError("N must exceed 1", witness=N)
    if theta < 0 or (K > 0 and theta > math.pi * math.sqrt(N / K)):
        raise DomainError("theta outside the domain of sigma_tilde", witness=theta)
    return _cot_term(K / N, theta)


def tau_tilde_numeric(K, N, theta, h=1e-2, levels=3):
    """Richardson-extrapolated backward difference of tau at r = 1."""
    return richardson_derivative(lambda r: _tau_raw(K, N, r, theta), 1.0, h=h, levels=levels)


def sigma_tilde_numeric(K, N, theta, h=1e-2, levels=3):
    return richardson_derivative(lambda r: _sigma_raw(K, N, r, theta), 1.0, h=h, levels=levels)


# ---------------------------------------------------------------------------
# Entropy and densities
# ---------------------------------------------------------------------------

def _density(spacetime, mu):
    m = spacetime.m_weights
    w = mu.weights
    regular = m > 0
    rho = np.where(regular, w / np.where(regular, m, 1.0), 0.0)
    singular = float(w[~regular].sum())
    return rho, singular


def _check_N(N):
    if not float(N) > 1:
        raise ParameterError("dimension parameter N must exceed 1", witness=N)
    return float(N)


def renyi_entropy(spacetime, mu, N):
    """S_N(mu) = -sum rho**((N-1)/N) m over the absolutely continuous part."""
    N = _check_N(N)
    rho, singular = _density(spacetime, mu)
    m = spacetime.m_weights
    value = -float(np.sum(rho ** ((N - 1.0) / N) * m))
    return EntropyValue(value, N, singular)


def mass_excess(spacetime, mu, c):
    """F_c(mu) = sum (rho - c)_+ m + singular mass."""
    if not c > 0:
        raise ParameterError("density threshold must be positive", witness=c)
    rho, singular = _density(spacetime, mu)
    return float(np.sum(np.maximum(rho - c, 0.0) * spacetime.m_weights)) + singular


def max_density(spacetime, mu):
    rho, singular = _density(spacetime, mu)
    return math.inf if singular > 0 else float(rho.max())


def density_bound(rho_max, t, K, N, D, direction=FUTURE, reduced=False):
    """
    Density bound along a good geodesic toward (future) or away from (past)
    a Dirac mass; reduced swaps N - 1 for N in the exponential factor.
    """
    N = _check_N(N)
    k_minus = max(-float(K), 0.0)
    root = math.sqrt(k_minus * (N if reduced else N - 1.0))
    if direction == FUTURE:
        base, lever = 1.0 - t, t
    elif direction == PAST:
        base, lever = t, 1.0 - t
    else:
        raise ParameterError("direction must be 'future' or 'past'", witness=direction)
    if base <= 0:
        return math.inf
    return base ** (-N) * math.exp(D * lever * root) * rho_max


# ---------------------------------------------------------------------------
# Affine interpolation on generated grids
# ---------------------------------------------------------------------------

def _axis_overlaps(lo, h, count, center, half):
    """Cells of one axis hit by [center - half, center + half] and the overlap lengths."""
    a, b = center - half, center + half
    first = int(math.floor((a - lo) / h))
    out = []
    for i in (first, first + 1):
        if 0 <= i < count:
            overlap = min(b, lo + (i + 1) * h) - max(a, lo + i * h)
            if overlap > 0:
                out.append((i, overlap))
    if not out:
        i = int(min(max(math.floor((center - lo) / h), 0), count - 1))
        out.append((i, 2.0 * half if half > 0 else 1.0))
    return out


def affine_interpolant(spacetime, mu, x1, t):
    """
    Push mu along the affine contraction toward x1 by the factor (1 - t),
    depositing each cell image onto the lattice by exact box overlap.

    :return: (DiscreteMeasure, list of (source, target, mass))
    """
    grid = spacetime.grid
    if grid is None or spacetime.coords is None:
        raise PreconditionError("affine interpolation needs a generated grid")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ParameterError("t must lie in [0, 1]", witness=t)
    target = spacetime.coords[x1]
    contributions = []
    out = np.zeros(spacetime.n_points)
    for x, mass in mu.items():
        if t == 1.0:
            pieces = [(x1, 1.0)]
        else:
            center = (1.0 - t) * spacetime.coords[x] + t * target
            axes = [_axis_overlaps(grid.lo[k], grid.spacing[k], grid.resolution[k], center[k],
                                   0.5 * (1.0 - t) * grid.spacing[k])
                    for k in range(grid.dim)]
            pieces = []
            for combo in np.ndindex(*[len(a) for a in axes]):
                idx = [axes[k][combo[k]][0] for k in range(grid.dim)]
                vol = np.prod([axes[k][combo[k]][1] for k in range(grid.dim)])
                pieces.append((grid.flat_index(idx), vol))
            total = sum(v for _, v in pieces)
            pieces = [(z, v / total) for z, v in pieces]
        for z, share in pieces:
            contributions.append((x, z, mass * share))
            out[z] += mass * share
    return DiscreteMeasure(out, normalize=True), contributions


# ---------------------------------------------------------------------------
# TMCP
# ---------------------------------------------------------------------------

def _target_index(target):
    if isinstance(target, DiscreteMeasure):
        spt = target.support
        if len(spt) != 1:
            raise PreconditionError("target measure must be a Dirac mass", witness=len(spt))
        return int(spt[0])
    return int(target)


def _default_tolerance(spacetime, tol):
    if tol is not None:
        return float(tol)
    if spacetime.grid is not None:
        return global_params.GRID_TOL_FACTOR * spacetime.grid.h
    return global_params.TOL


def _reference(spacetime, ref, x1):
    """Density of the reference measure and l(x, x1) on its support."""
    spt = ref.support
    m = spacetime.m_weights[spt]
    if np.any(m <= 0):
        raise PreconditionError("reference measure must be absolutely continuous",
                                witness=int(spt[np.flatnonzero(m <= 0)[0]]))
    chrono = spacetime.chronological_mask()[spt, x1]
    if not np.all(chrono):
        raise PreconditionError("support point not chronologically related to the target",
                                witness=int(spt[np.flatnonzero(~chrono)[0]]))
    if np.any(spacetime.tags[spt, x1] != FINITE):
        raise PreconditionError("infinite separation to the target",
                                witness=int(spt[np.flatnonzero(spacetime.tags[spt, x1] != FINITE)[0]]))
    return spt, ref.weights[spt] / m, spacetime.values[spt, x1]


def tmcp_check(spacetime, geodesic, target, K, N, N_range=None, direction=FUTURE,
               reduced=False, tol=None):
    """
    Entropy inequality S_N'(mu_t) <= -sum tau^(1-t)_{K,N'}(l(x, x1)) rho0(x)**(-1/N') mu0(x)
    for every (t, N'), with the past version on the reversed time orientation.

    :param geodesic: list of (t, DiscreteMeasure)
    :param target: point index or Dirac measure
    """
    N = _check_N(N)
    tol = _default_tolerance(spacetime, tol)
    N_range = tuple(N_range) if N_range else (N, N + 1.0, 2.0 * N)
    x1 = _target_index(target)
    geodesic = sorted(geodesic, key=lambda item: item[0])
    if direction == FUTURE:
        ref = geodesic[0][1]
        sep_space = spacetime
    elif direction == PAST:
        ref = geodesic[-1][1]
        sep_space = spacetime.time_reversed()
    else:
        raise ParameterError("direction must be 'future' or 'past'", witness=direction)
    spt, rho, theta = _reference(sep_space, ref, x1)
    mass = ref.weights[spt]
    D = float(theta.max())
    coefficient = _sigma_raw if reduced else _tau_raw

    report = TMCPReport(tolerances={'entropy': tol})
    witnesses = []
    for t, mu_t in geodesic:
        s = 1.0 - t if direction == FUTURE else t
        peak = max_density(spacetime, mu_t)
        for n_prime in N_range:
            lhs = renyi_entropy(spacetime, mu_t, n_prime).value
            factors = np.array([coefficient(K, n_prime, s, th) for th in theta])
            if np.any(np.isinf(factors)):
                rhs = -math.inf
            else:
                rhs = -float(np.sum(factors * rho ** (-1.0 / n_prime) * mass))
            defect = rhs - lhs
            bound = density_bound(float(rho.max()), t, K, n_prime, D, direction, reduced)
            report.rows.append((t, n_prime, lhs, rhs, defect, peak, bound))
            if defect < -tol:
                witnesses.append((t, n_prime, defect))
    report.add_check('entropy inequality', witnesses, tol=tol)
    report.values['D'] = D
    report.values['N_range'] = list(N_range)
    return report


# ---------------------------------------------------------------------------
# Good geodesics
# ---------------------------------------------------------------------------

class _Redistributor:
    """Greedy move of over-dense mass to the least dense admissible cell of its fiber."""

    def __init__(self, spacetime, x1, lam, tol):
        self.spacetime = spacetime
        self.x1 = x1
        self.lam = lam
        self.tol = tol
        self._admissible = {}

    def admissible(self, x):
        if x not in self._admissible:
            st = self.spacetime
            ell = st.values[x, self.x1]
            first = np.where(st.tags[x] == FINITE, np.abs(st.values[x] - self.lam * ell), np.inf)
            second = np.where(st.tags[:, self.x1] == FINITE,
                              np.abs(st.values[:, self.x1] - (1.0 - self.lam) * ell), np.inf)
            ok = (np.maximum(first, second) <= self.tol) & (st.m_weights > 0)
            self._admissible[x] = np.flatnonzero(ok)
        return self._admissible[x]

    def run(self, contributions, c):
        st = self.spacetime
        m = st.m_weights
        cells = {}
        for x, z, mass in contributions:
            cells.setdefault(z, {})
            cells[z][x] = cells[z].get(x, 0.0) + mass
        load = np.zeros(st.n_points)
        for z, sources in cells.items():
            load[z] = sum(sources.values())
        iterations = 0
        stuck = np.zeros(st.n_points, dtype=bool)
        while iterations < global_params.REDISTRIBUTION_CAP:
            density = np.where(m > 0, load / np.where(m > 0, m, 1.0), np.where(load > 0, np.inf, 0.0))
            over = np.where(stuck, -np.inf, density - c)
            z = int(np.argmax(over))
            if over[z] <= 1e-12 * max(c, 1.0):
                break
            excess = load[z] - c * m[z] if m[z] > 0 else load[z]
            moved = False
            for x in sorted(cells.get(z, {})):
                candidates = self.admissible(x)
                candidates = candidates[candidates != z]
                if candidates.size == 0:
                    continue
                room = c * m[candidates] - load[candidates]
                if not np.any(room > 0):
                    continue
                w = int(candidates[np.argmin(np.where(room > 0, density[candidates], np.inf))])
                amount = min(excess, cells[z][x], c * m[w] - load[w])
                if amount <= 0:
                    continue
                cells[z][x] -= amount
                cells.setdefault(w, {})
                cells[w][x] = cells[w].get(x, 0.0) + amount
                load[z] -= amount
                load[w] += amount
                moved = True
                break
            iterations += 1
            if moved:
                # freed room at z can unblock cells skipped so far
                stuck[:] = False
            else:
                stuck[z] = True
        density = np.where(m > 0, load / np.where(m > 0, m, 1.0), np.where(load > 0, np.inf, 0.0))
        worst = int(np.argmax(density))
        entries = [(x, z, mass) for z, sources in cells.items() for x, mass in sources.items() if mass > 0]
        return entries, load, iterations, (worst, float(density[worst]))


def _coupling_value(spacetime, entries, q):
    """(int l**q dpi)**(1/q) of a coupling given as (x, z, mass); None if not causal."""
    total = ExtendedReal(0.0)
    for x, z, mass in entries:
        ell = spacetime.ell(x, z)
        if ell.is_neg_inf():
            return None
        total = total + ext_power(ell, q) * ExtendedReal(mass)
    if total.is_pos_inf():
        return math.inf if q > 0 else 0.0
    if total.value <= 0:
        return 0.0 if q > 0 else math.inf
    return total.value ** (1.0 / q)


def good_geodesic(spacetime, mu0, x1, K, N, q, lam, depth, direction=FUTURE, reduced=False,
                  tol=None):
    """
    Build nu_t at t_k = 1 - (1 - lam)**k by repeated lam-intermediate steps
    toward x1, redistributing over-dense mass inside intermediate-point
    fibers until the density bound holds.

    :return: (list of (t, DiscreteMeasure), GoodGeodesicReport)
    """
    check_transport_exponent(q)
    N = _check_N(N)
    if not 0.0 < lam < 1.0:
        raise ParameterError("step lambda must lie in (0, 1)", witness=lam)
    if direction == PAST:
        reversed_space = spacetime.time_reversed()
        steps, report = good_geodesic(reversed_space, mu0, x1, K, N, q, lam, depth, FUTURE,
                                      reduced, tol)
        report.values['direction'] = PAST
        report.rows = [(1.0 - row[0],) + tuple(row[1:]) for row in report.rows]
        return sorted([(1.0 - t, m) for t, m in steps], key=lambda item: item[0]), report
    if direction != FUTURE:
        raise ParameterError("direction must be 'future' or 'past'", witness=direction)

    tol = _default_tolerance(spacetime, tol)
    spt, rho0, theta = _reference(spacetime, mu0, x1)
    rho_max = float(rho0.max())
    D = float(theta.max())
    l_min = float(theta.min())
    dirac = DiscreteMeasure.dirac(spacetime.n_points, x1)
    full, _ = lq_distance(spacetime, mu0, dirac, q)
    report = GoodGeodesicReport(tolerances={'geodesy': tol, 'density': tol})
    report.values.update({'D': D, 'l_q': full, 'rho0_max': rho_max})
    slack = 1.0
    if spacetime.grid is not None:
        slack = 1.0 + global_params.DENSITY_SLACK_CELLS * spacetime.grid.h / l_min
    redistributor = _Redistributor(spacetime, x1, lam, tol)

    steps = [(0.0, mu0)]
    geodesy, density_fail, redistribution_fail = [], [], []
    current = mu0
    for k in range(1, int(depth) + 1):
        t = 1.0 - (1.0 - lam) ** k
        if spacetime.grid is not None:
            _, contributions = affine_interpolant(spacetime, current, x1, lam)
        else:
            _, first, _ = intermediate_measure(spacetime, current, dirac, lam, q, tol)
            contributions = first.entries()
        c = density_bound(rho_max, t, K, N, D, FUTURE, reduced)
        entries, load, iterations, (worst, peak) = redistributor.run(contributions, c)
        nxt = DiscreteMeasure(load, normalize=True)
        if peak > c * (1.0 + 1e-9):
            redistribution_fail.append((t, worst, peak, c))
        if peak > c * slack + global_params.TOL:
            density_fail.append((t, worst, peak, c * slack))
        s_prev = steps[-1][0]
        value = _coupling_value(spacetime, entries, q)
        expected = (t - s_prev) * full.value
        if value is None or value < expected - tol:
            geodesy.append((s_prev, t, value, expected))
        rest, _ = lq_distance(spacetime, nxt, dirac, q)
        if not rest.is_finite() or rest.value < (1.0 - t) * full.value - tol:
            geodesy.append((t, 1.0, float(rest), (1.0 - t) * full.value))
        report.rows.append((t, peak, c, iterations, value))
        log.debug("good geodesic step %d: t=%g peak=%g bound=%g after %d moves",
                  k, t, peak, c, iterations)
        steps.append((t, nxt))
        current = nxt

    report.add_check('geodesy', geodesy, tol=tol)
    report.add_check('density bound', density_fail, tol=tol, note='slack factor %g' % slack)
    report.add_check('redistribution', redistribution_fail)
    tmcp = tmcp_check(spacetime, steps, x1, K, N, (N,), FUTURE, reduced, tol)
    report.add_check('entropy inequality', tmcp.check('entropy inequality').witnesses, tol=tol,
                     count=tmcp.check('entropy inequality').count)
    crude = []
    for t, nu in steps:
        lhs = renyi_entropy(spacetime, nu, N).value
        factor = (_sigma_raw if reduced else _tau_raw)(K, N, 1.0 - t, D)
        rhs = factor * renyi_entropy(spacetime, mu0, N).value
        if K <= 0 and lhs > rhs + tol:
            crude.append((t, lhs, rhs))
    report.add_check('crude entropy bound', crude, tol=tol)
    return steps, report


def random_density_pair(spacetime, indices, rng=None):
    """Two random probability densities on the same cells, for concavity checks."""
    rng = make_rng() if rng is None else rng
    n = spacetime.n_points
    out = []
    for _ in range(2):
        w = np.zeros(n)
        w[indices] = rng.random(len(indices)) + 0.05
        out.append(DiscreteMeasure(w, normalize=True))
    return out
