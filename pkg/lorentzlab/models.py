"""
Smooth Minkowski model space and closed-form functions on it.

Every ClosedForm evaluates on an array of points X of shape (k, n) and
returns its values together with its differential (a covector per point).
On the model the maximal weak subslope of a causal function is the dual
Lorentzian norm of its differential, so moduli are computed analytically.
"""

import logging

import numpy as np

from lorentzlab.errors import DomainError, ParameterError
from lorentzlab.norms import HyperbolicNorm
from lorentzlab.utils import ridders_derivative

log = logging.getLogger(__name__)


class MinkowskiModel:
    """R^{1,dim-1} with g = diag(1, -1, ..., -1); axis 0 is time."""

    def __init__(self, dim):
        self.dim = int(dim)
        if self.dim < 2:
            raise ParameterError("the Minkowski model needs dim >= 2", witness=dim)
        self.norm = HyperbolicNorm.standard_minkowski(self.dim)
        self.g = self.norm.g

    def points(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DomainError("points must have %d coordinates" % self.dim, witness=X.shape)
        return X

    def ell(self, X, Y):
        """Vectorized l(x, y), -inf off the causal future."""
        return self.norm.values(self.points(Y) - self.points(X))

    def chronological(self, X, Y):
        return self.ell(X, Y) > 0

    def modulus(self, covectors):
        """Dual norm of future-directed covectors, -inf for non-causal ones."""
        return self.norm.dual_values(covectors)

    def pairing(self, a, b):
        """g^-1(a, b) row by row."""
        return np.einsum('ki,ij,kj->k', a, self.norm.g_inv, b)

    def __repr__(self):
        return '<MinkowskiModel dim=%d>' % self.dim


class ClosedForm:
    def __init__(self, name, value, differential, domain=None):
        """
        :param value: X -> (k,) array, +-inf allowed.
        :param differential: X -> (k, n) array; meaningful on the domain.
        :param domain: X -> bool mask of points where the function is smooth.
        """
        self.name = name
        self._value = value
        self._differential = differential
        self._domain = domain

    def __call__(self, X):
        return self._value(np.atleast_2d(np.asarray(X, dtype=float)))

    def differential(self, X):
        return self._differential(np.atleast_2d(np.asarray(X, dtype=float)))

    def domain(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self._domain is None:
            return np.ones(len(X), dtype=bool)
        return self._domain(X)

    def __add__(self, other):
        return add(self, other)

    def __repr__(self):
        return '<ClosedForm %s>' % self.name


def time_coordinate(model):
    e = np.eye(model.dim)[0]
    return ClosedForm('t',
                      lambda X: X[:, 0].copy(),
                      lambda X: np.tile(e, (len(X), 1)))


def _sep_to(model, o):
    o = np.asarray(o, dtype=float)

    def sep(X):
        return model.norm.values(o[None, :] - X)
    return o, sep


def distance_from(model, o):
    """g_o = l(o, .): smooth on I+(o), -inf off J+(o)."""
    o = np.asarray(o, dtype=float)

    def value(X):
        return model.ell(o[None, :], X)

    def differential(X):
        ell = value(X)
        safe = np.where(ell > 0, ell, 1.0)
        return ((X - o) @ model.g) / safe[:, None]

    return ClosedForm('l(o,.)', value, differential, domain=lambda X: value(X) > 0)


def distance_to(model, o):
    """g^o = -l(., o): smooth on I-(o), +inf off J-(o)."""
    o, sep = _sep_to(model, o)

    def value(X):
        return -sep(X)

    def differential(X):
        ell = sep(X)
        safe = np.where(ell > 0, ell, 1.0)
        return ((o - X) @ model.g) / safe[:, None]

    return ClosedForm('-l(.,o)', value, differential, domain=lambda X: sep(X) > 0)


def potential_to(model, o, q):
    """f^o = -l(., o)**q / q on I-(o), +inf elsewhere."""
    q = float(q)
    o, sep = _sep_to(model, o)

    def value(X):
        ell = sep(X)
        inside = ell > 0
        safe = np.where(inside, ell, 1.0)
        return np.where(inside, -safe ** q / q, np.inf)

    def differential(X):
        ell = sep(X)
        safe = np.where(ell > 0, ell, 1.0)
        return ((o - X) @ model.g) * (safe ** (q - 2.0))[:, None]

    return ClosedForm('f^o', value, differential, domain=lambda X: sep(X) > 0)


def potential_from(model, o, q):
    """f_o = l(o, .)**q / q on I+(o), -inf elsewhere."""
    q = float(q)
    o = np.asarray(o, dtype=float)

    def sep(X):
        return model.ell(o[None, :], X)

    def value(X):
        ell = sep(X)
        inside = ell > 0
        safe = np.where(inside, ell, 1.0)
        return np.where(inside, safe ** q / q, -np.inf)

    def differential(X):
        ell = sep(X)
        safe = np.where(ell > 0, ell, 1.0)
        return ((X - o) @ model.g) * (safe ** (q - 2.0))[:, None]

    return ClosedForm('f_o', value, differential, domain=lambda X: sep(X) > 0)


def _bump1(s):
    inside = np.abs(s) < 1.0
    safe = np.where(inside, 1.0 - s * s, 1.0)
    return np.where(inside, np.exp(-1.0 / safe), 0.0)


def _bump1_prime(s):
    inside = np.abs(s) < 1.0
    safe = np.where(inside, 1.0 - s * s, 1.0)
    return np.where(inside, _bump1(s) * (-2.0 * s / safe ** 2), 0.0)


class Bump(ClosedForm):
    """Product bump amplitude * prod_k b((x_k - c_k) / r_k), b(s) = exp(-1 / (1 - s**2))."""

    def __init__(self, center, radius, amplitude=1.0):
        self.center = np.asarray(center, dtype=float)
        radius = np.asarray(radius, dtype=float)
        if radius.ndim == 0:
            radius = np.full(self.center.shape, float(radius))
        if radius.shape != self.center.shape or np.any(radius <= 0):
            raise ParameterError("bump radii must be positive, one per axis", witness=radius.tolist())
        self.radius = radius
        self.amplitude = float(amplitude)
        ClosedForm.__init__(self, 'bump', self._eval, self._diff)

    def _factors(self, X):
        S = (X - self.center[None, :]) / self.radius[None, :]
        return _bump1(S), _bump1_prime(S) / self.radius[None, :]

    def _eval(self, X):
        b, _ = self._factors(X)
        return self.amplitude * np.prod(b, axis=1)

    def _diff(self, X):
        b, db = self._factors(X)
        out = np.empty_like(b)
        for k in range(b.shape[1]):
            others = np.prod(np.delete(b, k, axis=1), axis=1)
            out[:, k] = db[:, k] * others
        return self.amplitude * out

    def support_box(self):
        return np.stack([self.center - self.radius, self.center + self.radius], axis=1)

    @classmethod
    def from_dict(cls, d):
        return cls(d['center'], d.get('radius', 0.1), d.get('amplitude', 1.0))


def add(f, g):
    return ClosedForm('(%s + %s)' % (f.name, g.name),
                      lambda X: f(X) + g(X),
                      lambda X: f.differential(X) + g.differential(X),
                      domain=lambda X: f.domain(X) & g.domain(X))


def scale(lam, f):
    lam = float(lam)
    return ClosedForm('%g*%s' % (lam, f.name),
                      lambda X: lam * f(X),
                      lambda X: lam * f.differential(X),
                      domain=f.domain)


def compose(phi, phi_prime, f, name='phi'):
    """phi o f with differential phi'(f) df."""
    return ClosedForm('%s(%s)' % (name, f.name),
                      lambda X: phi(f(X)),
                      lambda X: phi_prime(f(X))[:, None] * f.differential(X),
                      domain=f.domain)


def mul(f, g):
    return ClosedForm('(%s * %s)' % (f.name, g.name),
                      lambda X: f(X) * g(X),
                      lambda X: g(X)[:, None] * f.differential(X) + f(X)[:, None] * g.differential(X),
                      domain=lambda X: f.domain(X) & g.domain(X))


def numeric_differential(f, X, h=1e-2):
    """Coordinate derivatives of f by Ridders extrapolation, with the error estimates."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty(X.shape)
    err = np.empty(X.shape)
    for i, x in enumerate(X):
        for k in range(X.shape[1]):
            def partial(s, x=x, k=k):
                y = x.copy()
                y[k] = s
                return float(f(y[None, :])[0])
            out[i, k], err[i, k] = ridders_derivative(partial, x[k], h)
    return out, err


def modulus(model, f, X):
    """Analytic maximal weak subslope |df| = ||grad f|| of a causal closed form."""
    return model.modulus(f.differential(X))
