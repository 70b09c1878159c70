"""
Hyperbolic norms on R^n: Minkowski norms of a Lorentzian scalar product and
the hyperbolic l^p family, with Legendre duality for the quadratic case.
"""

import logging
import math

import numpy as np

from lorentzlab import global_params
from lorentzlab.errors import (DomainError, ParameterError,
                               UnsupportedDualityError)
from lorentzlab.utils import (NEG_INF, ExtendedTime, check_transport_exponent,
                              lq_cost, make_rng)

log = logging.getLogger(__name__)

MINKOWSKI = 'minkowski'
LP = 'lp'

POSITIVE_DEFINITE = 'positive-definite'
LORENTZIAN = 'lorentzian'
OTHER = 'other'


class DualityParams:
    """Dual exponents 0 != q < 1 and p = q / (q - 1)."""

    def __init__(self, q):
        self.p = check_transport_exponent(q)
        self.q = float(q)
        if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-12:
            raise ParameterError("exponents are not conjugate", witness=(self.p, self.q))

    @classmethod
    def from_p(cls, p):
        p = float(p)
        if p == 0 or p >= 1:
            raise ParameterError("dual exponent must satisfy 0 != p < 1, got %r" % p)
        return cls(p / (p - 1.0))

    def __repr__(self):
        return 'DualityParams(q=%r, p=%r)' % (self.q, self.p)


def _time_orientation(g):
    w, vecs = np.linalg.eigh(g)
    positive = np.flatnonzero(w > 0)
    if positive.size == 0:
        raise ParameterError("scalar product has no timelike direction")
    e0 = vecs[:, positive[0]]
    first = np.flatnonzero(np.abs(e0) > 1e-15)[0]
    if e0[first] < 0:
        e0 = -e0
    return e0


class HyperbolicNorm:
    def __init__(self, kind, n, g=None, p=None):
        self.kind = kind
        self.n = int(n)
        if kind == MINKOWSKI:
            g = np.asarray(g, dtype=float)
            if g.shape != (self.n, self.n):
                raise ParameterError("scalar product must be %dx%d" % (self.n, self.n), witness=g.shape)
            if signature_diagnostic(g) != LORENTZIAN:
                raise ParameterError("scalar product does not have signature (+,-,...,-)",
                                     witness=np.linalg.eigvalsh(g).tolist())
            self.g = g
            self.g_inv = np.linalg.inv(g)
            self.e0 = _time_orientation(g)
            self.p = 2.0
        elif kind == LP:
            if p is None or float(p) < 1:
                raise ParameterError("hyperbolic l^p needs p >= 1", witness=p)
            if self.n < 1:
                raise ParameterError("dimension must be positive", witness=n)
            self.p = float(p)
            self.g = None
            self.e0 = np.eye(self.n)[0]
        else:
            raise ParameterError("unknown norm kind", witness=kind)

    @classmethod
    def minkowski(cls, g):
        g = np.asarray(g, dtype=float)
        return cls(MINKOWSKI, g.shape[0], g=g)

    @classmethod
    def standard_minkowski(cls, n):
        return cls.minkowski(np.diag([1.0] + [-1.0] * (int(n) - 1)))

    @classmethod
    def lp(cls, p, n):
        return cls(LP, n, p=p)

    @classmethod
    def from_dict(cls, d):
        kind = d.get('kind', MINKOWSKI)
        if kind == MINKOWSKI:
            if 'g' in d:
                return cls.minkowski(d['g'])
            return cls.standard_minkowski(d.get('n', 2))
        return cls.lp(d.get('p'), d.get('n', 2))

    def to_dict(self):
        if self.kind == MINKOWSKI:
            return {'kind': MINKOWSKI, 'n': self.n, 'g': self.g.tolist()}
        return {'kind': LP, 'n': self.n, 'p': self.p}

    def _check_dim(self, V):
        V = np.asarray(V, dtype=float)
        if V.shape[-1] != self.n:
            raise DomainError("vector dimension %d does not match norm dimension %d"
                              % (V.shape[-1], self.n))
        return V

    def inner(self, v, w):
        if self.kind != MINKOWSKI:
            raise UnsupportedDualityError("no scalar product for kind %s" % self.kind)
        return float(np.asarray(v, dtype=float) @ self.g @ np.asarray(w, dtype=float))

    def values(self, V):
        """
        Vectorized evaluation over the last axis; -inf off the future cone.
        """
        V = self._check_dim(V)
        zero = np.all(V == 0.0, axis=-1)
        if self.kind == MINKOWSKI:
            s = np.einsum('...i,ij,...j->...', V, self.g, V)
            scale = np.einsum('...i,ij,...j->...', np.abs(V), np.abs(self.g), np.abs(V))
            orient = V @ (self.g @ self.e0)
            causal = (s >= -global_params.NORM_TOL * scale) & (orient > 0)
            out = np.where(causal, np.sqrt(np.maximum(s, 0.0)), -np.inf)
        else:
            t = V[..., 0]
            space = (np.abs(V[..., 1:]) ** self.p).sum(axis=-1)
            tp = np.abs(t) ** self.p
            causal = (t > 0) & (tp - space >= -global_params.NORM_TOL * (tp + space))
            out = np.where(causal, np.maximum(tp - space, 0.0) ** (1.0 / self.p), -np.inf)
        return np.where(zero, 0.0, out)

    def __call__(self, v):
        return eval_norm(self, v)

    def dual_values(self, Z):
        """Dual norm sqrt(z g^-1 z) on future covectors, -inf elsewhere."""
        if self.kind != MINKOWSKI:
            raise UnsupportedDualityError("dual norm is implemented for the minkowski kind only",
                                          witness=self.kind)
        Z = self._check_dim(Z)
        s = np.einsum('...i,ij,...j->...', Z, self.g_inv, Z)
        scale = np.einsum('...i,ij,...j->...', np.abs(Z), np.abs(self.g_inv), np.abs(Z))
        future = (Z @ self.e0 > 0) & (s >= -global_params.NORM_TOL * scale)
        zero = np.all(Z == 0.0, axis=-1)
        out = np.where(future, np.sqrt(np.maximum(s, 0.0)), -np.inf)
        return np.where(zero, 0.0, out)

    def __repr__(self):
        if self.kind == LP:
            return '<HyperbolicNorm lp p=%g n=%d>' % (self.p, self.n)
        return '<HyperbolicNorm minkowski n=%d>' % self.n


def eval_norm(norm, v):
    """n(v) as an ExtendedTime: [0, inf) on the future cone, -inf otherwise."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DomainError("eval takes a single vector", witness=v.shape)
    return ExtendedTime(float(norm.values(v)))


def _require_minkowski(norm):
    if norm.kind != MINKOWSKI:
        raise UnsupportedDualityError("dual norm is not implemented for p != 2", witness=norm.p)


def lagrangian(norm, params, v):
    """L(v) = n(v)**q / q on the future cone, -inf off it; 0**q = +inf for q < 0."""
    _require_minkowski(norm)
    return lq_cost(eval_norm(norm, v), params.q)


def dual_norm(norm, zeta):
    _require_minkowski(norm)
    return ExtendedTime(float(norm.dual_values(np.asarray(zeta, dtype=float))))


def hamiltonian(norm, params, zeta):
    """H(zeta) = n*(zeta)**p / p with the dual norm of g^-1."""
    _require_minkowski(norm)
    return lq_cost(dual_norm(norm, zeta), params.p)


def fenchel_young_gap(norm, params, v, zeta):
    """
    zeta(v) - n(v)**q/q - n*(zeta)**p/p; nonnegative, zero iff zeta = DL(v).

    Both arguments must be future-directed timelike.
    """
    _require_minkowski(norm)
    v = np.asarray(v, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    nv = eval_norm(norm, v)
    nz = dual_norm(norm, zeta)
    if not nv.is_finite() or nv.value <= 0:
        raise DomainError("vector is not future-directed timelike", witness=v.tolist())
    if not nz.is_finite() or nz.value <= 0:
        raise DomainError("covector is not future-directed timelike", witness=zeta.tolist())
    q, p = params.q, params.p
    return float(zeta @ v - nv.value ** q / q - nz.value ** p / p)


def legendre_covector(norm, params, v):
    """DL(v) = n(v)**(q - 2) g v, the unique covector attaining Fenchel-Young equality."""
    _require_minkowski(norm)
    nv = eval_norm(norm, v)
    if not nv.is_finite() or nv.value <= 0:
        raise DomainError("Legendre covector needs a future timelike vector", witness=list(v))
    return nv.value ** (params.q - 2.0) * (norm.g @ np.asarray(v, dtype=float))


def _future_squares(norm, *vectors):
    out = []
    for v in vectors:
        value = eval_norm(norm, v)
        if value == NEG_INF:
            raise DomainError("vector is not in the future cone", witness=list(np.asarray(v)))
        out.append(value.value ** 2)
    return out


def polarize(norm, x, y):
    """(x, y) := 1/2 (n(x + y)**2 - n(x)**2 - n(y)**2) for x, y in the future cone."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sxy, sx, sy = _future_squares(norm, x + y, x, y)
    return 0.5 * (sxy - sx - sy)


def parallelogram_defect(norm, x, y):
    """n(x + 2y)**2 + n(x)**2 - 2 n(x + y)**2 - 2 n(y)**2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s12, sx, s11, sy = _future_squares(norm, x + 2 * y, x, x + y, y)
    return s12 + sx - 2.0 * s11 - 2.0 * sy


def sample_future(norm, rng, size, timelike_margin=0.05):
    """Random future-directed timelike vectors of a norm."""
    out = np.empty((size, norm.n))
    filled = 0
    while filled < size:
        V = rng.normal(size=(2 * (size - filled) + 8, norm.n))
        if norm.kind == MINKOWSKI:
            V = V + 2.0 * norm.e0 * np.linalg.norm(V, axis=1, keepdims=True)
        else:
            space = (np.abs(V[:, 1:]) ** norm.p).sum(axis=1) ** (1.0 / norm.p)
            V[:, 0] = space * (1.0 + np.abs(V[:, 0])) + timelike_margin
        vals = norm.values(V)
        V = V[vals > timelike_margin * np.linalg.norm(V, axis=1)]
        take = min(len(V), size - filled)
        out[filled:filled + take] = V[:take]
        filled += take
    return out


def signature_diagnostic(g):
    """
    Classify a nondegenerate symmetric matrix by the signs of its eigenvalues.

    :return: 'positive-definite', 'lorentzian' or 'other'
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DomainError("scalar product must be a square matrix", witness=g.shape)
    if not np.allclose(g, g.T, rtol=0, atol=global_params.NORM_TOL * max(1.0, np.abs(g).max())):
        raise DomainError("scalar product is not symmetric")
    w = np.linalg.eigvalsh(g)
    if abs(np.prod(w)) <= global_params.NORM_TOL or np.any(np.abs(w) <= global_params.NORM_TOL):
        raise DomainError("degenerate scalar product", witness=w.tolist())
    if np.all(w > 0):
        return POSITIVE_DEFINITE
    if np.sum(w > 0) == 1:
        return LORENTZIAN
    return OTHER


def triangle_criterion(g, rng=None, samples=2000):
    """
    Decide which of the triangle and reverse triangle inequalities for
    sqrt(g(v, v)) hold on the component of {g(v, v) > 0} containing the
    time orientation.

    :return: dict with booleans 'triangle' and 'reverse_triangle' and the
             classification they imply.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if n < 2:
        raise ParameterError("triangle criterion needs dimension >= 2", witness=n)
    rng = make_rng() if rng is None else rng
    w, vecs = np.linalg.eigh(g)
    e0 = _time_orientation(g)

    pairs = []
    for i in range(n):
        e = vecs[:, i] / math.sqrt(abs(w[i]))
        for s in (0.3, 0.6, 0.9):
            pairs.append((e0 + s * e, e0 - s * e))
    V = rng.normal(size=(samples, n)) + e0
    W = rng.normal(size=(samples, n)) + e0
    pairs.extend(zip(V, W))

    def positive(v):
        return v @ g @ v > 0 and v @ g @ e0 > 0

    triangle = True
    reverse = True
    tested = 0
    for v, u in pairs:
        if not (positive(v) and positive(u) and positive(v + u)):
            continue
        tested += 1
        lhs = math.sqrt((v + u) @ g @ (v + u))
        rhs = math.sqrt(v @ g @ v) + math.sqrt(u @ g @ u)
        slack = global_params.NORM_TOL * max(1.0, rhs)
        if lhs > rhs + slack:
            triangle = False
        if lhs < rhs - slack:
            reverse = False
    if reverse and not triangle:
        classification = LORENTZIAN
    elif triangle and not reverse:
        classification = POSITIVE_DEFINITE
    else:
        classification = OTHER
    log.debug("triangle criterion on %d pairs: triangle=%s reverse=%s", tested, triangle, reverse)
    return {'triangle': triangle, 'reverse_triangle': reverse,
            'classification': classification, 'pairs': tested}
