"""
Discrete metric measure spacetimes.

A spacetime is a finite point set with a time separation matrix valued in
{-inf} U [0, +inf], reference-measure weights and optional embedding
coordinates. The separation is stored as an int8 tag matrix (NEG, FINITE,
POS) next to a float matrix holding the finite values, so the -inf of a
non-causal pair is a tag and never an IEEE value inside a kernel.
"""

import logging

import numpy as np

from lorentzlab import global_params
from lorentzlab.errors import ParameterError, PreconditionError, SpacetimeStructureError
from lorentzlab.report import ValidationReport
from lorentzlab.utils import (FINITE, NEG, POS, ExtendedTime, ext_sub_arrays,
                              join_extended, split_extended)

log = logging.getLogger(__name__)

I_PLUS = 'I+'
I_MINUS = 'I-'
J_PLUS = 'J+'
J_MINUS = 'J-'
CONE_KINDS = (I_PLUS, I_MINUS, J_PLUS, J_MINUS)


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


class GridInfo:
    """Regular lattice of cell centers produced by a generator."""

    def __init__(self, family, lo, spacing, resolution, p=2.0):
        self.family = family
        self.lo = _frozen(np.asarray(lo, dtype=float))
        self.spacing = _frozen(np.asarray(spacing, dtype=float))
        self.resolution = tuple(int(r) for r in resolution)
        self.p = float(p)

    @property
    def dim(self):
        return len(self.resolution)

    @property
    def h(self):
        return float(np.max(self.spacing))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def flat_index(self, multi_index):
        return int(np.ravel_multi_index(tuple(int(i) for i in multi_index), self.resolution))

    def multi_index(self, flat):
        return np.unravel_index(flat, self.resolution)

    def nearest_index(self, point):
        """Flat index of the cell whose center is nearest to point, or None outside."""
        rel = (np.asarray(point, dtype=float) - self.lo) / self.spacing - 0.5
        idx = np.rint(rel).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.resolution)):
            return None
        return self.flat_index(idx)

    def to_dict(self):
        return {
            'family': self.family,
            'lo': self.lo.tolist(),
            'spacing': self.spacing.tolist(),
            'resolution': list(self.resolution),
            'p': self.p,
        }


class DiscreteSpacetime:
    def __init__(self, tags, values, m_weights, coords=None, labels=None, grid=None):
        tags = np.asarray(tags, dtype=np.int8)
        values = np.asarray(values, dtype=float)
        m_weights = np.asarray(m_weights, dtype=float)
        if tags.ndim != 2 or tags.shape[0] != tags.shape[1]:
            raise SpacetimeStructureError("time separation matrix must be square", witness=tags.shape)
        n = tags.shape[0]
        if n == 0:
            raise SpacetimeStructureError("a spacetime needs at least one point")
        if values.shape != tags.shape:
            raise SpacetimeStructureError("value matrix shape differs from tag matrix",
                                          witness=(values.shape, tags.shape))
        if m_weights.shape != (n,):
            raise SpacetimeStructureError("m_weights length differs from the number of points",
                                          witness=(m_weights.shape, n))
        if not np.all(np.isfinite(m_weights)) or np.any(m_weights < 0):
            raise SpacetimeStructureError("reference weights must be finite and nonnegative",
                                          witness=int(np.flatnonzero(~(m_weights >= 0))[0])
                                          if np.any(~(m_weights >= 0)) else None)
        if not np.all(np.isin(tags, (NEG, FINITE, POS))):
            raise SpacetimeStructureError("unknown separation tag")
        finite = tags == FINITE
        if np.any(~np.isfinite(values[finite])):
            raise SpacetimeStructureError("finite entries must hold finite values")
        negative = np.argwhere(finite & (values < 0))
        if negative.size:
            raise SpacetimeStructureError("finite time separation values must be nonnegative",
                                          witness=tuple(int(i) for i in negative[0]))
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.ndim != 2 or coords.shape[0] != n:
                raise SpacetimeStructureError("coords must have one row per point",
                                              witness=coords.shape)
        if labels is not None:
            labels = [str(label) for label in labels]
            if len(labels) != n:
                raise SpacetimeStructureError("labels must have one entry per point",
                                              witness=len(labels))
        self.tags = _frozen(tags)
        self.values = _frozen(np.where(finite, values, 0.0))
        self.m_weights = _frozen(m_weights)
        self.coords = None if coords is None else _frozen(coords)
        self.labels = labels
        self.grid = grid

    @classmethod
    def from_matrix(cls, ell, m_weights, coords=None, labels=None, grid=None):
        """Build from a float matrix using +-inf for infinite separations."""
        tags, values = split_extended(ell)
        return cls(tags, values, m_weights, coords=coords, labels=labels, grid=grid)

    @classmethod
    def from_entries(cls, n, entries, m_weights=None, coords=None, labels=None):
        """
        Explicit entries (i, j, value); unlisted pairs default to -inf off the
        diagonal and 0 on it.
        """
        ell = np.full((n, n), -np.inf)
        np.fill_diagonal(ell, 0.0)
        for i, j, value in entries:
            if not (0 <= i < n and 0 <= j < n):
                raise SpacetimeStructureError("entry index out of range", witness=(i, j))
            ell[i, j] = float(value)
        if m_weights is None:
            m_weights = np.ones(n)
        return cls.from_matrix(ell, m_weights, coords=coords, labels=labels)

    @property
    def n_points(self):
        return self.tags.shape[0]

    def __len__(self):
        return self.n_points

    def ell(self, i, j):
        self._check_index(i)
        self._check_index(j)
        return ExtendedTime(self.values[i, j], int(self.tags[i, j]))

    def ell_matrix(self):
        return join_extended(self.tags, self.values)

    def causal_mask(self):
        return self.tags != NEG

    def chronological_mask(self):
        return (self.tags == POS) | ((self.tags == FINITE) & (self.values > 0))

    def finite_values(self, fill=0.0):
        return np.where(self.tags == FINITE, self.values, fill)

    def name(self, i):
        return self.labels[i] if self.labels else str(i)

    def time_reversed(self):
        """The spacetime with separation l*(x, y) := l(y, x)."""
        return DiscreteSpacetime(self.tags.T, self.values.T, self.m_weights,
                                 coords=self.coords, labels=self.labels, grid=self.grid)

    def _check_index(self, i):
        if not (0 <= int(i) < self.n_points):
            raise PreconditionError("point index out of range", witness=i)

    def __repr__(self):
        return '<DiscreteSpacetime n=%d%s>' % (
            self.n_points, '' if self.grid is None else ' grid=%s' % (self.grid.resolution,))


class CausalRelations:
    def __init__(self, leq, ll):
        self.leq = _frozen(np.asarray(leq, dtype=bool))
        self.ll = _frozen(np.asarray(ll, dtype=bool))


def validate(spacetime, tol=None):
    """
    Check the rough spacetime axioms on every pair and triple.

    :param spacetime: DiscreteSpacetime.
    :param tol: absolute tolerance for the reverse triangle inequality;
                global_params.TOL when None, 0 for exact mode.
    :return: ValidationReport listing every violated triple and pair.
    """
    tol = global_params.TOL if tol is None else float(tol)
    tags, values = spacetime.tags, spacetime.values
    n = spacetime.n_points
    report = ValidationReport(tolerances={'reverse triangle': tol})

    diagonal = [int(i) for i in np.flatnonzero(np.diag(tags) == NEG)]
    report.add_check('diagonal nonnegativity', diagonal)

    causal = tags != NEG
    both = np.triu(causal & causal.T, k=1)
    report.add_check('antisymmetry', [tuple(int(v) for v in w) for w in np.argwhere(both)])

    witnesses = []
    count = 0
    for x in range(n):
        lhs_tags = tags[x][:, None]
        lhs_values = values[x][:, None]
        # rhs[y, z] = l(x, z) - l(y, z)
        rhs_tags, rhs_values = ext_sub_arrays(tags[x][None, :], values[x][None, :], tags, values)
        bad = np.zeros((n, n), dtype=bool)
        bad |= (lhs_tags == POS) & (rhs_tags != POS)
        finite_lhs = lhs_tags == FINITE
        bad |= finite_lhs & (rhs_tags == NEG)
        bad |= finite_lhs & (rhs_tags == FINITE) & (lhs_values > rhs_values + tol)
        hits = np.argwhere(bad)
        if hits.size:
            count += len(hits)
            room = global_params.MAX_WITNESSES - len(witnesses)
            for y, z in hits[:max(room, 0)]:
                witnesses.append((x, int(y), int(z)))
    report.add_check('reverse triangle', witnesses, tol=tol, count=count)
    report.values['n_points'] = n
    log.debug("validated %d points: %d triangle, %d diagonal, %d antisymmetry violations",
              n, count, len(diagonal), int(both.sum()))
    return report


def relations(spacetime):
    return CausalRelations(spacetime.causal_mask(), spacetime.chronological_mask())


def order_properties(rel):
    """
    Transitivity, reflexivity and push-up of a pair of relations, checked
    exhaustively through boolean matrix products.

    :return: dict of property name -> list of witness pairs (x, z).
    """
    leq = rel.leq.astype(np.int64)
    ll = rel.ll.astype(np.int64)

    def leaks(product, target):
        return [tuple(int(v) for v in w) for w in np.argwhere((product > 0) & ~target)]

    return {
        'reflexive': [int(i) for i in np.flatnonzero(~np.diag(rel.leq))],
        'chronology within causality': leaks(ll, rel.leq),
        'transitive causal': leaks(leq @ leq, rel.leq),
        'transitive chronological': leaks(ll @ ll, rel.ll),
        'push-up chronological then causal': leaks(ll @ leq, rel.ll),
        'push-up causal then chronological': leaks(leq @ ll, rel.ll),
    }


def future_past(spacetime, x, kind):
    """Index array of I+(x), I-(x), J+(x) or J-(x)."""
    spacetime._check_index(x)
    if kind == J_PLUS:
        mask = spacetime.causal_mask()[x]
    elif kind == J_MINUS:
        mask = spacetime.causal_mask()[:, x]
    elif kind == I_PLUS:
        mask = spacetime.chronological_mask()[x]
    elif kind == I_MINUS:
        mask = spacetime.chronological_mask()[:, x]
    else:
        raise ParameterError("cone kind must be one of %s" % (CONE_KINDS,), witness=kind)
    return np.flatnonzero(mask)


def _cone_of_set(mask_matrix, points, future):
    points = np.asarray(sorted(set(int(p) for p in points)), dtype=int)
    if future:
        return np.any(mask_matrix[points, :], axis=0)
    return np.any(mask_matrix[:, points], axis=1)


def _emerald(spacetime, X, Y, mask_matrix):
    if len(X) == 0 or len(Y) == 0:
        raise ParameterError("emerald needs nonempty point sets")
    for p in list(X) + list(Y):
        spacetime._check_index(p)
    return np.flatnonzero(_cone_of_set(mask_matrix, X, True) & _cone_of_set(mask_matrix, Y, False))


def emerald(spacetime, X, Y):
    """Causal emerald J(X, Y) = J+(X) n J-(Y)."""
    return _emerald(spacetime, X, Y, spacetime.causal_mask())


def chronological_emerald(spacetime, X, Y):
    """Chronological emerald I(X, Y) = I+(X) n I-(Y)."""
    return _emerald(spacetime, X, Y, spacetime.chronological_mask())


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def _axes(dim, extent, resolution):
    dim = int(dim)
    if dim < 1:
        raise ParameterError("dim must be at least 1", witness=dim)
    extent = np.asarray(extent, dtype=float)
    if extent.shape == (2,):
        extent = np.tile(extent, (dim, 1))
    if extent.shape != (dim, 2) or np.any(extent[:, 1] <= extent[:, 0]):
        raise ParameterError("extent must give one increasing (lo, hi) pair per axis",
                             witness=extent.tolist())
    if np.isscalar(resolution):
        resolution = [int(resolution)] * dim
    resolution = [int(r) for r in resolution]
    if len(resolution) != dim or min(resolution) < 2:
        raise ParameterError("resolution must be >= 2 cells on every axis", witness=resolution)
    spacing = (extent[:, 1] - extent[:, 0]) / np.asarray(resolution, dtype=float)
    return extent, resolution, spacing


def _lattice(extent, resolution, spacing):
    axes = [extent[k, 0] + (np.arange(resolution[k]) + 0.5) * spacing[k]
            for k in range(len(resolution))]
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=1)


def cell_centers(dim, extent, resolution):
    """Cell centers of a regular lattice and the per-axis spacing, without separations."""
    extent, resolution, spacing = _axes(dim, extent, resolution)
    return _lattice(extent, resolution, spacing), spacing


def lp_separation(coords, p, block=256):
    """
    Pairwise hyperbolic l^p separation l(x, y) = n_p(y - x) of embedded points.

    :return: (tags, values) matrices.
    """
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    p = float(p)
    tags = np.full((n, n), NEG, dtype=np.int8)
    values = np.zeros((n, n))
    eps = global_params.GRID_NULL_EPS
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = coords[None, :, :] - coords[start:stop, None, :]
        dt = diff[:, :, 0]
        dx = np.abs(diff[:, :, 1:])
        if p == 2.0:
            time_part = dt * dt
            space_part = (dx * dx).sum(axis=-1)
        else:
            time_part = np.abs(dt) ** p
            space_part = (dx ** p).sum(axis=-1)
        s = time_part - space_part
        scale = time_part + space_part
        causal = (dt >= 0) & (s >= -eps * scale)
        if p == 2.0:
            sep = np.sqrt(np.maximum(s, 0.0))
        else:
            sep = np.maximum(s, 0.0) ** (1.0 / p)
        tags[start:stop][causal] = FINITE
        values[start:stop] = np.where(causal, sep, 0.0)
    return tags, values


def generate_hyperbolic_lp_grid(p, dim, extent, resolution):
    """
    Hyperbolic l^p space sampled at cell centers of a regular lattice, with
    cell-volume reference weights. Axis 0 is time.
    """
    p = float(p)
    if p < 1:
        raise ParameterError("hyperbolic l^p needs p >= 1", witness=p)
    extent, resolution, spacing = _axes(dim, extent, resolution)
    coords = _lattice(extent, resolution, spacing)
    tags, values = lp_separation(coords, p)
    weights = np.full(coords.shape[0], float(np.prod(spacing)))
    family = 'minkowski' if p == 2.0 else 'hyperbolic_lp'
    grid = GridInfo(family, extent[:, 0], spacing, resolution, p=p)
    log.debug("generated %s grid %s with %d points", family, resolution, coords.shape[0])
    return DiscreteSpacetime(tags, values, weights, coords=coords, grid=grid)


def generate_minkowski_grid(dim, extent, resolution):
    """Minkowski space R^{1,dim-1}: l(x,y) = sqrt(dt^2 - |dx|^2) when dt >= |dx|."""
    return generate_hyperbolic_lp_grid(2.0, dim, extent, resolution)


def generate(stanza):
    """Build a spacetime from a generator stanza (dict)."""
    family = stanza.get('family', 'minkowski')
    dim = stanza.get('dim', 2)
    extent = stanza.get('extent', [[0.0, 1.0]] * int(dim))
    resolution = stanza.get('resolution', 4)
    if family == 'minkowski':
        return generate_minkowski_grid(dim, extent, resolution)
    if family == 'hyperbolic_lp':
        return generate_hyperbolic_lp_grid(stanza.get('p', 2.0), dim, extent, resolution)
    raise ParameterError("unknown generator family", witness=family)
