# Helpers shared by every module: extended-real arithmetic under the
# conventions (+inf)-(+inf) = +inf, (-inf)-(-inf) = +inf, +-inf + z = +-inf,
# 0*(+-inf) = 0; CSV emission; numerical differentiation; the z3 wrapper and
# the run timeout.

import csv
import errno
import math
import os
import signal

import numpy as np
from z3 import Z3Exception, unknown

from lorentzlab import global_params
from lorentzlab.errors import DomainError, ParameterError, TimeoutError

NEG = -1
FINITE = 0
POS = 1


class ExtendedReal(object):
    """A value in [-inf, +inf] stored as (tag, value).

    Infinite values carry tag NEG or POS and value 0.0, so no IEEE infinity
    ever enters an arithmetic expression.
    """
    __slots__ = ('tag', 'value')

    def __init__(self, value=0.0, tag=FINITE):
        if isinstance(value, ExtendedReal):
            tag, value = value.tag, value.value
        if tag == FINITE:
            value = float(value)
            if math.isnan(value):
                raise DomainError("NaN is not an extended real")
            if math.isinf(value):
                tag = POS if value > 0 else NEG
                value = 0.0
        elif tag in (NEG, POS):
            value = 0.0
        else:
            raise ValueError("unknown tag %r" % (tag,))
        self.tag = tag
        self.value = value

    def is_finite(self):
        return self.tag == FINITE

    def is_neg_inf(self):
        return self.tag == NEG

    def is_pos_inf(self):
        return self.tag == POS

    def _key(self):
        return (self.tag, self.value)

    def __float__(self):
        if self.tag == NEG:
            return -math.inf
        if self.tag == POS:
            return math.inf
        return self.value

    def __eq__(self, other):
        try:
            other = extended(other)
        except (TypeError, ValueError, DomainError):
            return NotImplemented
        return self._key() == other._key()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other):
        return self._key() < extended(other)._key()

    def __le__(self, other):
        return self._key() <= extended(other)._key()

    def __gt__(self, other):
        return self._key() > extended(other)._key()

    def __ge__(self, other):
        return self._key() >= extended(other)._key()

    def __add__(self, other):
        return ext_add(self, other)

    def __radd__(self, other):
        return ext_add(other, self)

    def __sub__(self, other):
        return ext_sub(self, other)

    def __rsub__(self, other):
        return ext_sub(other, self)

    def __neg__(self):
        return ExtendedReal(-self.value, -self.tag)

    def __mul__(self, other):
        return ext_mul(self, other)

    __rmul__ = __mul__

    def __repr__(self):
        return 'ExtendedReal(%s)' % format_value(self)

    def __str__(self):
        return format_value(self)


class ExtendedTime(ExtendedReal):
    """Codomain of the time separation: {-inf} U [0, +inf]."""
    __slots__ = ()

    def __init__(self, value=0.0, tag=FINITE):
        ExtendedReal.__init__(self, value, tag)
        if self.tag == FINITE and self.value < 0:
            raise DomainError("time separation can't be a negative number: %r" % self.value)

    def __repr__(self):
        return 'ExtendedTime(%s)' % format_value(self)


NEG_INF = ExtendedTime(tag=NEG)
POS_INF = ExtendedTime(tag=POS)
ZERO = ExtendedTime(0.0)


def extended(x):
    if isinstance(x, ExtendedReal):
        return x
    return ExtendedReal(x)


def ext_add(a, b):
    """+-inf + z = +-inf for every z, the first infinite operand wins."""
    a, b = extended(a), extended(b)
    if a.tag != FINITE:
        return ExtendedReal(tag=a.tag)
    if b.tag != FINITE:
        return ExtendedReal(tag=b.tag)
    return ExtendedReal(a.value + b.value)


def ext_sub(a, b):
    a, b = extended(a), extended(b)
    if a.tag != FINITE and a.tag == b.tag:
        return ExtendedReal(tag=POS)
    if a.tag != FINITE:
        return ExtendedReal(tag=a.tag)
    if b.tag != FINITE:
        return ExtendedReal(tag=-b.tag)
    return ExtendedReal(a.value - b.value)


def ext_mul(a, b):
    """Product with 0 * (+-inf) = 0."""
    a, b = extended(a), extended(b)
    if a.tag == FINITE and b.tag == FINITE:
        return ExtendedReal(a.value * b.value)
    if (a.tag == FINITE and a.value == 0.0) or (b.tag == FINITE and b.value == 0.0):
        return ExtendedReal(0.0)
    sign = _sign(a) * _sign(b)
    return ExtendedReal(tag=POS if sign > 0 else NEG)


def _sign(x):
    if x.tag != FINITE:
        return x.tag
    return 1 if x.value > 0 else -1


def ext_power(x, q):
    """x**q for x in [0, +inf] with 0**q = +inf when q < 0."""
    x = extended(x)
    if x.tag == NEG or (x.tag == FINITE and x.value < 0):
        raise DomainError("power of a negative extended real: %s" % x)
    if q == 0:
        raise ParameterError("exponent q must be nonzero")
    if x.tag == POS:
        return ExtendedReal(tag=POS) if q > 0 else ExtendedReal(0.0)
    if x.value == 0.0:
        return ExtendedReal(0.0) if q > 0 else ExtendedReal(tag=POS)
    return ExtendedReal(x.value ** q)


def ext_scale(x, c):
    """Multiply by a finite real c (including c < 0)."""
    return ext_mul(x, ExtendedReal(float(c)))


def lq_cost(ell, q):
    """The transport cost ell**q/q, -inf off the causal set {ell >= 0}."""
    ell = extended(ell)
    if ell.tag == NEG:
        return ExtendedReal(tag=NEG)
    return ext_scale(ext_power(ell, q), 1.0 / q)


def check_transport_exponent(q):
    """Dual exponents: q != 0, q < 1. Returns p with 1/p + 1/q = 1."""
    try:
        q = float(q)
    except (TypeError, ValueError):
        raise ParameterError("exponent %r is not a number" % (q,))
    if q == 0 or q >= 1 or math.isnan(q):
        raise ParameterError("transport exponent must satisfy 0 != q < 1, got %r" % q)
    return q / (q - 1.0)


# ---------------------------------------------------------------------------
# Array kernels. Tags are int8 arrays, values are float64 arrays that hold 0.0
# wherever the tag is infinite.
# ---------------------------------------------------------------------------

def split_extended(arr):
    """Float array with possible +-inf -> (tags, values)."""
    arr = np.asarray(arr, dtype=float)
    if np.isnan(arr).any():
        raise DomainError("NaN in extended-real array")
    tags = np.zeros(arr.shape, dtype=np.int8)
    tags[arr == np.inf] = POS
    tags[arr == -np.inf] = NEG
    values = np.where(tags == FINITE, arr, 0.0)
    return tags, values


def join_extended(tags, values):
    """(tags, values) -> float array with +-inf. Only for comparisons and output."""
    out = np.array(values, dtype=float, copy=True)
    out[tags == POS] = np.inf
    out[tags == NEG] = -np.inf
    return out


def ext_add_arrays(ta, va, tb, vb):
    ta, tb = np.broadcast_arrays(ta, tb)
    va, vb = np.broadcast_arrays(va, vb)
    tags = np.where(ta != FINITE, ta, tb).astype(np.int8)
    values = np.where(tags == FINITE, va + vb, 0.0)
    return tags, values


def ext_sub_arrays(ta, va, tb, vb):
    ta, tb = np.broadcast_arrays(ta, tb)
    va, vb = np.broadcast_arrays(va, vb)
    same_inf = (ta != FINITE) & (ta == tb)
    tags = np.select(
        [same_inf, ta != FINITE, tb != FINITE],
        [np.int8(POS), ta, -tb],
        default=np.int8(FINITE)).astype(np.int8)
    values = np.where(tags == FINITE, va - vb, 0.0)
    return tags, values


def ext_power_arrays(tags, values, q):
    """Elementwise power on entries with tag >= 0. NEG entries stay NEG."""
    if q == 0:
        raise ParameterError("exponent q must be nonzero")
    tags = np.asarray(tags, dtype=np.int8)
    values = np.asarray(values, dtype=float)
    out_tags = tags.copy()
    zero = (tags == FINITE) & (values == 0.0)
    pos = (tags == FINITE) & (values > 0.0)
    out_values = np.zeros(values.shape)
    out_values[pos] = values[pos] ** q
    if q > 0:
        out_tags[tags == POS] = POS
    else:
        out_tags[tags == POS] = FINITE
        out_tags[zero] = POS
    return out_tags, out_values


def lq_cost_arrays(tags, values, q):
    """Elementwise ell**q/q with -inf off the causal set."""
    ptags, pvalues = ext_power_arrays(tags, values, q)
    out_tags = ptags.copy()
    if q < 0:
        out_tags[ptags == POS] = NEG
    out_tags[np.asarray(tags) == NEG] = NEG
    out_values = np.where(out_tags == FINITE, pvalues / q, 0.0)
    return out_tags, out_values


def ext_sum(tags, values):
    """Sum of an extended array; the first infinite entry (in order) wins."""
    tags = np.ravel(tags)
    inf = np.flatnonzero(tags != FINITE)
    if inf.size:
        return ExtendedReal(tag=int(tags[inf[0]]))
    return ExtendedReal(float(np.sum(values)))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def format_value(x):
    """17 significant digits, 'inf'/'-inf' for infinities."""
    if x is None:
        return ''
    if isinstance(x, bool) or isinstance(x, np.bool_):
        return 'true' if x else 'false'
    if isinstance(x, ExtendedReal):
        if x.tag == POS:
            return 'inf'
        if x.tag == NEG:
            return '-inf'
        x = x.value
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return 'inf' if x > 0 else '-inf'
        if math.isnan(x):
            return 'nan'
        return '%.17g' % x
    return str(x)


def write_csv(path, header, rows):
    """Comma separated, '.' decimal, header row, LF line endings."""
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def to_jsonable(x):
    """Recursively convert numpy and extended values for json.dumps."""
    if isinstance(x, dict):
        return dict((str(k), to_jsonable(v)) for k, v in x.items())
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (ExtendedReal, float, np.floating)):
        value = float(x)
        if math.isinf(value) or math.isnan(value):
            return format_value(value)
        return value
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


# ---------------------------------------------------------------------------
# Numerics
# ---------------------------------------------------------------------------

def make_rng(seed=None):
    return np.random.default_rng(global_params.SEED if seed is None else seed)


def ridders_derivative(func, x, h=0.1):
    """
    Derivative of a scalar function by Ridders' polynomial extrapolation.

    :param func: callable of one float.
    :param x: evaluation point.
    :param h: initial step; need not be small.
    :return: (derivative, error estimate)
    """
    con = 1.4
    con2 = con * con
    ntab = 10
    safe = 2.0
    if h == 0.0:
        raise ParameterError('h must be nonzero in ridders_derivative')
    a = np.zeros((ntab, ntab))
    hh = h
    a[0, 0] = (func(x + hh) - func(x - hh)) / (2.0 * hh)
    err = math.inf
    result = a[0, 0]
    for i in range(1, ntab):
        hh /= con
        a[0, i] = (func(x + hh) - func(x - hh)) / (2.0 * hh)
        fac = con2
        for j in range(1, i + 1):
            a[j, i] = (a[j - 1, i] * fac - a[j - 1, i - 1]) / (fac - 1.0)
            fac *= con2
            errt = max(abs(a[j, i] - a[j - 1, i]), abs(a[j, i] - a[j - 1, i - 1]))
            if errt <= err:
                err = errt
                result = a[j, i]
        if abs(a[i, i] - a[i - 1, i - 1]) >= safe * err:
            break
    return result, err


def richardson_derivative(func, x, h=1e-2, levels=3, one_sided=True):
    """
    Richardson-extrapolated difference quotient.

    With one_sided=True the base quotient is the backward difference
    (f(x) - f(x - h)) / h, whose error expands in powers of h; otherwise the
    central difference is used and the expansion is in powers of h**2.
    """
    base = 2.0 if one_sided else 4.0
    table = []
    for i in range(levels):
        hh = h / 2 ** i
        if one_sided:
            d = (func(x) - func(x - hh)) / hh
        else:
            d = (func(x + hh) - func(x - hh)) / (2.0 * hh)
        row = [d]
        for j in range(1, i + 1):
            factor = base ** j
            row.append((factor * row[j - 1] - table[i - 1][j - 1]) / (factor - 1.0))
        table.append(row)
    return table[-1][-1]


# ---------------------------------------------------------------------------
# z3 and process helpers
# ---------------------------------------------------------------------------

def check_sat(solver, pop_if_exception=True):
    """
    Run solver.check() and refuse an 'unknown' answer.

    :param solver: z3 Solver or Optimize object.
    :param pop_if_exception: pop the solver scope when the check raises.
    :return: z3 check result (sat or unsat).
    """
    try:
        ret = solver.check()
        if ret == unknown:
            raise Z3Exception(solver.reason_unknown())
    except Exception as e:
        if pop_if_exception:
            solver.pop()
        raise e
    return ret


class Timeout(object):
    """Timeout context manager using the ALARM signal. sec <= 0 disables it."""

    def __init__(self, sec=10, error_message=os.strerror(errno.ETIME)):
        self.sec = int(sec)
        self.error_message = error_message

    def __enter__(self):
        if self.sec > 0:
            signal.signal(signal.SIGALRM, self._handle_timeout)
            signal.alarm(self.sec)

    def __exit__(self, *args):
        if self.sec > 0:
            signal.alarm(0)

    def _handle_timeout(self, signum, frame):
        raise TimeoutError(self.error_message)
