# Exact rational optimum of a small transportation problem with z3, used to
# certify the floating-point network simplex on tiny supports.

import logging
from fractions import Fraction

from z3 import Optimize, Real, RealVal, Sum, sat

from lorentzlab import global_params
from lorentzlab.errors import NumericalError, ParameterError
from lorentzlab.utils import check_sat
from lorentzlab.vargenerator import Generator

log = logging.getLogger(__name__)


def _exact(x):
    return RealVal(str(Fraction(float(x))))


def _to_float(value):
    frac = value.as_fraction()
    return float(frac.numerator) / float(frac.denominator)


def exact_transport_value(supply, demand, tails, heads, weights, maximize=True):
    """
    Optimum of sum weights[a] * pi[a] over couplings supported on the arcs.

    :return: the optimal value as a float, or None when no coupling exists.
    """
    if max(len(supply), len(demand)) > global_params.EXACT_ORACLE_LIMIT:
        raise ParameterError("exact oracle is limited to %d points per side"
                             % global_params.EXACT_ORACLE_LIMIT)
    gen = Generator()
    opt = Optimize()
    variables = []
    for i, j in zip(tails, heads):
        v = Real(gen.gen_coupling_var(int(i), int(j)))
        opt.add(v >= 0)
        variables.append(v)
    for i, a in enumerate(supply):
        arcs = [v for v, t in zip(variables, tails) if t == i]
        opt.add((Sum(arcs) if arcs else RealVal(0)) == _exact(a))
    # column constraints are implied up to the supply/demand rounding gap
    total = Fraction(sum(Fraction(float(a)) for a in supply))
    demand_total = Fraction(sum(Fraction(float(b)) for b in demand))
    for j, b in enumerate(demand):
        arcs = [v for v, h in zip(variables, heads) if h == j]
        scaled = Fraction(float(b)) * total / demand_total if demand_total else Fraction(0)
        opt.add((Sum(arcs) if arcs else RealVal(0)) == RealVal(str(scaled)))
    objective = Real(gen.gen_objective_var())
    opt.add(objective == Sum([_exact(w) * v for w, v in zip(weights, variables)])
            if variables else objective == 0)
    if maximize:
        opt.maximize(objective)
    else:
        opt.minimize(objective)
    opt.push()
    result = check_sat(opt)
    if result != sat:
        log.debug("exact oracle: no coupling on %d arcs", len(variables))
        return None
    value = opt.model().eval(objective)
    try:
        return _to_float(value)
    except Exception as e:
        raise NumericalError("exact oracle returned a non-rational optimum: %s" % e)
