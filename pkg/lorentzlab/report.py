from lorentzlab import global_params
from lorentzlab.utils import format_value, to_jsonable


class Check:
    def __init__(self, name, witnesses=(), tol=None, count=None, note=None):
        self.name = name
        witnesses = list(witnesses)
        self.count = len(witnesses) if count is None else count
        self.witnesses = witnesses[:global_params.MAX_WITNESSES]
        self.tol = tol
        self.note = note
        self.warnings = self._warnings()

    def passed(self):
        return self.count == 0

    def get_warnings(self):
        return self.warnings

    def _warnings(self):
        return [self._warning_content(w) for w in self.witnesses]

    def _warning_content(self, witness):
        if isinstance(witness, (tuple, list)):
            witness = ', '.join(format_value(w) for w in witness)
        return '%s violated at (%s)' % (self.name, witness)

    def to_dict(self):
        d = {'name': self.name, 'passed': self.passed(), 'violations': self.count}
        if self.tol is not None:
            d['tol'] = self.tol
        if self.note:
            d['note'] = self.note
        if self.witnesses:
            d['witnesses'] = to_jsonable(self.witnesses[:10])
        return d

    def __str__(self):
        s = ''
        for warning in self.warnings:
            s += '\n' + warning
        if self.count > len(self.witnesses):
            s += '\n... %d more' % (self.count - len(self.witnesses))
        return s.lstrip('\n')


class Report:
    name = 'report'

    def __init__(self, tolerances=None):
        self.checks = []
        self.values = {}
        self.tables = {}
        self.tolerances = dict(tolerances or {})

    def add_check(self, name, witnesses=(), tol=None, count=None, note=None):
        check = Check(name, witnesses, tol=tol, count=count, note=note)
        self.checks.append(check)
        if tol is not None:
            self.tolerances.setdefault(name, tol)
        return check

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def passed(self):
        return all(c.passed() for c in self.checks)

    def failed_checks(self):
        return [c for c in self.checks if not c.passed()]

    def summary(self):
        return to_jsonable({
            'report': self.name,
            'passed': self.passed(),
            'checks': [c.to_dict() for c in self.checks],
            'values': self.values,
            'tolerances': self.tolerances,
        })

    def __str__(self):
        s = '%s: %s' % (self.name, 'PASS' if self.passed() else 'FAIL')
        for c in self.failed_checks():
            s += '\n' + str(c)
        return s


class ValidationReport(Report):
    name = 'Spacetime axioms'

    def is_valid(self):
        return self.passed()

    def triangle(self):
        return self.check('reverse triangle').witnesses

    def diagonal(self):
        return self.check('diagonal nonnegativity').witnesses

    def antisymmetry(self):
        return self.check('antisymmetry').witnesses


class GeodesyReport(Report):
    name = 'Geodesic characterizations'

    def __init__(self, tolerances=None):
        Report.__init__(self, tolerances)
        self.classification = None
        self.conditions = {}
        self.inconsistent = False


class CyclicalMonotonicityReport(Report):
    name = 'Cyclical monotonicity'


class DualityReport(Report):
    name = 'Kantorovich duality'

    def __init__(self, tolerances=None):
        Report.__init__(self, tolerances)
        self.gap = None


class TMCPReport(Report):
    name = 'Timelike measure contraction'

    def __init__(self, tolerances=None):
        Report.__init__(self, tolerances)
        self.rows = []


class GoodGeodesicReport(Report):
    name = 'Good geodesic'

    def __init__(self, tolerances=None):
        Report.__init__(self, tolerances)
        self.rows = []


class PerturbationReport(Report):
    name = 'Perturbation cone'


class WeakFormReport(Report):
    name = "Weak-form d'Alembert comparison"

    def __init__(self, tolerances=None):
        Report.__init__(self, tolerances)
        self.refinement_table = []

    @property
    def lhs(self):
        return self.refinement_table[-1]['lhs']

    @property
    def rhs(self):
        return self.refinement_table[-1]['rhs']

    @property
    def defect(self):
        return self.refinement_table[-1]['defect']


class BrenierReport(Report):
    name = 'Metric Brenier identity'


class CalculusRulesReport(Report):
    name = 'Calculus rules'


class TransportReport(Report):
    name = 'Optimal transport'


class SpeedReport(Report):
    name = 'Causal speed'


class SlopeReport(Report):
    name = 'Slopes'


class McShaneReport(Report):
    name = 'McShane extension'


class NullDistanceReport(Report):
    name = 'Null distance'


class NormReport(Report):
    name = 'Hyperbolic norm'


class AcceptanceReport(Report):
    """One acceptance criterion; rows go to acceptance.csv under header."""

    def __init__(self, criterion, title, header, tolerances=None):
        Report.__init__(self, tolerances)
        self.name = 'Acceptance %d: %s' % (criterion, title)
        self.criterion = criterion
        self.header = tuple(header)
        self.rows = []
        self.values['criterion'] = criterion

    def absorb(self, report, prefix):
        """Copy the checks of a module report under a prefix."""
        for c in report.checks:
            self.add_check('%s %s' % (prefix, c.name), c.witnesses, tol=c.tol, count=c.count, note=c.note)
