"""Exception types shared across modules.

Each error carries an ``exit_code`` used by the command-line front end.
"""


class MagflowError(Exception):
    exit_code = 4


class NonConvergence(MagflowError):
    exit_code = 4


class ParseError(MagflowError):
    exit_code = 3

    def __init__(self, message, line=1, column=1, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        exp = ""
        if self.expected:
            exp = " (expected %s)" % ", ".join(self.expected)
        super().__init__("line %d, column %d: %s%s" % (line, column, message, exp))


class ParityViolation(MagflowError):
    exit_code = 1

    def __init__(self, worst_r, defect, parity=""):
        self.worst_r = worst_r
        self.defect = defect
        super().__init__("%s parity violated: defect %.3g at r=%.6g" % (parity, defect, worst_r))


class DomainError(MagflowError):
    exit_code = 1


class DegeneracyError(MagflowError):
    exit_code = 2


class PoleError(MagflowError):
    exit_code = 4


class OnPoleSetError(MagflowError):
    exit_code = 2


class NotGood(MagflowError):
    exit_code = 1

    def __init__(self, t, reason):
        self.t = t
        self.reason = reason
        super().__init__("curve is not good at t=%.10g: %s" % (t, reason))


class RealizabilityError(MagflowError):
    exit_code = 1

    def __init__(self, report):
        self.report = report
        failed = [v.name for v in report.verdicts if not v.passed]
        super().__init__("curve is not realizable; failed: %s" % ", ".join(failed))


class NonBottEnergy(MagflowError):
    exit_code = 2

    def __init__(self, h, abscissa, reason=""):
        self.h = h
        self.abscissa = abscissa
        super().__init__("energy h=%.10g is not regular (%s at h=%.10g)" % (h, reason or "critical abscissa", abscissa))


class AmbiguousMerge(MagflowError):
    exit_code = 2


class DegenerateSliceError(MagflowError):
    exit_code = 2


class PoleEscape(MagflowError):
    exit_code = 4

    def __init__(self, t, r):
        self.t = t
        self.r = r
        super().__init__("trajectory reached the pole guard at t=%.6g (r=%.6g)" % (t, r))


class InconclusiveFit(MagflowError):
    exit_code = 4


class EndpointSingularityError(MagflowError):
    exit_code = 2


class ValidationFailed(MagflowError):
    exit_code = 1
