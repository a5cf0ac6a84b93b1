"""Exception hierarchy.

Every error carries an ``exit_class`` from a fixed set so the command line
front end can report failures in a single machine-parsable line.
"""

EXIT_CODES = {"PARSE": 2, "ALIGN": 3, "DEGENERATE": 4, "CONFIG": 5, "IO": 6}


class TailhavenError(Exception):
    exit_class = "CONFIG"

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.exit_class]


class ParseError(TailhavenError):
    exit_class = "PARSE"


class MalformedHeader(ParseError):
    pass


class UnparsableRow(ParseError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class DuplicateDate(ParseError):
    pass


class EmptySeries(ParseError):
    pass


class AlignError(TailhavenError):
    exit_class = "ALIGN"


class NoOverlap(AlignError):
    pass


class NonPositivePrice(AlignError):
    pass


class DegenerateError(TailhavenError):
    exit_class = "DEGENERATE"


class EmptySample(DegenerateError):
    pass


class ZeroVariance(DegenerateError):
    pass


class SampleTooSmall(DegenerateError):
    pass


class SeriesTooShort(DegenerateError):
    pass


class DegenerateResample(DegenerateError):
    pass


class ConfigError(TailhavenError):
    exit_class = "CONFIG"


class InvalidDof(ConfigError):
    pass


class InvalidQuantileLevel(ConfigError):
    pass


class IOFailure(TailhavenError):
    exit_class = "IO"
