"""Exception hierarchy shared by the library and the command line."""


class WitnessError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(WitnessError, ValueError):
    """Malformed input: bad keys, values out of range, conflicting targets."""


class IncompleteFamilyError(SpecError):
    """A complete tail family was required but some coefficients are missing."""

    def __init__(self, missing, total):
        self.missing = list(missing)
        head = ", ".join(k.render() for k in self.missing[:5])
        super().__init__(
            f"tail family is missing {len(self.missing)} of {total} coefficients; "
            f"first missing: {head}")


class InadmissibleError(WitnessError):
    """A weight system cannot be realized at the requested threshold."""


class SolverError(WitnessError):
    """The LP backend gave up (iteration cap or loss of accuracy)."""
