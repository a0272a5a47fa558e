"""Exception hierarchy shared by every module of the package."""


class EcsBellError(Exception):
    """Base class for all package errors."""


class NonConvergence(EcsBellError):
    """Adaptive quadrature ran out of panels before reaching the tolerance."""


class NoSignChange(EcsBellError):
    """A root bracket does not straddle a sign change."""


class MultipleCrossings(EcsBellError):
    """The pre-scan found more than one sign change on a threshold bracket."""


class InvalidGain(EcsBellError, ValueError):
    pass


class InvalidAmplitudes(EcsBellError, ValueError):
    pass


class ZeroAmplitude(EcsBellError, ValueError):
    pass


class InvalidScenario(EcsBellError, ValueError):
    pass


class UnsupportedClosedForm(EcsBellError):
    """No printed closed form covers the requested scenario."""


class UnsupportedMethod(EcsBellError):
    pass


class TruncationTooSmall(EcsBellError):
    """Fock-space cutoff too small for the requested amplitude."""


class ZeroNorm(EcsBellError):
    pass


class UnknownFigure(EcsBellError, ValueError):
    pass
