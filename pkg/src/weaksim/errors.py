"""Exception hierarchy for the weak measurement toolkit"""

from typing import Optional


class WeakSimError(Exception):
    """Root of every error raised by the toolkit"""


class DimensionError(WeakSimError, ValueError):
    """Operands live in Hilbert spaces of different dimension"""


class NotHermitianError(WeakSimError, ValueError):
    pass


class NotUnitaryError(WeakSimError, ValueError):
    pass


class NotNormalizedError(WeakSimError, ValueError):
    pass


class NotOrthogonalError(WeakSimError, ValueError):
    """Two projectors do not annihilate each other"""


class VanishingAmplitudeError(WeakSimError, ValueError):
    """Transition amplitude <f|U|in> is too small to normalize a weak value"""


class ZeroNormError(WeakSimError, ValueError):
    pass


class ZeroPostselectionError(WeakSimError, RuntimeError):
    """Postselection probability vanishes, so meter statistics are undefined"""


class TooFewAcceptedError(WeakSimError, RuntimeError):
    """Monte Carlo run accepted fewer than two trials"""

    def __init__(self, n_accepted: int, n_trials: int):
        self.n_accepted = n_accepted
        self.n_trials = n_trials
        rate = n_accepted / n_trials if n_trials else 0.0
        super().__init__(
            f"only {n_accepted} of {n_trials} trials passed postselection "
            f"(acceptance rate {rate:.3g}); need at least 2"
        )


class ScenarioDocumentError(WeakSimError, ValueError):
    """Malformed scenario document; `field` names the offending entry"""

    def __init__(self, field: str, message: str, cause: Optional[Exception] = None):
        self.field = field
        self.cause = cause
        super().__init__(f"{field}: {message}")
