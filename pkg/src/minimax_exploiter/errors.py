"""Exception hierarchy shared across the toolkit."""


class MinimaxExploiterError(Exception):
    """Base class for all toolkit errors."""


# -- environment contract --

class IllegalActionError(MinimaxExploiterError):
    """An action outside the legal mask was submitted; signals a caller bug."""


class MissingActionError(MinimaxExploiterError):
    """A role that must act this tick was given no action."""


class NotYourTurnError(MinimaxExploiterError):
    """A role queried or acted outside its decision window."""


class IncompleteTraceError(MinimaxExploiterError):
    """An episode-level computation was requested on an unfinished trace."""


class InvalidStateError(MinimaxExploiterError):
    """A game state violates its structural invariants."""


# -- search --

class TerminalStateError(MinimaxExploiterError):
    """Search was requested on a finished position."""


# -- neural / dqn --

class DimensionMismatchError(MinimaxExploiterError):
    pass


class NonFiniteGradientError(MinimaxExploiterError):
    pass


class NonFiniteInputError(MinimaxExploiterError):
    pass


class NoLegalActionError(MinimaxExploiterError):
    pass


class BufferTooSmallError(MinimaxExploiterError):
    """Replay buffer has not reached the learn-start threshold."""


class FormatVersionMismatchError(MinimaxExploiterError):
    """Checkpoint blob is truncated or carries an unknown format version."""


class FrozenModelError(MinimaxExploiterError):
    """Training was attempted on a frozen (inference-only) model."""


# -- reward shaping --

class EpisodeMismatchError(MinimaxExploiterError):
    pass


class UnsortedTraceError(MinimaxExploiterError):
    pass


class MissingPairingError(MinimaxExploiterError):
    pass


# -- league --

class EmptyPoolError(MinimaxExploiterError):
    pass


class UnknownOpponentError(MinimaxExploiterError):
    pass


class NotReadyError(MinimaxExploiterError):
    """A convergence decision was requested before the window filled."""


class InconsistentEventError(MinimaxExploiterError):
    pass


# -- harness --

class ConfigInvalidError(MinimaxExploiterError):
    pass


class EnvironmentUnknownError(MinimaxExploiterError):
    pass


class IncompatibleCheckpointsError(MinimaxExploiterError):
    pass


class MisalignedGridsError(MinimaxExploiterError):
    """Metric files use different evaluation step grids."""
