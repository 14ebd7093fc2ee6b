"""Exception types shared across the toolkit."""


class OutlineKitError(Exception):
    """Base class for all library errors."""


class EmptyOutline(OutlineKitError):
    """No heading lines were found in the input text."""


class MalformedHeading(OutlineKitError):
    """A heading line had an empty title."""


class BothEmpty(OutlineKitError):
    """Both trees have zero nodes, so normalized distance is undefined."""


class GroupTooSmall(OutlineKitError):
    """A rollout group needs at least two candidates."""


class LengthMismatch(OutlineKitError):
    """Logprob sequences within a candidate differ in length."""


class NonFiniteInput(OutlineKitError):
    """A numeric input was NaN or infinite."""


class EmptySequence(OutlineKitError):
    """A token sequence was empty."""


class EmbedderUnavailable(OutlineKitError):
    """No embedding provider is available for similarity search."""


class NoScoreFound(OutlineKitError):
    """A judge response contained no parseable score."""


class JudgeUnavailable(OutlineKitError):
    """The judge endpoint failed, or every item in a corpus failed."""


class ConfigError(OutlineKitError):
    """Invalid or unknown configuration values."""
