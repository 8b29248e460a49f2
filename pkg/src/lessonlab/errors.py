"""Exception taxonomy shared across the package.

Service code maps these onto HTTP status codes; the CLI maps them onto
exit code 1 with the message on stderr.
"""


class LessonlabError(Exception):
    """Base class for all domain errors."""


class FormatError(LessonlabError):
    """Input audio container is malformed."""


class UnsupportedFormatError(LessonlabError):
    """Input audio uses a codec or layout this package does not parse."""


class EmptyInputError(LessonlabError):
    """Input audio contains no samples."""


class StemMismatchError(LessonlabError):
    """Voice and instrument stems disagree in duration beyond tolerance."""


class SeparatorConfigError(LessonlabError):
    """External separator command template is unusable."""


class SeparatorFailedError(LessonlabError):
    """External separator exited with a nonzero status."""


class SeparatorOutputMissingError(LessonlabError):
    """External separator finished but expected stem files are absent."""


class DegenerateProfileError(LessonlabError):
    """Energy profile has no spread; adaptive thresholding is impossible."""


class WrongTrackError(LessonlabError):
    """Operation requires a region on the other track."""


class EmptyTargetError(LessonlabError):
    """Scoring requires a nonempty reference note sequence."""


class EmptyQueryError(LessonlabError):
    """Region query requires a nonempty query note sequence."""


class RegionNotFoundError(LessonlabError):
    """Referenced region id is unknown to the session or lesson."""


class CorruptSessionError(LessonlabError):
    """Persisted session document cannot be parsed."""


class RevisionConflictError(LessonlabError):
    """Optimistic-concurrency check failed while saving session state."""
