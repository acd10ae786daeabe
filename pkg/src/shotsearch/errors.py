"""Exception hierarchy. Every failure surfaced by loaders, indexes, and the
service maps onto one of these so callers can branch on failure class."""


class ShotSearchError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(ShotSearchError):
    """A file does not conform to its on-disk format (bad magic, bad field,
    truncation). Carries the offending path and, for text formats, the line."""

    def __init__(self, message, path=None, line=None):
        self.path = str(path) if path is not None else None
        self.line = line
        prefix = ""
        if self.path is not None:
            prefix = self.path
            if line is not None:
                prefix += f":{line}"
            prefix += ": "
        super().__init__(prefix + message)


class ValidationFailure(ShotSearchError):
    """A shot/keyframe table violated its invariants; carries the full report."""

    def __init__(self, report):
        self.report = report
        issues = "; ".join(report.issues[:5])
        more = "" if len(report.issues) <= 5 else f" (+{len(report.issues) - 5} more)"
        super().__init__(f"{len(report.issues)} invariant violation(s): {issues}{more}")


class UnknownShotError(ShotSearchError):
    """A shot or keyframe reference does not exist in the archive."""


class UnknownLabelError(ShotSearchError):
    """A concept/person label is not present in the annotation index."""


class CodeWidthError(ShotSearchError):
    """Binary codes of different widths were combined."""


class MissingSpaceError(ShotSearchError):
    """A query requires a code space (semantic or low-level) that was not indexed."""


class ChecksumError(ShotSearchError):
    """A bundle or index snapshot does not match the data it was built from."""
