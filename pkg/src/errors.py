"""
Exception hierarchy for the HOC-Tree package.

Library code raises these; only the command line turns them into exit codes.
"""

from typing import Optional


class HOCTreeError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(HOCTreeError):
    """An environment variable or configuration value could not be used."""


class DomainError(HOCTreeError):
    """A value lies outside the domain an operation is defined on."""


class DuplicateIdError(DomainError):
    """An object with the same id is already indexed."""

    def __init__(self, object_id: str):
        super().__init__(f"duplicate object id: {object_id!r}")
        self.object_id = object_id


class IngestError(HOCTreeError):
    """A dataset file could not be read or parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class IndexFileError(HOCTreeError):
    """An index file is unreadable or inconsistent."""


class BadMagicError(IndexFileError):
    pass


class VersionMismatchError(IndexFileError):
    pass


class ChecksumError(IndexFileError):
    pass


class TruncatedFileError(IndexFileError):
    pass


class InvariantViolationError(HOCTreeError):
    """A tree breaks one of its structural invariants."""


class VerificationError(HOCTreeError):
    """Index results disagree with the linear-scan oracle."""
