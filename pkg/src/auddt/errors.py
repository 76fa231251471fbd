"""Exception hierarchy for the benchmarking harness.

Every error raised deliberately by this package derives from AuddtError so
callers can catch the whole family with one clause.
"""


class AuddtError(Exception):
    """Base class for all harness errors."""


# --- registry ---------------------------------------------------------------

class RegistryFormatError(AuddtError):
    """Registry file failed to parse or a descriptor violates an invariant."""


class DuplicateDatasetError(RegistryFormatError):
    """Two registry records share the same dataset id."""


class UnknownGroupError(AuddtError):
    """Group name is neither a taxonomy group nor a dataset id."""


# --- fetch ------------------------------------------------------------------

class FetchError(AuddtError):
    """Download or unpack of a dataset source failed."""


class ChecksumMismatchError(FetchError):
    """Fetched bytes do not match the declared checksum; nothing is installed."""


# --- manifest ---------------------------------------------------------------

class UnknownAdapterError(AuddtError):
    """adapter_id does not name a registered manifest adapter."""


class AdapterParseError(AuddtError):
    """A label source line could not be parsed.

    Carries the 1-based line number when one is meaningful.
    """

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class OverrideTargetError(AuddtError):
    """A label override selector matched no entry or subgroup."""


class ManifestFormatError(AuddtError):
    """Manifest file is missing required columns or has malformed rows."""


# --- audio ------------------------------------------------------------------

class DecodeError(AuddtError):
    """Audio payload is corrupt, truncated, or otherwise undecodable."""


class UnsupportedFormatError(DecodeError):
    """Audio container or codec is recognized but not supported."""


# --- scorer -----------------------------------------------------------------

class ScorerError(AuddtError):
    """Base class for scorer attachment and protocol failures."""


class ScorerStartError(ScorerError):
    """External scorer process could not be started or handshaken."""


class ScorerTimeoutError(ScorerError):
    """Scorer did not respond within the configured timeout."""


class ProtocolFormatError(ScorerError):
    """Scorer emitted a line that does not parse as a protocol message."""


class ProtocolVersionError(ScorerError):
    """Scorer speaks a different protocol version than the harness."""


class ScorerResponseError(ScorerError):
    """Scorer response does not match the request (wrong id, checksum, error)."""


class ScoreRangeError(ScorerError):
    """Scorer returned a score outside [0, 1] or a non-finite value."""


class ScorerCrashedError(ScorerError):
    """Scorer process exited mid-batch."""


# --- metrics ----------------------------------------------------------------

class OneClassError(AuddtError):
    """Metric requires both classes but only one is present."""


class EmptyInputError(AuddtError):
    """Metric requires at least one sample."""


# --- report -----------------------------------------------------------------

class EmptyGroupError(AuddtError):
    """Group has no member datasets after exclusions."""


class ReportIOError(AuddtError):
    """Report or corpus output could not be written."""


# --- orchestrator -----------------------------------------------------------

class ConfigError(AuddtError):
    """Run configuration is missing required keys or holds invalid values."""
