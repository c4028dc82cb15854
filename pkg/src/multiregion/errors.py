"""Exception types raised by the platform components."""


class StreamError(Exception):
    """Base class for every error raised by this package."""


class InvalidPartitionCount(StreamError, ValueError):
    pass


class TopicExists(StreamError):
    pass


class UnknownTopic(StreamError, KeyError):
    pass


class OffsetExpired(StreamError):
    """The requested offset is below the low watermark (lost to retention)."""

    def __init__(self, tp, offset, low):
        super().__init__(f"{tp}: offset {offset} below low watermark {low}")
        self.tp = tp
        self.offset = offset
        self.low = low


class InvalidCommit(StreamError):
    pass


class CommitRegression(StreamError):
    pass


class ClusterUnavailable(StreamError):
    pass


class FederationFull(StreamError):
    pass


class UnknownCluster(StreamError, KeyError):
    pass


class MigrationInProgress(StreamError):
    pass


class DuplicateRegistration(StreamError):
    pass


class ProtocolViolation(StreamError):
    pass


class NoWorkers(StreamError):
    pass


class UnknownRoute(StreamError, KeyError):
    pass


class UnknownConsumer(StreamError, KeyError):
    pass


class AlreadyInRegion(StreamError):
    pass


class RegionUnavailable(StreamError):
    pass


class AlreadySealed(StreamError):
    pass


class DigestUnavailable(StreamError):
    pass


class ConfigError(StreamError):
    """Invalid scenario configuration; ``path`` points at the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message
