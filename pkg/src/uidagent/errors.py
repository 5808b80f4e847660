"""Exception hierarchy shared across the package."""


class UidAgentError(Exception):
    """Base class for every error raised by uidagent."""


# asset store
class UndecodableImage(UidAgentError, ValueError):
    pass


class UnknownUid(UidAgentError, KeyError):
    def __str__(self) -> str:
        return f"unknown uid: {self.args[0]!r}" if self.args else "unknown uid"


# middleware / fetching
class FetchError(UidAgentError):
    """A page or image could not be retrieved (transport or HTTP status error)."""


class SummarizerUnavailable(UidAgentError):
    pass


class SearchBackendError(UidAgentError):
    pass


# agent
class ModelError(UidAgentError):
    """The model endpoint failed or produced an unusable reply."""


# query synthesis
class NoQualifyingImage(UidAgentError):
    pass


class ExtractorRefusal(UidAgentError):
    pass


class ComposerRefusal(UidAgentError):
    pass


class NoUnexpandedNode(UidAgentError):
    pass


class JudgeUnavailable(UidAgentError):
    pass


# dataset pipeline
class DanglingUid(UidAgentError):
    pass


class EmptyDataset(UidAgentError):
    pass


# merging
class ShapeMismatch(UidAgentError, ValueError):
    pass


class NonFiniteInput(UidAgentError, ValueError):
    pass


# harness
class EmptyBenchmark(UidAgentError):
    pass
