"""Shared exception types."""


class GGError(Exception):
    """Base class for all toolkit errors."""


class CompileFailed(GGError):
    def __init__(self, message: str, log: str = ""):
        super().__init__(message)
        self.log = log


class ToolchainUnavailable(GGError):
    pass


class InvalidPairing(GGError):
    pass


class ManifestCorrupt(GGError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


class VocabLoadError(GGError):
    pass


class IsaEmpty(GGError):
    pass


class TemplateError(GGError):
    pass


class BackendUnavailable(GGError):
    pass


class ProtocolError(GGError):
    pass


class ContextOverflow(GGError):
    pass


class CoverageUnavailable(GGError):
    pass


class EmptyHistogram(GGError):
    pass


class BenchUnreliable(GGError):
    pass


class MutationInapplicable(GGError):
    pass


class ConfigError(GGError):
    pass


class LockHeld(GGError):
    pass
