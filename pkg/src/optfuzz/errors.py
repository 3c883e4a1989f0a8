"""Exception hierarchy shared across the fuzzer."""


class OptFuzzError(Exception):
    """Base class for all errors raised by optfuzz."""


class ConfigError(OptFuzzError):
    """Invalid configuration or command-line usage."""


# --- SUT / sandbox ---------------------------------------------------------


class SandboxFailure(OptFuzzError):
    """The execution harness itself failed (never a SUT bug)."""


# --- collector ---------------------------------------------------------------


class UnreadableRoot(OptFuzzError):
    pass


class MalformedSource(OptFuzzError):
    pass


class NoEnclosingFunction(OptFuzzError):
    def __init__(self, offset: int, line: int):
        super().__init__(f"no enclosing function at offset {offset} (line {line})")
        self.offset = offset
        self.line = line


# --- prompts -------------------------------------------------------------------


class ContextOverflow(OptFuzzError):
    """The prompt does not fit the context budget even after truncation."""


# --- model gateway -------------------------------------------------------------


class BackendUnavailable(OptFuzzError):
    pass


class ReplayMiss(OptFuzzError):
    pass


# --- bandit --------------------------------------------------------------------


class EmptyPool(OptFuzzError):
    pass


class UnknownArm(OptFuzzError, KeyError):
    pass


class DuplicateArm(OptFuzzError, ValueError):
    pass


# --- campaign ------------------------------------------------------------------


class CorruptCampaign(OptFuzzError):
    pass


class CampaignLocked(OptFuzzError):
    pass
