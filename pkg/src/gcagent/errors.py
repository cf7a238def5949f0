"""Exception hierarchy shared across the service, evaluation, and analytics layers."""

from __future__ import annotations


class GcagentError(Exception):
    """Base class for all errors raised by this package."""


# --- agent registry -------------------------------------------------------

class InvalidName(GcagentError):
    pass


class InvalidPersona(GcagentError):
    pass


class UnknownVoiceStyle(GcagentError):
    pass


class UnknownAgent(GcagentError):
    pass


# --- dialogue manager -----------------------------------------------------

class UnknownGroup(GcagentError):
    pass


class UnknownSender(GcagentError):
    pass


class InvalidBody(GcagentError):
    pass


class UnknownReplyTarget(GcagentError):
    pass


class UnknownMessage(GcagentError):
    pass


class CorruptLog(GcagentError):
    pass


# --- event store / server -------------------------------------------------

class SequenceViolation(GcagentError):
    pass


class StorageFailure(GcagentError):
    pass


class BindFailure(GcagentError):
    pass


# --- llm engine -----------------------------------------------------------

class EngineError(GcagentError):
    """Base for completion-backend failures."""


class EngineTimeout(EngineError):
    pass


class TransportError(EngineError):
    pass


class RemoteError(EngineError):
    def __init__(self, status: int, message: str):
        super().__init__(f"remote backend returned {status}: {message}")
        self.status = status
        self.message = message


class MissingCredential(EngineError):
    pass


# --- validator ------------------------------------------------------------

class ExhaustedRetries(GcagentError):
    pass


# --- plugins ---------------------------------------------------------------

class UnsupportedPlugin(GcagentError):
    pass


class AdapterFailure(GcagentError):
    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class MalformedBlob(GcagentError):
    pass


# --- evaluation -------------------------------------------------------------

class JudgeTransportError(GcagentError):
    pass


class UnparseableJudgeOutput(GcagentError):
    pass


class ParseError(GcagentError):
    """Base for judge-output parse failures (retried before giving up)."""


class NoMarker(ParseError):
    pass


class OutOfRange(ParseError):
    pass


class InvalidVerdict(ParseError):
    pass


class EmptyInput(GcagentError):
    pass


# --- analytics --------------------------------------------------------------

class ZeroBaseline(GcagentError):
    pass


class EmptyCohort(GcagentError):
    pass
