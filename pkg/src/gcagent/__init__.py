"""Group-chat agent service: registry, dialogue orchestration, evaluation, analytics."""

from .config import Config
from .engine import EngineConfig, EngineRequest, EngineResponse, MockEngine, RemoteEngine, build_prompt
from .evaluation import EvalSample, Verdict, aggregate_direct, aggregate_pairwise
from .manager import ChatMessage, DialogueContext, GroupSession, parse_mentions
from .registry import AgentProfile, AgentRegistry, Category, VoiceStyle
from .service import ChatService
from .validator import RetryPolicy, ValidationReport, ValidationRule, validate

__version__ = "0.1.0"

__all__ = [
    "AgentProfile",
    "AgentRegistry",
    "Category",
    "ChatMessage",
    "ChatService",
    "Config",
    "DialogueContext",
    "EngineConfig",
    "EngineRequest",
    "EngineResponse",
    "EvalSample",
    "GroupSession",
    "MockEngine",
    "RemoteEngine",
    "RetryPolicy",
    "ValidationReport",
    "ValidationRule",
    "Verdict",
    "VoiceStyle",
    "aggregate_direct",
    "aggregate_pairwise",
    "build_prompt",
    "parse_mentions",
    "validate",
    "__version__",
]
