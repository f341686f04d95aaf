from .backends import BackendError, ConfigurationError, HttpBackend, LlmConfig, MockBackend
from .operator import LlmOperator, OperatorTranscript, generate
from .prompt import ParseFailure, PromptContext, build_prompt, parse_response

__all__ = [
    "BackendError",
    "ConfigurationError",
    "HttpBackend",
    "LlmConfig",
    "LlmOperator",
    "MockBackend",
    "OperatorTranscript",
    "ParseFailure",
    "PromptContext",
    "build_prompt",
    "generate",
    "parse_response",
]
