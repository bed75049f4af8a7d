"""Deterministic simulator for distributed graph algorithms on a known support graph."""
from .engine import ExecutionTrace, NodeContext, NodeProgram, ProtocolViolation, preprocess, run
from .graphcore import Graph, Mode, SupportedInstance, generate

__version__ = "0.1.0"

__all__ = [
    "ExecutionTrace",
    "NodeContext",
    "NodeProgram",
    "ProtocolViolation",
    "preprocess",
    "run",
    "Graph",
    "Mode",
    "SupportedInstance",
    "generate",
]
