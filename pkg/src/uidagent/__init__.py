"""Multimodal deep-search agent whose images live in a UID-addressed asset store."""

from __future__ import annotations

__version__ = "0.1.0"

from .agent import ContextPolicy, Message, ScriptedModel, Trajectory, apply_eviction, run_task
from .assets import AssetStore, VisualAsset
from .middleware import intercept, render
from .tools import ToolCall, ToolRegistry, ToolResult, dispatch

__all__ = [
    "AssetStore",
    "ContextPolicy",
    "Message",
    "ScriptedModel",
    "ToolCall",
    "ToolRegistry",
    "ToolResult",
    "Trajectory",
    "VisualAsset",
    "__version__",
    "apply_eviction",
    "dispatch",
    "intercept",
    "render",
    "run_task",
]
