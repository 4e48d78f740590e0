"""Bot runtime: orchestrator routing plus single-turn task agents."""

from botender.agents.models import (
    BotReply,
    PromptAssets,
    Task,
    TaskSet,
    default_task,
)
from botender.agents.runtime import (
    Exchange,
    execute_task,
    handle_message,
    is_no_reply,
    render_routing_prompt,
    render_task_prompt,
    route_event,
)

__all__ = [
    "BotReply",
    "Exchange",
    "PromptAssets",
    "Task",
    "TaskSet",
    "default_task",
    "execute_task",
    "handle_message",
    "is_no_reply",
    "render_routing_prompt",
    "render_task_prompt",
    "route_event",
]
