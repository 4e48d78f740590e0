"""The bot runtime: route one event to at most one task agent, then reply.

Routing and execution are pure functions of (task set snapshot, event,
gateway); per-(server, channel) ordering is the platform adapter's job.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from botender import prompts
from botender.agents.models import BotReply, Task, TaskSet
from botender.gateway.envelopes import EnvelopeKind, EnvelopeSchema, TaskIdEnvelope, TaskResponseEnvelope
from botender.gateway.provider import ChatRequest, Gateway

logger = logging.getLogger(__name__)

ROUTING_SCHEMA = EnvelopeSchema(EnvelopeKind.TASK_ID)
RESPONSE_SCHEMA = EnvelopeSchema(EnvelopeKind.TASK_RESPONSE)

NO_TRIGGER_ID = "0"


def is_no_reply(text: str) -> bool:
    """The task agent's "nothing to say" sentinel, compared leniently."""
    return text.strip().casefold() == "n/a"


def render_routing_prompt(task_set: TaskSet, channel: str, message: str) -> str:
    return prompts.render_routing_user(task_set.tasks, channel, message)


def render_task_prompt(task: Task, channel: str, message: str) -> str:
    return prompts.render_action_user(task.action, channel, message)


def route_event(task_set: TaskSet, channel: str, message: str, gateway: Gateway,
                anomalies: list[str] | None = None) -> str | None:
    """Ask the orchestrator which task (if any) the message triggers.

    Returns the triggering task's id, or None for no trigger. An id the
    model invented is treated as no trigger and recorded as an anomaly so a
    hallucination cannot crash the live bot.
    """
    if not task_set.tasks:
        # Nothing can trigger; skip the provider round-trip.
        return None
    envelope = gateway.ask(ChatRequest(
        system_prompt=prompts.ORCHESTRATOR_SYSTEM,
        user_prompt=render_routing_prompt(task_set, channel, message),
        expects=ROUTING_SCHEMA,
        max_retries=gateway.max_retries,
    ))
    assert isinstance(envelope, TaskIdEnvelope)
    task_id = envelope.task_id.strip()
    if task_id == NO_TRIGGER_ID:
        return None
    if task_set.get(task_id) is None:
        note = f"routing returned unknown task id {task_id!r}; treated as no trigger"
        logger.warning(note)
        if anomalies is not None:
            anomalies.append(note)
        return None
    return task_id


def execute_task(task: Task, channel: str, message: str, gateway: Gateway) -> str | None:
    """Run the triggered task's agent; None when it answers "n/a"."""
    envelope = gateway.ask(ChatRequest(
        system_prompt=prompts.TASK_AGENT_SYSTEM,
        user_prompt=render_task_prompt(task, channel, message),
        expects=RESPONSE_SCHEMA,
        max_retries=gateway.max_retries,
    ))
    assert isinstance(envelope, TaskResponseEnvelope)
    if is_no_reply(envelope.response):
        return None
    return envelope.response


@dataclass(frozen=True)
class Exchange:
    """Outcome of one event: which task ran (if any) and what it said.

    ``response`` None with a task set means the agent declined ("n/a");
    the routing outcome stays visible for playground and report display.
    """

    task_id: str | None
    task_name: str | None
    response: str | None
    anomalies: tuple[str, ...] = ()

    @property
    def reply(self) -> BotReply | None:
        if self.response is None or self.task_id is None or self.task_name is None:
            return None
        return BotReply(text=self.response, task_id=self.task_id, task_name=self.task_name)


def handle_message(task_set: TaskSet, channel: str, message: str,
                   gateway: Gateway) -> Exchange:
    """Route, then execute; at most one task agent is invoked per event."""
    anomalies: list[str] = []
    task_id = route_event(task_set, channel, message, gateway, anomalies=anomalies)
    if task_id is None:
        return Exchange(task_id=None, task_name=None, response=None,
                        anomalies=tuple(anomalies))
    task = task_set.get(task_id)
    assert task is not None  # route_event only returns ids present in the set
    response = execute_task(task, channel, message, gateway)
    return Exchange(task_id=task.id, task_name=task.name, response=response,
                    anomalies=tuple(anomalies))
