"""Bot runtime: golden prompt rendering, routing, execution, reply labeling."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from botender.agents.models import BotReply, PromptAssets, Task, TaskSet, default_task
from botender.agents.runtime import (
    Exchange,
    execute_task,
    handle_message,
    is_no_reply,
    render_routing_prompt,
    render_task_prompt,
    route_event,
)
from tests.conftest import ORCHESTRATOR, TASK_AGENT, make_gateway

HELLO = default_task("t-hello")
MERCH = Task(
    id="t-merch",
    name="Merch Link",
    trigger="Whenever someone asks about band merchandise.",
    action="Point them at the merch site.",
)
TASKS = TaskSet(server_id="s1", tasks=(HELLO, MERCH), version=0)


def test_routing_prompt_is_byte_stable_golden():
    rendered = render_routing_prompt(TASKS, "#botender", "hi botender")
    assert rendered == (
        "Here is a list of tasks:\n"
        "\n"
        "Task ID: t-hello\n"
        "Task Trigger: When someone greets Botender in the #botender channel.\n"
        "Task ID: t-merch\n"
        "Task Trigger: Whenever someone asks about band merchandise.\n"
        "\n"
        "User message in the #botender channel: hi botender"
    )
    # Task order in the prompt is deployment order, and rendering is pure.
    assert rendered == render_routing_prompt(TASKS, "#botender", "hi botender")


def test_task_prompt_golden_keeps_template_period():
    rendered = render_task_prompt(HELLO, "#botender", "hi botender")
    assert rendered == (
        "Action: Reply with a hello and a smiling emoji..\n"
        "User message in the #botender channel: hi botender"
    )


def test_route_no_trigger_returns_none():
    gateway = make_gateway([(ORCHESTRATOR, {"taskId": "0"})])
    assert route_event(TASKS, "#general", "nothing relevant", gateway) is None


def test_route_returns_known_task_id():
    gateway = make_gateway([(ORCHESTRATOR, {"taskId": "t-hello"})])
    assert route_event(TASKS, "#botender", "hi botender", gateway) == "t-hello"


def test_route_unknown_id_is_none_plus_anomaly():
    gateway = make_gateway([(ORCHESTRATOR, {"taskId": "ghost"})])
    anomalies: list[str] = []
    assert route_event(TASKS, "#general", "hm", gateway, anomalies=anomalies) is None
    assert len(anomalies) == 1 and "ghost" in anomalies[0]


def test_route_empty_task_set_skips_the_provider():
    gateway = make_gateway([])  # strict: any provider call would raise
    empty = TaskSet(server_id="s1", tasks=(), version=0)
    assert route_event(empty, "#general", "hello", gateway) is None


def test_execute_na_yields_none():
    gateway = make_gateway([(TASK_AGENT, {"response": "n/a"})])
    assert execute_task(HELLO, "#botender", "hi", gateway) is None


def test_execute_returns_reply_text():
    gateway = make_gateway([(TASK_AGENT, {"response": "Here is your reply."})])
    assert execute_task(HELLO, "#botender", "hi", gateway) == "Here is your reply."


def test_execute_na_detection_matches_brute_force_normalizer():
    """Trim-and-casefold equals a brute-force normalization over
    whitespace/case variants."""
    def oracle(text: str) -> bool:
        core = text
        while core and core[0] in " \t\n\r":
            core = core[1:]
        while core and core[-1] in " \t\n\r":
            core = core[:-1]
        return "".join(ch.lower() for ch in core) == "n/a"

    cases = ["n/a", "N/A", "n/A", "N/a"]
    paddings = ["", " ", "  ", "\t", "\n", " \t "]
    for core, left, right in itertools.product(cases, paddings, paddings):
        text = left + core + right
        assert is_no_reply(text) == oracle(text) == True  # noqa: E712
    for text in ["na", "n / a", "n/a!", "not applicable", "N/A okay"]:
        assert is_no_reply(text) == oracle(text) == False  # noqa: E712
    gateway = make_gateway([(TASK_AGENT, {"response": "  N/A "})])
    assert execute_task(HELLO, "#botender", "hi", gateway) is None


def test_handle_message_produces_labeled_reply():
    gateway = make_gateway([
        (ORCHESTRATOR, {"taskId": "t-hello"}),
        (TASK_AGENT, {"response": "Hello! 🙂"}),
    ])
    exchange = handle_message(TASKS, "#botender", "hi botender", gateway)
    reply = exchange.reply
    assert reply == BotReply(text="Hello! 🙂", task_id="t-hello", task_name="Hello Botender")


def test_handle_message_short_circuits_on_no_trigger():
    # Strict script without a task-agent entry: execution would be a miss.
    gateway = make_gateway([(ORCHESTRATOR, {"taskId": "0"})])
    exchange = handle_message(TASKS, "#general", "unrelated", gateway)
    assert exchange == Exchange(task_id=None, task_name=None, response=None)
    assert gateway.calls == 1


def test_handle_message_records_routing_when_agent_declines():
    gateway = make_gateway([
        (ORCHESTRATOR, {"taskId": "t-hello"}),
        (TASK_AGENT, {"response": "n/a"}),
    ])
    exchange = handle_message(TASKS, "#botender", "hi", gateway)
    assert exchange.task_id == "t-hello"
    assert exchange.task_name == "Hello Botender"
    assert exchange.response is None
    assert exchange.reply is None


def test_at_most_one_task_agent_call_per_event():
    gateway = make_gateway([
        (ORCHESTRATOR, {"taskId": "t-merch"}),
        (TASK_AGENT, {"response": "merch link here"}),
    ])
    handle_message(TASKS, "#general", "got any merch?", gateway)
    assert gateway.calls == 2  # one routing call, one task-agent call


def test_reply_is_never_fabricated_outside_the_task_set():
    gateway = make_gateway([
        (ORCHESTRATOR, {"taskId": "t-merch"}),
        (TASK_AGENT, {"response": "sure"}),
    ])
    exchange = handle_message(TASKS, "#general", "merch?", gateway)
    assert exchange.reply is not None
    assert TASKS.get(exchange.reply.task_id) is not None


def test_bot_reply_rejects_na_and_empty_text():
    with pytest.raises(ValueError):
        BotReply(text="n/a", task_id="t", task_name="T")
    with pytest.raises(ValueError):
        BotReply(text="   ", task_id="t", task_name="T")


def test_task_set_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        TaskSet(server_id="s", tasks=(HELLO, default_task("t-hello")), version=0)


def test_task_set_snapshot_bumps_version_by_one():
    bumped = TASKS.with_tasks((HELLO,))
    assert bumped.version == TASKS.version + 1
    assert TASKS.version == 0  # original snapshot untouched


def test_prompt_assets_embed_channels():
    assets = PromptAssets.for_channels(("#general", "#botender"))
    assert "#general, #botender" in assets.input_specification
    with pytest.raises(ValueError):
        PromptAssets.for_channels(())


@given(st.text(min_size=1).filter(lambda s: s.strip()))
def test_no_reply_detection_is_stable_under_padding(text: str):
    padded = f"  {text}\t"
    assert is_no_reply(padded) == is_no_reply(text)
