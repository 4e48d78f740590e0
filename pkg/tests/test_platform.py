"""Simulator behavior: install, ingestion, notifications, transcripts."""

from __future__ import annotations

import json

import pytest

from botender.errors import AlreadyInstalledError, NotFoundError, NotInstalledError
from botender.platform.models import PlatformEvent
from botender.platform.scenario import Scenario, run_scenario
from botender.platform.simulator import BOT_CHANNEL, SimulatedPlatform
from tests.conftest import NO_TRIGGER, ORCHESTRATOR, TASK_AGENT, make_gateway

HELLO_SCRIPT = [
    (ORCHESTRATOR, {"taskId": "hello-botender"}),
    (TASK_AGENT, {"response": "Hello! 🙂"}),
]


def hello_event(content="hi botender", channel=BOT_CHANNEL, server="s1"):
    return PlatformEvent(server_id=server, channel=channel, author="alice",
                         content=content, at=1)


@pytest.fixture()
def platform():
    sim = SimulatedPlatform(make_gateway(HELLO_SCRIPT))
    sim.add_server("s1", ["#general"], ["alice", "bob"])
    return sim


class TestInstall:
    def test_fresh_install_creates_channel_and_seeds_default_task(self, platform):
        task_set = platform.install("s1")
        assert BOT_CHANNEL in platform.servers["s1"].channels
        assert task_set.version == 0
        assert [t.name for t in task_set.tasks] == ["Hello Botender"]

    def test_double_install_is_an_error(self, platform):
        platform.install("s1")
        with pytest.raises(AlreadyInstalledError):
            platform.install("s1")

    def test_existing_bot_channel_is_reused(self):
        """Reconcile rule: replay install over a pre-populated server."""
        sim = SimulatedPlatform(make_gateway([]))
        sim.add_server("s2", ["#general", BOT_CHANNEL], ["alice"])
        task_set = sim.install("s2")
        server = sim.servers["s2"]
        assert server.channels.count(BOT_CHANNEL) == 1
        assert not any(e.get("kind") == "create_channel" for e in server.transcript)
        assert task_set.get("hello-botender") is not None

    def test_unknown_server_is_not_found(self, platform):
        with pytest.raises(NotFoundError):
            platform.install("nope")


class TestIngest:
    def test_greeting_yields_labeled_reply_in_transcript(self, platform):
        platform.install("s1")
        reply = platform.ingest(hello_event())
        assert reply is not None and reply.task_name == "Hello Botender"
        last = platform.servers["s1"].transcript[-1]
        assert last["kind"] == "post_message"
        assert last["task_label"] == "Hello Botender"
        assert last["text"] == "Hello! 🙂"

    def test_no_trigger_appends_no_action(self):
        sim = SimulatedPlatform(make_gateway([(ORCHESTRATOR, NO_TRIGGER)]))
        sim.add_server("s1", ["#general"], ["alice"])
        sim.install("s1")
        sim.ingest(hello_event(content="nothing relevant", channel="#general"))
        kinds = [e.get("kind") for e in sim.servers["s1"].transcript if e["type"] == "action"]
        assert kinds == ["create_channel"]  # only the install-time bot channel

    def test_uninstalled_server_drops_event_with_anomaly(self, platform):
        assert platform.ingest(hello_event()) is None
        assert any("uninstalled" in note for note in platform.anomalies)
        assert platform.servers["s1"].transcript == []

    def test_unknown_channel_drops_event_with_anomaly(self, platform):
        platform.install("s1")
        platform.ingest(hello_event(channel="#ghost"))
        assert any("#ghost" in note for note in platform.anomalies)


class TestNotify:
    def test_created_posts_one_message_and_one_thread(self, platform):
        platform.install("s1")
        thread_ref = platform.notify("s1", "created", "Echo things", None)
        assert thread_ref == "thread-1"
        server = platform.servers["s1"]
        posts = [e for e in server.transcript if e.get("kind") == "post_message"]
        threads = [e for e in server.transcript if e.get("kind") == "create_thread"]
        assert len(posts) == 1 and posts[0]["target"] == BOT_CHANNEL
        assert len(threads) == 1 and threads[0]["anchor_seq"] == posts[0]["seq"]

    def test_deployed_posts_to_thread_and_channel(self, platform):
        platform.install("s1")
        thread_ref = platform.notify("s1", "created", "Echo", None)
        platform.notify("s1", "deployed", "Echo", thread_ref)
        server = platform.servers["s1"]
        deploy_posts = [e for e in server.transcript if e.get("notice") == "deployed"]
        assert len(deploy_posts) == 2
        assert {e["target"] for e in deploy_posts} == {thread_ref, BOT_CHANNEL}

    def test_three_edit_notices_stay_in_the_thread(self, platform):
        platform.install("s1")
        thread_ref = platform.notify("s1", "created", "Echo", None)
        for _ in range(3):
            platform.notify("s1", "edit_saved", "Echo", thread_ref)
        server = platform.servers["s1"]
        edit_posts = [e for e in server.transcript if e.get("notice") == "edit_saved"]
        assert len(edit_posts) == 3
        assert all(e["target"] == thread_ref for e in edit_posts)
        assert len(server.threads[thread_ref]) == 3

    def test_missing_thread_falls_back_to_bot_channel(self, platform):
        platform.install("s1")
        platform.notify("s1", "edit_saved", "Echo", None)
        server = platform.servers["s1"]
        post = server.transcript[-1]
        assert post["target"] == BOT_CHANNEL
        assert any("fell back" in note for note in platform.anomalies)


class TestChannels:
    def test_list_channels_covers_install_additions(self, platform):
        platform.install("s1")
        assert set(platform.list_channels("s1")) == {"#general", BOT_CHANNEL}

    def test_created_channels_appear(self, platform):
        platform.install("s1")
        platform.create_channel("s1", "#events")
        assert "#events" in platform.list_channels("s1")
        last = platform.servers["s1"].transcript[-1]
        assert last["kind"] == "create_channel" and last["name"] == "#events"

    def test_duplicate_channel_is_rejected(self, platform):
        platform.install("s1")
        with pytest.raises(ValueError):
            platform.create_channel("s1", "#general")

    def test_uninstalled_server_cannot_list(self, platform):
        with pytest.raises(NotInstalledError):
            platform.list_channels("s1")

    def test_assets_embed_the_channel_list(self, platform):
        platform.install("s1")
        assets = platform.assets("s1")
        assert "#general" in assets.input_specification
        assert assets.channels == ("#general", BOT_CHANNEL)


SCENARIO_DOC = {
    "server": "s1",
    "channels": ["#general"],
    "members": ["alice", "bob"],
    "events": [
        {"channel": "#botender", "author": "alice", "content": "hi botender", "at": 1},
        {"channel": "#general", "author": "bob", "content": "hi botender", "at": 2},
    ],
}


class TestScenario:
    def test_transcripts_replay_byte_identically(self):
        outputs = []
        for _ in range(2):
            sim = SimulatedPlatform(make_gateway(HELLO_SCRIPT))
            run_scenario(sim, Scenario.from_doc(SCENARIO_DOC))
            outputs.append(sim.transcript_jsonl("s1"))
        assert outputs[0] == outputs[1]
        # one install-time channel creation, then an event + labeled reply per message
        assert outputs[0].count("\n") == 1 + len(SCENARIO_DOC["events"]) * 2

    def test_scenario_file_round_trip(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(SCENARIO_DOC), encoding="utf-8")
        scenario = Scenario.from_file(path)
        assert scenario.server == "s1"
        assert len(scenario.events) == 2
        assert scenario.events[0].channel == "#botender"

    def test_every_bot_post_is_labeled_with_a_live_task_name(self):
        sim = SimulatedPlatform(make_gateway(HELLO_SCRIPT))
        server = run_scenario(sim, Scenario.from_doc(SCENARIO_DOC))
        task_names = {t.name for t in sim.live_task_set("s1").tasks}
        for entry in server.transcript:
            if entry["type"] == "action" and "task_label" in entry:
                assert entry["task_label"] in task_names
