"""Governance state machine: gates, votes, counters, deployment, history."""

from __future__ import annotations

import threading
from types import SimpleNamespace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from botender.agents.models import Task
from botender.errors import (
    ConflictError,
    GateError,
    IllegalTransitionError,
    NotFoundError,
    StaleReportError,
)
from botender.platform.simulator import SimulatedPlatform
from botender.workflow.models import (
    SavedCase,
    SeedCase,
    TaskChange,
    WorkflowConfig,
    case_status,
    counters,
    draft_hash,
)
from botender.workflow.service import ProposalWorkflow
from tests.conftest import (
    DETECT_AMBIGUITY,
    DETECT_CONSEQUENCE,
    DETECT_NARROWNESS,
    EVAL_AMBIGUITY,
    GEN_AMBIGUITY,
    NO_TRIGGER,
    ORCHESTRATOR,
    PASS_EVAL,
    make_gateway,
)

ECHO_TASK = Task(id="t-echo", name="Echo", trigger="When someone says echo.",
                 action="Repeat it back.")

GEN_CASES = [
    {"underspecified_phrase": "says echo", "interpretation": "indirect mentions count",
     "reasoning": "boundary probe",
     "case": {"channel": "#general", "user_message": "echo echo"}},
    {"underspecified_phrase": "says echo", "interpretation": "questions count",
     "reasoning": "question form",
     "case": {"channel": "#general", "user_message": "can you echo this?"}},
]

WORKFLOW_SCRIPT = [
    (DETECT_AMBIGUITY, [{"underspecified_phrase": "says echo",
                         "description": "when is something said?"}]),
    (DETECT_NARROWNESS, []),
    (DETECT_CONSEQUENCE, []),
    (GEN_AMBIGUITY, GEN_CASES),
    (EVAL_AMBIGUITY, PASS_EVAL),
    (ORCHESTRATOR, NO_TRIGGER),
]


@pytest.fixture()
def env():
    gateway = make_gateway(WORKFLOW_SCRIPT)
    platform = SimulatedPlatform(gateway)
    platform.add_server("s1", ["#general"], ["alice", "bob", "cara", "dave"])
    platform.install("s1")
    workflow = ProposalWorkflow(platform, gateway)
    return SimpleNamespace(gateway=gateway, platform=platform, workflow=workflow)


def add_echo_draft() -> list[TaskChange]:
    return [TaskChange(op="add", task=ECHO_TASK)]


def proposal_with_generated_vote(env, author="alice"):
    """Create → test → author votes one generated case; returns (proposal, draft, report)."""
    proposal = env.workflow.create_proposal("s1", "Echo things", "let the bot echo",
                                            author, draft=add_echo_draft())
    draft = add_echo_draft()
    report = env.workflow.test_and_generate(proposal.id, draft)
    case_id = report.generated[0].case_id
    env.workflow.vote_case(author, proposal.id, case_id, "up", report=report)
    return proposal, draft, report


class TestCreate:
    def test_draft_becomes_version_zero_with_thread(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo things", "desc", "alice",
                                                draft=add_echo_draft())
        assert proposal.latest_version == 0
        assert proposal.edit_versions[0].changes[0].op == "add"
        assert proposal.thread_ref == "thread-1"
        server = env.platform.servers["s1"]
        notices = [e for e in server.transcript
                   if e.get("notice") == "created"]
        assert len(notices) == 1

    def test_no_draft_gives_empty_version_zero(self, env):
        proposal = env.workflow.create_proposal("s1", "Idea only", "desc", "alice")
        assert proposal.edit_versions[0].changes == []

    def test_playground_seed_case_is_saved_with_author_vote(self, env):
        seed = SeedCase(channel="#general", user_message="echo?",
                        triggered_task=None, bot_response=None)
        proposal = env.workflow.create_proposal("s1", "Seeded", "desc", "alice",
                                                draft=add_echo_draft(), seed_case=seed)
        assert len(proposal.saved_cases) == 1
        case = proposal.saved_cases[0]
        assert case.origin == "playground"
        assert case.votes == {"alice": "up"}
        assert case.response_history[0].version == 0

    def test_empty_title_is_rejected(self, env):
        with pytest.raises(ValueError):
            env.workflow.create_proposal("s1", "  ", "desc", "alice")


class TestTestAndGenerate:
    def test_row_count_equals_saved_case_count(self, env):
        seed = SeedCase(channel="#general", user_message="first case")
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice",
                                                draft=add_echo_draft(), seed_case=seed)
        env.workflow.add_manual_case(proposal.id, "#general", "second case", "bob")
        env.workflow.add_manual_case(proposal.id, "#general", "third case", "cara")
        report = env.workflow.test_and_generate(proposal.id, add_echo_draft())
        assert len(report.regressions) == len(proposal.saved_cases) == 3
        assert 0 < len(report.generated) <= 5
        assert report.draft_hash == draft_hash(add_echo_draft())

    def test_remove_only_draft_generates_nothing(self, env):
        proposal = env.workflow.create_proposal("s1", "Trim", "d", "alice")
        report = env.workflow.test_and_generate(
            proposal.id, [TaskChange(op="remove", task_id="hello-botender")])
        assert report.generated == []

    def test_regression_row_records_no_trigger(self, env):
        seed = SeedCase(channel="#general", user_message="nothing special")
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice",
                                                draft=add_echo_draft(), seed_case=seed)
        report = env.workflow.test_and_generate(proposal.id, add_echo_draft())
        row = report.regressions[0]
        assert row.triggered_task is None and row.bot_response is None
        assert row.error is None

    def test_report_is_not_persisted(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice",
                                                draft=add_echo_draft())
        env.workflow.test_and_generate(proposal.id, add_echo_draft())
        assert proposal.saved_cases == []
        assert proposal.latest_version == 0


class TestSaveEdit:
    def test_voted_generated_case_lands_in_saved_cases(self, env):
        proposal, draft, report = proposal_with_generated_vote(env)
        edit = env.workflow.save_edit(proposal.id, draft, report, "alice")
        assert edit.version == 1
        case = proposal.saved_cases[0]
        assert case.origin == "generated"
        assert case.entry_for(1) is not None
        thread_notices = [e for e in env.platform.servers["s1"].transcript
                          if e.get("notice") == "edit_saved"]
        assert len(thread_notices) == 1

    def test_zero_votes_hits_the_save_gate(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice",
                                                draft=add_echo_draft())
        draft = add_echo_draft()
        report = env.workflow.test_and_generate(proposal.id, draft)
        with pytest.raises(GateError) as err:
            env.workflow.save_edit(proposal.id, draft, report, "alice")
        assert err.value.gate == "save_vote_gate"

    def test_gate_threshold_is_configurable(self, env):
        workflow = ProposalWorkflow(env.platform, env.gateway,
                                    WorkflowConfig(save_vote_gate=2))
        proposal = workflow.create_proposal("s1", "Echo", "d", "alice",
                                            draft=add_echo_draft())
        draft = add_echo_draft()
        report = workflow.test_and_generate(proposal.id, draft)
        workflow.vote_case("alice", proposal.id, report.generated[0].case_id, "up",
                           report=report)
        with pytest.raises(GateError) as err:
            workflow.save_edit(proposal.id, draft, report, "alice")
        assert err.value.gate == "save_vote_gate"
        assert err.value.needed == 2

    def test_stale_report_is_rejected(self, env):
        proposal, _draft, report = proposal_with_generated_vote(env)
        other_draft = [TaskChange(op="add", task=Task(
            id="t-other", name="Other", trigger="When asked.", action="Answer."))]
        with pytest.raises(StaleReportError):
            env.workflow.save_edit(proposal.id, other_draft, report, "alice")

    def test_regression_completeness_after_save(self, env):
        seed = SeedCase(channel="#general", user_message="old case")
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice",
                                                draft=add_echo_draft(), seed_case=seed)
        draft = add_echo_draft()
        report = env.workflow.test_and_generate(proposal.id, draft)
        env.workflow.vote_case("alice", proposal.id, report.generated[0].case_id,
                               "up", report=report)
        edit = env.workflow.save_edit(proposal.id, draft, report, "alice")
        for case in proposal.saved_cases:
            assert case.entry_for(edit.version) is not None


class TestVotes:
    def test_revote_overwrites(self, env):
        proposal, _, report = proposal_with_generated_vote(env)
        case_id = proposal.saved_cases[0].id
        assert env.workflow.vote_case("alice", proposal.id, case_id, "down") == (0, 1)

    def test_tally_counts_by_direction(self, env):
        proposal, _, _ = proposal_with_generated_vote(env)
        case_id = proposal.saved_cases[0].id
        env.workflow.vote_case("bob", proposal.id, case_id, "up")
        assert env.workflow.vote_case("cara", proposal.id, case_id, "down") == (2, 1)

    def test_unknown_case_is_not_found(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice")
        with pytest.raises(NotFoundError):
            env.workflow.vote_case("alice", proposal.id, "missing", "up")

    def test_bad_direction_is_rejected(self, env):
        proposal, _, _ = proposal_with_generated_vote(env)
        with pytest.raises(ValueError):
            env.workflow.vote_case("alice", proposal.id,
                                   proposal.saved_cases[0].id, "sideways")


def make_case(ups: int, downs: int) -> SavedCase:
    votes = {f"u{i}": "up" for i in range(ups)}
    votes.update({f"d{i}": "down" for i in range(downs)})
    return SavedCase(id="c", channel="#general", user_message="m",
                     origin="manual", created_version=0, votes=votes)


class TestCounters:
    def test_majority_rules(self):
        assert case_status(make_case(2, 1)) == "good"
        assert case_status(make_case(1, 2)) == "bad"
        assert case_status(make_case(1, 1)) == "tbd"
        assert case_status(make_case(0, 0)) == "tbd"

    def test_all_vote_multisets_up_to_five_match_brute_force(self):
        for total in range(6):
            for ups in range(total + 1):
                downs = total - ups
                expected = "good" if ups > downs else "bad" if downs > ups else "tbd"
                assert case_status(make_case(ups, downs)) == expected

    def test_counters_conserve_case_count(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice")
        proposal.saved_cases.extend([make_case(2, 0), make_case(2, 1), make_case(0, 0)])
        tally = counters(proposal)
        assert (tally.good, tally.bad, tally.tbd) == (2, 0, 1)
        assert tally.good + tally.bad + tally.tbd == len(proposal.saved_cases)

    def test_empty_proposal_counts_zero(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice")
        tally = counters(proposal)
        assert (tally.good, tally.bad, tally.tbd) == (0, 0, 0)

    @given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=10))
    def test_counters_match_independent_tally(self, shapes):
        cases = [make_case(u, d) for u, d in shapes]
        good = sum(1 for u, d in shapes if u > d)
        bad = sum(1 for u, d in shapes if d > u)
        tbd = len(shapes) - good - bad
        proposal = SimpleNamespace(saved_cases=cases)
        tally = counters(proposal)
        assert (tally.good, tally.bad, tally.tbd) == (good, bad, tbd)


class TestDeploy:
    def _ready_proposal(self, env):
        proposal, draft, report = proposal_with_generated_vote(env)
        env.workflow.save_edit(proposal.id, draft, report, "alice")
        case_id = proposal.saved_cases[0].id
        for user in ("bob", "cara"):
            env.workflow.vote_case(user, proposal.id, case_id, "up")
        return proposal

    def test_deploy_vote_requires_case_vote(self, env):
        proposal, _, _ = proposal_with_generated_vote(env)
        with pytest.raises(GateError) as err:
            env.workflow.vote_deploy("dave", proposal.id)
        assert err.value.gate == "deploy_vote_gate"

    def test_deploy_votes_are_idempotent(self, env):
        proposal, _, _ = proposal_with_generated_vote(env)
        assert env.workflow.vote_deploy("alice", proposal.id) == 1
        assert env.workflow.vote_deploy("alice", proposal.id) == 1

    def test_downvotes_do_not_count_toward_threshold(self, env):
        proposal = self._ready_proposal(env)
        env.workflow.vote_deploy("alice", proposal.id, "down")
        env.workflow.vote_deploy("bob", proposal.id)
        env.workflow.vote_deploy("cara", proposal.id)
        assert len(proposal.deploy_votes) == 2
        with pytest.raises(GateError) as err:
            env.workflow.deploy(proposal.id, "alice")
        assert err.value.gate == "deployment_threshold"

    def test_threshold_deploy_updates_live_set(self, env):
        proposal = self._ready_proposal(env)
        for user in ("alice", "bob", "cara"):
            env.workflow.vote_deploy(user, proposal.id)
        before = env.platform.live_task_set("s1")
        new_set = env.workflow.deploy(proposal.id, "alice")
        assert new_set.version == before.version + 1
        assert new_set.get("t-echo") is not None
        assert proposal.status == "deployed"
        notices = [e for e in env.platform.servers["s1"].transcript
                   if e.get("notice") == "deployed"]
        assert len(notices) == 2  # thread + bot channel

    def test_two_votes_miss_the_threshold(self, env):
        proposal = self._ready_proposal(env)
        env.workflow.vote_deploy("alice", proposal.id)
        env.workflow.vote_deploy("bob", proposal.id)
        with pytest.raises(GateError) as err:
            env.workflow.deploy(proposal.id, "alice")
        assert err.value.gate == "deployment_threshold"
        assert env.platform.live_task_set("s1").version == 0

    def test_conflicting_remove_leaves_live_set_untouched(self, env):
        proposal = env.workflow.create_proposal(
            "s1", "Trim", "d", "alice",
            draft=[TaskChange(op="remove", task_id="t-gone")],
            seed_case=SeedCase(channel="#general", user_message="seed"))
        for user in ("alice", "bob", "cara"):
            env.workflow.vote_case(user, proposal.id, proposal.saved_cases[0].id, "up")
            env.workflow.vote_deploy(user, proposal.id)
        before = env.platform.live_task_set("s1")
        with pytest.raises(ConflictError):
            env.workflow.deploy(proposal.id, "alice")
        assert env.platform.live_task_set("s1") is before
        assert proposal.status == "open"

    def test_concurrent_deploys_bump_version_once_each(self, env):
        outcomes = {}

        def ready(task: Task, title: str):
            proposal = env.workflow.create_proposal(
                "s1", title, "d", "alice",
                draft=[TaskChange(op="add", task=task)],
                seed_case=SeedCase(channel="#general", user_message=f"seed {title}"))
            for user in ("alice", "bob", "cara"):
                env.workflow.vote_case(user, proposal.id, proposal.saved_cases[0].id, "up")
                env.workflow.vote_deploy(user, proposal.id)
            return proposal

        first = ready(Task(id="t-a", name="A", trigger="t", action="a"), "First")
        second = ready(Task(id="t-b", name="B", trigger="t", action="a"), "Second")

        def attempt(proposal):
            try:
                outcomes[proposal.id] = env.workflow.deploy(proposal.id, "alice")
            except ConflictError as exc:
                outcomes[proposal.id] = exc

        threads = [threading.Thread(target=attempt, args=(p,)) for p in (first, second)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        live = env.platform.live_task_set("s1")
        successes = [v for v in outcomes.values() if not isinstance(v, Exception)]
        assert len(successes) == 2
        assert live.version == 2
        ids = [task.id for task in live.tasks]
        assert len(ids) == len(set(ids))

    def test_concurrent_conflicting_adds_apply_exactly_once(self, env):
        dup = Task(id="t-dup", name="Dup", trigger="t", action="a")
        proposals = []
        for title in ("One", "Two"):
            proposal = env.workflow.create_proposal(
                "s1", title, "d", "alice",
                draft=[TaskChange(op="add", task=dup)],
                seed_case=SeedCase(channel="#general", user_message=f"seed {title}"))
            for user in ("alice", "bob", "cara"):
                env.workflow.vote_case(user, proposal.id, proposal.saved_cases[0].id, "up")
                env.workflow.vote_deploy(user, proposal.id)
            proposals.append(proposal)

        outcomes = []

        def attempt(proposal):
            try:
                outcomes.append(env.workflow.deploy(proposal.id, "alice"))
            except ConflictError as exc:
                outcomes.append(exc)

        threads = [threading.Thread(target=attempt, args=(p,)) for p in proposals]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        conflicts = [o for o in outcomes if isinstance(o, ConflictError)]
        assert len(conflicts) == 1
        live = env.platform.live_task_set("s1")
        assert live.version == 1
        assert [t.id for t in live.tasks].count("t-dup") == 1


class TestRevertAndStatus:
    def _proposal_with_versions(self, env, count=3):
        proposal, draft, report = proposal_with_generated_vote(env)
        for _ in range(count - 1):
            report = env.workflow.test_and_generate(proposal.id, draft)
            env.workflow.save_edit(proposal.id, draft, report, "alice")
        return proposal

    def test_revert_appends_without_truncating(self, env):
        proposal = self._proposal_with_versions(env, count=3)
        assert proposal.latest_version == 2
        new_version = env.workflow.revert_to(proposal.id, 0, "bob")
        assert new_version.version == 3
        assert len(proposal.edit_versions) == 4
        assert ([c.to_doc() for c in new_version.changes]
                == [c.to_doc() for c in proposal.edit_versions[0].changes])

    def test_revert_to_latest_is_out_of_range(self, env):
        proposal = self._proposal_with_versions(env, count=2)
        with pytest.raises(ValueError):
            env.workflow.revert_to(proposal.id, proposal.latest_version, "alice")

    def test_revert_needs_an_open_proposal(self, env):
        proposal = self._proposal_with_versions(env, count=2)
        env.workflow.set_status(proposal.id, "closed", "alice")
        with pytest.raises(IllegalTransitionError):
            env.workflow.revert_to(proposal.id, 0, "alice")

    def test_close_reopen_round_trip(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice")
        env.workflow.set_status(proposal.id, "closed", "alice")
        assert proposal.status == "closed"
        env.workflow.set_status(proposal.id, "open", "alice")
        assert proposal.status == "open"

    def test_deployed_is_terminal(self, env):
        proposal, draft, report = proposal_with_generated_vote(env)
        env.workflow.save_edit(proposal.id, draft, report, "alice")
        for user in ("bob", "cara"):
            env.workflow.vote_case(user, proposal.id, proposal.saved_cases[0].id, "up")
        for user in ("alice", "bob", "cara"):
            env.workflow.vote_deploy(user, proposal.id)
        env.workflow.deploy(proposal.id, "alice")
        with pytest.raises(IllegalTransitionError):
            env.workflow.set_status(proposal.id, "open", "alice")

    def test_closing_twice_is_idempotent(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice")
        env.workflow.set_status(proposal.id, "closed", "alice")
        env.workflow.set_status(proposal.id, "closed", "alice")
        assert proposal.status == "closed"


class TestManualCases:
    def test_manual_case_carries_vote_and_origin(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice")
        case = env.workflow.add_manual_case(proposal.id, "#general", "typed by hand",
                                            "bob", "down")
        assert case.origin == "manual"
        assert case.votes == {"bob": "down"}

    def test_unknown_channel_is_rejected(self, env):
        proposal = env.workflow.create_proposal("s1", "Echo", "d", "alice")
        with pytest.raises(ValueError):
            env.workflow.add_manual_case(proposal.id, "#nope", "msg", "bob")
