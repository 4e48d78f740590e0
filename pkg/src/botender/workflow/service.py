"""The collaborative governance service: one writer per proposal, snapshot reads.

Gates are authoritative here, not in any client: saving an edit requires a
fresh report for the exact draft plus at least ``save_vote_gate`` of the
author's votes; deploying requires ``deployment_threshold`` distinct deploy
upvotes, each from a user with at least one saved-case vote.
"""

from __future__ import annotations

import itertools
import logging
import threading
from collections import defaultdict
from typing import Callable, Protocol

from botender.agents.models import PromptAssets, TaskSet
from botender.agents.runtime import handle_message
from botender.errors import (
    BotenderError,
    EngineError,
    GateError,
    GatewayError,
    IllegalTransitionError,
    NotFoundError,
    StaleReportError,
)
from botender.gateway.provider import Gateway
from botender.provocations.models import PromptUnderTest
from botender.provocations.pipeline import (
    generate_baseline_cases,
    run_pipelines,
    select_cases,
)
from botender.workflow.models import (
    CLOSED,
    DEPLOYED,
    DOWN,
    OPEN,
    ORIGIN_GENERATED,
    ORIGIN_MANUAL,
    ORIGIN_PLAYGROUND,
    UP,
    EditVersion,
    GeneratedCase,
    HistoryEntry,
    Proposal,
    RegressionRow,
    SavedCase,
    SeedCase,
    TaskChange,
    TestReport,
    WorkflowConfig,
    apply_changes,
    draft_hash,
)

logger = logging.getLogger(__name__)

CREATED = "created"
EDIT_SAVED = "edit_saved"
DEPLOYED_EVENT = "deployed"
CLOSED_EVENT = "closed"
REOPENED_EVENT = "reopened"


class PlatformPort(Protocol):
    """What the workflow needs from the chat-platform adapter."""

    def live_task_set(self, server_id: str) -> TaskSet: ...

    def set_task_set(self, server_id: str, task_set: TaskSet) -> None: ...

    def assets(self, server_id: str) -> PromptAssets: ...

    def server_lock(self, server_id: str) -> threading.RLock: ...

    def notify(self, server_id: str, event: str, title: str,
               thread_ref: str | None) -> str | None: ...


def _logical_clock() -> Callable[[], float]:
    counter = itertools.count(1)
    return lambda: float(next(counter))


def _sequential_ids(prefix: str) -> Callable[[], str]:
    counter = itertools.count(1)
    return lambda: f"{prefix}-{next(counter)}"


class ProposalWorkflow:
    """In-memory command handler; persistence hooks via ``on_change``.

    Commands serialize per proposal id; deployment additionally takes the
    server-wide task-set lock, so the live set version moves by exactly one
    per successful deploy.
    """

    def __init__(self, platform: PlatformPort, gateway: Gateway,
                 config: WorkflowConfig | None = None,
                 clock: Callable[[], float] | None = None,
                 on_change: Callable[[Proposal], None] | None = None) -> None:
        self.platform = platform
        self.gateway = gateway
        self.config = config or WorkflowConfig()
        self._clock = clock or _logical_clock()
        self._on_change = on_change
        self._proposals: dict[str, Proposal] = {}
        self._locks: defaultdict[str, threading.RLock] = defaultdict(threading.RLock)
        self._next_proposal_id = _sequential_ids("proposal")
        self._next_case_id = _sequential_ids("case")

    # -- reads ------------------------------------------------------------

    def get(self, proposal_id: str) -> Proposal:
        proposal = self._proposals.get(proposal_id)
        if proposal is None:
            raise NotFoundError(f"no proposal {proposal_id!r}")
        return proposal

    def list_for_server(self, server_id: str) -> list[Proposal]:
        return [p for p in self._proposals.values() if p.server_id == server_id]

    def find_case(self, case_id: str) -> tuple[Proposal, SavedCase]:
        for proposal in self._proposals.values():
            case = proposal.get_case(case_id)
            if case is not None:
                return proposal, case
        raise NotFoundError(f"no saved case {case_id!r}")

    # -- hydration -----------------------------------------------------------

    def adopt(self, proposal: Proposal) -> None:
        """Register a proposal restored from persistence (replica startup)."""
        self._proposals[proposal.id] = proposal

    def _mint_proposal_id(self) -> str:
        while True:
            pid = self._next_proposal_id()
            if pid not in self._proposals:
                return pid

    def _mint_case_id(self) -> str:
        while True:
            cid = self._next_case_id()
            if not any(p.get_case(cid) for p in self._proposals.values()):
                return cid

    # -- commands ----------------------------------------------------------

    def create_proposal(self, server_id: str, title: str, description: str, author: str,
                        draft: list[TaskChange] | None = None,
                        seed_case: SeedCase | None = None,
                        seed_vote: str = UP) -> Proposal:
        """Open a proposal with version 0 = the draft (or an empty change list).

        A playground seed case is saved immediately with the author's vote;
        creation notifies the channel and opens the discussion thread.
        """
        self.platform.live_task_set(server_id)  # raises for unknown/uninstalled servers
        proposal = Proposal(
            id=self._mint_proposal_id(),
            server_id=server_id,
            title=title,
            description=description,
        )
        proposal.edit_versions.append(EditVersion(
            version=0, author=author, changes=list(draft or []), created_at=self._clock(),
        ))
        if seed_case is not None:
            if seed_vote not in (UP, DOWN):
                raise ValueError("seed vote must be 'up' or 'down'")
            proposal.saved_cases.append(SavedCase(
                id=self._mint_case_id(),
                channel=seed_case.channel,
                user_message=seed_case.user_message,
                origin=ORIGIN_PLAYGROUND,
                created_version=0,
                response_history=[HistoryEntry(0, seed_case.triggered_task,
                                               seed_case.bot_response)],
                votes={author: seed_vote},
            ))
        proposal.thread_ref = self.platform.notify(server_id, CREATED, title, None)
        self._proposals[proposal.id] = proposal
        self._changed(proposal)
        return proposal

    def test_and_generate(self, proposal_id: str, draft: list[TaskChange],
                          generate: bool = True) -> TestReport:
        """Re-run every saved case against the draft and generate fresh provocations.

        Nothing is persisted; per-case failures become row errors or report
        anomalies and the report still comes back.
        """
        with self._locks[proposal_id]:
            proposal = self.get(proposal_id)
            live = self.platform.live_task_set(proposal.server_id)
            hypothetical = live.with_tasks(apply_changes(live.tasks, draft))
            assets = self.platform.assets(proposal.server_id)

            report = TestReport(
                proposal_id=proposal.id,
                draft_hash=draft_hash(draft),
                base_version=proposal.latest_version,
            )

            for case in proposal.saved_cases:
                row = RegressionRow(case_id=case.id, channel=case.channel,
                                    user_message=case.user_message)
                try:
                    exchange = handle_message(hypothetical, case.channel,
                                              case.user_message, self.gateway)
                    row.triggered_task = exchange.task_name
                    row.bot_response = exchange.response
                    report.anomalies.extend(exchange.anomalies)
                except (GatewayError, BotenderError) as exc:
                    row.error = str(exc)
                report.regressions.append(row)

            if generate:
                counter = itertools.count()
                for change in draft:
                    if change.op not in ("add", "edit"):
                        continue
                    assert change.task is not None
                    prompt = PromptUnderTest(trigger=change.task.trigger,
                                             action=change.task.action)
                    try:
                        outcome = run_pipelines(prompt, hypothetical, assets, self.gateway)
                        selected = select_cases(outcome.candidates, prompt, assets,
                                                self.gateway, n=self.config.selector_count,
                                                anomalies=outcome.anomalies)
                    except EngineError as exc:
                        report.anomalies.append(
                            f"provocation run failed for task {change.task.id!r}: {exc}")
                        continue
                    report.anomalies.extend(outcome.anomalies)
                    for candidate in selected:
                        report.generated.append(GeneratedCase(
                            case_id=f"{report.draft_hash[:8]}-g{next(counter)}",
                            kind=candidate.kind.value if candidate.kind else None,
                            channel=candidate.channel,
                            user_message=candidate.user_message,
                            triggered_task=candidate.triggered_task,
                            bot_response=candidate.bot_response,
                            reasoning=candidate.reasoning,
                            selection_reason=candidate.selection_reason,
                        ))
            return report

    def save_edit(self, proposal_id: str, draft: list[TaskChange], report: TestReport,
                  author: str) -> EditVersion:
        """Append a new edit version and land the report's outcomes into history.

        Requires a report produced for exactly this draft and at least
        ``save_vote_gate`` of the author's votes among the proposal's cases.
        """
        with self._locks[proposal_id]:
            proposal = self.get(proposal_id)
            if proposal.status != OPEN:
                raise IllegalTransitionError(f"cannot edit a {proposal.status} proposal")
            if report.proposal_id != proposal.id or report.draft_hash != draft_hash(draft):
                raise StaleReportError("test report does not match the submitted draft")

            have = sum(1 for case in proposal.saved_cases if author in case.votes)
            if have < self.config.save_vote_gate:
                raise GateError("save_vote_gate", self.config.save_vote_gate, have)

            version = len(proposal.edit_versions)
            proposal.edit_versions.append(EditVersion(
                version=version, author=author, changes=list(draft),
                created_at=self._clock(),
            ))

            live = self.platform.live_task_set(proposal.server_id)
            hypothetical = live.with_tasks(apply_changes(live.tasks, draft))
            for case in proposal.saved_cases:
                row = report.regression_for(case.id)
                if row is not None and row.error is None:
                    entry = HistoryEntry(version, row.triggered_task, row.bot_response)
                else:
                    generated = report.generated_for(case.id)
                    if generated is not None:
                        entry = HistoryEntry(version, generated.triggered_task,
                                             generated.bot_response)
                    else:
                        # A case raced in after the report; re-run it so every
                        # saved case has an entry for the new version.
                        exchange = handle_message(hypothetical, case.channel,
                                                  case.user_message, self.gateway)
                        entry = HistoryEntry(version, exchange.task_name, exchange.response)
                case.response_history.append(entry)

            self.platform.notify(proposal.server_id, EDIT_SAVED, proposal.title,
                                 proposal.thread_ref)
            self._changed(proposal)
            return proposal.edit_versions[-1]

    def vote_case(self, user: str, proposal_id: str, case_id: str, direction: str,
                  report: TestReport | None = None) -> tuple[int, int]:
        """Record or overwrite one user's vote; voting on a generated report
        case saves it first."""
        if direction not in (UP, DOWN):
            raise ValueError("vote direction must be 'up' or 'down'")
        with self._locks[proposal_id]:
            proposal = self.get(proposal_id)
            case = proposal.get_case(case_id)
            if case is None and report is not None and report.proposal_id == proposal.id:
                generated = report.generated_for(case_id)
                if generated is not None:
                    case = SavedCase(
                        id=generated.case_id,
                        channel=generated.channel,
                        user_message=generated.user_message,
                        origin=ORIGIN_GENERATED,
                        created_version=proposal.latest_version,
                        kind=generated.kind,
                        reasoning=generated.reasoning,
                    )
                    proposal.saved_cases.append(case)
            if case is None:
                raise NotFoundError(f"no case {case_id!r} on proposal {proposal_id!r}")
            case.votes[user] = direction
            self._changed(proposal)
            return case.tally()

    def add_manual_case(self, proposal_id: str, channel: str, user_message: str,
                        author: str, direction: str = UP) -> SavedCase:
        """Save a case a user typed by hand, with their vote."""
        if direction not in (UP, DOWN):
            raise ValueError("vote direction must be 'up' or 'down'")
        with self._locks[proposal_id]:
            proposal = self.get(proposal_id)
            assets = self.platform.assets(proposal.server_id)
            if channel not in assets.channels:
                raise ValueError(f"channel {channel!r} is not on this server")
            case = SavedCase(
                id=self._mint_case_id(),
                channel=channel,
                user_message=user_message,
                origin=ORIGIN_MANUAL,
                created_version=proposal.latest_version,
                votes={author: direction},
            )
            proposal.saved_cases.append(case)
            self._changed(proposal)
            return case

    def vote_deploy(self, user: str, proposal_id: str, direction: str = UP) -> int:
        """Add an idempotent deploy vote; only upvotes count toward the threshold."""
        if direction not in (UP, DOWN):
            raise ValueError("vote direction must be 'up' or 'down'")
        with self._locks[proposal_id]:
            proposal = self.get(proposal_id)
            if proposal.status != OPEN:
                raise IllegalTransitionError(
                    f"cannot vote on deploying a {proposal.status} proposal")
            have = sum(1 for case in proposal.saved_cases if user in case.votes)
            if have < 1:
                raise GateError("deploy_vote_gate", 1, have)
            if direction == UP:
                proposal.deploy_votes.add(user)
                proposal.deploy_downvotes.discard(user)
            else:
                proposal.deploy_downvotes.add(user)
                proposal.deploy_votes.discard(user)
            self._changed(proposal)
            return len(proposal.deploy_votes)

    def deploy(self, proposal_id: str, actor: str) -> TaskSet:
        """Apply the latest edit atomically to the live task set and close out."""
        with self._locks[proposal_id]:
            proposal = self.get(proposal_id)
            if proposal.status != OPEN:
                raise IllegalTransitionError(f"cannot deploy a {proposal.status} proposal")
            have = len(proposal.deploy_votes)
            if have < self.config.deployment_threshold:
                raise GateError("deployment_threshold",
                                self.config.deployment_threshold, have)
            with self.platform.server_lock(proposal.server_id):
                live = self.platform.live_task_set(proposal.server_id)
                new_tasks = apply_changes(live.tasks, proposal.latest_changes())
                new_set = live.with_tasks(new_tasks)
                self.platform.set_task_set(proposal.server_id, new_set)
            proposal.status = DEPLOYED
            self.platform.notify(proposal.server_id, DEPLOYED_EVENT, proposal.title,
                                 proposal.thread_ref)
            self._changed(proposal)
            return new_set

    def revert_to(self, proposal_id: str, version: int, author: str) -> EditVersion:
        """Append a new version repeating version k's changes; history is
        never truncated."""
        with self._locks[proposal_id]:
            proposal = self.get(proposal_id)
            if proposal.status != OPEN:
                raise IllegalTransitionError(f"cannot revert a {proposal.status} proposal")
            if not (0 <= version < proposal.latest_version):
                raise ValueError(
                    f"revert target must be an earlier version, got {version} "
                    f"(latest is {proposal.latest_version})")
            source = proposal.edit_versions[version]
            new_version = EditVersion(
                version=len(proposal.edit_versions),
                author=author,
                changes=list(source.changes),
                created_at=self._clock(),
            )
            proposal.edit_versions.append(new_version)
            self.platform.notify(proposal.server_id, EDIT_SAVED, proposal.title,
                                 proposal.thread_ref)
            self._changed(proposal)
            return new_version

    def set_status(self, proposal_id: str, to: str, actor: str) -> Proposal:
        """open→closed and closed→open; deployed is terminal; self-loops no-op."""
        if to not in (OPEN, CLOSED):
            raise ValueError("status target must be 'open' or 'closed'")
        with self._locks[proposal_id]:
            proposal = self.get(proposal_id)
            if proposal.status == DEPLOYED:
                raise IllegalTransitionError("deployed proposals cannot change status")
            if proposal.status == to:
                return proposal
            proposal.status = to
            event = CLOSED_EVENT if to == CLOSED else REOPENED_EVENT
            self.platform.notify(proposal.server_id, event, proposal.title,
                                 proposal.thread_ref)
            self._changed(proposal)
            return proposal

    # -- internals ----------------------------------------------------------

    def _changed(self, proposal: Proposal) -> None:
        if self._on_change is not None:
            self._on_change(proposal)
