"""Three detector→generator→evaluator pipelines, execution, and selection.

Each pipeline kind runs independently; a terminal failure in one excludes
only that kind's contribution. Fan-out may run on a bounded thread pool,
but results always merge in (kind, finding-index, candidate-index) order so
concurrency never changes output order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from botender import prompts
from botender.agents.models import PromptAssets, TaskSet
from botender.agents.runtime import handle_message
from botender.errors import EngineError, GatewayError, PipelineStageError
from botender.gateway.envelopes import (
    CandidateListEnvelope,
    EnvelopeKind,
    EnvelopeSchema,
    EvaluationEnvelope,
    FindingListEnvelope,
    SelectionEnvelope,
)
from botender.gateway.provider import ChatRequest, Gateway
from botender.provocations.models import (
    KIND_ORDER,
    CaseCandidate,
    Evaluation,
    Finding,
    PipelineKind,
    PipelineOutcome,
    PromptUnderTest,
)

logger = logging.getLogger(__name__)

DEFAULT_SELECTION_SIZE = 5
DEFAULT_PARALLELISM = 4
BASELINE_CASE_COUNT = 5


def _ask(gateway: Gateway, system: str, user: str, schema: EnvelopeSchema,
         kind: PipelineKind | None, stage: str):
    try:
        return gateway.ask(ChatRequest(system_prompt=system, user_prompt=user,
                                       expects=schema, max_retries=gateway.max_retries))
    except GatewayError as exc:
        raise PipelineStageError(kind.value if kind else "baseline", stage, str(exc)) from exc


# Finding fields that are supposed to quote the prompt under test.
_PHRASE_FIELDS = ("underspecified_phrase", "overspecified_phrase", "problematic_phrase")


def detect(kind: PipelineKind, prompt: PromptUnderTest, assets: PromptAssets,
           gateway: Gateway, anomalies: list[str] | None = None) -> list[Finding]:
    """Run one kind's detector; an empty finding list is a valid result.

    The quote-the-prompt convention on phrase fields is advisory: models
    paraphrase, so a non-quoting phrase is an anomaly, never a rejection.
    """
    system = prompts.compose_system(prompts.DETECTOR_SYSTEM[kind.value], assets.bot_capability)
    user = prompts.render_detector_user(prompt.trigger, prompt.action)
    envelope = _ask(gateway, system, user,
                    EnvelopeSchema(EnvelopeKind.FINDING_LIST, kind.value), kind, "detect")
    assert isinstance(envelope, FindingListEnvelope)
    findings = [Finding(kind=kind, fields=fields) for fields in envelope.findings]
    if anomalies is not None:
        prompt_text = f"{prompt.trigger}\n{prompt.action}"
        for finding in findings:
            for name in _PHRASE_FIELDS:
                phrase = finding.fields.get(name)
                if phrase is not None and phrase not in prompt_text:
                    anomalies.append(
                        f"{kind.value} detector paraphrased instead of quoting: "
                        f"{phrase[:60]!r}")
    return findings


def generate(kind: PipelineKind, prompt: PromptUnderTest, finding: Finding,
             assets: PromptAssets, gateway: Gateway,
             anomalies: list[str] | None = None) -> list[CaseCandidate]:
    """Turn one finding into unexecuted candidates.

    A candidate naming a channel outside the server's list is dropped with
    an anomaly rather than failing the stage.
    """
    if finding.kind is not kind:
        raise ValueError("finding kind does not match pipeline kind")
    system = prompts.compose_system(
        prompts.GENERATOR_SYSTEM[kind.value],
        assets.bot_capability,
        input_specification=assets.input_specification,
        community_description=assets.community_description,
    )
    user = prompts.render_generator_user(kind.value, prompt.trigger, prompt.action,
                                         dict(finding.fields))
    envelope = _ask(gateway, system, user,
                    EnvelopeSchema(EnvelopeKind.CANDIDATE_LIST, kind.value), kind, "generate")
    assert isinstance(envelope, CandidateListEnvelope)

    candidates = []
    for item in envelope.items:
        case = item["case"]
        if case["channel"] not in assets.channels:
            note = (f"{kind.value} generator named channel {case['channel']!r} "
                    "outside the server list; candidate dropped")
            logger.warning(note)
            if anomalies is not None:
                anomalies.append(note)
            continue
        candidates.append(CaseCandidate(
            channel=case["channel"],
            user_message=case["user_message"],
            kind=kind,
            finding=finding,
            interpretation=item.get("interpretation") if kind is PipelineKind.AMBIGUITY else None,
            uncovered_scenario=item.get("uncovered_scenario") if kind is PipelineKind.NARROWNESS else None,
            reasoning=item["reasoning"],
        ))
    return candidates


def execute_candidate(candidate: CaseCandidate, task_set: TaskSet,
                      gateway: Gateway) -> CaseCandidate:
    """Send the candidate's message through the bot and record what happened."""
    if candidate.executed:
        raise ValueError("candidate was already executed")
    try:
        exchange = handle_message(task_set, candidate.channel, candidate.user_message, gateway)
    except GatewayError as exc:
        raise PipelineStageError(
            candidate.kind.value if candidate.kind else "baseline", "execute", str(exc)
        ) from exc
    return candidate.with_execution(exchange.task_name, exchange.response)


def evaluate(kind: PipelineKind, prompt: PromptUnderTest, candidate: CaseCandidate,
             assets: PromptAssets, gateway: Gateway) -> CaseCandidate:
    """Label an executed candidate; only label=true candidates leave the pipeline."""
    if not candidate.executed:
        raise ValueError("candidate must be executed before evaluation")
    if candidate.finding is None:
        raise ValueError("candidate has no finding to evaluate against")
    system = prompts.compose_system(prompts.EVALUATOR_SYSTEM[kind.value], assets.bot_capability)
    user = prompts.render_evaluator_user(
        kind.value, prompt.trigger, prompt.action,
        dict(candidate.finding.fields), candidate.candidate_fields(),
        candidate.channel, candidate.user_message,
        candidate.triggered_task, candidate.bot_response,
    )
    envelope = _ask(gateway, system, user,
                    EnvelopeSchema(EnvelopeKind.EVALUATION), kind, "evaluate")
    assert isinstance(envelope, EvaluationEnvelope)
    return candidate.with_evaluation(Evaluation(envelope.label, envelope.explanation))


def _run_finding_chain(kind: PipelineKind, prompt: PromptUnderTest, finding: Finding,
                       task_set: TaskSet, assets: PromptAssets, gateway: Gateway,
                       ) -> tuple[list[CaseCandidate], list[str]]:
    """generate → execute → evaluate for one finding; keeps label=true only."""
    anomalies: list[str] = []
    passing: list[CaseCandidate] = []
    try:
        candidates = generate(kind, prompt, finding, assets, gateway, anomalies)
    except PipelineStageError as exc:
        anomalies.append(str(exc))
        return [], anomalies
    for candidate in candidates:
        try:
            executed = execute_candidate(candidate, task_set, gateway)
            judged = evaluate(kind, prompt, executed, assets, gateway)
        except PipelineStageError as exc:
            anomalies.append(f"candidate dropped: {exc}")
            continue
        assert judged.evaluation is not None
        if judged.evaluation.label:
            passing.append(judged)
    return passing, anomalies


def run_pipelines(prompt: PromptUnderTest, task_set: TaskSet, assets: PromptAssets,
                  gateway: Gateway, parallelism: int = DEFAULT_PARALLELISM) -> PipelineOutcome:
    """Run all three pipelines and merge passing candidates into one pool.

    Exact (channel, user_message) duplicates keep their first occurrence.
    Raises EngineError only when all three detectors fail terminally.
    """
    outcome = PipelineOutcome()
    findings_by_kind: dict[PipelineKind, list[Finding]] = {}
    failed_kinds: set[PipelineKind] = set()

    def _detect(kind: PipelineKind) -> tuple[list[Finding], list[str]]:
        notes: list[str] = []
        return detect(kind, prompt, assets, gateway, anomalies=notes), notes

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        futures = {kind: pool.submit(_detect, kind) for kind in KIND_ORDER}
        for kind in KIND_ORDER:
            try:
                findings_by_kind[kind], notes = futures[kind].result()
                outcome.anomalies.extend(notes)
            except PipelineStageError as exc:
                failed_kinds.add(kind)
                outcome.anomalies.append(str(exc))
                findings_by_kind[kind] = []

        if len(failed_kinds) == len(KIND_ORDER):
            raise EngineError("all three provocation pipelines failed at detection")

        jobs = [
            (kind_idx, finding_idx, kind, finding)
            for kind_idx, kind in enumerate(KIND_ORDER)
            for finding_idx, finding in enumerate(findings_by_kind[kind])
        ]
        chain_futures = {
            (kind_idx, finding_idx): pool.submit(
                _run_finding_chain, kind, prompt, finding, task_set, assets, gateway)
            for kind_idx, finding_idx, kind, finding in jobs
        }
        # Deterministic merge: walk jobs in (kind, finding) order regardless of
        # completion order.
        seen: set[tuple[str, str]] = set()
        for kind_idx, finding_idx, kind, _finding in jobs:
            passing, anomalies = chain_futures[(kind_idx, finding_idx)].result()
            outcome.anomalies.extend(anomalies)
            for candidate in passing:
                key = candidate.dedupe_key()
                if key in seen:
                    outcome.anomalies.append(
                        f"duplicate case dropped: {key[0]} / {key[1][:60]!r}")
                    continue
                seen.add(key)
                outcome.candidates.append(candidate)

    return outcome


def select_cases(pool: Sequence[CaseCandidate], prompt: PromptUnderTest,
                 assets: PromptAssets, gateway: Gateway,
                 n: int = DEFAULT_SELECTION_SIZE,
                 anomalies: list[str] | None = None) -> list[CaseCandidate]:
    """Pick the n most provocative candidates out of the passing pool.

    With n or fewer candidates the model is bypassed and the pool comes back
    in order. Unknown caseIds from the model are dropped with an anomaly;
    returning fewer than n is acceptable.
    """
    for candidate in pool:
        if candidate.evaluation is None or not candidate.evaluation.label:
            raise ValueError("selection pool must contain only label=true candidates")
    if len(pool) <= n:
        return list(pool)

    system = prompts.compose_system(prompts.SELECTOR_SYSTEM, assets.bot_capability)
    blocks = [
        prompts.render_selector_case(
            case_id=i,
            channel=c.channel,
            message=c.user_message,
            triggered=c.triggered_task,
            response=c.bot_response,
            trigger=prompt.trigger,
            action=prompt.action,
            kind=c.kind.value,  # type: ignore[union-attr]
        )
        for i, c in enumerate(pool)
    ]
    envelope = _ask(gateway, system, prompts.render_selector_user(blocks),
                    EnvelopeSchema(EnvelopeKind.SELECTION), None, "select")
    assert isinstance(envelope, SelectionEnvelope)

    selected: list[CaseCandidate] = []
    taken: set[int] = set()
    for pick in envelope.picks:
        if pick.case_id < 0 or pick.case_id >= len(pool):
            note = f"selector picked unknown case id {pick.case_id}; dropped"
            logger.warning(note)
            if anomalies is not None:
                anomalies.append(note)
            continue
        if pick.case_id in taken:
            continue
        taken.add(pick.case_id)
        selected.append(pool[pick.case_id].with_selection_reason(pick.reason))
        if len(selected) == n:
            break
    return selected


def generate_baseline_cases(prompt: PromptUnderTest, task_set: TaskSet,
                            assets: PromptAssets, gateway: Gateway) -> PipelineOutcome:
    """Detector-free generation of standard test cases, executed but unjudged."""
    system = prompts.compose_system(
        prompts.BASELINE_SYSTEM,
        assets.bot_capability,
        input_specification=assets.input_specification,
        community_description=assets.community_description,
    )
    user = prompts.render_baseline_user(prompt.trigger, prompt.action)
    envelope = _ask(gateway, system, user,
                    EnvelopeSchema(EnvelopeKind.CANDIDATE_LIST, None), None, "generate")
    assert isinstance(envelope, CandidateListEnvelope)

    outcome = PipelineOutcome()
    for item in envelope.items:
        case = item["case"]
        if case["channel"] not in assets.channels:
            outcome.anomalies.append(
                f"baseline generator named channel {case['channel']!r} outside the "
                "server list; candidate dropped")
            continue
        candidate = CaseCandidate(
            channel=case["channel"],
            user_message=case["user_message"],
            reasoning=item["reasoning"],
        )
        outcome.candidates.append(execute_candidate(candidate, task_set, gateway))
    if len(outcome.candidates) != BASELINE_CASE_COUNT:
        outcome.anomalies.append(
            f"baseline generation produced {len(outcome.candidates)} cases "
            f"instead of {BASELINE_CASE_COUNT}")
    return outcome
