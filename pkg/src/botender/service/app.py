"""Stateless HTTP layer over the workflow, playground, and engine.

Handlers authenticate, authorize the touched server, then delegate; every
gate lives in the workflow, so bypassing a client changes nothing. Errors
map to structured {code, message} bodies.

No deferred annotations here: the request layer's Annotated aliases are
resolved eagerly so the framework can see the dependency markers.
"""

import logging
from dataclasses import dataclass
from typing import Annotated, Any

from fastapi import Body, Depends, FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse

from botender.agents.models import Task, TaskSet
from botender.agents.runtime import handle_message
from botender.errors import (
    ConflictError,
    GateError,
    IllegalTransitionError,
    NotFoundError,
    NotInstalledError,
    StaleReportError,
)
from botender.gateway.provider import Gateway
from botender.platform.simulator import SimulatedPlatform
from botender.service.config import ServiceConfig
from botender.service.identity import IdentityProvider, Session, StaticIdentityProvider
from botender.service.store import DocumentStore
from botender.workflow.models import (
    GeneratedCase,
    Proposal,
    SeedCase,
    TaskChange,
    TestReport,
    counters,
    draft_hash,
)
from botender.workflow.service import ProposalWorkflow

logger = logging.getLogger(__name__)

TOKEN_HEADER = "x-botender-token"


@dataclass
class AppRuntime:
    """Composition root: gateway, platform, workflow, store, identity."""

    config: ServiceConfig
    gateway: Gateway
    platform: SimulatedPlatform
    workflow: ProposalWorkflow
    store: DocumentStore
    identity: IdentityProvider

    @classmethod
    def build(cls, config: ServiceConfig) -> "AppRuntime":
        gateway = Gateway(config.provider.build(), max_retries=config.provider.max_retries)
        store = DocumentStore(config.store_path)
        platform = SimulatedPlatform(gateway)

        def persist_proposal(proposal: Proposal) -> None:
            store.upsert("proposals", proposal.id, proposal.to_doc())
            for case in proposal.saved_cases:
                store.upsert("cases", case.id, {
                    "id": case.id,
                    "proposal_id": proposal.id,
                    "server_id": proposal.server_id,
                })

        workflow = ProposalWorkflow(platform, gateway, config.workflow,
                                    on_change=persist_proposal)
        runtime = cls(
            config=config,
            gateway=gateway,
            platform=platform,
            workflow=workflow,
            store=store,
            identity=StaticIdentityProvider.from_config(list(config.sessions)),
        )
        for seed in config.servers:
            try:
                record = store.load("servers", seed.id)
            except NotFoundError:
                platform.add_server(seed.id, list(seed.channels), list(seed.members))
                platform.install(seed.id)
                runtime.persist_server(seed.id)
                continue
            # Replica startup: restore server and task-set state from the store
            # instead of re-installing over it.
            server = platform.add_server(seed.id, record.body["channels"],
                                         record.body["members"])
            server.installed = record.body["installed"]
            tasks_doc = store.load("tasks", seed.id).body
            platform.set_task_set(seed.id, task_set_from_doc(tasks_doc))
        for record in store.list_collection("proposals"):
            workflow.adopt(Proposal.from_doc(record.body))
        return runtime

    def persist_server(self, server_id: str) -> None:
        server = self.platform.servers[server_id]
        self.store.upsert("servers", server_id, {
            "id": server_id,
            "channels": list(server.channels),
            "members": list(server.members),
            "installed": server.installed,
        })
        self.persist_task_set(server_id)

    def persist_task_set(self, server_id: str) -> None:
        task_set = self.platform.live_task_set(server_id)
        self.store.upsert("tasks", server_id, task_set_doc(task_set))


def task_set_doc(task_set: TaskSet) -> dict[str, Any]:
    return {
        "server_id": task_set.server_id,
        "version": task_set.version,
        "tasks": [
            {"id": t.id, "name": t.name, "trigger": t.trigger, "action": t.action}
            for t in task_set.tasks
        ],
    }


def task_set_from_doc(doc: dict[str, Any]) -> TaskSet:
    return TaskSet(
        server_id=doc["server_id"],
        version=doc["version"],
        tasks=tuple(Task(id=t["id"], name=t["name"], trigger=t["trigger"],
                         action=t["action"]) for t in doc["tasks"]),
    )


def proposal_view(proposal: Proposal) -> dict[str, Any]:
    tally = counters(proposal)
    return {**proposal.to_doc(),
            "counters": {"good": tally.good, "bad": tally.bad, "tbd": tally.tbd}}


def parse_changes(raw: Any) -> list[TaskChange]:
    if not isinstance(raw, list):
        raise ValueError("draft must be a list of task changes")
    try:
        return [TaskChange.from_doc(doc) for doc in raw]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed task change: {exc}") from exc


def create_app(runtime: AppRuntime) -> FastAPI:
    app = FastAPI(title="botender", docs_url=None, redoc_url=None)

    # -- error mapping -----------------------------------------------------

    def _error(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"code": code, "message": message})

    @app.exception_handler(GateError)
    async def _gate(_: Request, exc: GateError) -> JSONResponse:
        return _error(422, exc.gate, str(exc))

    @app.exception_handler(StaleReportError)
    async def _stale(_: Request, exc: StaleReportError) -> JSONResponse:
        return _error(409, "stale_report", str(exc))

    @app.exception_handler(ConflictError)
    async def _conflict(_: Request, exc: ConflictError) -> JSONResponse:
        return _error(409, "conflict", str(exc))

    @app.exception_handler(IllegalTransitionError)
    async def _transition(_: Request, exc: IllegalTransitionError) -> JSONResponse:
        return _error(409, "illegal_transition", str(exc))

    @app.exception_handler(NotFoundError)
    async def _missing(_: Request, exc: NotFoundError) -> JSONResponse:
        return _error(404, "not_found", str(exc))

    @app.exception_handler(NotInstalledError)
    async def _uninstalled(_: Request, exc: NotInstalledError) -> JSONResponse:
        return _error(404, "not_installed", str(exc))

    @app.exception_handler(ValueError)
    async def _bad_request(_: Request, exc: ValueError) -> JSONResponse:
        return _error(400, "invalid_request", str(exc))

    @app.exception_handler(HTTPException)
    async def _http(_: Request, exc: HTTPException) -> JSONResponse:
        # Auth errors raise HTTPException with a {code, message} detail;
        # flatten so every error body has the same shape.
        if isinstance(exc.detail, dict):
            return JSONResponse(status_code=exc.status_code, content=exc.detail)
        return _error(exc.status_code, "error", str(exc.detail))

    # -- auth ---------------------------------------------------------------

    def session_dep(x_botender_token: Annotated[str | None, Header()] = None) -> Session:
        session = runtime.identity.authenticate(x_botender_token)
        if session is None:
            raise HTTPException(status_code=401, detail={
                "code": "unauthenticated",
                "message": f"missing or unknown {TOKEN_HEADER} header",
            })
        return session

    SessionDep = Annotated[Session, Depends(session_dep)]

    def authorize(session: Session, server_id: str) -> None:
        if session.role_for(server_id) is None:
            raise HTTPException(status_code=403, detail={
                "code": "forbidden_server",
                "message": f"session has no membership on server {server_id!r}",
            })

    def authorized_proposal(session: Session, proposal_id: str) -> Proposal:
        proposal = runtime.workflow.get(proposal_id)
        authorize(session, proposal.server_id)
        return proposal

    # -- server endpoints ---------------------------------------------------

    @app.get("/servers/{server_id}/tasks")
    def get_tasks(server_id: str, session: SessionDep) -> dict[str, Any]:
        authorize(session, server_id)
        return task_set_doc(runtime.platform.live_task_set(server_id))

    @app.get("/servers/{server_id}/proposals")
    def list_proposals(server_id: str, session: SessionDep) -> dict[str, Any]:
        authorize(session, server_id)
        proposals = runtime.workflow.list_for_server(server_id)
        return {"proposals": [proposal_view(p) for p in proposals]}

    @app.post("/servers/{server_id}/proposals", status_code=201)
    def create_proposal(server_id: str, session: SessionDep,
                        payload: Annotated[dict, Body()]) -> dict[str, Any]:
        authorize(session, server_id)
        seed_case = None
        if payload.get("seed_case"):
            raw = payload["seed_case"]
            seed_case = SeedCase(
                channel=raw["channel"],
                user_message=raw["user_message"],
                triggered_task=raw.get("triggered_task"),
                bot_response=raw.get("bot_response"),
            )
        proposal = runtime.workflow.create_proposal(
            server_id=server_id,
            title=payload.get("title", ""),
            description=payload.get("description", ""),
            author=session.user_id,
            draft=parse_changes(payload.get("draft", [])),
            seed_case=seed_case,
            seed_vote=payload.get("seed_vote", "up"),
        )
        return proposal_view(proposal)

    @app.post("/servers/{server_id}/playground")
    def playground(server_id: str, session: SessionDep,
                   payload: Annotated[dict, Body()]) -> dict[str, Any]:
        authorize(session, server_id)
        task_set = runtime.platform.live_task_set(server_id)
        exchange = handle_message(task_set, payload["channel"], payload["message"],
                                  runtime.gateway)
        return {"triggered_task": exchange.task_name, "bot_response": exchange.response}

    # -- proposal endpoints ---------------------------------------------------

    @app.get("/proposals/{proposal_id}")
    def get_proposal(proposal_id: str, session: SessionDep) -> dict[str, Any]:
        return proposal_view(authorized_proposal(session, proposal_id))

    @app.post("/proposals/{proposal_id}/test")
    def test_proposal(proposal_id: str, session: SessionDep,
                      payload: Annotated[dict, Body()]) -> dict[str, Any]:
        authorized_proposal(session, proposal_id)
        draft = parse_changes(payload.get("draft", []))
        report = runtime.workflow.test_and_generate(proposal_id, draft)
        return report.to_doc()

    @app.post("/proposals/{proposal_id}/edits")
    def save_edit(proposal_id: str, session: SessionDep,
                  payload: Annotated[dict, Body()]) -> dict[str, Any]:
        authorized_proposal(session, proposal_id)
        draft = parse_changes(payload.get("draft", []))
        if payload.get("report_hash") != draft_hash(draft):
            raise StaleReportError(
                "report_hash does not match the submitted draft; run Test + Generate again")
        # Replica-stateless: regressions are recomputed here instead of trusting
        # client-held report rows. Voted generated cases are saved cases by now,
        # so the regression pass covers them too.
        report = runtime.workflow.test_and_generate(proposal_id, draft, generate=False)
        edit = runtime.workflow.save_edit(proposal_id, draft, report, session.user_id)
        return edit.to_doc()

    @app.post("/proposals/{proposal_id}/cases", status_code=201)
    def add_manual_case(proposal_id: str, session: SessionDep,
                        payload: Annotated[dict, Body()]) -> dict[str, Any]:
        authorized_proposal(session, proposal_id)
        case = runtime.workflow.add_manual_case(
            proposal_id,
            channel=payload["channel"],
            user_message=payload["user_message"],
            author=session.user_id,
            direction=payload.get("direction", "up"),
        )
        return case.to_doc()

    @app.post("/cases/{case_id}/votes")
    def vote_case(case_id: str, session: SessionDep,
                  payload: Annotated[dict, Body()]) -> dict[str, Any]:
        direction = payload.get("direction", "")
        report = None
        if "proposal_id" in payload:
            proposal = authorized_proposal(session, payload["proposal_id"])
            if payload.get("case"):
                raw = payload["case"]
                report = TestReport(
                    proposal_id=proposal.id,
                    draft_hash=payload.get("report_hash", ""),
                    base_version=proposal.latest_version,
                    generated=[GeneratedCase(
                        case_id=case_id,
                        kind=raw.get("kind"),
                        channel=raw["channel"],
                        user_message=raw["user_message"],
                        triggered_task=raw.get("triggered_task"),
                        bot_response=raw.get("bot_response"),
                        reasoning=raw.get("reasoning"),
                        selection_reason=raw.get("selection_reason"),
                    )],
                )
            proposal_id = proposal.id
        else:
            proposal, _case = runtime.workflow.find_case(case_id)
            authorize(session, proposal.server_id)
            proposal_id = proposal.id
        ups, downs = runtime.workflow.vote_case(session.user_id, proposal_id, case_id,
                                                direction, report=report)
        return {"case_id": case_id, "ups": ups, "downs": downs}

    @app.post("/proposals/{proposal_id}/deploy-votes")
    def vote_deploy(proposal_id: str, session: SessionDep,
                    payload: Annotated[dict | None, Body()] = None) -> dict[str, Any]:
        authorized_proposal(session, proposal_id)
        direction = (payload or {}).get("direction", "up")
        count = runtime.workflow.vote_deploy(session.user_id, proposal_id, direction)
        return {"deploy_votes": count}

    @app.post("/proposals/{proposal_id}/deploy")
    def deploy(proposal_id: str, session: SessionDep) -> dict[str, Any]:
        proposal = authorized_proposal(session, proposal_id)
        new_set = runtime.workflow.deploy(proposal_id, session.user_id)
        runtime.persist_task_set(proposal.server_id)
        return task_set_doc(new_set)

    @app.post("/proposals/{proposal_id}/status")
    def set_status(proposal_id: str, session: SessionDep,
                   payload: Annotated[dict, Body()]) -> dict[str, Any]:
        authorized_proposal(session, proposal_id)
        proposal = runtime.workflow.set_status(proposal_id, payload.get("to", ""),
                                               session.user_id)
        return proposal_view(proposal)

    return app
