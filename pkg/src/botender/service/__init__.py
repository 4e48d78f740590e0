"""HTTP request layer, persistence, and identity abstraction."""

from botender.service.app import AppRuntime, create_app, proposal_view, task_set_doc
from botender.service.config import ServerSeed, ServiceConfig
from botender.service.identity import (
    ADMIN,
    MEMBER,
    IdentityProvider,
    Session,
    StaticIdentityProvider,
)
from botender.service.store import COLLECTIONS, DocumentStore, PersistenceRecord

__all__ = [
    "ADMIN",
    "AppRuntime",
    "COLLECTIONS",
    "DocumentStore",
    "IdentityProvider",
    "MEMBER",
    "PersistenceRecord",
    "ServerSeed",
    "ServiceConfig",
    "Session",
    "StaticIdentityProvider",
    "create_app",
    "proposal_view",
    "task_set_doc",
]
