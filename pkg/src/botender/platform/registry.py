"""Per-server live task sets, guarded by a server-wide lock for deployment."""

from __future__ import annotations

import threading
from collections import defaultdict

from botender.agents.models import TaskSet
from botender.errors import NotInstalledError


class TaskSetRegistry:
    """Owns the current deployed TaskSet per server.

    Reads hand out immutable snapshots; writers must hold the server lock,
    so the live version advances by exactly one per successful deployment.
    """

    def __init__(self) -> None:
        self._sets: dict[str, TaskSet] = {}
        self._locks: defaultdict[str, threading.RLock] = defaultdict(threading.RLock)

    def has(self, server_id: str) -> bool:
        return server_id in self._sets

    def get(self, server_id: str) -> TaskSet:
        try:
            return self._sets[server_id]
        except KeyError:
            raise NotInstalledError(f"server {server_id!r} has no installed task set") from None

    def set(self, server_id: str, task_set: TaskSet) -> None:
        self._sets[server_id] = task_set

    def lock(self, server_id: str) -> threading.RLock:
        return self._locks[server_id]
