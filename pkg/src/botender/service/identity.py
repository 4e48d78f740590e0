"""Pluggable identity: sessions list the servers a user may touch."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

MEMBER = "member"
ADMIN = "admin"


@dataclass(frozen=True)
class Session:
    user_id: str
    display_name: str
    servers: tuple[tuple[str, str], ...]  # (server_id, role)

    def role_for(self, server_id: str) -> str | None:
        for sid, role in self.servers:
            if sid == server_id:
                return role
        return None


class IdentityProvider(Protocol):
    def authenticate(self, token: str | None) -> Session | None: ...


class StaticIdentityProvider:
    """Header-token to fixture-session mapping; the test stand-in for real
    vendor OAuth."""

    def __init__(self, sessions: Mapping[str, Session]) -> None:
        self._sessions = dict(sessions)

    @classmethod
    def from_config(cls, entries: Sequence[dict]) -> "StaticIdentityProvider":
        """Build from config rows: {token, user_id, display_name, servers:[{id, role}]}."""
        sessions = {}
        for row in entries:
            sessions[row["token"]] = Session(
                user_id=row["user_id"],
                display_name=row.get("display_name", row["user_id"]),
                servers=tuple((s["id"], s.get("role", MEMBER)) for s in row["servers"]),
            )
        return cls(sessions)

    def authenticate(self, token: str | None) -> Session | None:
        if token is None:
            return None
        return self._sessions.get(token)
