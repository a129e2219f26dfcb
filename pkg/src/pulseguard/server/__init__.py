"""Central repository and REST API."""

from pulseguard.server.auth import ACTIONS, ROLE_ACTIONS, Principal, authorize
from pulseguard.server.core import ServerConfig, ServerCore
from pulseguard.server.storage import KVStore

__all__ = [
    "ACTIONS",
    "ROLE_ACTIONS",
    "Principal",
    "authorize",
    "ServerConfig",
    "ServerCore",
    "KVStore",
]
