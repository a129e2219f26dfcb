"""The mobile-application role: decrypt, process, store locally, forward."""

from pulseguard.gateway.store import LocalStore
from pulseguard.gateway.ingest import GatewayIngest, IngestOutcome
from pulseguard.gateway.uploader import ConnectivityState, Uploader

__all__ = [
    "LocalStore",
    "GatewayIngest",
    "IngestOutcome",
    "ConnectivityState",
    "Uploader",
]
