"""Registration authority and authentication verifier."""

from .config import ServerConfig, load_config
from .persist import StateLog
from .service import Dispatcher, ParkingServer, build_server, open_state
from .state import (
    ACCEPT,
    AuthResult,
    EpochState,
    RegisterResult,
    RegistrationRecord,
    RejectReason,
    ServerState,
    StateSnapshot,
)

__all__ = [
    "ServerConfig",
    "load_config",
    "StateLog",
    "Dispatcher",
    "ParkingServer",
    "build_server",
    "open_state",
    "ACCEPT",
    "AuthResult",
    "EpochState",
    "RegisterResult",
    "RegistrationRecord",
    "RejectReason",
    "ServerState",
    "StateSnapshot",
]
