"""Exception hierarchy shared by every zkpark module."""


class ZkParkError(Exception):
    """Base class for all zkpark errors."""


class DivisionByZero(ZkParkError, ZeroDivisionError):
    pass


class ConfigError(ZkParkError, ValueError):
    pass


class ArgumentError(ZkParkError, ValueError):
    pass


class DecodeError(ZkParkError, ValueError):
    """Bytes that do not describe a canonical value (bad length, off-curve point, ...)."""


class CapacityError(ZkParkError):
    pass


class NotFoundError(ZkParkError, LookupError):
    pass


class UnsatisfiedWitness(ZkParkError):
    """Raised by the prover when the assignment does not satisfy the circuit."""


class ReassemblyTimeout(ZkParkError, TimeoutError):
    pass


class ConnectError(ZkParkError, ConnectionError):
    pass
