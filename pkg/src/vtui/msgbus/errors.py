"""Exception types raised by the bus, bag and replay machinery."""


class BusError(Exception):
    """Base class for all bus-level failures."""


class BadTopicName(BusError):
    """Topic or service name does not match the topic grammar."""


class TypeTagConflict(BusError):
    """Topic already registered with a different type tag."""


class HandleRevoked(BusError):
    """Publisher handle used after its node was shut down."""


class NoSuchService(BusError):
    """Service call to a name with no registered handler."""


class DuplicateService(BusError):
    """Second handler registered for the same service name."""


class ServiceTimeout(BusError):
    """Service handler did not return within the caller's deadline."""


class BagCorrupt(BusError):
    """Bag bytes do not parse: bad magic, truncation, or invalid framing."""


class SinkWriteError(BusError):
    """Recorder could not write the serialized bag to its sink."""
