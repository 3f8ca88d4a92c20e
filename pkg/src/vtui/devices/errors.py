"""Device and HAL error types."""


class DeviceError(Exception):
    pass


class NoSuchDevice(DeviceError):
    pass


class AlreadyBound(DeviceError):
    """Exclusive binding violated: the device already has a backend."""


class RateMismatch(DeviceError):
    """Replay bag sample rate differs from the descriptor by more than 10%."""


class DimensionMismatch(DeviceError):
    """Presented frame does not match the display's pixel dimensions."""


class BatteryDepleted(DeviceError):
    """Command rejected because the wired battery is empty."""


class OffSurface(DeviceError):
    """Touch point is not on the display rectangle."""
