"""vtui: virtual prototyping toolkit for tangible user interfaces.

Deterministic rigid-body simulation with virtual sensors and actuators,
joined to an in-process pub/sub bus with record/replay and a hardware
abstraction layer, so the same application code drives simulated and
replayed devices interchangeably.
"""

__version__ = "0.1.0"

PROTOCOL_VERSION = 1
SCENE_FORMAT_VERSION = 1
