"""Publish/subscribe middleware with services, bags and deterministic replay."""

from .bag import (
    BagFile,
    Recorder,
    ReplayStats,
    Replayer,
    load_bag,
    normalize_bag,
    parse_bag,
    record,
    replay,
    save_bag,
    serialize_bag,
)
from .bus import (
    DEFAULT_QUEUE_DEPTH,
    Bus,
    MessageEnvelope,
    Publisher,
    Subscription,
    pattern_to_regex,
    topic_matches,
    validate_topic_name,
)
from .clock import VirtualClock
from .errors import (
    BadTopicName,
    BagCorrupt,
    BusError,
    DuplicateService,
    HandleRevoked,
    NoSuchService,
    ServiceTimeout,
    SinkWriteError,
    TypeTagConflict,
)

__all__ = [
    "BagFile",
    "Recorder",
    "ReplayStats",
    "Replayer",
    "load_bag",
    "normalize_bag",
    "parse_bag",
    "record",
    "replay",
    "save_bag",
    "serialize_bag",
    "DEFAULT_QUEUE_DEPTH",
    "Bus",
    "MessageEnvelope",
    "Publisher",
    "Subscription",
    "pattern_to_regex",
    "topic_matches",
    "validate_topic_name",
    "VirtualClock",
    "BadTopicName",
    "BagCorrupt",
    "BusError",
    "DuplicateService",
    "HandleRevoked",
    "NoSuchService",
    "ServiceTimeout",
    "SinkWriteError",
    "TypeTagConflict",
]
