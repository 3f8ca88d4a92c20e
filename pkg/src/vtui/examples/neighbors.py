"""Sifteo-style neighbor detection from per-face proximity streams."""

from __future__ import annotations

from dataclasses import dataclass, field

from vtui.devices.messages import ProximitySample
from vtui.examples.face import Face


@dataclass
class NeighborDetector:
    """Debounced per-face adjacency: a face counts as adjacent once its
    distance has been within `threshold` for `debounce` consecutive samples."""

    threshold: float
    debounce: int = 3
    _streak: dict[Face, int] = field(default_factory=dict)
    _last_distance: dict[Face, float] = field(default_factory=dict)

    def update(self, face: Face, sample: ProximitySample) -> None:
        hit = sample.distance is not None and sample.distance <= self.threshold
        if hit:
            self._streak[face] = self._streak.get(face, 0) + 1
            self._last_distance[face] = sample.distance
        else:
            self._streak[face] = 0
            self._last_distance.pop(face, None)

    def adjacent(self) -> frozenset[Face]:
        return frozenset(f for f, n in self._streak.items() if n >= self.debounce)

    def last_distance(self, face: Face) -> float | None:
        return self._last_distance.get(face)


def pair_adjacency(
    a_name: str,
    a: NeighborDetector,
    b_name: str,
    b: NeighborDetector,
    distance_tol: float = 0.005,
) -> set[tuple[str, str]]:
    """Match adjacent faces across two devices: both see the same gap."""
    pairs = set()
    for fa in a.adjacent():
        for fb in b.adjacent():
            da, db = a.last_distance(fa), b.last_distance(fb)
            if da is not None and db is not None and abs(da - db) <= distance_tol:
                pairs.add((f"{a_name}.{fa.value}", f"{b_name}.{fb.value}"))
    return pairs


class SifteoNode:
    """App node publishing a cube's debounced adjacency on /app/sifteo/<name>/neighbors.

    Subscribes only to the cube's proximity sample topics (HAL contract).
    """

    def __init__(self, bus, instance: str, faces: dict[Face, str], threshold: float):
        self.node_id = f"sifteo:{instance}"
        self.instance = instance
        self.detector = NeighborDetector(threshold)
        self._subs = {
            face: bus.subscribe(
                self.node_id, f"/tui/{instance}/{device_id}/sample", "ProximitySample", 64
            )
            for face, device_id in faces.items()
        }
        self._pub = bus.advertise(
            self.node_id, f"/app/sifteo/{instance}/neighbors", "NeighborSet"
        )
        self._last_published: frozenset[Face] | None = None

    def pump(self, session) -> None:
        for face, sub in self._subs.items():
            for env in sub.drain():
                self.detector.update(face, ProximitySample.from_bytes(env.payload))
        current = self.detector.adjacent()
        if current != self._last_published:
            payload = ",".join(sorted(f.value for f in current)).encode()
            self._pub.publish(payload)
            self._last_published = current
