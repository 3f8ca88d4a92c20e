"""Live devices and the hardware abstraction layer.

Every device owns the topics ``/tui/<instance>/<device>/<channel>`` with
channels `sample`, `frame`, `touch`, `battery` and `cmd`.  A device is
*bound* to exactly one backend at a time: `virtual` samples the simulated
world, `replay` re-publishes a recorded bag onto the same topics, and
`scripted` plays a prepared sample stream.  Consumers see identical topic
names, type tags and rates regardless of the backend.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from vtui.devices.errors import (
    AlreadyBound,
    BatteryDepleted,
    DimensionMismatch,
    NoSuchDevice,
    OffSurface,
    RateMismatch,
)
from vtui.devices.messages import (
    AccelSample,
    BatteryState,
    ChargeCommand,
    ContactEvent,
    ContactEvents,
    DisplayFrame,
    ProximitySample,
    TouchEvent,
)
from vtui.devices.sampling import (
    device_world_pose,
    map_touch_point,
    mount_ray,
    proper_acceleration,
)
from vtui.mathutil import qmul, vscale
from vtui.msgbus.bag import Replayer

if TYPE_CHECKING:  # type-only: keeps device modules importable without physics
    from vtui.devices.descriptors import DeviceDescriptor, DisplaySpec
    from vtui.msgbus.bag import BagFile
    from vtui.msgbus.bus import Bus
    from vtui.physics.world import World
    from vtui.scene.pose import Pose
    from vtui.scene.types import ModelSpec

log = logging.getLogger(__name__)


def device_topic(instance: str, device_id: str, channel: str) -> str:
    return f"/tui/{instance}/{device_id}/{channel}"


# -- backends ------------------------------------------------------------------


@dataclass(frozen=True)
class VirtualBackend:
    """Samples are produced by the simulation itself."""

    kind = "virtual"


@dataclass(frozen=True)
class ReplayBackend:
    """Samples come from a recorded bag, republished when due."""

    bag: BagFile
    remap: dict[str, str] = field(default_factory=dict)
    speed: float = 1.0

    kind = "replay"


@dataclass(frozen=True)
class ScriptedBackend:
    """Samples come from a prepared (due_ns, payload) stream."""

    samples: tuple[tuple[int, bytes], ...]
    channel: str = "sample"

    kind = "scripted"


class _ScriptedPump:
    def __init__(self, bus: Bus, topic: str, type_tag: str, path: str, samples):
        self._pub = bus.advertise(f"scripted:{path}", topic, type_tag)
        self._bus = bus
        self._samples = sorted(samples, key=lambda s: s[0])
        self._next = 0

    def pump(self) -> int:
        now = self._bus.clock.now
        sent = 0
        while self._next < len(self._samples) and self._samples[self._next][0] <= now:
            self._pub.publish(self._samples[self._next][1])
            self._next += 1
            sent += 1
        return sent


# -- devices ----------------------------------------------------------------------


class Device:
    kind = "device"
    sample_type_tag: str | None = None

    def __init__(self, manager: "DeviceManager", instance: str, device_id: str, body_id: int,
                 mount_pose: Pose, rate: float, battery: str | None):
        self.manager = manager
        self.instance = instance
        self.device_id = device_id
        self.body_id = body_id
        self.mount_pose = mount_pose
        self.rate = rate
        self.battery_id = battery
        self.path = f"{instance}/{device_id}"
        dt = manager.world.dt
        k = round(1.0 / (dt * rate))
        if k < 1 or abs(k * rate * dt - 1.0) > 1e-9:
            raise ValueError(
                f"device {self.path}: rate {rate} Hz does not divide the {1.0 / dt:.0f} Hz step rate"
            )
        self.steps_per_sample = k
        self.binding: object | None = None
        self.published = 0

    def topic(self, channel: str) -> str:
        return device_topic(self.instance, self.device_id, channel)

    @property
    def node(self) -> str:
        return f"dev:{self.path}"

    def due(self, world: World) -> bool:
        return world.step_count % self.steps_per_sample == 0

    def powered(self) -> bool:
        return self.manager.powered(self)

    def virtual(self) -> bool:
        return isinstance(self.binding, VirtualBackend)

    def count_publish(self) -> None:
        self.published += 1
        self.manager.count_message(self)

    def on_step(self, world: World, stamp_ns: int) -> None:
        raise NotImplementedError


class AccelerometerDevice(Device):
    kind = "accelerometer"
    sample_type_tag = AccelSample.TYPE_TAG

    def __init__(self, manager, instance, desc: DeviceDescriptor, body_id):
        super().__init__(manager, instance, desc.device_id, body_id, desc.mount_pose,
                         desc.rate, desc.battery)
        self.noise_sigma = desc.noise_sigma
        self._pub = manager.bus.advertise(self.node, self.topic("sample"), AccelSample.TYPE_TAG)
        self._rng = manager.device_rng(self.path)
        body = manager.world.body(body_id)
        self._prev_v = body.velocity_at(
            device_world_pose(body.position, body.orientation, self.mount_pose).position
        )
        self._interval_s = self.steps_per_sample * manager.world.dt

    def current_sample(self, world: World, stamp_ns: int, advance: bool = True) -> AccelSample:
        body = world.body(self.body_id)
        pose = device_world_pose(body.position, body.orientation, self.mount_pose)
        v_now = body.velocity_at(pose.position)
        q_dev = qmul(body.orientation, self.mount_pose.orientation)
        accel = proper_acceleration(v_now, self._prev_v, self._interval_s, q_dev, world.gravity)
        if advance:
            self._prev_v = v_now
        if self.noise_sigma > 0.0:
            accel = (
                accel[0] + self._rng.gauss(0.0, self.noise_sigma),
                accel[1] + self._rng.gauss(0.0, self.noise_sigma),
                accel[2] + self._rng.gauss(0.0, self.noise_sigma),
            )
        return AccelSample(stamp_ns, accel)

    def on_step(self, world: World, stamp_ns: int) -> None:
        if not self.due(world):
            return
        if self.virtual() and self.powered():
            sample = self.current_sample(world, stamp_ns)
            self._pub.publish(sample.to_bytes())
            self.count_publish()
        else:  # keep the finite-difference state fresh across rebinds
            body = world.body(self.body_id)
            pose = device_world_pose(body.position, body.orientation, self.mount_pose)
            self._prev_v = body.velocity_at(pose.position)


class ProximityDevice(Device):
    kind = "proximity"
    sample_type_tag = ProximitySample.TYPE_TAG

    def __init__(self, manager, instance, desc: DeviceDescriptor, body_id):
        super().__init__(manager, instance, desc.device_id, body_id, desc.mount_pose,
                         desc.rate, desc.battery)
        self.max_range = desc.max_range
        self._pub = manager.bus.advertise(
            self.node, self.topic("sample"), ProximitySample.TYPE_TAG
        )

    def current_sample(self, world: World, stamp_ns: int) -> ProximitySample:
        body = world.body(self.body_id)
        origin, direction = mount_ray(body.position, body.orientation, self.mount_pose)
        hit = world.raycast(origin, direction, self.max_range, exclude={self.body_id})
        return ProximitySample(stamp_ns, hit.distance if hit else None)

    def on_step(self, world: World, stamp_ns: int) -> None:
        if not (self.due(world) and self.virtual() and self.powered()):
            return
        self._pub.publish(self.current_sample(world, stamp_ns).to_bytes())
        self.count_publish()


class ContactSensorDevice(Device):
    kind = "contact"
    sample_type_tag = ContactEvents.TYPE_TAG

    def __init__(self, manager, instance, desc: DeviceDescriptor, body_id):
        super().__init__(manager, instance, desc.device_id, body_id, desc.mount_pose,
                         desc.rate, desc.battery)
        self._pub = manager.bus.advertise(self.node, self.topic("sample"), ContactEvents.TYPE_TAG)

    def current_sample(self, world: World, stamp_ns: int) -> ContactEvents:
        events = []
        inv_dt = 1.0 / world.dt
        for c in world.last_contacts:
            if c.body_a == self.body_id:
                other, normal = c.body_b, c.normal
            elif c.body_b == self.body_id:
                other, normal = c.body_a, vscale(c.normal, -1.0)
            else:
                continue
            events.append(
                ContactEvent(other, c.point, normal, c.applied_normal_impulse * inv_dt)
            )
        return ContactEvents(stamp_ns, tuple(events))

    def on_step(self, world: World, stamp_ns: int) -> None:
        if not (self.due(world) and self.virtual() and self.powered()):
            return
        self._pub.publish(self.current_sample(world, stamp_ns).to_bytes())
        self.count_publish()


class BatteryDevice(Device):
    kind = "battery"
    sample_type_tag = BatteryState.TYPE_TAG

    def __init__(self, manager, instance, desc: DeviceDescriptor, body_id):
        super().__init__(manager, instance, desc.device_id, body_id, desc.mount_pose,
                         desc.rate, None)
        self.capacity_j = desc.capacity_j
        self.idle_w = desc.idle_w
        self.message_cost_j = desc.message_cost_j
        self.charge_j = desc.capacity_j
        self.pending_messages = 0
        self._pub = manager.bus.advertise(self.node, self.topic("battery"), BatteryState.TYPE_TAG)
        self._cmd = manager.bus.subscribe(self.node, self.topic("cmd"), ChargeCommand.TYPE_TAG)
        self._interval_s = self.steps_per_sample * manager.world.dt

    @property
    def depleted(self) -> bool:
        return self.charge_j <= 0.0

    @property
    def charge_fraction(self) -> float:
        return max(0.0, min(1.0, self.charge_j / self.capacity_j))

    def charge(self, amount_j: float) -> None:
        self.charge_j = min(self.capacity_j, max(0.0, self.charge_j) + amount_j)

    def state(self, stamp_ns: int) -> BatteryState:
        return BatteryState(stamp_ns, self.charge_fraction, self.depleted)

    def on_step(self, world: World, stamp_ns: int) -> None:
        for env in self._cmd.drain():
            try:
                self.charge(ChargeCommand.from_bytes(env.payload).amount_j)
            except Exception:
                log.warning("battery %s: bad charge command dropped", self.path)
        if not self.due(world):
            return
        self.charge_j -= self.idle_w * self._interval_s
        self.charge_j -= self.message_cost_j * self.pending_messages
        self.pending_messages = 0
        if self.charge_j < 0.0:
            self.charge_j = 0.0
        if self.virtual():
            self._pub.publish(self.state(stamp_ns).to_bytes())


class DisplayDevice(Device):
    kind = "display"
    sample_type_tag = DisplayFrame.TYPE_TAG

    def __init__(self, manager, instance, spec: DisplaySpec, body_id):
        super().__init__(manager, instance, spec.display_id, body_id, spec.mount_pose,
                         spec.rate, spec.battery)
        self.spec = spec
        self.current_frame: DisplayFrame | None = None
        self.frame_version = 0
        self._pub_frame = manager.bus.advertise(self.node, self.topic("frame"), DisplayFrame.TYPE_TAG)
        self._pub_touch = manager.bus.advertise(self.node, self.topic("touch"), TouchEvent.TYPE_TAG)
        self._cmd = manager.bus.subscribe(self.node, self.topic("cmd"), DisplayFrame.TYPE_TAG, 16)
        self._touch_active = False
        self._touch_pixel: tuple[int, int] | None = None
        self.rejected_frames = 0

    def mount_world(self, world: World) -> Pose:
        body = world.body(self.body_id)
        return device_world_pose(body.position, body.orientation, self.mount_pose)

    def present(self, frame: DisplayFrame) -> None:
        """Make `frame` the display's texture and republish it for renderers."""
        if frame.width != self.spec.width or frame.height != self.spec.height:
            raise DimensionMismatch(
                f"display {self.path} is {self.spec.width}x{self.spec.height}, "
                f"frame is {frame.width}x{frame.height}"
            )
        if not self.powered():
            raise BatteryDepleted(f"display {self.path} has no power")
        self.current_frame = frame
        self.frame_version += 1
        self._pub_frame.publish(frame.to_bytes())
        self.count_publish()

    def map_touch(self, world: World, world_point) -> tuple[int, int]:
        return map_touch_point(
            self.mount_world(world),
            self.spec.rect_w,
            self.spec.rect_h,
            self.spec.width,
            self.spec.height,
            world_point,
        )

    def inject_touch(self, u: int, v: int, phase: str, source: str, stamp_ns: int) -> None:
        if not (0 <= u < self.spec.width and 0 <= v < self.spec.height):
            raise OffSurface(f"pixel ({u}, {v}) outside {self.spec.width}x{self.spec.height}")
        if not self.powered():
            raise BatteryDepleted(f"display {self.path} has no power")
        event = TouchEvent(self.device_id, u, v, phase, source, stamp_ns)
        self._pub_touch.publish(event.to_bytes())
        self.count_publish()

    def _scan_contact_touch(self, world: World, stamp_ns: int) -> None:
        pixel = None
        for c in world.last_contacts:
            if c.body_a != self.body_id and c.body_b != self.body_id:
                continue
            try:
                pixel = self.map_touch(world, c.point)
                break
            except OffSurface:
                continue
        if pixel is not None:
            if not self._touch_active:
                self.inject_touch(pixel[0], pixel[1], "down", "contact", stamp_ns)
            elif pixel != self._touch_pixel:
                self.inject_touch(pixel[0], pixel[1], "move", "contact", stamp_ns)
            self._touch_active = True
            self._touch_pixel = pixel
        elif self._touch_active:
            last = self._touch_pixel or (0, 0)
            self.inject_touch(last[0], last[1], "up", "contact", stamp_ns)
            self._touch_active = False
            self._touch_pixel = None

    def on_step(self, world: World, stamp_ns: int) -> None:
        if not self.virtual():
            self._cmd.drain()
            return
        for env in self._cmd.drain():
            try:
                self.present(DisplayFrame.from_bytes(env.payload))
            except (ValueError, DimensionMismatch, BatteryDepleted, IndexError):
                self.rejected_frames += 1
        if self.due(world) and self.powered():
            self._scan_contact_touch(world, stamp_ns)


_SENSOR_CLASSES = {
    "accelerometer": AccelerometerDevice,
    "proximity": ProximityDevice,
    "contact": ContactSensorDevice,
    "battery": BatteryDevice,
}


class DeviceManager:
    """Creates, powers, binds and steps every device of every instance."""

    def __init__(self, bus: Bus, world: World, seed: int = 0):
        self.bus = bus
        self.world = world
        self.seed = seed
        self.devices: dict[str, Device] = {}
        self._order: list[Device] = []
        self._pumps: list[tuple[Device, object]] = []
        world.post_step_hooks.append(self._on_world_step)

    def device_rng(self, path: str) -> random.Random:
        return random.Random(f"{self.seed}:{path}")

    def attach_model(self, model: ModelSpec, instance: str) -> list[Device]:
        """Instantiate the model's devices and displays; they start unbound."""
        link_ids = self.world.instances[instance]
        created: list[Device] = []
        for desc in model.devices:
            cls = _SENSOR_CLASSES.get(desc.kind)
            if cls is None:  # display/touchscreen descriptors ride DisplaySpec
                raise ValueError(f"device kind {desc.kind!r} must be declared as a display")
            device = cls(self, instance, desc, link_ids[desc.mount_link])
            self._register(device)
            created.append(device)
        for disp in model.displays:
            device = DisplayDevice(self, instance, disp, link_ids[disp.mount_link])
            self._register(device)
            created.append(device)
        return created

    def _register(self, device: Device) -> None:
        if device.path in self.devices:
            raise ValueError(f"device {device.path} already attached")
        self.devices[device.path] = device
        self._order.append(device)

    def device(self, instance: str, device_id: str) -> Device:
        dev = self.devices.get(f"{instance}/{device_id}")
        if dev is None:
            raise NoSuchDevice(f"no device {instance}/{device_id}")
        return dev

    def displays(self) -> list[DisplayDevice]:
        return [d for d in self._order if isinstance(d, DisplayDevice)]

    # -- power ---------------------------------------------------------------

    def battery_of(self, device: Device) -> BatteryDevice | None:
        if device.battery_id is None:
            return None
        batt = self.devices.get(f"{device.instance}/{device.battery_id}")
        return batt if isinstance(batt, BatteryDevice) else None

    def powered(self, device: Device) -> bool:
        batt = self.battery_of(device)
        return batt is None or not batt.depleted

    def count_message(self, device: Device) -> None:
        batt = self.battery_of(device)
        if batt is not None:
            batt.pending_messages += 1

    # -- HAL binding ------------------------------------------------------------

    def bind(self, device: Device | str, backend) -> Device:
        if isinstance(device, str):
            instance, _, device_id = device.partition("/")
            device = self.device(instance, device_id)
        if device.binding is not None:
            raise AlreadyBound(f"device {device.path} already bound to {device.binding.kind}")
        if isinstance(backend, ReplayBackend):
            self._check_replay_rate(device, backend)
            prefix = f"/tui/{device.instance}/{device.device_id}/"
            pump = Replayer(
                self.bus,
                backend.bag,
                speed=backend.speed,
                remap=backend.remap,
                topic_filter=lambda t: t.startswith(prefix),
            )
            self._pumps.append((device, pump))
        elif isinstance(backend, ScriptedBackend):
            tag = device.sample_type_tag or "Bytes"
            pump = _ScriptedPump(
                self.bus, device.topic(backend.channel), tag, device.path, backend.samples
            )
            self._pumps.append((device, pump))
        elif not isinstance(backend, VirtualBackend):
            raise TypeError(f"unknown backend {backend!r}")
        device.binding = backend
        return device

    def unbind(self, device: Device | str) -> None:
        if isinstance(device, str):
            instance, _, device_id = device.partition("/")
            device = self.device(instance, device_id)
        device.binding = None
        self._pumps = [(d, p) for d, p in self._pumps if d is not device]

    def bind_all_virtual(self) -> None:
        for device in self._order:
            if device.binding is None:
                self.bind(device, VirtualBackend())

    def _check_replay_rate(self, device: Device, backend: ReplayBackend) -> None:
        topic = backend.remap.get(device.topic("sample"), device.topic("sample"))
        # the remap maps original -> new names; search both directions
        sources = [t for t, target in backend.remap.items() if target == device.topic("sample")]
        candidates = sources or [topic]
        stamps = [
            r.stamp
            for r in backend.bag.records
            if r.topic in candidates
        ]
        if len(stamps) < 2 or device.kind in ("display", "touchscreen"):
            return
        span = stamps[-1] - stamps[0]
        if span <= 0:
            return
        bag_rate = (len(stamps) - 1) / (span / 1e9) * backend.speed
        if abs(bag_rate - device.rate) > 0.10 * device.rate:
            raise RateMismatch(
                f"bag provides {bag_rate:.1f} Hz on {device.path}, descriptor wants {device.rate} Hz"
            )

    # -- stepping ------------------------------------------------------------------

    def _on_world_step(self, world: World) -> None:
        stamp = self.bus.clock.now
        for device in self._order:
            device.on_step(world, stamp)

    def pump_backends(self) -> int:
        """Publish everything due from replay/scripted backends."""
        sent = 0
        for _, pump in self._pumps:
            sent += pump.pump()
        return sent
