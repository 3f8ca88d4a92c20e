"""Session: one clock, one bus, one world, devices and app nodes.

The session owns step ordering: tick the clock, apply queued commands,
step the world (devices sample inside the step), pump replay backends,
then pump application nodes.  External commands only ever enter at step
boundaries, which keeps trajectories reproducible command-stream by
command-stream.
"""

from __future__ import annotations

import logging
import queue
import threading
from dataclasses import dataclass
from typing import Callable, Protocol

from vtui.devices.manager import DeviceManager, VirtualBackend
from vtui.devices.messages import BodyState, WorldState, WrenchWire
from vtui.mathutil import Pose
from vtui.msgbus.bag import BagFile, Recorder, Replayer, record
from vtui.msgbus.bus import Bus
from vtui.msgbus.clock import VirtualClock
from vtui.physics.solver import ContactParams
from vtui.physics.world import World, WrenchCommand
from vtui.scene.types import ModelSpec, SceneSpec
from vtui.scene.validate import validate

log = logging.getLogger(__name__)

WORLD_STATE_TOPIC = "/world/state"
WRENCH_TOPIC = "/world/cmd/wrench"


class NameCollision(ValueError):
    """Instance name already used in this session."""


class ValidationFailed(ValueError):
    def __init__(self, diagnostics):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


class AppNode(Protocol):
    """Application nodes are bus clients pumped once per step."""

    node_id: str

    def pump(self, session: "Session") -> None: ...


@dataclass
class QueuedCommand:
    apply: Callable[["Session"], object]
    done: Callable[[int, object | None, BaseException | None], None] | None = None


class Session:
    def __init__(
        self,
        scene: SceneSpec,
        dt: float = 1e-3,
        seed: int = 0,
        state_decimation: int = 1,
        contact_params: ContactParams | None = None,
        spawn_scene: bool = True,
    ):
        diagnostics = validate(scene)
        if diagnostics:
            raise ValidationFailed(diagnostics)
        self.scene = scene
        self.seed = seed
        self.dt = dt
        self.dt_ns = int(round(dt * 1e9))
        self.clock = VirtualClock.stepped()
        self.bus = Bus(self.clock)
        self.world = World(gravity=scene.gravity, dt=dt, contact_params=contact_params)
        self.manager = DeviceManager(self.bus, self.world, seed=seed)
        self.nodes: list[AppNode] = []
        self.state_decimation = max(1, int(state_decimation))
        self._state_pub = self.bus.advertise("world", WORLD_STATE_TOPIC, WorldState.TYPE_TAG)
        self.world.post_step_hooks.append(self._publish_world_state)
        self._wrench_sub = self.bus.subscribe("world", WRENCH_TOPIC, WrenchWire.TYPE_TAG, 256)
        self._commands: queue.Queue[QueuedCommand] = queue.Queue()
        self._replayers: list[Replayer] = []
        self._post_step: list[Callable[["Session"], None]] = []
        self._lock = threading.Lock()
        if spawn_scene:
            for s in scene.spawns:
                self.spawn(s.model, s.pose, s.instance)

    # -- construction -------------------------------------------------------

    def spawn(self, model: str | ModelSpec, pose: Pose, instance: str, bind: bool = True) -> str:
        """Spawn a model instance; its device topics live under /tui/<instance>/."""
        spec = self.scene.model(model) if isinstance(model, str) else model
        if spec is None:
            raise ValidationFailed([f"unknown model {model!r}"])
        if instance in self.world.instances:
            raise NameCollision(f"instance {instance!r} already exists")
        self.world.spawn_model(spec, pose, instance)
        devices = self.manager.attach_model(spec, instance)
        if bind:
            for device in devices:
                self.manager.bind(device, VirtualBackend())
        return instance

    def add_node(self, node: AppNode) -> AppNode:
        self.nodes.append(node)
        return node

    def add_post_step(self, fn: Callable[["Session"], None]) -> None:
        self._post_step.append(fn)

    def add_session_replay(
        self, bag: BagFile, speed: float = 1.0, remap: dict[str, str] | None = None
    ) -> Replayer:
        """Replay a whole recording into this session as it steps."""
        rp = Replayer(self.bus, bag, speed=speed, remap=remap)
        self._replayers.append(rp)
        return rp

    def record(self, patterns: list[str], sink=None) -> Recorder:
        return record(self.bus, patterns, sink)

    # -- commands -----------------------------------------------------------

    def enqueue(self, cmd: QueuedCommand) -> None:
        """Thread-safe; applied at the next step boundary."""
        self._commands.put(cmd)

    def enqueue_wrench(self, cmd: WrenchCommand, done=None) -> None:
        self.enqueue(QueuedCommand(lambda s: s.world.apply_wrench(cmd), done))

    def _drain_commands(self) -> None:
        while True:
            try:
                cmd = self._commands.get_nowait()
            except queue.Empty:
                break
            result, error = None, None
            try:
                result = cmd.apply(self)
            except Exception as exc:
                error = exc
                log.warning("queued command failed: %s", exc)
            if cmd.done is not None:
                cmd.done(self.world.step_count, result, error)
        for env in self._wrench_sub.drain():
            try:
                wire = WrenchWire.from_bytes(env.payload)
                self.world.apply_wrench(
                    WrenchCommand(
                        body_id=wire.body_id,
                        force=wire.force,
                        torque=wire.torque,
                        application_point=wire.application_point,
                        duration=wire.duration,
                    )
                )
            except Exception as exc:
                log.warning("bad wrench envelope from %s: %s", env.publisher, exc)

    # -- stepping ---------------------------------------------------------------

    def _publish_world_state(self, world: World) -> None:
        if world.step_count % self.state_decimation != 0:
            return
        bodies = tuple(
            BodyState(
                bid,
                world.bodies[bid].position,
                world.bodies[bid].orientation,
                world.bodies[bid].linear_velocity,
                world.bodies[bid].angular_velocity,
            )
            for bid in sorted(world.bodies)
        )
        state = WorldState(world.step_count, self.clock.now, bodies)
        self._state_pub.publish(state.to_bytes())

    def step(self, n: int = 1) -> None:
        with self._lock:
            for _ in range(n):
                self.clock.tick(self.dt_ns)
                self._drain_commands()
                self.world.step()
                self.manager.pump_backends()
                for rp in self._replayers:
                    rp.pump()
                for node in self.nodes:
                    node.pump(self)
                for fn in self._post_step:
                    fn(self)

    def run(self, duration_s: float) -> int:
        steps = int(round(duration_s / self.dt))
        self.step(steps)
        return steps

    @property
    def time_ns(self) -> int:
        return self.clock.now
