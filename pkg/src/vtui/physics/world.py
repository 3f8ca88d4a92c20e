"""Deterministic fixed-step rigid-body world.

Each step: integrate forces (gravity, wrenches, gyroscopic term), detect
contacts, run a fixed-count sequential-impulse pass over joints and
contacts, integrate poses, then verify every state component is finite.
Bodies and contact pairs are always visited in id order so that two worlds
fed identical commands produce bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from vtui.physics.collision import Contact, RayHit, collide, raycast_bodies
from vtui.physics.joints import JointRuntime
from vtui.mathutil import (
    Mat3,
    Quat,
    Vec3,
    ZERO3,
    mmul,
    mtranspose,
    quat_integrate,
    quat_to_mat3,
    vadd,
    vcross,
    vdot,
    vfinite,
    vnorm,
    vscale,
    vsub,
)
from vtui.physics.solver import ContactConstraint, ContactParams
from vtui.scene.inertia import auto_inertia
from vtui.scene.pose import Pose
from vtui.scene.types import LinkSpec, ModelSpec, StaticPlane


class PhysicsError(Exception):
    pass


class NumericalDivergence(PhysicsError):
    """A step produced non-finite state; the world was left unchanged."""


class NoSuchBody(PhysicsError):
    pass


class StaticBody(PhysicsError):
    pass


IMPULSE = 0.0  # WrenchCommand duration sentinel: apply for exactly one step


@dataclass(frozen=True)
class WrenchCommand:
    """External 6-DoF force/torque on a body, active for a duration.

    `application_point` is in the body frame (None means center of mass);
    a force applied off-center induces the torque r x F on top of `torque`.
    """

    body_id: int
    force: Vec3 = ZERO3
    torque: Vec3 = ZERO3
    application_point: Vec3 | None = None
    duration: float = IMPULSE


class Body:
    """Maximal-coordinate rigid body; static when the link mass is 0."""

    def __init__(self, body_id: int, instance: str, link: LinkSpec, pose: Pose):
        self.body_id = body_id
        self.instance = instance
        self.link = link
        self.position: Vec3 = pose.position
        self.orientation: Quat = pose.orientation
        self.linear_velocity: Vec3 = ZERO3
        self.angular_velocity: Vec3 = ZERO3
        self.accumulated_force: Vec3 = ZERO3
        self.accumulated_torque: Vec3 = ZERO3
        self.is_static = link.mass == 0.0
        self.friction_mu = link.friction_mu
        self.restitution = link.restitution
        if self.is_static:
            self.inv_mass = 0.0
            self.inertia_body: Mat3 = ((0.0,) * 3,) * 3
            self._inv_inertia_body: Mat3 = ((0.0,) * 3,) * 3
        else:
            self.inv_mass = 1.0 / link.mass
            self.inertia_body = link.inertia if link.inertia is not None else auto_inertia(
                link.geometry, link.mass
            )
            self._inv_inertia_body = _inverse_diag_or_full(self.inertia_body)
        self._inv_inertia_world: Mat3 | None = None
        self.clamped_last_step = False
        self.sleeping = False
        self.low_motion_s = 0.0

    @property
    def name(self) -> str:
        return f"{self.instance}/{self.link.name}"

    @property
    def mass(self) -> float:
        return self.link.mass

    def refresh_world_inertia(self) -> None:
        if self.is_static:
            self._inv_inertia_world = ((0.0,) * 3,) * 3
            return
        r = quat_to_mat3(self.orientation)
        self._inv_inertia_world = mmul(mmul(r, self._inv_inertia_body), mtranspose(r))

    def inv_inertia_world(self) -> Mat3:
        if self._inv_inertia_world is None:
            self.refresh_world_inertia()
        return self._inv_inertia_world

    def apply_inv_inertia(self, v: Vec3) -> Vec3:
        m = self.inv_inertia_world()
        return (
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        )

    def inertia_world(self) -> Mat3:
        r = quat_to_mat3(self.orientation)
        return mmul(mmul(r, self.inertia_body), mtranspose(r))

    def velocity_at(self, world_point: Vec3) -> Vec3:
        r = vsub(world_point, self.position)
        return vadd(self.linear_velocity, vcross(self.angular_velocity, r))

    def pose(self) -> Pose:
        return Pose(self.position, self.orientation)


def _inverse_diag_or_full(m: Mat3) -> Mat3:
    from vtui.mathutil import minverse

    if m[0][1] == 0.0 and m[0][2] == 0.0 and m[1][0] == 0.0 and m[1][2] == 0.0 and m[2][0] == 0.0 and m[2][1] == 0.0:
        return (
            (1.0 / m[0][0], 0.0, 0.0),
            (0.0, 1.0 / m[1][1], 0.0),
            (0.0, 0.0, 1.0 / m[2][2]),
        )
    return minverse(m)


@dataclass
class _ActiveWrench:
    cmd: WrenchCommand
    steps_remaining: int


@dataclass
class SleepConfig:
    enabled: bool = False
    linear_threshold: float = 1e-3  # m/s
    angular_threshold: float = 1e-2  # rad/s
    time_s: float = 0.5


class World:
    def __init__(
        self,
        gravity: Vec3 = (0.0, 0.0, -9.81),
        dt: float = 1e-3,
        contact_params: ContactParams | None = None,
        sleep: SleepConfig | None = None,
    ):
        if dt <= 0.0:
            raise ValueError("dt must be > 0")
        self.gravity = gravity
        self.dt = dt
        self.contact_params = contact_params or ContactParams()
        self.sleep = sleep or SleepConfig()
        self.step_count = 0
        self.bodies: dict[int, Body] = {}
        self.joints: list[JointRuntime] = []
        self._jointed_pairs: set[frozenset[int]] = set()  # no self-collision across a joint
        self.instances: dict[str, dict[str, int]] = {}  # instance -> link name -> body id
        self.last_contacts: list[Contact] = []
        self.post_step_hooks: list[Callable[["World"], None]] = []
        self._wrenches: list[_ActiveWrench] = []
        self._next_id = 1

    @property
    def time_s(self) -> float:
        return self.step_count * self.dt

    # -- construction -----------------------------------------------------

    def spawn_model(self, model: ModelSpec, pose: Pose, instance: str) -> dict[str, int]:
        """Add one instance of a model; returns link name -> body id."""
        if instance in self.instances:
            raise ValueError(f"instance name {instance!r} already spawned")
        ids: dict[str, int] = {}
        body_of: dict[str, Body] = {}
        for link in model.links:
            body = Body(self._next_id, instance, link, pose.compose(link.initial_pose))
            self.bodies[body.body_id] = body
            ids[link.name] = body.body_id
            body_of[link.name] = body
            self._next_id += 1
        for joint_spec in model.joints:
            self.joints.append(
                JointRuntime(joint_spec, body_of[joint_spec.parent], body_of[joint_spec.child])
            )
            self._jointed_pairs.add(
                frozenset((ids[joint_spec.parent], ids[joint_spec.child]))
            )
        self.instances[instance] = ids
        return ids

    def body(self, body_id: int) -> Body:
        try:
            return self.bodies[body_id]
        except KeyError:
            raise NoSuchBody(f"no body {body_id}") from None

    def body_by_name(self, instance: str, link: str) -> Body:
        try:
            return self.bodies[self.instances[instance][link]]
        except KeyError:
            raise NoSuchBody(f"no body {instance}/{link}") from None

    # -- commands -----------------------------------------------------------

    def apply_wrench(self, cmd: WrenchCommand) -> int:
        """Queue a wrench; active starting with the next step.  Returns the
        number of steps it will act for."""
        body = self.body(cmd.body_id)
        if body.is_static:
            raise StaticBody(f"body {cmd.body_id} is static")
        if cmd.duration == IMPULSE:
            steps = 1
        elif cmd.duration >= self.dt:
            steps = int(round(cmd.duration / self.dt))
        else:
            raise ValueError("duration must be >= dt or the one-step impulse sentinel")
        if not (vfinite(cmd.force) and vfinite(cmd.torque)):
            raise ValueError("wrench components must be finite")
        self._wrenches.append(_ActiveWrench(cmd, steps))
        body.sleeping = False
        body.low_motion_s = 0.0
        return steps

    def set_sphere_radius(self, body_id: int, radius: float) -> None:
        """Resize a spherical body (actuation hook; mass is preserved)."""
        import dataclasses

        from vtui.scene.types import Sphere

        body = self.body(body_id)
        if not isinstance(body.link.geometry, Sphere):
            raise ValueError(f"body {body_id} is not a sphere")
        if radius <= 0.0:
            raise ValueError("radius must be > 0")
        auto = body.link.inertia is None
        body.link = dataclasses.replace(body.link, geometry=Sphere(radius))
        if not body.is_static and auto:
            body.inertia_body = auto_inertia(body.link.geometry, body.link.mass)
            body._inv_inertia_body = _inverse_diag_or_full(body.inertia_body)
            body.refresh_world_inertia()

    # -- queries -------------------------------------------------------------

    def detect_contacts(self) -> list[Contact]:
        """Contacts between all supported shape pairs, ordered by (id, id)."""
        out: list[Contact] = []
        ids = sorted(self.bodies)
        for i, ida in enumerate(ids):
            a = self.bodies[ida]
            for idb in ids[i + 1 :]:
                b = self.bodies[idb]
                if a.is_static and b.is_static:
                    continue
                if frozenset((ida, idb)) in self._jointed_pairs:
                    continue
                out.extend(
                    collide(
                        ida,
                        a.link.geometry,
                        a.position,
                        a.orientation,
                        idb,
                        b.link.geometry,
                        b.position,
                        b.orientation,
                    )
                )
        return out

    def raycast(
        self, origin: Vec3, direction: Vec3, max_range: float, exclude: set[int] | None = None
    ) -> RayHit | None:
        bodies = (
            (bid, self.bodies[bid].link.geometry, self.bodies[bid].position, self.bodies[bid].orientation)
            for bid in sorted(self.bodies)
        )
        return raycast_bodies(origin, direction, max_range, bodies, exclude)

    # -- stepping --------------------------------------------------------------

    def _snapshot(self):
        return [
            (
                b.body_id,
                b.position,
                b.orientation,
                b.linear_velocity,
                b.angular_velocity,
                b.clamped_last_step,
            )
            for b in self._sorted_bodies()
        ]

    def _restore(self, snap) -> None:
        for body_id, pos, quat, lin, ang, clamped in snap:
            b = self.bodies[body_id]
            b.position = pos
            b.orientation = quat
            b.linear_velocity = lin
            b.angular_velocity = ang
            b.clamped_last_step = clamped
            b.refresh_world_inertia()

    def _sorted_bodies(self) -> list[Body]:
        return [self.bodies[i] for i in sorted(self.bodies)]

    def _integrate_forces(self) -> None:
        dt = self.dt
        per_body_forces: dict[int, tuple[Vec3, Vec3]] = {}
        for aw in self._wrenches:
            body = self.bodies.get(aw.cmd.body_id)
            if body is None:
                continue
            force, torque = per_body_forces.get(body.body_id, (ZERO3, ZERO3))
            force = vadd(force, aw.cmd.force)
            torque = vadd(torque, aw.cmd.torque)
            if aw.cmd.application_point is not None:
                r_world = body.pose().rotate_vector(aw.cmd.application_point)
                torque = vadd(torque, vcross(r_world, aw.cmd.force))
            per_body_forces[body.body_id] = (force, torque)

        for body in self._sorted_bodies():
            if body.is_static:
                continue
            body.refresh_world_inertia()
            force, torque = per_body_forces.get(body.body_id, (ZERO3, ZERO3))
            body.accumulated_force = force
            body.accumulated_torque = torque
            if body.sleeping:
                continue
            accel = vadd(self.gravity, vscale(force, body.inv_mass))
            body.linear_velocity = vadd(body.linear_velocity, vscale(accel, dt))
            omega = body.angular_velocity
            inertia_w = body.inertia_world()
            gyro = vcross(omega, _mat_vec(inertia_w, omega))
            ang_accel = body.apply_inv_inertia(vsub(torque, gyro))
            body.angular_velocity = vadd(omega, vscale(ang_accel, dt))

    def _solve(self, contacts: list[Contact]) -> None:
        params = self.contact_params
        constraints = []
        for contact in contacts:
            a = self.bodies[contact.body_a]
            b = self.bodies[contact.body_b]
            if a.sleeping and b.sleeping:
                continue
            if a.sleeping or b.sleeping:
                (a if a.sleeping else b).sleeping = False
            constraints.append(ContactConstraint(contact, a, b, self.dt, params))
        for joint in self.joints:
            joint.prepare(self.dt, params.baumgarte_beta)
        for _ in range(params.solver_iterations):
            for joint in self.joints:
                joint.iterate()
            for c in constraints:
                c.solve_normal()
                c.solve_friction()
        for c in constraints:
            c.finalize()

    def _integrate_poses(self) -> None:
        dt = self.dt
        for body in self._sorted_bodies():
            if body.is_static or body.sleeping:
                continue
            body.position = vadd(body.position, vscale(body.linear_velocity, dt))
            body.orientation = quat_integrate(body.orientation, body.angular_velocity, dt)
            body.refresh_world_inertia()

    def _check_health(self) -> None:
        params = self.contact_params
        for body in self._sorted_bodies():
            if body.is_static:
                continue
            if not (
                vfinite(body.position)
                and vfinite(body.linear_velocity)
                and vfinite(body.angular_velocity)
                and all(math.isfinite(c) for c in body.orientation)
            ):
                raise NumericalDivergence(f"non-finite state on body {body.name}")
            lin = vnorm(body.linear_velocity)
            ang = vnorm(body.angular_velocity)
            over = lin > params.linear_velocity_clamp or ang > params.angular_velocity_clamp
            if over:
                if body.clamped_last_step:
                    raise NumericalDivergence(
                        f"body {body.name} exceeded the velocity clamp twice in a row"
                    )
                if lin > params.linear_velocity_clamp:
                    body.linear_velocity = vscale(
                        body.linear_velocity, params.linear_velocity_clamp / lin
                    )
                if ang > params.angular_velocity_clamp:
                    body.angular_velocity = vscale(
                        body.angular_velocity, params.angular_velocity_clamp / ang
                    )
                body.clamped_last_step = True
            else:
                body.clamped_last_step = False

    def _update_sleep(self) -> None:
        cfg = self.sleep
        if not cfg.enabled:
            return
        for body in self._sorted_bodies():
            if body.is_static or body.sleeping:
                continue
            if (
                vnorm(body.linear_velocity) < cfg.linear_threshold
                and vnorm(body.angular_velocity) < cfg.angular_threshold
            ):
                body.low_motion_s += self.dt
                if body.low_motion_s >= cfg.time_s:
                    body.sleeping = True
                    body.linear_velocity = ZERO3
                    body.angular_velocity = ZERO3
            else:
                body.low_motion_s = 0.0

    def _expire_wrenches(self) -> None:
        still = []
        for aw in self._wrenches:
            aw.steps_remaining -= 1
            if aw.steps_remaining > 0:
                still.append(aw)
        self._wrenches = still

    def step(self) -> None:
        """Advance the world by one dt; on divergence the world is unchanged."""
        snap = self._snapshot()
        try:
            self._integrate_forces()
            contacts = self.detect_contacts()
            self._solve(contacts)
            self._integrate_poses()
            self._check_health()
        except NumericalDivergence:
            self._restore(snap)
            raise
        self.last_contacts = contacts
        self.step_count += 1
        self._update_sleep()
        self._expire_wrenches()
        for hook in self.post_step_hooks:
            hook(self)


def _mat_vec(m: Mat3, v: Vec3) -> Vec3:
    return (
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    )


def spawn(world: World, model: ModelSpec, pose: Pose, instance: str) -> dict[str, int]:
    """Convenience wrapper mirroring the scene-level operation."""
    return world.spawn_model(model, pose, instance)


def make_ground_link(name: str = "ground", friction: float = 0.8) -> LinkSpec:
    return LinkSpec(
        name=name,
        geometry=StaticPlane(normal=(0.0, 0.0, 1.0), offset=0.0),
        mass=0.0,
        friction_mu=friction,
    )
