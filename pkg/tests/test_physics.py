"""World stepping: integration accuracy, wrenches, divergence handling."""

import math

import pytest

from vtui.physics import (
    ContactParams,
    NoSuchBody,
    NumericalDivergence,
    StaticBody,
    World,
    WrenchCommand,
    make_ground_link,
)
from vtui.mathutil import vnorm, vsub
from vtui.scene.pose import Pose
from vtui.scene.types import Box, LinkSpec, ModelSpec, Sphere

G = 9.81


def single_body_world(link: LinkSpec, pose: Pose, gravity=(0.0, 0.0, -G)) -> tuple[World, int]:
    world = World(gravity=gravity)
    ids = world.spawn_model(ModelSpec(name="m", links=(link,)), pose, "i1")
    return world, ids[link.name]


def test_free_fall_matches_analytic_within_1pct():
    link = LinkSpec("ball", Sphere(0.05), mass=1.0)
    world, bid = single_body_world(link, Pose(position=(0.0, 0.0, 1.0)))
    for _ in range(400):
        world.step()
    z = world.body(bid).position[2]
    expected = 1.0 - 0.5 * G * 0.4**2  # 0.21520
    assert abs(z - expected) <= 0.01 * expected


def test_torque_free_box_conserves_angular_momentum():
    link = LinkSpec("box", Box((0.1, 0.15, 0.2)), mass=1.0)
    world, bid = single_body_world(link, Pose(), gravity=(0.0, 0.0, 0.0))
    body = world.body(bid)
    body.angular_velocity = (0.0, 0.0, 10.0)

    def momentum(b):
        m = b.inertia_world()
        w = b.angular_velocity
        return (
            m[0][0] * w[0] + m[0][1] * w[1] + m[0][2] * w[2],
            m[1][0] * w[0] + m[1][1] * w[1] + m[1][2] * w[2],
            m[2][0] * w[0] + m[2][1] * w[1] + m[2][2] * w[2],
        )

    l0 = momentum(body)
    for _ in range(1000):
        world.step()
    l1 = momentum(body)
    assert vnorm(vsub(l1, l0)) <= 0.02 * vnorm(l0)


def test_off_axis_spin_momentum_drift_small():
    link = LinkSpec("box", Box((0.1, 0.15, 0.2)), mass=1.0)
    world, bid = single_body_world(link, Pose(), gravity=(0.0, 0.0, 0.0))
    body = world.body(bid)
    body.angular_velocity = (3.0, 5.0, 8.0)

    def momentum(b):
        m = b.inertia_world()
        w = b.angular_velocity
        return (
            m[0][0] * w[0] + m[0][1] * w[1] + m[0][2] * w[2],
            m[1][0] * w[0] + m[1][1] * w[1] + m[1][2] * w[2],
            m[2][0] * w[0] + m[2][1] * w[1] + m[2][2] * w[2],
        )

    l0 = momentum(body)
    for _ in range(1000):
        world.step()
    l1 = momentum(body)
    assert vnorm(vsub(l1, l0)) <= 0.02 * vnorm(l0)


def test_bounce_apex_matches_restitution_oracle():
    ball = LinkSpec("ball", Sphere(0.05), mass=0.2, restitution=0.5, friction_mu=0.3)
    ground = make_ground_link()
    model = ModelSpec(name="m", links=(ground, ball))
    world = World()
    ids = world.spawn_model(model, Pose(), "i1")
    body = world.body(ids["ball"])
    body.position = (0.0, 0.0, 1.0 + 0.05)  # bottom of sphere 1 m above the plane

    drop = 1.0
    touched = False
    apex = 0.0
    for _ in range(3000):
        world.step()
        bottom = body.position[2] - 0.05
        if not touched and bottom <= 1e-3:
            touched = True
        if touched and body.linear_velocity[2] > 0:
            apex = max(apex, bottom)
        if touched and apex > 0 and body.linear_velocity[2] < 0 and bottom < apex - 0.01:
            break
    expected = 0.5**2 * drop
    assert apex == pytest.approx(expected, rel=0.10)


def test_force_balance_cancels_gravity():
    link = LinkSpec("ball", Sphere(0.05), mass=0.7)
    world, bid = single_body_world(link, Pose(position=(0.0, 0.0, 1.0)))
    world.apply_wrench(WrenchCommand(body_id=bid, force=(0.0, 0.0, 0.7 * G), duration=0.5))
    for _ in range(500):
        world.step()
    body = world.body(bid)
    assert vnorm(body.linear_velocity) <= 1e-9
    assert abs(body.position[2] - 1.0) <= 1e-9


def test_pure_torque_spins_to_euler_rate():
    link = LinkSpec("box", Box((0.1, 0.1, 0.1)), mass=1.0)
    world, bid = single_body_world(link, Pose(), gravity=(0.0, 0.0, 0.0))
    tau = 0.05
    t = 1.0
    world.apply_wrench(WrenchCommand(body_id=bid, torque=(0.0, 0.0, tau), duration=t))
    for _ in range(1000):
        world.step()
    izz = world.body(bid).inertia_body[2][2]
    expected = tau * t / izz
    assert world.body(bid).angular_velocity[2] == pytest.approx(expected, rel=0.01)


def test_force_at_point_induces_cross_torque():
    link = LinkSpec("box", Box((0.2, 0.2, 0.2)), mass=1.0)
    world, bid = single_body_world(link, Pose(), gravity=(0.0, 0.0, 0.0))
    world.apply_wrench(
        WrenchCommand(body_id=bid, force=(2.0, 0.0, 0.0), application_point=(0.0, 0.1, 0.0))
    )
    world.step()
    body = world.body(bid)
    assert body.accumulated_torque == pytest.approx((0.0, 0.0, -0.2))


def test_one_step_impulse_sentinel():
    link = LinkSpec("ball", Sphere(0.05), mass=1.0)
    world, bid = single_body_world(link, Pose(), gravity=(0.0, 0.0, 0.0))
    world.apply_wrench(WrenchCommand(body_id=bid, force=(100.0, 0.0, 0.0)))
    world.step()
    v1 = world.body(bid).linear_velocity[0]
    assert v1 == pytest.approx(100.0 * world.dt)
    world.step()
    assert world.body(bid).linear_velocity[0] == v1  # expired after one step


def test_wrench_errors():
    ground = make_ground_link()
    ball = LinkSpec("ball", Sphere(0.05), mass=1.0)
    world = World()
    ids = world.spawn_model(ModelSpec(name="m", links=(ground, ball)), Pose(), "i1")
    with pytest.raises(NoSuchBody):
        world.apply_wrench(WrenchCommand(body_id=999, force=(1, 0, 0)))
    with pytest.raises(StaticBody):
        world.apply_wrench(WrenchCommand(body_id=ids["ground"], force=(1, 0, 0)))


def test_divergence_aborts_and_preserves_state():
    link = LinkSpec("ball", Sphere(0.05), mass=0.001)
    world, bid = single_body_world(link, Pose(), gravity=(0.0, 0.0, 0.0))
    world.apply_wrench(WrenchCommand(body_id=bid, force=(1e9, 0.0, 0.0), duration=1.0))
    world.step()  # first excess is clamped
    body = world.body(bid)
    assert vnorm(body.linear_velocity) == pytest.approx(100.0)
    pos_before = body.position
    steps_before = world.step_count
    with pytest.raises(NumericalDivergence):
        world.step()
    assert world.step_count == steps_before
    assert world.body(bid).position == pos_before


def test_resting_box_stays_put_five_seconds():
    ground = make_ground_link(friction=0.5)
    box = LinkSpec("box", Box((0.05, 0.05, 0.05)), mass=0.5, friction_mu=0.5)
    world = World()
    ids = world.spawn_model(ModelSpec(name="m", links=(ground, box)), Pose(), "i1")
    body = world.body(ids["box"])
    body.position = (0.0, 0.0, 0.05)
    for _ in range(5000):
        world.step()
    drift = math.hypot(body.position[0], body.position[1])
    sink = 0.05 - body.position[2]
    assert drift < 1e-3
    assert sink < world.contact_params.slop_m


def test_determinism_bit_identical_trajectories():
    def run():
        ground = make_ground_link()
        box = LinkSpec("box", Box((0.05, 0.05, 0.05)), mass=0.5, restitution=0.3)
        ball = LinkSpec("ball", Sphere(0.04), mass=0.2, restitution=0.4)
        model = ModelSpec(name="m", links=(ground, box, ball))
        world = World()
        ids = world.spawn_model(model, Pose(), "i1")
        world.body(ids["box"]).position = (0.0, 0.0, 0.3)
        world.body(ids["ball"]).position = (0.02, 0.01, 0.6)
        trace = []
        for step in range(1500):
            if step == 200:
                world.apply_wrench(
                    WrenchCommand(body_id=ids["box"], force=(0.5, 0.2, 0.0), duration=0.1)
                )
            world.step()
            for bid in sorted(world.bodies):
                b = world.bodies[bid]
                trace.append((b.position, b.orientation, b.linear_velocity, b.angular_velocity))
        return trace

    assert run() == run()


def test_momentum_conserved_in_frictionless_collision():
    a = LinkSpec("a", Sphere(0.1), mass=1.0, restitution=0.8, friction_mu=0.0)
    b = LinkSpec("b", Sphere(0.1), mass=2.0, restitution=0.8, friction_mu=0.0)
    world = World(gravity=(0.0, 0.0, 0.0))
    ids = world.spawn_model(ModelSpec(name="m", links=(a, b)), Pose(), "i1")
    ba, bb = world.body(ids["a"]), world.body(ids["b"])
    ba.position = (0.0, 0.0, 0.0)
    bb.position = (0.5, 0.0, 0.0)
    ba.linear_velocity = (2.0, 0.0, 0.0)

    def total_momentum():
        return tuple(
            ba.mass * ba.linear_velocity[i] + bb.mass * bb.linear_velocity[i] for i in range(3)
        )

    p0 = total_momentum()
    for _ in range(1000):
        world.step()
    p1 = total_momentum()
    assert bb.linear_velocity[0] > 0.5  # collision actually happened
    assert vnorm(vsub(p1, p0)) <= 1e-3 * vnorm(p0)


def test_friction_cone_respected():
    ground = make_ground_link(friction=0.6)
    box = LinkSpec("box", Box((0.05, 0.05, 0.05)), mass=1.0, friction_mu=0.6)
    world = World()
    ids = world.spawn_model(ModelSpec(name="m", links=(ground, box)), Pose(), "i1")
    body = world.body(ids["box"])
    body.position = (0.0, 0.0, 0.05)
    body.linear_velocity = (1.0, 0.0, 0.0)  # sliding
    mu = 0.6
    for _ in range(300):
        world.step()
        for c in world.last_contacts:
            assert c.applied_friction_impulse <= mu * c.applied_normal_impulse + 1e-12


def test_no_tunneling_at_desk_scale():
    import random

    rng = random.Random(42)
    for _ in range(4):
        drop = rng.uniform(0.02, 0.2)
        ground = make_ground_link()
        ball = LinkSpec("ball", Sphere(0.025), mass=0.1, restitution=0.2)
        world = World()
        ids = world.spawn_model(ModelSpec(name="m", links=(ground, ball)), Pose(), "i1")
        body = world.body(ids["ball"])
        body.position = (0.0, 0.0, 0.025 + drop)
        for _ in range(10_000):
            world.step()
            assert body.position[2] > 0.0  # center never crosses the plane
            assert vnorm(body.linear_velocity) < 2.5
        assert body.position[2] > 0.025 - 0.005
