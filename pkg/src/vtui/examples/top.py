"""Scripted spinning-top scenario: select, lift, spin, release, observe tilt.

Reproduces the four manipulation steps as a headless command script and
reports tilt over time; running it with and without the spin impulse shows
the gyroscopic difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from vtui.mathutil import Pose, qrotate
from vtui.physics.world import WrenchCommand
from vtui.runtime.session import Session
from vtui.scene.parser import parse_scene
from vtui.scene.types import SpawnSpec

TOP_SCENE = """\
scene_format 1
model world
  link ground
    geometry plane 0 0 1 0
    mass 0
    friction 0.3
model top
  link tip
    geometry sphere 0.004
    mass 0.004
    friction 0.25
    pose 0 0 0.004 1 0 0 0
  link disc
    geometry cylinder 0.04 0.003
    mass 0.06
    pose 0 0 0.025 1 0 0 0
  link handle
    geometry cylinder 0.004 0.008
    mass 0.005
    pose 0 0 0.036 1 0 0 0
  joint tip_weld fixed
    parent disc
    child tip
    anchor 0 0 -0.021
  joint handle_weld fixed
    parent disc
    child handle
    anchor 0 0 0.011
spawn world w
spawn top t
"""

INITIAL_TILT_RAD = math.radians(2.0)


@dataclass
class TopRunReport:
    spin_rate: float
    series: list[tuple[float, float]]  # (time s, tilt rad)
    final_tilt: float
    selected_body: int


def body_tilt(body) -> float:
    """Angle between the body's +z axis and world up."""
    axis = qrotate(body.orientation, (0.0, 0.0, 1.0))
    return math.acos(max(-1.0, min(1.0, axis[2])))


def spinning_top_scenario(
    spin_rate: float = 50.0,
    duration_s: float = 2.0,
    snapshot_interval_s: float = 0.05,
    initial_tilt_rad: float = INITIAL_TILT_RAD,
) -> TopRunReport:
    scene = parse_scene(TOP_SCENE)
    # a perfectly upright top is a (numerically stable) unstable equilibrium,
    # so the scripted run starts with a small tilt
    half = 0.5 * initial_tilt_rad
    tilted = SpawnSpec(
        model="top",
        instance="t",
        pose=Pose(
            position=(0.0, 0.0, 0.0005),
            orientation=(math.cos(half), math.sin(half), 0.0, 0.0),
        ),
    )
    import dataclasses

    scene = dataclasses.replace(scene, spawns=(scene.spawns[0], tilted))
    session = Session(scene)
    part_ids = session.world.instances["t"]
    disc_id = part_ids["disc"]
    disc = session.world.body(disc_id)

    # step 1, navigate: headless no-op.  step 2, select the top.
    selected = disc_id

    # step 3: lift slightly via an upward wrench on the whole compound
    total_mass = sum(session.world.body(b).mass for b in part_ids.values())
    session.world.apply_wrench(
        WrenchCommand(body_id=disc_id, force=(0.0, 0.0, total_mass * 9.81 * 1.05), duration=0.2)
    )
    session.run(0.2)

    # step 4: rotational impulse about the spin axis, then abrupt release.
    # Each part is spun up in proportion to its own axial inertia so the
    # welds carry no transient load.
    if spin_rate != 0.0:
        spin_up_s = 0.1
        for body_id in part_ids.values():
            izz = session.world.body(body_id).inertia_body[2][2]
            session.world.apply_wrench(
                WrenchCommand(
                    body_id=body_id,
                    torque=(0.0, 0.0, izz * spin_rate / spin_up_s),
                    duration=spin_up_s,
                )
            )
    series: list[tuple[float, float]] = []
    snapshot_steps = max(1, int(round(snapshot_interval_s / session.dt)))
    total_steps = int(round(duration_s / session.dt))
    for step in range(1, total_steps + 1):
        session.step()
        if step % snapshot_steps == 0:
            series.append((step * session.dt, body_tilt(disc)))
    return TopRunReport(
        spin_rate=spin_rate,
        series=series,
        final_tilt=series[-1][1],
        selected_body=selected,
    )
