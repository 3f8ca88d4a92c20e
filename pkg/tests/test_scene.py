"""Scene parsing, validation, inertia and round-trip identity."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vtui.mathutil import is_symmetric_positive_definite, quat_from_axis_angle
from vtui.scene import (
    BadValueError,
    Box,
    Cylinder,
    JointSpec,
    LinkSpec,
    ModelSpec,
    Pose,
    SceneSpec,
    SceneSyntaxError,
    SceneValidationError,
    SpawnSpec,
    Sphere,
    StaticPlane,
    UnknownFieldError,
    ZeroMass,
    auto_inertia,
    parse_scene,
    serialize_scene,
    validate,
)

MINIMAL = """\
scene_format 1
model world
  link ground
    geometry plane 0 0 1 0
    mass 0
  link cube
    geometry box 0.025 0.025 0.025
    mass 0.1
    pose 0 0 0.025 1 0 0 0
spawn world w1
"""


def test_parse_minimal_scene():
    spec = parse_scene(MINIMAL)
    assert len(spec.links) == 2
    assert spec.models[0].links[0].is_static
    assert spec.models[0].links[1].mass == 0.1


def test_joint_unknown_link_is_validation_error():
    text = """\
scene_format 1
model m
  link a
    geometry sphere 0.1
    mass 1
  joint j revolute
    parent a
    child missing
    axis 0 0 1
"""
    with pytest.raises(SceneValidationError) as err:
        parse_scene(text)
    codes = {d.code for d in err.value.diagnostics}
    assert "UNKNOWN_LINK" in codes


def test_display_cube_model_parses_with_six_displays():
    text = """\
scene_format 1
model display_cube
  link body
    geometry box 0.025 0.025 0.025
    mass 0.1
  device accel accelerometer
    mount body
    rate 100
  display px 64 64
    mount body face +x
  display nx 64 64
    mount body face -x
  display py 64 64
    mount body face +y
  display ny 64 64
    mount body face -y
  display pz 64 64
    mount body face +z
  display nz 64 64
    mount body face -z
"""
    spec = parse_scene(text)
    model = spec.models[0]
    assert len(model.displays) == 6
    assert len(model.devices) == 1
    # face-mounted rectangles inherit the face size of the box
    assert model.displays[0].rect_w == pytest.approx(0.05)
    assert model.displays[0].rect_h == pytest.approx(0.05)


def test_syntax_error_carries_line_and_col():
    with pytest.raises(SceneSyntaxError) as err:
        parse_scene("scene_format 1\nmodel m\n\tlink a\n")
    assert err.value.line == 3

    with pytest.raises(UnknownFieldError) as err2:
        parse_scene("scene_format 1\nbogus 1\n")
    assert err2.value.line == 2

    with pytest.raises(BadValueError) as err3:
        parse_scene("scene_format 1\ngravity 0 0 down\n")
    assert err3.value.line == 2


def test_missing_header():
    with pytest.raises(SceneSyntaxError):
        parse_scene("model m\n")


# -- validate ---------------------------------------------------------------


def _model(links=(), joints=()):
    return ModelSpec(name="m", links=tuple(links), joints=tuple(joints))


def test_validate_joint_loop():
    a = LinkSpec("a", Sphere(0.1), mass=1.0)
    b = LinkSpec("b", Sphere(0.1), mass=1.0)
    spec = SceneSpec(
        models=(
            _model(
                links=[a, b],
                joints=[
                    JointSpec("j1", "revolute", parent="a", child="b"),
                    JointSpec("j2", "revolute", parent="b", child="a"),
                ],
            ),
        )
    )
    codes = {d.code for d in validate(spec)}
    assert "JOINT_LOOP" in codes


def test_validate_restitution_range():
    link = LinkSpec("a", Sphere(0.1), mass=1.0, restitution=1.5)
    codes = {d.code for d in validate(SceneSpec(models=(_model(links=[link]),)))}
    assert "RANGE" in codes


def test_validate_static_child():
    a = LinkSpec("a", Sphere(0.1), mass=1.0)
    b = LinkSpec("b", Box((0.1, 0.1, 0.1)), mass=0.0)
    spec = SceneSpec(
        models=(_model(links=[a, b], joints=[JointSpec("j", "fixed", parent="a", child="b")]),)
    )
    codes = {d.code for d in validate(spec)}
    assert "STATIC_CHILD" in codes


def test_valid_sifteo_pair_scene_is_clean(sifteo_pair_text):
    spec = parse_scene(sifteo_pair_text)
    assert validate(spec) == []


@pytest.fixture
def sifteo_pair_text():
    return """\
scene_format 1
model sifteo
  link body
    geometry box 0.021 0.021 0.0085
    mass 0.045
  device prox_px proximity
    mount body face +x
    rate 50
    max_range 0.1
  device prox_nx proximity
    mount body face -x
    rate 50
    max_range 0.1
  display screen 32 32
    mount body face +z
spawn sifteo c1
  pose 0 0 0.0085 1 0 0 0
spawn sifteo c2
  pose 0.052 0 0.0085 1 0 0 0
"""


# -- auto inertia ------------------------------------------------------------


def test_cube_inertia_closed_form():
    tensor = auto_inertia(Box((0.5, 0.5, 0.5)), 1.0)
    for i in range(3):
        assert tensor[i][i] == pytest.approx(1.0 / 6.0, rel=1e-12)


def test_sphere_inertia_closed_form():
    tensor = auto_inertia(Sphere(0.5), 2.0)
    for i in range(3):
        assert tensor[i][i] == pytest.approx(0.2, rel=1e-12)


def _cylinder_inertia_quadrature(radius, half_length, mass, n=90):
    """Independent midpoint-grid volume integral over the bounding box."""
    ixx = iyy = izz = 0.0
    volume = 0.0
    hx = 2.0 * radius / n
    hz = 2.0 * half_length / n
    cell = hx * hx * hz
    r2 = radius * radius
    for i in range(n):
        x = -radius + (i + 0.5) * hx
        for j in range(n):
            y = -radius + (j + 0.5) * hx
            if x * x + y * y > r2:
                continue
            for k in range(n):
                z = -half_length + (k + 0.5) * hz
                volume += cell
                ixx += (y * y + z * z) * cell
                iyy += (x * x + z * z) * cell
                izz += (x * x + y * y) * cell
    density = mass / volume
    return ixx * density, iyy * density, izz * density


def test_cylinder_inertia_matches_quadrature_oracle():
    tensor = auto_inertia(Cylinder(radius=0.1, half_length=0.2), 1.0)
    assert tensor[0][0] == pytest.approx(0.19 / 12.0, rel=1e-12)  # 0.0158333...
    assert tensor[1][1] == pytest.approx(0.19 / 12.0, rel=1e-12)
    assert tensor[2][2] == pytest.approx(0.005, rel=1e-12)
    ox, oy, oz = _cylinder_inertia_quadrature(0.1, 0.2, 1.0)
    assert tensor[0][0] == pytest.approx(ox, rel=0.01)
    assert tensor[1][1] == pytest.approx(oy, rel=0.01)
    assert tensor[2][2] == pytest.approx(oz, rel=0.01)


def test_zero_mass_rejected():
    with pytest.raises(ZeroMass):
        auto_inertia(Sphere(0.1), 0.0)
    with pytest.raises(ZeroMass):
        auto_inertia(StaticPlane((0.0, 0.0, 1.0), 0.0), 1.0)


dims = st.floats(min_value=1e-3, max_value=10.0, allow_nan=False, allow_infinity=False)
masses = st.floats(min_value=1e-3, max_value=100.0, allow_nan=False, allow_infinity=False)
geometries = st.one_of(
    st.builds(lambda a, b, c: Box((a, b, c)), dims, dims, dims),
    st.builds(Sphere, dims),
    st.builds(Cylinder, dims, dims),
)


@settings(max_examples=200, deadline=None)
@given(geometries, masses)
def test_auto_inertia_is_spd(geometry, mass):
    assert is_symmetric_positive_definite(auto_inertia(geometry, mass))


# -- round trip ---------------------------------------------------------------


unit_quats = st.builds(
    quat_from_axis_angle,
    st.tuples(
        st.floats(min_value=-1, max_value=1),
        st.floats(min_value=-1, max_value=1),
        st.floats(min_value=0.1, max_value=1),
    ),
    st.floats(min_value=-math.pi, max_value=math.pi),
)
coords = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)
poses = st.builds(Pose, st.tuples(coords, coords, coords), unit_quats)
names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True)


@st.composite
def simple_scenes(draw):
    n_links = draw(st.integers(min_value=1, max_value=4))
    links = []
    used = set()
    for i in range(n_links):
        name = f"link{i}"
        used.add(name)
        links.append(
            LinkSpec(
                name=name,
                geometry=draw(geometries),
                mass=draw(masses),
                friction_mu=draw(st.floats(min_value=0, max_value=2)),
                restitution=draw(st.floats(min_value=0, max_value=1)),
                initial_pose=draw(poses),
                color=draw(st.tuples(*[st.integers(0, 255)] * 3)),
            )
        )
    joints = []
    for i in range(1, n_links):
        if draw(st.booleans()):
            joints.append(
                JointSpec(
                    name=f"j{i}",
                    joint_type=draw(st.sampled_from(["fixed", "revolute", "prismatic"])),
                    parent=f"link{i - 1}",
                    child=f"link{i}",
                    axis=(0.0, 0.0, 1.0),
                    anchor=draw(st.tuples(coords, coords, coords)),
                    limits=(-1.0, draw(st.floats(min_value=-1.0, max_value=3.0))),
                    max_effort=draw(st.floats(min_value=0.1, max_value=100)),
                    damping=draw(st.floats(min_value=0, max_value=1)),
                )
            )
    model = ModelSpec(name=draw(names), links=tuple(links), joints=tuple(joints))
    spawns = tuple(
        SpawnSpec(model=model.name, instance=f"i{k}", pose=draw(poses))
        for k in range(draw(st.integers(min_value=0, max_value=2)))
    )
    return SceneSpec(models=(model,), spawns=spawns)


@settings(max_examples=150, deadline=None)
@given(simple_scenes())
def test_parse_serialize_identity(spec):
    text = serialize_scene(spec)
    again = parse_scene(text, check=False)
    assert again == spec
