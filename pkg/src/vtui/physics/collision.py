"""Primitive collision detection and raycasts.

Supported contact pairs: sphere-sphere, sphere-plane, sphere-box,
box-plane (up to 4 corners) and box-box (separating axis test with a
clipped manifold of up to 4 points).  Cylinders collide as their bounding
boxes.  All iteration and tie-breaking is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from vtui.mathutil import (
    Mat3,
    Quat,
    Vec3,
    quat_to_mat3,
    vadd,
    vcross,
    vdot,
    vnorm,
    vnormalize,
    vscale,
    vsub,
)
from vtui.scene.types import Box, Cylinder, Geometry, Sphere, StaticPlane


@dataclass
class Contact:
    body_a: int
    body_b: int
    point: Vec3
    normal: Vec3  # unit, pointing from a to b
    penetration: float  # >= 0
    applied_normal_impulse: float = 0.0
    applied_friction_impulse: float = 0.0
    feature: int = 0  # manifold point index, stable within a pair


def collision_shape(geometry: Geometry) -> Geometry:
    """Collision proxy: cylinders become their bounding boxes."""
    if isinstance(geometry, Cylinder):
        r = geometry.radius
        return Box(half_extents=(r, r, geometry.half_length))
    return geometry


def _col(m: Mat3, i: int) -> Vec3:
    return (m[0][i], m[1][i], m[2][i])


# -- pair tests -------------------------------------------------------------


def _sphere_sphere(ida, pa, ra, idb, pb, rb) -> list[Contact]:
    d = vsub(pb, pa)
    dist = vnorm(d)
    pen = ra + rb - dist
    if pen < 0.0:
        return []
    normal = vscale(d, 1.0 / dist) if dist > 1e-12 else (0.0, 0.0, 1.0)
    point = vadd(pa, vscale(normal, ra - 0.5 * pen))
    return [Contact(ida, idb, point, normal, pen)]


def _sphere_plane(ids, ps, r, idp, n, offset) -> list[Contact]:
    # normal must point plane -> sphere; caller orients by ids
    dist = vdot(n, ps) - offset
    pen = r - dist
    if pen < 0.0:
        return []
    point = vsub(ps, vscale(n, dist))
    return [Contact(idp, ids, point, n, pen)]


def _box_plane(idb, pb, qb, half, idp, n, offset) -> list[Contact]:
    rot = quat_to_mat3(qb)
    axes = (_col(rot, 0), _col(rot, 1), _col(rot, 2))
    contacts: list[tuple[float, int, Vec3]] = []
    index = 0
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            for sz in (-1.0, 1.0):
                corner = vadd(
                    pb,
                    vadd(
                        vscale(axes[0], sx * half[0]),
                        vadd(vscale(axes[1], sy * half[1]), vscale(axes[2], sz * half[2])),
                    ),
                )
                dist = vdot(n, corner) - offset
                if dist <= 0.0:
                    contacts.append((-dist, index, corner))
                index += 1
    if not contacts:
        return []
    contacts.sort(key=lambda c: (-c[0], c[1]))  # deepest first, corner index ties
    out = []
    for pen, idx, corner in contacts[:4]:
        out.append(Contact(idp, idb, corner, n, pen, feature=idx))
    out.sort(key=lambda c: c.feature)
    return out


def _sphere_box(ids, ps, r, idb, pb, qb, half) -> list[Contact]:
    rot = quat_to_mat3(qb)
    local = (
        vdot(_col(rot, 0), vsub(ps, pb)),
        vdot(_col(rot, 1), vsub(ps, pb)),
        vdot(_col(rot, 2), vsub(ps, pb)),
    )
    clamped = tuple(max(-half[i], min(half[i], local[i])) for i in range(3))
    delta = vsub(local, clamped)
    dist2 = vdot(delta, delta)
    if dist2 > 1e-24:  # sphere center outside the box
        dist = math.sqrt(dist2)
        pen = r - dist
        if pen < 0.0:
            return []
        normal_local = vscale(delta, 1.0 / dist)
    else:  # center inside: push out along the shallowest face
        depths = [half[i] - abs(local[i]) for i in range(3)]
        axis = min(range(3), key=lambda i: (depths[i], i))
        sign = 1.0 if local[axis] >= 0.0 else -1.0
        normal_local = tuple(sign if i == axis else 0.0 for i in range(3))
        pen = r + depths[axis]
        clamped = tuple(
            sign * half[axis] if i == axis else local[i] for i in range(3)
        )
    axes = (_col(rot, 0), _col(rot, 1), _col(rot, 2))
    normal_world = vadd(
        vadd(vscale(axes[0], normal_local[0]), vscale(axes[1], normal_local[1])),
        vscale(axes[2], normal_local[2]),
    )
    point = vadd(
        pb,
        vadd(
            vadd(vscale(axes[0], clamped[0]), vscale(axes[1], clamped[1])),
            vscale(axes[2], clamped[2]),
        ),
    )
    # normal from box to sphere
    return [Contact(idb, ids, point, normal_world, pen)]


def _clip_polygon(points: list[Vec3], n: Vec3, d: float) -> list[Vec3]:
    """Keep the part of the polygon with n·x <= d (Sutherland-Hodgman)."""
    out: list[Vec3] = []
    count = len(points)
    for i in range(count):
        a = points[i]
        b = points[(i + 1) % count]
        da = vdot(n, a) - d
        db = vdot(n, b) - d
        if da <= 0.0:
            out.append(a)
        if (da < 0.0 < db) or (db < 0.0 < da):
            t = da / (da - db)
            out.append(vadd(a, vscale(vsub(b, a), t)))
    return out


def _box_box(ida, pa, qa, ha, idb, pb, qb, hb) -> list[Contact]:
    rot_a = quat_to_mat3(qa)
    rot_b = quat_to_mat3(qb)
    axes_a = (_col(rot_a, 0), _col(rot_a, 1), _col(rot_a, 2))
    axes_b = (_col(rot_b, 0), _col(rot_b, 1), _col(rot_b, 2))
    d = vsub(pb, pa)

    def overlap_on(axis: Vec3) -> float:
        proj_a = sum(ha[i] * abs(vdot(axes_a[i], axis)) for i in range(3))
        proj_b = sum(hb[i] * abs(vdot(axes_b[i], axis)) for i in range(3))
        return proj_a + proj_b - abs(vdot(d, axis))

    best_face_overlap = math.inf
    best_face = -1  # 0..2 face of A, 3..5 face of B
    for i in range(3):
        ov = overlap_on(axes_a[i])
        if ov < 0.0:
            return []
        if ov < best_face_overlap:
            best_face_overlap = ov
            best_face = i
    for i in range(3):
        ov = overlap_on(axes_b[i])
        if ov < 0.0:
            return []
        if ov < best_face_overlap:
            best_face_overlap = ov
            best_face = 3 + i

    best_edge_overlap = math.inf
    best_edge = (-1, -1)
    best_edge_axis: Vec3 | None = None
    for i in range(3):
        for j in range(3):
            axis = vcross(axes_a[i], axes_b[j])
            length = vnorm(axis)
            if length < 1e-9:  # parallel edges: face axes cover it
                continue
            axis = vscale(axis, 1.0 / length)
            ov = overlap_on(axis)
            if ov < 0.0:
                return []
            if ov < best_edge_overlap:
                best_edge_overlap = ov
                best_edge = (i, j)
                best_edge_axis = axis

    # prefer face manifolds unless an edge axis is clearly shallower
    if best_edge_axis is not None and best_edge_overlap < 0.95 * best_face_overlap - 1e-6:
        axis = best_edge_axis
        if vdot(axis, d) < 0.0:
            axis = vscale(axis, -1.0)
        i, j = best_edge
        mid_a = pa
        for k in range(3):
            if k != i:
                s = 1.0 if vdot(axes_a[k], axis) >= 0.0 else -1.0
                mid_a = vadd(mid_a, vscale(axes_a[k], s * ha[k]))
        mid_b = pb
        for k in range(3):
            if k != j:
                s = 1.0 if vdot(axes_b[k], axis) >= 0.0 else -1.0
                mid_b = vsub(mid_b, vscale(axes_b[k], s * hb[k]))
        # closest points of the two edge lines
        ua, ub = axes_a[i], axes_b[j]
        p = vsub(mid_b, mid_a)
        uaub = vdot(ua, ub)
        q1 = vdot(ua, p)
        q2 = vdot(ub, p)
        denom = 1.0 - uaub * uaub
        if denom < 1e-12:
            s = 0.0
        else:
            s = (q1 - uaub * q2) / denom
        s = max(-ha[i], min(ha[i], s))
        t = vdot(ub, vsub(vadd(mid_a, vscale(ua, s)), mid_b))
        t = max(-hb[j], min(hb[j], t))
        pt_a = vadd(mid_a, vscale(ua, s))
        pt_b = vadd(mid_b, vscale(ub, t))
        point = vscale(vadd(pt_a, pt_b), 0.5)
        return [Contact(ida, idb, point, axis, best_edge_overlap)]

    # face manifold
    if best_face < 3:
        ref_center, ref_axes, ref_half, ref_i = pa, axes_a, ha, best_face
        inc_center, inc_axes, inc_half = pb, axes_b, hb
        flip = False
    else:
        ref_center, ref_axes, ref_half, ref_i = pb, axes_b, hb, best_face - 3
        inc_center, inc_axes, inc_half = pa, axes_a, ha
        flip = True

    ref_normal = ref_axes[ref_i]
    to_other = vsub(inc_center, ref_center)
    if vdot(ref_normal, to_other) < 0.0:
        ref_normal = vscale(ref_normal, -1.0)

    # incident face: most anti-parallel to the reference normal
    inc_i = 0
    inc_sign = 1.0
    best_dot = math.inf
    for k in range(3):
        dk = vdot(inc_axes[k], ref_normal)
        if dk < best_dot:
            best_dot = dk
            inc_i = k
            inc_sign = 1.0
        if -dk < best_dot:
            best_dot = -dk
            inc_i = k
            inc_sign = -1.0
    inc_normal = vscale(inc_axes[inc_i], inc_sign)
    face_center = vadd(inc_center, vscale(inc_normal, inc_half[inc_i]))
    u, v = [k for k in range(3) if k != inc_i]
    verts = []
    for su, sv in ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)):
        verts.append(
            vadd(
                face_center,
                vadd(
                    vscale(inc_axes[u], su * inc_half[u]), vscale(inc_axes[v], sv * inc_half[v])
                ),
            )
        )

    for k in range(3):
        if k == ref_i:
            continue
        axis = ref_axes[k]
        center_proj = vdot(axis, ref_center)
        verts = _clip_polygon(verts, axis, center_proj + ref_half[k])
        if not verts:
            return []
        verts = _clip_polygon(verts, vscale(axis, -1.0), ref_half[k] - center_proj)
        if not verts:
            return []

    face_d = vdot(ref_normal, ref_center) + ref_half[ref_i]
    normal = vscale(ref_normal, -1.0) if flip else ref_normal
    scored: list[tuple[float, int, Vec3]] = []
    for idx, pt in enumerate(verts):
        sep = vdot(ref_normal, pt) - face_d
        if sep <= 0.0:
            scored.append((-sep, idx, pt))
    scored.sort(key=lambda c: (-c[0], c[1]))
    out = []
    for pen, idx, pt in scored[:4]:
        out.append(Contact(ida, idb, pt, normal, pen, feature=idx))
    out.sort(key=lambda c: c.feature)
    return out


def collide(
    ida: int,
    geom_a: Geometry,
    pos_a: Vec3,
    quat_a: Quat,
    idb: int,
    geom_b: Geometry,
    pos_b: Vec3,
    quat_b: Quat,
) -> list[Contact]:
    """Contacts between two shapes; normals always point from `ida` to `idb`."""
    ga = collision_shape(geom_a)
    gb = collision_shape(geom_b)
    if isinstance(ga, StaticPlane) and isinstance(gb, StaticPlane):
        return []

    def flipped(contacts: list[Contact]) -> list[Contact]:
        # helpers pick their own (a, b) roles; re-orient so normals run ida -> idb
        out = []
        for c in contacts:
            if c.body_a == ida:
                out.append(c)
            else:
                out.append(
                    Contact(
                        ida, idb, c.point, vscale(c.normal, -1.0), c.penetration, feature=c.feature
                    )
                )
        return out

    if isinstance(ga, Sphere) and isinstance(gb, Sphere):
        return _sphere_sphere(ida, pos_a, ga.radius, idb, pos_b, gb.radius)
    if isinstance(ga, Sphere) and isinstance(gb, StaticPlane):
        return flipped(_sphere_plane(ida, pos_a, ga.radius, idb, gb.normal, gb.offset))
    if isinstance(ga, StaticPlane) and isinstance(gb, Sphere):
        return flipped(_sphere_plane(idb, pos_b, gb.radius, ida, ga.normal, ga.offset))
    if isinstance(ga, Box) and isinstance(gb, StaticPlane):
        return flipped(_box_plane(ida, pos_a, quat_a, ga.half_extents, idb, gb.normal, gb.offset))
    if isinstance(ga, StaticPlane) and isinstance(gb, Box):
        return flipped(_box_plane(idb, pos_b, quat_b, gb.half_extents, ida, ga.normal, ga.offset))
    if isinstance(ga, Sphere) and isinstance(gb, Box):
        return flipped(_sphere_box(ida, pos_a, ga.radius, idb, pos_b, quat_b, gb.half_extents))
    if isinstance(ga, Box) and isinstance(gb, Sphere):
        return flipped(_sphere_box(idb, pos_b, gb.radius, ida, pos_a, quat_a, ga.half_extents))
    if isinstance(ga, Box) and isinstance(gb, Box):
        return _box_box(ida, pos_a, quat_a, ga.half_extents, idb, pos_b, quat_b, gb.half_extents)
    return []


# -- raycasts ----------------------------------------------------------------


@dataclass(frozen=True)
class RayHit:
    body_id: int
    distance: float
    point: Vec3


def _ray_sphere(o: Vec3, d: Vec3, center: Vec3, r: float) -> float | None:
    oc = vsub(o, center)
    b = vdot(oc, d)
    c = vdot(oc, oc) - r * r
    disc = b * b - c
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    t = -b - sq
    if t < 0.0:
        t = -b + sq
    return t if t >= 0.0 else None


def _ray_plane(o: Vec3, d: Vec3, n: Vec3, offset: float) -> float | None:
    denom = vdot(n, d)
    if abs(denom) < 1e-12:
        return None
    t = (offset - vdot(n, o)) / denom
    return t if t >= 0.0 else None


def _ray_box(o: Vec3, d: Vec3, center: Vec3, q: Quat, half: Vec3) -> float | None:
    rot = quat_to_mat3(q)
    axes = (_col(rot, 0), _col(rot, 1), _col(rot, 2))
    rel = vsub(o, center)
    lo = tuple(vdot(axes[i], rel) for i in range(3))
    ld = tuple(vdot(axes[i], d) for i in range(3))
    t_min, t_max = 0.0, math.inf
    for i in range(3):
        if abs(ld[i]) < 1e-12:
            if abs(lo[i]) > half[i]:
                return None
            continue
        inv = 1.0 / ld[i]
        t1 = (-half[i] - lo[i]) * inv
        t2 = (half[i] - lo[i]) * inv
        if t1 > t2:
            t1, t2 = t2, t1
        t_min = max(t_min, t1)
        t_max = min(t_max, t2)
        if t_min > t_max:
            return None
    return t_min


def ray_shape_distance(
    o: Vec3, d: Vec3, geometry: Geometry, pos: Vec3, quat: Quat
) -> float | None:
    g = collision_shape(geometry)
    if isinstance(g, Sphere):
        return _ray_sphere(o, d, pos, g.radius)
    if isinstance(g, StaticPlane):
        return _ray_plane(o, d, g.normal, g.offset)
    if isinstance(g, Box):
        return _ray_box(o, d, pos, quat, g.half_extents)
    return None


def raycast_bodies(
    origin: Vec3,
    direction: Vec3,
    max_range: float,
    bodies,  # iterable of (body_id, geometry, pos, quat), sorted by id
    exclude: set[int] | None = None,
) -> RayHit | None:
    """Nearest intersection within range; equal distances break by body id."""
    if abs(vnorm(direction) - 1.0) > 1e-6:
        direction = vnormalize(direction)
    best: RayHit | None = None
    for body_id, geometry, pos, quat in bodies:
        if exclude and body_id in exclude:
            continue
        t = ray_shape_distance(origin, direction, geometry, pos, quat)
        if t is None or t > max_range:
            continue
        if best is None or t < best.distance:
            best = RayHit(body_id, t, vadd(origin, vscale(direction, t)))
    return best
