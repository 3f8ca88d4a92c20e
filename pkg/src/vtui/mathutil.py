"""Scalar 3D math on tuples: vectors, quaternions, 3x3 matrices.

Everything here is pure float arithmetic in a fixed evaluation order, which
is what makes whole-world trajectories bit-reproducible.  Tuples keep the
values immutable and cheap at desk scale (a handful of bodies).
"""

from __future__ import annotations

import math

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]  # (w, x, y, z)
Mat3 = tuple[Vec3, Vec3, Vec3]  # row-major

ZERO3: Vec3 = (0.0, 0.0, 0.0)
IDENTITY_QUAT: Quat = (1.0, 0.0, 0.0, 0.0)
IDENTITY_MAT3: Mat3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


# -- vectors -------------------------------------------------------------


def vadd(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vsub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vscale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def vneg(a: Vec3) -> Vec3:
    return (-a[0], -a[1], -a[2])


def vdot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vcross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def vnorm(a: Vec3) -> float:
    return math.sqrt(vdot(a, a))


def vnormalize(a: Vec3) -> Vec3:
    n = vnorm(a)
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    inv = 1.0 / n
    return (a[0] * inv, a[1] * inv, a[2] * inv)


def vfinite(a: Vec3) -> bool:
    return math.isfinite(a[0]) and math.isfinite(a[1]) and math.isfinite(a[2])


def any_orthonormal(a: Vec3) -> Vec3:
    """Deterministic unit vector perpendicular to unit vector `a`."""
    if abs(a[0]) < 0.57735:
        t = vcross(a, (1.0, 0.0, 0.0))
    else:
        t = vcross(a, (0.0, 1.0, 0.0))
    return vnormalize(t)


# -- quaternions ----------------------------------------------------------


def qmul(a: Quat, b: Quat) -> Quat:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def qconj(q: Quat) -> Quat:
    return (q[0], -q[1], -q[2], -q[3])


def qnorm(q: Quat) -> float:
    return math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def qnormalize(q: Quat) -> Quat:
    n = qnorm(q)
    if n == 0.0:
        return IDENTITY_QUAT
    inv = 1.0 / n
    return (q[0] * inv, q[1] * inv, q[2] * inv, q[3] * inv)


def qrotate(q: Quat, v: Vec3) -> Vec3:
    """Rotate vector `v` by unit quaternion `q`."""
    w, x, y, z = q
    # t = 2 * (q_vec x v)
    tx = 2.0 * (y * v[2] - z * v[1])
    ty = 2.0 * (z * v[0] - x * v[2])
    tz = 2.0 * (x * v[1] - y * v[0])
    # v' = v + w*t + q_vec x t
    return (
        v[0] + w * tx + (y * tz - z * ty),
        v[1] + w * ty + (z * tx - x * tz),
        v[2] + w * tz + (x * ty - y * tx),
    )


def qrotate_inv(q: Quat, v: Vec3) -> Vec3:
    return qrotate(qconj(q), v)


def quat_from_axis_angle(axis: Vec3, angle: float) -> Quat:
    ax = vnormalize(axis)
    half = 0.5 * angle
    s = math.sin(half)
    return (math.cos(half), ax[0] * s, ax[1] * s, ax[2] * s)


def quat_integrate(q: Quat, omega: Vec3, dt: float) -> Quat:
    """First-order update q <- normalize(q + 0.5 * (0, omega) * q * dt)."""
    dq = qmul((0.0, omega[0], omega[1], omega[2]), q)
    return qnormalize(
        (
            q[0] + 0.5 * dq[0] * dt,
            q[1] + 0.5 * dq[1] * dt,
            q[2] + 0.5 * dq[2] * dt,
            q[3] + 0.5 * dq[3] * dt,
        )
    )


def quat_to_mat3(q: Quat) -> Mat3:
    w, x, y, z = q
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    return (
        (1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)),
        (2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)),
        (2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)),
    )


def mat3_to_quat(m: Mat3) -> Quat:
    tr = m[0][0] + m[1][1] + m[2][2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        return qnormalize(
            (0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s)
        )
    if m[0][0] > m[1][1] and m[0][0] > m[2][2]:
        s = math.sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0
        return qnormalize(
            ((m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s)
        )
    if m[1][1] > m[2][2]:
        s = math.sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0
        return qnormalize(
            ((m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s)
        )
    s = math.sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0
    return qnormalize(
        ((m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s)
    )


# -- matrices -------------------------------------------------------------


def mmulv(m: Mat3, v: Vec3) -> Vec3:
    return (
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    )


def mtransposev(m: Mat3, v: Vec3) -> Vec3:
    return (
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    )


def mmul(a: Mat3, b: Mat3) -> Mat3:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3)
    )  # type: ignore[return-value]


def mtranspose(m: Mat3) -> Mat3:
    return (
        (m[0][0], m[1][0], m[2][0]),
        (m[0][1], m[1][1], m[2][1]),
        (m[0][2], m[1][2], m[2][2]),
    )


def madd(a: Mat3, b: Mat3) -> Mat3:
    return (
        (a[0][0] + b[0][0], a[0][1] + b[0][1], a[0][2] + b[0][2]),
        (a[1][0] + b[1][0], a[1][1] + b[1][1], a[1][2] + b[1][2]),
        (a[2][0] + b[2][0], a[2][1] + b[2][1], a[2][2] + b[2][2]),
    )


def mscale(m: Mat3, s: float) -> Mat3:
    return (
        (m[0][0] * s, m[0][1] * s, m[0][2] * s),
        (m[1][0] * s, m[1][1] * s, m[1][2] * s),
        (m[2][0] * s, m[2][1] * s, m[2][2] * s),
    )


def mdet(m: Mat3) -> float:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def minverse(m: Mat3) -> Mat3:
    d = mdet(m)
    if d == 0.0:
        raise ValueError("singular matrix")
    inv = 1.0 / d
    return (
        (
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv,
        ),
        (
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv,
        ),
        (
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv,
        ),
    )


def skew(v: Vec3) -> Mat3:
    return (
        (0.0, -v[2], v[1]),
        (v[2], 0.0, -v[0]),
        (-v[1], v[0], 0.0),
    )


def solve3(m: Mat3, b: Vec3) -> Vec3:
    """Solve m x = b by Cramer's rule (deterministic, no pivoting noise)."""
    d = mdet(m)
    if d == 0.0:
        raise ValueError("singular system")
    inv = 1.0 / d
    dx = mdet(((b[0], m[0][1], m[0][2]), (b[1], m[1][1], m[1][2]), (b[2], m[2][1], m[2][2])))
    dy = mdet(((m[0][0], b[0], m[0][2]), (m[1][0], b[1], m[1][2]), (m[2][0], b[2], m[2][2])))
    dz = mdet(((m[0][0], m[0][1], b[0]), (m[1][0], m[1][1], b[1]), (m[2][0], m[2][1], b[2])))
    return (dx * inv, dy * inv, dz * inv)


def is_symmetric_positive_definite(m: Mat3, tol: float = 1e-9) -> bool:
    """Sylvester's criterion plus a symmetry check."""
    if (
        abs(m[0][1] - m[1][0]) > tol
        or abs(m[0][2] - m[2][0]) > tol
        or abs(m[1][2] - m[2][1]) > tol
    ):
        return False
    if m[0][0] <= 0.0:
        return False
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] <= 0.0:
        return False
    return mdet(m) > 0.0


# -- rigid transforms ------------------------------------------------------

from dataclasses import dataclass as _dataclass  # noqa: E402

QUAT_NORM_TOL = 1e-9


@_dataclass(frozen=True)
class Pose:
    """Rigid pose: position plus unit quaternion (w, x, y, z)."""

    position: Vec3 = (0.0, 0.0, 0.0)
    orientation: Quat = IDENTITY_QUAT

    def is_normalized(self, tol: float = QUAT_NORM_TOL) -> bool:
        return abs(qnorm(self.orientation) - 1.0) <= tol

    def transform_point(self, p: Vec3) -> Vec3:
        return vadd(self.position, qrotate(self.orientation, p))

    def rotate_vector(self, v: Vec3) -> Vec3:
        return qrotate(self.orientation, v)

    def compose(self, other: "Pose") -> "Pose":
        """self then other: world = self ∘ other (other in self's frame)."""
        return Pose(
            position=self.transform_point(other.position),
            orientation=qmul(self.orientation, other.orientation),
        )

    def inverse(self) -> "Pose":
        qc = qconj(self.orientation)
        return Pose(position=qrotate(qc, vneg(self.position)), orientation=qc)


IDENTITY_POSE = Pose()
