"""Joint constraints: fixed, revolute, prismatic, with limits and damping.

Joints run inside the same sequential-impulse pass as contacts.  Structural
(bilateral) rows are unclamped; limit and damping impulses are capped per
step at max_effort * dt.
"""

from __future__ import annotations

import math

from vtui.mathutil import (
    Mat3,
    Quat,
    Vec3,
    any_orthonormal,
    madd,
    minverse,
    qconj,
    qmul,
    qrotate,
    vadd,
    vcross,
    vdot,
    vscale,
    vsub,
)
from vtui.scene.types import JointSpec


def _wrap_angle(a: float) -> float:
    while a > math.pi:
        a -= 2.0 * math.pi
    while a < -math.pi:
        a += 2.0 * math.pi
    return a


class JointRuntime:
    """One joint instance bound to two bodies of a spawned model."""

    def __init__(self, spec: JointSpec, body_a, body_b):
        self.spec = spec
        self.body_a = body_a  # parent
        self.body_b = body_b  # child
        # local frames captured at spawn time
        qa, qb = body_a.orientation, body_b.orientation
        anchor_world = vadd(body_a.position, qrotate(qa, spec.anchor))
        self.anchor_a: Vec3 = spec.anchor
        self.anchor_b: Vec3 = qrotate(qconj(qb), vsub(anchor_world, body_b.position))
        self.axis_a: Vec3 = spec.axis
        self.axis_b: Vec3 = qrotate(qconj(qb), qrotate(qa, spec.axis))
        self.rel_q0: Quat = qmul(qconj(qa), qb)
        if spec.joint_type == "prismatic":
            self.ref_offset = vdot(
                qrotate(qa, spec.axis), vsub(body_b.position, anchor_world)
            )
        else:
            self.ref_offset = 0.0
        # per-step solver state
        self._limit_lambda = 0.0
        self._prepared = False

    # -- measurements -----------------------------------------------------

    def angle(self) -> float:
        """Twist angle about the joint axis relative to the spawn pose (rad)."""
        rel = qmul(qconj(self.body_a.orientation), self.body_b.orientation)
        delta = qmul(qconj(self.rel_q0), rel)
        w, x, y, z = delta
        twist = vdot((x, y, z), self.axis_a)
        return _wrap_angle(2.0 * math.atan2(twist, w))

    def displacement(self) -> float:
        """Translation along the joint axis relative to the spawn pose (m)."""
        aw = qrotate(self.body_a.orientation, self.axis_a)
        anchor_world = vadd(
            self.body_a.position, qrotate(self.body_a.orientation, self.anchor_a)
        )
        return vdot(aw, vsub(self.body_b.position, anchor_world)) - self.ref_offset

    # -- solving ------------------------------------------------------------

    def prepare(self, dt: float, beta: float) -> None:
        a, b = self.body_a, self.body_b
        self.ra = qrotate(a.orientation, self.anchor_a)
        self.rb = qrotate(b.orientation, self.anchor_b)
        self.axis_world = qrotate(a.orientation, self.axis_a)
        self.inv_dt_beta = beta / dt
        self.dt = dt
        self._limit_lambda = 0.0
        self._point_k_inv: Mat3 | None = None
        self._ang_k_inv: Mat3 | None = None
        self._prepared = True
        # damping acts once per step on the joint-axis velocity
        if self.spec.damping > 0.0:
            cap = self.spec.max_effort * dt
            if self.spec.joint_type == "revolute":
                w_ax = vdot(self.axis_world, vsub(b.angular_velocity, a.angular_velocity))
                k = self._angular_effective_mass(self.axis_world)
                lam = -self.spec.damping * w_ax * dt * k if k > 0 else 0.0
                lam = max(-cap, min(cap, lam))
                self._apply_angular(vscale(self.axis_world, lam))
            elif self.spec.joint_type == "prismatic":
                v_ax = vdot(self.axis_world, self._anchor_velocity())
                k = self._linear_effective_mass(self.axis_world)
                lam = -self.spec.damping * v_ax * dt * k if k > 0 else 0.0
                lam = max(-cap, min(cap, lam))
                self._apply_linear(vscale(self.axis_world, lam))

    def _anchor_velocity(self) -> Vec3:
        a, b = self.body_a, self.body_b
        va = vadd(a.linear_velocity, vcross(a.angular_velocity, self.ra))
        vb = vadd(b.linear_velocity, vcross(b.angular_velocity, self.rb))
        return vsub(vb, va)

    def _apply_linear(self, impulse: Vec3) -> None:
        a, b = self.body_a, self.body_b
        if not a.is_static:
            a.linear_velocity = vsub(a.linear_velocity, vscale(impulse, a.inv_mass))
            a.angular_velocity = vsub(
                a.angular_velocity, a.apply_inv_inertia(vcross(self.ra, impulse))
            )
        if not b.is_static:
            b.linear_velocity = vadd(b.linear_velocity, vscale(impulse, b.inv_mass))
            b.angular_velocity = vadd(
                b.angular_velocity, b.apply_inv_inertia(vcross(self.rb, impulse))
            )

    def _apply_angular(self, impulse: Vec3) -> None:
        a, b = self.body_a, self.body_b
        if not a.is_static:
            a.angular_velocity = vsub(a.angular_velocity, a.apply_inv_inertia(impulse))
        if not b.is_static:
            b.angular_velocity = vadd(b.angular_velocity, b.apply_inv_inertia(impulse))

    def _linear_effective_mass(self, d: Vec3) -> float:
        a, b = self.body_a, self.body_b
        k = a.inv_mass + b.inv_mass
        k += vdot(vcross(a.apply_inv_inertia(vcross(self.ra, d)), self.ra), d)
        k += vdot(vcross(b.apply_inv_inertia(vcross(self.rb, d)), self.rb), d)
        return 1.0 / k if k > 0.0 else 0.0

    def _angular_effective_mass(self, d: Vec3) -> float:
        a, b = self.body_a, self.body_b
        k = vdot(vadd(a.apply_inv_inertia(d), b.apply_inv_inertia(d)), d)
        return 1.0 / k if k > 0.0 else 0.0

    def _point_k_matrix(self) -> Mat3:
        a, b = self.body_a, self.body_b
        cols = []
        for e in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)):
            col = vscale(e, a.inv_mass + b.inv_mass)
            col = vadd(col, vcross(a.apply_inv_inertia(vcross(self.ra, e)), self.ra))
            col = vadd(col, vcross(b.apply_inv_inertia(vcross(self.rb, e)), self.rb))
            cols.append(col)
        # columns of K laid out as rows of the transpose; K is symmetric
        return (
            (cols[0][0], cols[1][0], cols[2][0]),
            (cols[0][1], cols[1][1], cols[2][1]),
            (cols[0][2], cols[1][2], cols[2][2]),
        )

    def _solve_point(self) -> None:
        a, b = self.body_a, self.body_b
        c_err = vsub(
            vadd(b.position, self.rb), vadd(a.position, self.ra)
        )
        u = self._anchor_velocity()
        rhs = vsub(vscale(c_err, -self.inv_dt_beta), u)
        if self._point_k_inv is None:
            self._point_k_inv = minverse(self._point_k_matrix())
        m = self._point_k_inv
        impulse = (
            m[0][0] * rhs[0] + m[0][1] * rhs[1] + m[0][2] * rhs[2],
            m[1][0] * rhs[0] + m[1][1] * rhs[1] + m[1][2] * rhs[2],
            m[2][0] * rhs[0] + m[2][1] * rhs[1] + m[2][2] * rhs[2],
        )
        self._apply_linear(impulse)

    def _solve_angular_lock(self) -> None:
        a, b = self.body_a, self.body_b
        target_qb = qmul(a.orientation, self.rel_q0)
        q_err = qmul(b.orientation, qconj(target_qb))
        if q_err[0] < 0.0:
            q_err = (-q_err[0], -q_err[1], -q_err[2], -q_err[3])
        rot_err = (2.0 * q_err[1], 2.0 * q_err[2], 2.0 * q_err[3])
        w_rel = vsub(b.angular_velocity, a.angular_velocity)
        rhs = vsub(vscale(rot_err, -self.inv_dt_beta), w_rel)
        if self._ang_k_inv is None:
            k = madd(a.inv_inertia_world(), b.inv_inertia_world())
            self._ang_k_inv = minverse(k)
        impulse = solve_from_inverse(self._ang_k_inv, rhs)
        self._apply_angular(impulse)

    def _solve_hinge_alignment(self) -> None:
        a, b = self.body_a, self.body_b
        aw = self.axis_world
        cw = qrotate(b.orientation, self.axis_b)
        b1 = any_orthonormal(aw)
        b2 = vcross(aw, b1)
        err = vcross(aw, cw)  # perpendicular misalignment, small-angle
        w_rel = vsub(b.angular_velocity, a.angular_velocity)
        rhs1 = -self.inv_dt_beta * vdot(err, b1) - vdot(w_rel, b1)
        rhs2 = -self.inv_dt_beta * vdot(err, b2) - vdot(w_rel, b2)
        ksum_b1 = vadd(a.apply_inv_inertia(b1), b.apply_inv_inertia(b1))
        ksum_b2 = vadd(a.apply_inv_inertia(b2), b.apply_inv_inertia(b2))
        k11 = vdot(b1, ksum_b1)
        k12 = vdot(b1, ksum_b2)
        k22 = vdot(b2, ksum_b2)
        det = k11 * k22 - k12 * k12
        if det == 0.0:
            return
        l1 = (rhs1 * k22 - rhs2 * k12) / det
        l2 = (rhs2 * k11 - rhs1 * k12) / det
        self._apply_angular(vadd(vscale(b1, l1), vscale(b2, l2)))

    def _solve_revolute_limit(self) -> None:
        limits = self.spec.limits
        if limits is None:
            return
        theta = self.angle()
        a, b = self.body_a, self.body_b
        aw = self.axis_world
        cap = self.spec.max_effort * self.dt
        w_ax = vdot(aw, vsub(b.angular_velocity, a.angular_velocity))
        k = self._angular_effective_mass(aw)
        if k <= 0.0:
            return
        if theta <= limits[0]:
            # need d(theta)/dt >= bias
            bias = self.inv_dt_beta * (limits[0] - theta)
            d_lambda = (bias - w_ax) * k
            new_total = min(max(self._limit_lambda + d_lambda, 0.0), cap)
            d_lambda = new_total - self._limit_lambda
            self._limit_lambda = new_total
            if d_lambda != 0.0:
                self._apply_angular(vscale(aw, d_lambda))
        elif theta >= limits[1]:
            bias = self.inv_dt_beta * (theta - limits[1])
            d_lambda = (bias + w_ax) * k
            new_total = min(max(-self._limit_lambda + d_lambda, 0.0), cap)
            d_lambda = new_total - (-self._limit_lambda)
            self._limit_lambda = -new_total
            if d_lambda != 0.0:
                self._apply_angular(vscale(aw, -d_lambda))

    def _solve_prismatic(self) -> None:
        a, b = self.body_a, self.body_b
        aw = self.axis_world
        p1 = any_orthonormal(aw)
        p2 = vcross(aw, p1)
        c_err = vsub(vadd(b.position, self.rb), vadd(a.position, self.ra))
        u = self._anchor_velocity()
        rhs1 = -self.inv_dt_beta * vdot(c_err, p1) - vdot(u, p1)
        rhs2 = -self.inv_dt_beta * vdot(c_err, p2) - vdot(u, p2)
        k11 = 1.0 / self._linear_effective_mass(p1)
        k22 = 1.0 / self._linear_effective_mass(p2)
        k12 = self._linear_cross_term(p1, p2)
        det = k11 * k22 - k12 * k12
        if det == 0.0:
            return
        l1 = (rhs1 * k22 - rhs2 * k12) / det
        l2 = (rhs2 * k11 - rhs1 * k12) / det
        self._apply_linear(vadd(vscale(p1, l1), vscale(p2, l2)))
        # limits along the axis
        limits = self.spec.limits
        if limits is None:
            return
        s = self.displacement()
        cap = self.spec.max_effort * self.dt
        v_ax = vdot(aw, self._anchor_velocity())
        k = self._linear_effective_mass(aw)
        if k <= 0.0:
            return
        if s <= limits[0]:
            bias = self.inv_dt_beta * (limits[0] - s)
            d_lambda = (bias - v_ax) * k
            new_total = min(max(self._limit_lambda + d_lambda, 0.0), cap)
            d_lambda = new_total - self._limit_lambda
            self._limit_lambda = new_total
            if d_lambda != 0.0:
                self._apply_linear(vscale(aw, d_lambda))
        elif s >= limits[1]:
            bias = self.inv_dt_beta * (s - limits[1])
            d_lambda = (bias + v_ax) * k
            new_total = min(max(-self._limit_lambda + d_lambda, 0.0), cap)
            d_lambda = new_total - (-self._limit_lambda)
            self._limit_lambda = -new_total
            if d_lambda != 0.0:
                self._apply_linear(vscale(aw, -d_lambda))

    def _linear_cross_term(self, d1: Vec3, d2: Vec3) -> float:
        a, b = self.body_a, self.body_b
        k = (a.inv_mass + b.inv_mass) * vdot(d1, d2)
        k += vdot(vcross(a.apply_inv_inertia(vcross(self.ra, d1)), self.ra), d2)
        k += vdot(vcross(b.apply_inv_inertia(vcross(self.rb, d1)), self.rb), d2)
        return k

    def iterate(self) -> None:
        kind = self.spec.joint_type
        if kind == "fixed":
            self._solve_angular_lock()
            self._solve_point()
        elif kind == "revolute":
            self._solve_hinge_alignment()
            self._solve_revolute_limit()
            self._solve_point()
        elif kind == "prismatic":
            self._solve_angular_lock()
            self._solve_prismatic()


def solve_from_inverse(m_inv: Mat3, rhs: Vec3) -> Vec3:
    return (
        m_inv[0][0] * rhs[0] + m_inv[0][1] * rhs[1] + m_inv[0][2] * rhs[2],
        m_inv[1][0] * rhs[0] + m_inv[1][1] * rhs[1] + m_inv[1][2] * rhs[2],
        m_inv[2][0] * rhs[0] + m_inv[2][1] * rhs[1] + m_inv[2][2] * rhs[2],
    )
