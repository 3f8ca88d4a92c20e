"""Sequential-impulse contact constraints (velocity level, Baumgarte bias)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from vtui.physics.collision import Contact
from vtui.mathutil import (
    Vec3,
    any_orthonormal,
    vadd,
    vcross,
    vdot,
    vscale,
    vsub,
)


@dataclass
class ContactParams:
    baumgarte_beta: float = 0.2
    slop_m: float = 1e-3
    solver_iterations: int = 10
    restitution_threshold: float = 0.05  # m/s approach speed below which no bounce
    linear_velocity_clamp: float = 100.0  # m/s
    angular_velocity_clamp: float = 100.0  # rad/s


class ContactConstraint:
    """One manifold point between two bodies, with a friction pair."""

    __slots__ = (
        "contact",
        "body_a",
        "body_b",
        "ra",
        "rb",
        "normal",
        "t1",
        "t2",
        "mass_n",
        "mass_t1",
        "mass_t2",
        "target_vn",
        "mu",
        "lambda_n",
        "lambda_t1",
        "lambda_t2",
    )

    def __init__(self, contact: Contact, body_a, body_b, dt: float, params: ContactParams):
        self.contact = contact
        self.body_a = body_a
        self.body_b = body_b
        self.normal = contact.normal
        self.ra = vsub(contact.point, body_a.position)
        self.rb = vsub(contact.point, body_b.position)
        self.t1 = any_orthonormal(self.normal)
        self.t2 = vcross(self.normal, self.t1)

        self.mass_n = self._effective_mass(self.normal)
        self.mass_t1 = self._effective_mass(self.t1)
        self.mass_t2 = self._effective_mass(self.t2)

        # combine material parameters
        self.mu = math.sqrt(body_a.friction_mu * body_b.friction_mu)
        restitution = max(body_a.restitution, body_b.restitution)

        vn0 = vdot(self._relative_velocity(), self.normal)
        bounce = 0.0
        if -vn0 > params.restitution_threshold:
            bounce = -restitution * vn0
        baumgarte = (
            params.baumgarte_beta / dt * max(contact.penetration - params.slop_m, 0.0)
        )
        self.target_vn = max(bounce, baumgarte)

        self.lambda_n = 0.0
        self.lambda_t1 = 0.0
        self.lambda_t2 = 0.0

    def _effective_mass(self, d: Vec3) -> float:
        a, b = self.body_a, self.body_b
        k = a.inv_mass + b.inv_mass
        ra_x_d = vcross(self.ra, d)
        rb_x_d = vcross(self.rb, d)
        k += vdot(vcross(a.apply_inv_inertia(ra_x_d), self.ra), d)
        k += vdot(vcross(b.apply_inv_inertia(rb_x_d), self.rb), d)
        return 1.0 / k if k > 0.0 else 0.0

    def _relative_velocity(self) -> Vec3:
        a, b = self.body_a, self.body_b
        va = vadd(a.linear_velocity, vcross(a.angular_velocity, self.ra))
        vb = vadd(b.linear_velocity, vcross(b.angular_velocity, self.rb))
        return vsub(vb, va)

    def _apply(self, impulse: Vec3) -> None:
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

    def solve_normal(self) -> None:
        vn = vdot(self._relative_velocity(), self.normal)
        d_lambda = (self.target_vn - vn) * self.mass_n
        new_total = max(self.lambda_n + d_lambda, 0.0)
        d_lambda = new_total - self.lambda_n
        self.lambda_n = new_total
        if d_lambda != 0.0:
            self._apply(vscale(self.normal, d_lambda))

    def solve_friction(self) -> None:
        rel = self._relative_velocity()
        d1 = -vdot(rel, self.t1) * self.mass_t1
        d2 = -vdot(rel, self.t2) * self.mass_t2
        new1 = self.lambda_t1 + d1
        new2 = self.lambda_t2 + d2
        # project onto the circular friction cone |lambda_t| <= mu * lambda_n
        limit = self.mu * self.lambda_n
        mag = math.hypot(new1, new2)
        if mag > limit:
            scale = limit / mag if mag > 0.0 else 0.0
            new1 *= scale
            new2 *= scale
        d1 = new1 - self.lambda_t1
        d2 = new2 - self.lambda_t2
        self.lambda_t1 = new1
        self.lambda_t2 = new2
        if d1 != 0.0 or d2 != 0.0:
            self._apply(vadd(vscale(self.t1, d1), vscale(self.t2, d2)))

    def finalize(self) -> None:
        """Write back applied impulses for sensors and debugging."""
        self.contact.applied_normal_impulse = self.lambda_n
        self.contact.applied_friction_impulse = math.hypot(self.lambda_t1, self.lambda_t2)
