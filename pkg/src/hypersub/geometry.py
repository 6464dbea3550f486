"""Geometry of the Poincaré disk, its curvature-scaled variants, and the flat plane.

Models
------
* ``poincare-disk``: the open unit disk with metric
  ``<u,v>_p = 4<u,v> / (1-|p|^2)^2`` (constant curvature -1).
* ``scaled-disk``: same carrier, metric divided by ``kappa^2``. Distances are
  the Poincaré distances divided by ``kappa`` and the curvature is
  ``-kappa^2``; geodesics and the exponential map coincide with the
  unscaled disk.
* ``euclidean-plane``: the flat fallback. Points are unconstrained pairs.

All operations are pure functions of immutable values.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

# exp() clamps radially to BOUNDARY_CLAMP when the result lands within
# DRIFT_EPS of the unit circle; the caller sees a drift flag.
DRIFT_EPS = 1e-15
BOUNDARY_CLAMP = 1.0 - 1e-12


class ZeroVector(ValueError):
    """An operation that needs a nonzero tangent vector received zero."""


class ResultOutsideDisk(ArithmeticError):
    """A disk operation produced a non-finite or out-of-disk point."""


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk, read as the complex number x + iy.

    ``check=False`` skips the disk bound and is reserved for carriers of the
    flat plane (where coordinates are unconstrained).
    """

    x: float
    y: float
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")
        if check and self.x * self.x + self.y * self.y >= 1.0:
            raise ValueError(f"point ({self.x}, {self.y}) is not inside the open unit disk")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex, check: bool = True) -> "DiskPoint":
        return cls(z.real, z.imag, check)

    @classmethod
    def plane(cls, x: float, y: float) -> "DiskPoint":
        """Unconstrained point for the Euclidean plane model."""
        return cls(x, y, check=False)

    def abs2(self) -> float:
        return self.x * self.x + self.y * self.y


ORIGIN = DiskPoint(0.0, 0.0)


@dataclass(frozen=True)
class Tangent:
    """Tangent vector at ``base``, stored by its Euclidean components.

    The length of a tangent depends on the owning manifold; use
    ``Manifold.norm``.
    """

    base: DiskPoint
    vx: float
    vy: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "vx", float(self.vx))
        object.__setattr__(self, "vy", float(self.vy))
        if not (math.isfinite(self.vx) and math.isfinite(self.vy)):
            raise ValueError(f"tangent components must be finite, got ({self.vx}, {self.vy})")

    @property
    def v(self) -> complex:
        return complex(self.vx, self.vy)

    @classmethod
    def from_complex(cls, base: DiskPoint, v: complex) -> "Tangent":
        return cls(base, v.real, v.imag)

    def is_zero(self) -> bool:
        return self.vx == 0.0 and self.vy == 0.0

    def scaled(self, factor: float) -> "Tangent":
        return Tangent(self.base, self.vx * factor, self.vy * factor)


def _poincare_distance(p: complex, q: complex) -> float:
    # 2*atanh(|p-q| / |1 - conj(p) q|) equals the usual
    # arccosh(1 + 2|p-q|^2 / ((1-|p|^2)(1-|q|^2))) but keeps full relative
    # accuracy for nearby points.
    num = abs(q - p)
    if num == 0.0:
        return 0.0
    rho = num / abs(1.0 - p.conjugate() * q)
    if rho >= 1.0:  # only reachable through rounding at the very boundary
        rho = math.nextafter(1.0, 0.0)
    return 2.0 * math.atanh(rho)


@dataclass(frozen=True)
class Manifold:
    """One of the three supported models with its curvature bound ``kappa``.

    ``kappa`` is the comparison constant: the sectional curvature is
    ``-kappa^2`` (0 for the plane, 1 for the Poincaré disk).
    """

    model: str
    kappa: float

    def __post_init__(self) -> None:
        if self.model not in ("poincare-disk", "scaled-disk", "euclidean-plane"):
            raise ValueError(f"unknown manifold model {self.model!r}")
        object.__setattr__(self, "kappa", float(self.kappa))
        if self.model == "euclidean-plane":
            if self.kappa != 0.0:
                raise ValueError("the flat plane has curvature bound 0")
        elif not self.kappa > 0.0:
            raise ValueError("disk models need kappa > 0")
        if self.model == "poincare-disk" and self.kappa != 1.0:
            raise ValueError("the Poincaré disk has kappa = 1")

    @property
    def flat(self) -> bool:
        return self.model == "euclidean-plane"

    def point(self, x: float, y: float) -> DiskPoint:
        return DiskPoint(x, y, check=not self.flat)

    def contains(self, p: DiskPoint) -> bool:
        return self.flat or p.abs2() < 1.0

    # -- metric ------------------------------------------------------------

    def distance(self, p: DiskPoint, q: DiskPoint) -> float:
        if self.flat:
            return abs(q.z - p.z)
        return _poincare_distance(p.z, q.z) / self.kappa

    def inner(self, u: Tangent, v: Tangent) -> float:
        if u.base != v.base:
            raise ValueError("tangents live at different base points")
        dot = u.vx * v.vx + u.vy * v.vy
        if self.flat:
            return dot
        lam = 2.0 / (1.0 - u.base.abs2())
        return dot * (lam / self.kappa) ** 2

    def norm(self, v: Tangent) -> float:
        e = math.hypot(v.vx, v.vy)
        if self.flat:
            return e
        return 2.0 * e / ((1.0 - v.base.abs2()) * self.kappa)

    def unit(self, v: Tangent) -> Tangent:
        n = self.norm(v)
        if n == 0.0:
            raise ZeroVector("cannot normalize the zero tangent")
        return v.scaled(1.0 / n)

    def angle(self, u: Tangent, v: Tangent) -> float:
        """Angle in [0, pi]; all three models are conformal to the plane, so
        this is the Euclidean angle between the component vectors."""
        if u.base != v.base:
            raise ValueError("tangents live at different base points")
        nu = math.hypot(u.vx, u.vy)
        nv = math.hypot(v.vx, v.vy)
        if nu == 0.0 or nv == 0.0:
            raise ZeroVector("angle of a zero tangent is undefined")
        c = (u.vx * v.vx + u.vy * v.vy) / (nu * nv)
        return math.acos(max(-1.0, min(1.0, c)))

    # -- exponential map and its inverse ------------------------------------

    def exp_with_drift(self, p: DiskPoint, v: Tangent) -> tuple[DiskPoint, bool]:
        """Endpoint of the unit-time geodesic from ``p`` with velocity ``v``.

        Returns ``(point, drifted)``; ``drifted`` is True when rounding pushed
        the result against the unit circle and it was clamped radially to
        ``BOUNDARY_CLAMP``.
        """
        if v.base != p:
            raise ValueError("tangent is not based at p")
        if v.is_zero():
            return p, False
        if self.flat:
            return DiskPoint.plane(p.x + v.vx, p.y + v.vy), False
        ec = v.v
        # Step length in unscaled-disk units: the scaled metric shortens the
        # manifold norm by kappa, and the geodesic parameter stretches by the
        # same factor, so kappa cancels.
        t = 2.0 * abs(ec) / (1.0 - p.abs2())
        u = ec / abs(ec)
        r = math.tanh(0.5 * t)
        w = (u * r + p.z) / (1.0 + p.z.conjugate() * u * r)
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            raise ResultOutsideDisk(f"exp produced a non-finite point from {p} with |v|={t}")
        a = abs(w)
        drifted = False
        if a >= 1.0 - DRIFT_EPS:
            w *= BOUNDARY_CLAMP / a
            drifted = True
        return DiskPoint(w.real, w.imag), drifted

    def exp(self, p: DiskPoint, v: Tangent) -> DiskPoint:
        return self.exp_with_drift(p, v)[0]

    def log(self, p: DiskPoint, q: DiskPoint) -> Tangent:
        """The tangent at ``p`` with ``exp(p, log(p, q)) = q`` and manifold
        norm equal to ``distance(p, q)``."""
        if self.flat:
            return Tangent(p, q.x - p.x, q.y - p.y)
        w0 = (q.z - p.z) / (1.0 - p.z.conjugate() * q.z)
        rho = abs(w0)
        if rho == 0.0:
            return Tangent(p, 0.0, 0.0)
        if rho >= 1.0:
            rho_c = math.nextafter(1.0, 0.0)
        else:
            rho_c = rho
        d = 2.0 * math.atanh(rho_c)
        # Euclidean components are kappa-independent: the manifold norm and
        # the manifold distance pick up the same 1/kappa.
        ec = w0 * (d * (1.0 - p.abs2()) / (2.0 * rho))
        return Tangent(p, ec.real, ec.imag)

    # -- derived quantities --------------------------------------------------

    def distance_to_x_axis(self, p: DiskPoint) -> float:
        """Distance from ``p`` to the diameter (-1, 1) x {0} (to the x-axis
        in the flat model)."""
        if self.flat:
            return abs(p.y)
        return math.asinh(2.0 * abs(p.y) / (1.0 - p.abs2())) / self.kappa

    def x_axis_projection(self, p: DiskPoint) -> DiskPoint:
        """Nearest point of the x-axis diameter to ``p``."""
        if self.flat:
            return DiskPoint.plane(p.x, 0.0)
        if p.x == 0.0:
            return ORIGIN
        # The foot s solves x s^2 - (1+|p|^2) s + x = 0; its two roots have
        # product 1, so take the reciprocal of the stable large root.
        n = p.abs2()
        s_big = ((1.0 + n) + math.sqrt((1.0 + n) ** 2 - 4.0 * p.x * p.x)) / (2.0 * p.x)
        return DiskPoint(1.0 / s_big, 0.0)


POINCARE_DISK = Manifold("poincare-disk", 1.0)
EUCLIDEAN_PLANE = Manifold("euclidean-plane", 0.0)


def scaled_disk(kappa: float) -> Manifold:
    return Manifold("scaled-disk", kappa)


@dataclass(frozen=True)
class MobiusIsometry:
    """Disk automorphism z -> (u z + c) / (1 + conj(c) u z) with |u| = 1.

    It maps 0 to ``c`` and preserves the Poincaré (and any scaled) metric.
    """

    c: complex
    u: complex = 1.0 + 0.0j

    def __post_init__(self) -> None:
        if abs(self.c) >= 1.0:
            raise ValueError("isometry center must lie inside the disk")
        mu = abs(self.u)
        if mu == 0.0:
            raise ZeroVector("rotation factor must be nonzero")
        object.__setattr__(self, "u", self.u / mu)

    @classmethod
    def origin_to(cls, p: DiskPoint, direction: complex = 1.0 + 0.0j) -> "MobiusIsometry":
        """Isometry sending the origin to ``p``; ``direction`` rotates the
        ray tanh(t/2) before translating."""
        return cls(p.z, direction)

    def apply_z(self, z: complex) -> complex:
        return (self.u * z + self.c) / (1.0 + self.c.conjugate() * self.u * z)

    def invert_z(self, w: complex) -> complex:
        return ((w - self.c) / (1.0 - self.c.conjugate() * w)) * self.u.conjugate()

    def apply(self, p: DiskPoint) -> DiskPoint:
        return DiskPoint.from_complex(self.apply_z(p.z))

    def apply_inverse(self, p: DiskPoint) -> DiskPoint:
        return DiskPoint.from_complex(self.invert_z(p.z))

    def _derivative(self, z: complex) -> complex:
        return self.u * (1.0 - abs(self.c) ** 2) / (1.0 + self.c.conjugate() * self.u * z) ** 2

    def push(self, t: Tangent) -> Tangent:
        """Pushforward of a tangent along the map (conformal, so a complex
        scaling of the components)."""
        z = t.base.z
        return Tangent.from_complex(self.apply(t.base), self._derivative(z) * t.v)

    def pull(self, t: Tangent) -> Tangent:
        """Pushforward along the inverse map."""
        z = self.invert_z(t.base.z)
        return Tangent.from_complex(DiskPoint.from_complex(z), t.v / self._derivative(z))


def mobius_to_origin(p: DiskPoint) -> MobiusIsometry:
    """Canonical isometry exchanging ``p`` and the origin: ``apply`` maps
    0 -> p and ``apply_inverse`` maps p -> 0."""
    return MobiusIsometry.origin_to(p)


def geodesic_from_origin(eta: complex, t: float) -> DiskPoint:
    """Point at arclength ``t`` on the unit-speed ray from 0 toward the
    boundary direction ``eta`` (Poincaré metric)."""
    e = eta / abs(eta)
    return DiskPoint.from_complex(e * math.tanh(0.5 * t))


def ray_distance(x: DiskPoint, eta: complex, t: float) -> float:
    """Poincaré distance from ``x`` to the ray point at arclength ``t`` toward
    ``eta``, evaluated without forming the near-boundary point (stable for
    large ``t``)."""
    e = eta / abs(eta)
    arg = (math.cosh(t) * (1.0 + x.abs2()) - 2.0 * math.sinh(t) * (e.conjugate() * x.z).real) / (
        1.0 - x.abs2()
    )
    return math.acosh(max(1.0, arg))
