"""Co-rotating points: zero-vorticity tracers that move rigidly with a
polygonal equilibrium.

Tracer positions are searched on the rays ``z = t s1 exp(i K pi / n)``.
Even ``K`` are the vertex rays of the (first) ring, odd ``K`` the rays
through the midpoints of its sides.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import HypothesisUnmetError, PlanePoint, PointLike, VortexSystem, as_complex
from .dynamics import EquilibriumKind, classify
from .nested import (
    Alignment,
    NestedPolygonConfig,
    NestedSolution,
    absolute_equilibrium,
)
from .polygon import polygon_field, polygon_omega

RESIDUAL_TOL = 1e-10
GRID_SUBINTERVALS = 64
_EPS = np.finfo(float).eps


class RayKind(str, enum.Enum):
    ORIGIN = "ORIGIN"
    VERTEX_RAY = "VERTEX_RAY"
    MIDPOINT_RAY = "MIDPOINT_RAY"


@dataclass(frozen=True, slots=True)
class CorotatingPoint:
    ray: RayKind
    K: int
    radius: float
    position: PlanePoint
    residual: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "ray": self.ray.value,
            "K": self.K,
            "radius": self.radius,
            "position": self.position.to_list(),
            "residual": self.residual,
        }


def _origin() -> CorotatingPoint:
    return CorotatingPoint(RayKind.ORIGIN, 0, 0.0, PlanePoint(0.0, 0.0), 0.0)


def _ray_unit(n: int, k: int) -> complex:
    return complex(math.cos(k * math.pi / n), math.sin(k * math.pi / n))


def _bracket_roots(
    f: Callable[[float], float], nodes: Sequence[float], n_sub: int = GRID_SUBINTERVALS
) -> list[float]:
    """Roots of ``f`` on ``[nodes[0], nodes[-1]]``.

    Each segment between consecutive nodes is split into ``n_sub`` pieces.
    Sign changes are refined with Brent's method; pieces without a sign
    change whose samples suggest an interior extremum are searched for a
    sign change at that extremum (near-tangent double roots).
    """
    roots: list[float] = []
    for a0, b0 in zip(nodes[:-1], nodes[1:]):
        xs = np.linspace(a0, b0, n_sub + 1)
        fs = np.array([f(x) for x in xs])
        for i in range(n_sub):
            a, b, fa, fb = xs[i], xs[i + 1], fs[i], fs[i + 1]
            if fa == 0.0:
                roots.append(a)
                continue
            if fa * fb < 0:
                roots.append(brentq(f, a, b, xtol=1e-300, rtol=4 * _EPS, maxiter=500))
                continue
            # look for a hidden pair of roots inside a same-sign piece
            lo, hi = max(i - 1, 0), min(i + 2, n_sub)
            window = np.abs(fs[lo : hi + 1])
            if window.size >= 3 and np.argmin(window) not in (0, window.size - 1):
                s = np.sign(fa)
                res = minimize_scalar(
                    lambda x: s * f(x), bounds=(xs[lo], xs[hi]), method="bounded",
                    options={"xatol": 1e-14},
                )
                xm = float(res.x)
                if a < xm < b and s * f(xm) < 0:
                    roots.append(brentq(f, a, xm, xtol=1e-300, rtol=4 * _EPS))
                    roots.append(brentq(f, xm, b, xtol=1e-300, rtol=4 * _EPS))
        if fs[-1] == 0.0 and b0 == nodes[-1]:
            roots.append(b0)
    roots.sort()
    out: list[float] = []
    for t in roots:
        if t > 0 and not (out and abs(t - out[-1]) <= 1e-9 * t):
            out.append(t)
    return out


def single_ray_polynomial(n: int, t: float, midpoint: bool) -> float:
    """``(n-1) t**n - 2n t**(n-2) -+ (n-1)``; zero iff ``t s`` (or ``t s e^{i pi/n}``) co-rotates."""
    c = (n - 1) * (t**n) - 2 * n * t ** (n - 2)
    return c + (n - 1) if midpoint else c - (n - 1)


def _single_residual(n: int, s: complex, gamma: float, omega: float, z: complex) -> float:
    return abs(polygon_field(n, s, gamma, z) - 1j * omega * z)


def corotating_single(
    n: int, s: PointLike, gamma: float = 1.0, *, all_rays: bool = True
) -> list[CorotatingPoint]:
    """Co-rotating points of a regular ``n``-gon with equal vorticities.

    Returns the origin followed by the tracer positions on every vertex
    ray and midpoint ray (``K = 0, ..., 2n-1``), or only on ``K = 0, 1``
    when ``all_rays`` is false.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    s = as_complex(s)
    if s == 0:
        raise ValueError("s must be nonzero")
    omega = polygon_omega(n, s, n * gamma)
    # both ray polynomials are negative at 0+ (n >= 3) and have one turning point
    t_max = 1.0 + 2.0 * n / (n - 1)
    nodes = [0.0, t_max]
    if n > 2:
        nodes.insert(1, math.sqrt(2.0 * (n - 2) / (n - 1)))
    points = [_origin()]
    for midpoint in (False, True):
        radii = _bracket_roots(lambda t: single_ray_polynomial(n, t, midpoint), nodes)
        first = 1 if midpoint else 0
        ks = range(first, 2 * n, 2) if all_rays else [first]
        for k in ks:
            u = _ray_unit(n, k)
            for t in radii:
                z = t * s * u
                points.append(
                    CorotatingPoint(
                        RayKind.MIDPOINT_RAY if midpoint else RayKind.VERTEX_RAY,
                        k,
                        abs(t),
                        PlanePoint.from_complex(z),
                        _single_residual(n, s, gamma, omega, z),
                    )
                )
    return [p for p in points if p.ray is RayKind.ORIGIN or p.residual < RESIDUAL_TOL * max(1.0, abs(omega) * p.radius)]


def _two_ring_field(c: NestedPolygonConfig, z: complex) -> complex:
    return polygon_field(c.n, c.s1, c.gamma1, z) + polygon_field(c.n, c.s2, c.gamma2, z)


def meets_corotation_hypothesis(c: NestedPolygonConfig) -> bool:
    """Same-sign vorticities with aligned rings, or opposite signs with staggered rings."""
    al = c.alignment
    same_sign = (c.gamma1 > 0) == (c.gamma2 > 0)
    return (same_sign and al is Alignment.ALIGNED) or (not same_sign and al is Alignment.STAGGERED)


def corotating_nested(
    c: NestedPolygonConfig | NestedSolution,
    *,
    require_hypothesis: bool = True,
) -> list[CorotatingPoint]:
    """Co-rotating points of a two-ring relative equilibrium.

    On ray ``K``, with ``w = (-1)**K t**n`` and ``Q = (s2/s1)**n`` (real),
    the tracer condition reduces to the real polynomial equation

        n w [g1 (w - Q) + g2 (w - 1)] = omega |s1|**2 t**2 (w - 1)(w - Q)

    whose positive roots are bracketed between the ring singularities.
    The search only covers the ``2n`` rays ``K pi/n``, which contain every
    co-rotating point when the vorticities have the same sign and the rings
    are aligned, or opposite signs and the rings are staggered. Other
    configurations raise :class:`HypothesisUnmetError` unless
    ``require_hypothesis`` is false.
    """
    if isinstance(c, NestedSolution):
        c = c.config
    if c.alignment is None:
        raise HypothesisUnmetError("the rings are neither aligned nor staggered")
    if require_hypothesis and not meets_corotation_hypothesis(c):
        raise HypothesisUnmetError(
            "co-rotating points are confined to the K pi/n rays only for same-sign "
            "aligned or opposite-sign staggered rings"
        )
    system = c.to_system()
    report = classify(system)
    if report.kind not in (EquilibriumKind.ROTATION, EquilibriumKind.ABSOLUTE):
        raise HypothesisUnmetError(f"configuration is not a relative equilibrium ({report.kind.value})")
    omega = report.omega
    n = c.n
    q = c.s2 / c.s1
    big_q = float((q**n).real)
    a1 = abs(c.s1) ** 2
    g1, g2 = c.gamma1, c.gamma2

    points = [_origin()]
    for parity in (0, 1):
        sigma = 1.0 if parity == 0 else -1.0

        def poly(t: float) -> float:
            # divided by t**2 to drop the double root at the origin
            w = sigma * t**n
            return (
                n * sigma * t ** (n - 2) * (g1 * (w - big_q) + g2 * (w - 1.0))
                - omega * a1 * (w - 1.0) * (w - big_q)
            )

        # Cauchy bound of the polynomial in t
        lead = abs(omega) * a1 if abs(omega) > 0 else n * abs(g1 + g2)
        coeffs = [n * abs(g1 * big_q + g2), n * abs(g1 + g2), abs(omega) * a1 * abs(1 + big_q), abs(omega) * a1 * abs(big_q)]
        t_max = 1.0 + max(coeffs) / lead if lead > 0 else 1e6
        singular = sorted({1.0} | ({abs(big_q) ** (1.0 / n)} if sigma * big_q > 0 else set()))
        nodes = [0.0] + [t for t in singular if t < t_max] + [t_max]
        radii = _bracket_roots(poly, nodes)
        for k in range(parity, 2 * n, 2):
            u = _ray_unit(n, k)
            for t in radii:
                z = t * c.s1 * u
                try:
                    resid = abs(_two_ring_field(c, z) - 1j * omega * z)
                except Exception:
                    continue
                if resid < RESIDUAL_TOL:
                    points.append(
                        CorotatingPoint(
                            RayKind.VERTEX_RAY if parity == 0 else RayKind.MIDPOINT_RAY,
                            k,
                            t,
                            PlanePoint.from_complex(z),
                            resid,
                        )
                    )
    return points


def corotating_absolute(n: int, gamma1: float = 1.0, s1: PointLike = 1.0) -> CorotatingPoint:
    """The nonzero fixed tracer of the two-ring absolute equilibrium.

    With ``r = gamma2/gamma1 = -mu_n`` it sits at ``(z/s1)**n = r (1 - r)/(1 + r)``,
    a positive number, so on a vertex ray of the inner ring.
    """
    eq = absolute_equilibrium(n, gamma1, s1)
    s1c = as_complex(s1)
    r = eq.gamma2 / gamma1
    value = r * (1.0 - r) / (1.0 + r)
    if value <= 0:
        raise ArithmeticError(f"(z/s1)**n = {value} is not positive")
    t = value ** (1.0 / n)
    z = t * s1c
    s2 = s1c * complex(eq.s2_over_s1)
    field = polygon_field(n, s1c, gamma1, z) + polygon_field(n, s2, eq.gamma2, z)
    return CorotatingPoint(RayKind.VERTEX_RAY, 0, t, PlanePoint.from_complex(z), abs(field))


def tracer_system(generator: VortexSystem, point: CorotatingPoint) -> VortexSystem:
    """``generator`` with a zero-vorticity vortex added at the tracer position."""
    return generator.add_vortex(point.position, 0.0)


def corotating_json(generator: VortexSystem, points: Sequence[CorotatingPoint], **kwargs: Any) -> str:
    return json.dumps(
        {"generator": generator.to_dict(), "points": [p.to_dict() for p in points]}, **kwargs
    )
