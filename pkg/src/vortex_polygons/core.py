"""Plane arithmetic, vortex systems and their conserved quantities."""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

#: Below this magnitude the total vorticity is treated as exactly zero.
ZERO_VORTICITY_TOL = 1e-12
#: Smallest mutual distance accepted in a :class:`VortexSystem`.
MIN_DISTANCE = 1e-9


class VortexError(Exception):
    """Base class for errors raised by this package."""


class CloseApproachError(VortexError):
    """Two vortices came closer than :data:`MIN_DISTANCE`."""


class SingularFieldError(VortexError):
    """A polygon field was evaluated on (or too near) one of its vortices."""


class BoundaryError(VortexError):
    """A case-deciding quantity is too close to zero to pick a branch."""

    def __init__(self, message: str, quantity: str = "") -> None:
        super().__init__(message)
        self.quantity = quantity


class HypothesisUnmetError(VortexError):
    """The input does not satisfy the hypotheses an operation relies on."""


def normalize_angle(theta: float) -> float:
    """Map an angle onto the branch (-pi, pi]."""
    theta = math.remainder(theta, 2.0 * math.pi)
    if theta <= -math.pi:
        theta += 2.0 * math.pi
    return theta


@dataclass(frozen=True, slots=True)
class PlanePoint:
    """A point of the plane with complex-number semantics."""

    x: float
    y: float

    @classmethod
    def from_complex(cls, z: complex) -> PlanePoint:
        z = complex(z)
        return cls(z.real, z.imag)

    @classmethod
    def polar(cls, r: float, theta: float) -> PlanePoint:
        return cls(r * math.cos(theta), r * math.sin(theta))

    def __complex__(self) -> complex:
        return complex(self.x, self.y)

    def __iter__(self):
        yield self.x
        yield self.y

    def __add__(self, other: PointLike) -> PlanePoint:
        return PlanePoint.from_complex(complex(self) + as_complex(other))

    __radd__ = __add__

    def __sub__(self, other: PointLike) -> PlanePoint:
        return PlanePoint.from_complex(complex(self) - as_complex(other))

    def __rsub__(self, other: PointLike) -> PlanePoint:
        return PlanePoint.from_complex(as_complex(other) - complex(self))

    def __mul__(self, other: PointLike) -> PlanePoint:
        return PlanePoint.from_complex(complex(self) * as_complex(other))

    __rmul__ = __mul__

    def __truediv__(self, other: PointLike) -> PlanePoint:
        return PlanePoint.from_complex(complex(self) / as_complex(other))

    def __rtruediv__(self, other: PointLike) -> PlanePoint:
        return PlanePoint.from_complex(as_complex(other) / complex(self))

    def __neg__(self) -> PlanePoint:
        return PlanePoint(-self.x, -self.y)

    def __pow__(self, k: int) -> PlanePoint:
        if not isinstance(k, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        return PlanePoint.from_complex(complex(self) ** int(k))

    def conj(self) -> PlanePoint:
        return PlanePoint(self.x, -self.y)

    def modulus(self) -> float:
        return math.hypot(self.x, self.y)

    def arg(self) -> float:
        """Argument in (-pi, pi]; 0 for the origin."""
        return normalize_angle(math.atan2(self.y, self.x))

    def isclose(self, other: PointLike, atol: float = 1e-12) -> bool:
        return abs(complex(self) - as_complex(other)) <= atol

    def to_list(self) -> list[float]:
        return [float(self.x), float(self.y)]


PointLike = Union[PlanePoint, complex, float, int, Sequence[float]]


def as_complex(p: PointLike) -> complex:
    """Coerce a PlanePoint, number or ``(x, y)`` pair to a Python complex."""
    if isinstance(p, PlanePoint):
        return complex(p.x, p.y)
    if isinstance(p, (complex, float, int, np.number)):
        return complex(p)
    x, y = p  # type: ignore[misc]
    return complex(float(x), float(y))


def _pairwise_differences(z: ComplexArray) -> ComplexArray:
    return z[:, None] - z[None, :]


class VortexSystem:
    """Positions and vorticities of ``N >= 2`` point vortices.

    Positions are kept as a read-only complex array; ``points`` gives the
    same data as :class:`PlanePoint` objects. Instances are immutable.
    """

    __slots__ = ("positions", "vorticities", "_min_distance")

    positions: ComplexArray
    vorticities: FloatArray

    def __init__(self, positions: Any, vorticities: Any) -> None:
        z = np.asarray([as_complex(p) for p in positions], dtype=np.complex128)
        g = np.asarray(vorticities, dtype=np.float64).ravel()
        if z.ndim != 1 or z.size < 2:
            raise ValueError("a vortex system needs at least two vortices")
        if g.size != z.size:
            raise ValueError(
                f"got {z.size} positions but {g.size} vorticities"
            )
        if not (np.isfinite(z).all() and np.isfinite(g).all()):
            raise ValueError("positions and vorticities must be finite")
        d = np.abs(_pairwise_differences(z))
        np.fill_diagonal(d, np.inf)
        dmin = float(d.min())
        if dmin <= MIN_DISTANCE:
            raise CloseApproachError(
                f"minimum mutual distance {dmin:.3e} is below {MIN_DISTANCE:g}"
            )
        z.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "positions", z)
        object.__setattr__(self, "vorticities", g)
        object.__setattr__(self, "_min_distance", dmin)

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("VortexSystem is immutable")

    def __repr__(self) -> str:
        return (
            f"VortexSystem(positions={self.positions.tolist()!r}, "
            f"vorticities={self.vorticities.tolist()!r})"
        )

    def __len__(self) -> int:
        return self.positions.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VortexSystem):
            return NotImplemented
        return np.array_equal(self.positions, other.positions) and np.array_equal(
            self.vorticities, other.vorticities
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def n_vortices(self) -> int:
        return self.positions.size

    @property
    def points(self) -> list[PlanePoint]:
        return [PlanePoint.from_complex(z) for z in self.positions]

    @property
    def min_distance(self) -> float:
        return self._min_distance

    def with_positions(self, positions: Any) -> VortexSystem:
        return VortexSystem(positions, self.vorticities)

    def add_vortex(self, position: PointLike, vorticity: float = 0.0) -> VortexSystem:
        z = np.append(self.positions, as_complex(position))
        g = np.append(self.vorticities, float(vorticity))
        return VortexSystem(z, g)

    def transformed(self, scale: PointLike = 1.0, shift: PointLike = 0.0) -> VortexSystem:
        """Apply the similarity ``z -> scale * z + shift`` to every vortex."""
        return VortexSystem(
            as_complex(scale) * self.positions + as_complex(shift), self.vorticities
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "positions": [[float(z.real), float(z.imag)] for z in self.positions],
            "vorticities": [float(g) for g in self.vorticities],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> VortexSystem:
        unknown = set(data) - {"positions", "vorticities"}
        if unknown:
            raise ValueError(f"unknown keys in vortex system: {sorted(unknown)}")
        try:
            positions = data["positions"]
            vorticities = data["vorticities"]
        except KeyError as exc:
            raise ValueError(f"missing key {exc.args[0]!r}") from None
        for p in positions:
            if len(p) != 2:
                raise ValueError("each position must be an [x, y] pair")
        return cls([complex(float(x), float(y)) for x, y in positions], vorticities)

    def to_json(self, **kwargs: Any) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> VortexSystem:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, slots=True)
class ConservedQuantities:
    total_vorticity: float
    center_of_vorticity: PlanePoint | None
    hamiltonian: float
    angular_impulse: float


def mutual_distances(s: VortexSystem) -> FloatArray:
    """Symmetric matrix of ``|z_k - z_l|`` with a zero diagonal."""
    dz = _pairwise_differences(s.positions)
    # hypot on the parts agrees bit-for-bit with abs() on Python complex
    d = np.hypot(dz.real, dz.imag)
    np.fill_diagonal(d, 0.0)
    return d


def _hamiltonian(z: ComplexArray, g: FloatArray) -> float:
    k, l = np.triu_indices(z.size, k=1)
    return float(-np.sum(g[k] * g[l] * np.log(np.abs(z[k] - z[l]))) / (4.0 * np.pi))


def conserved(s: VortexSystem) -> ConservedQuantities:
    z, g = s.positions, s.vorticities
    total = float(np.sum(g))
    center = None
    if abs(total) >= ZERO_VORTICITY_TOL:
        center = PlanePoint.from_complex(np.sum(g * z) / total)
    return ConservedQuantities(
        total_vorticity=total,
        center_of_vorticity=center,
        hamiltonian=_hamiltonian(z, g),
        angular_impulse=float(np.sum(g * np.abs(z) ** 2)),
    )


def hamiltonian_scale(s: VortexSystem) -> float:
    """Natural magnitude of the Hamiltonian, ``sum |G_k G_l| / 4 pi``."""
    g = np.abs(s.vorticities)
    return float((np.sum(g) ** 2 - np.sum(g**2)) / (8.0 * np.pi))
