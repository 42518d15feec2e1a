"""A single regular polygon of vortices.

Covers the angular velocity of a polygonal relative equilibrium, the
closed-form velocity field of an equal-vorticity ring, the two circulant
matrices that encode the ring equations, and the space of vorticity
vectors for which a ring is a relative equilibrium.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .core import (
    ComplexArray,
    FloatArray,
    PointLike,
    SingularFieldError,
    VortexSystem,
    as_complex,
)

KERNEL_TOL = 1e-9
RANK_TOL = 1e-10
SINGULAR_TOL = 1e-12


def roots_of_unity(n: int) -> ComplexArray:
    """``rho**k`` for ``k = 0..n-1`` with ``rho = exp(2 pi i / n)``."""
    return np.exp(2j * np.pi * np.arange(n) / n)


@dataclass(frozen=True)
class PolygonRing:
    n: int
    s: complex
    vorticities: tuple[float, ...]

    def __init__(self, n: int, s: PointLike, vorticities: Sequence[float] | float = 1.0):
        n = int(n)
        if n < 2:
            raise ValueError("a polygon needs n >= 2 vertices")
        s = as_complex(s)
        if abs(s) == 0:
            raise ValueError("s must be nonzero")
        if np.isscalar(vorticities):
            g = (float(vorticities),) * n
        else:
            g = tuple(float(x) for x in vorticities)  # type: ignore[union-attr]
        if len(g) != n:
            raise ValueError(f"expected {n} vorticities, got {len(g)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "vorticities", g)

    @property
    def positions(self) -> ComplexArray:
        return self.s * roots_of_unity(self.n)

    def to_system(self) -> VortexSystem:
        return ring_to_system(self)


def ring_to_system(r: PolygonRing) -> VortexSystem:
    return VortexSystem(r.positions, r.vorticities)


def polygon_omega(n: int, s: PointLike, total_vorticity: float) -> float:
    """Angular velocity of a polygonal relative equilibrium with vertices ``s rho**k``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    r2 = abs(as_complex(s)) ** 2
    if r2 == 0:
        raise ValueError("s must be nonzero")
    return (n - 1) / (2.0 * n * r2) * float(total_vorticity)


def polygon_field(n: int, s: PointLike, gamma: float, z: PointLike) -> complex:
    """Velocity induced at ``z`` by ``n`` vortices of strength ``gamma`` at ``s rho**k``.

    Evaluated as ``gamma * i n conj(z)**(n-1) / (conj(z)**n - conj(s)**n)``
    after rescaling by ``max(|z|, |s|)`` so that large ``n`` does not
    overflow. Raises :class:`SingularFieldError` when ``z`` sits on a vertex.
    """
    s = as_complex(s)
    z = as_complex(z)
    m = max(abs(z), abs(s))
    if m == 0:
        raise ValueError("s must be nonzero")
    if z == 0:
        return 0j
    zb = (z / m).conjugate()
    sb = (s / m).conjugate()
    den = zb**n - sb**n
    if abs(den) < SINGULAR_TOL:
        raise SingularFieldError(f"z = {z} coincides with a polygon vertex")
    return gamma * 1j * n * zb ** (n - 1) / den / m


class MatrixKind(str, enum.Enum):
    C = "C"
    C0 = "C0"


def circulant(first_row: Sequence[complex]) -> np.ndarray:
    """Circulant matrix whose row ``j`` is ``first_row`` shifted right by ``j``."""
    c = np.asarray(first_row)
    n = c.size
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return c[idx]


def ring_matrix(n: int, kind: MatrixKind | str) -> np.ndarray:
    """The circulant matrix of the ring equations (``C`` or ``C0``)."""
    kind = MatrixKind(kind)
    rho = roots_of_unity(n)
    row = np.zeros(n, dtype=np.complex128)
    row[1:] = 1.0 / (1.0 - rho[1:].conj())
    if kind is MatrixKind.C:
        row += (n - 1) / (2.0 * n) * rho
    return circulant(row)


def fourier_vector(n: int, k: int) -> ComplexArray:
    """``(1, rho**k, rho**(2k), ..., rho**((n-1)k))``."""
    return np.exp(2j * np.pi * k * np.arange(n) / n)


def closed_form_eigenvalues(n: int, kind: MatrixKind | str) -> FloatArray:
    lam = (n - 1) / 2.0 - np.arange(n, dtype=np.float64)
    if MatrixKind(kind) is MatrixKind.C:
        lam[n - 1] = 0.0
    return lam


@dataclass(frozen=True)
class CirculantSpectrum:
    n: int
    matrix_kind: MatrixKind
    eigenvalues: FloatArray
    eigenvectors: list[ComplexArray]
    closed_form: FloatArray
    max_imaginary: float
    max_eigen_residual: float

    @property
    def max_discrepancy(self) -> float:
        return float(np.max(np.abs(self.eigenvalues - self.closed_form)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "kind": self.matrix_kind.value,
            "eigenvalues": [float(x) for x in self.eigenvalues],
        }


def circulant_spectrum(n: int, kind: MatrixKind | str) -> CirculantSpectrum:
    """Apply the ring matrix to each Fourier vector and read off its eigenvalue.

    The numerically extracted eigenvalues are returned alongside the closed
    form ``(n-1)/2 - k`` (with the last one zero for ``C``).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    kind = MatrixKind(kind)
    m = ring_matrix(n, kind)
    vecs = [fourier_vector(n, k) for k in range(n)]
    lams = np.empty(n, dtype=np.complex128)
    resid = 0.0
    for k, v in enumerate(vecs):
        mv = m @ v
        lam = np.vdot(v, mv) / n
        lams[k] = lam
        resid = max(resid, float(np.max(np.abs(mv - lam * v))))
    return CirculantSpectrum(
        n=n,
        matrix_kind=kind,
        eigenvalues=lams.real.copy(),
        eigenvectors=vecs,
        closed_form=closed_form_eigenvalues(n, kind),
        max_imaginary=float(np.max(np.abs(lams.imag))),
        max_eigen_residual=resid,
    )


class RingCase(str, enum.Enum):
    ROTATING = "ROTATING"
    TRANSLATING = "TRANSLATING"


@dataclass(frozen=True)
class VorticitySolutionSpace:
    n: int
    case: RingCase
    dimension: int
    basis: FloatArray  # (dimension, n), orthonormal rows

    def contains(self, gamma: Sequence[float], atol: float = 1e-9) -> bool:
        g = np.asarray(gamma, dtype=np.float64)
        proj = self.basis.T @ (self.basis @ g) if self.dimension else np.zeros_like(g)
        return bool(np.linalg.norm(g - proj) <= atol * max(1.0, np.linalg.norm(g)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "case": self.case.value,
            "dimension": self.dimension,
            "basis": [[float(x) for x in row] for row in self.basis],
        }


def _orthonormal_span(vectors: FloatArray, n: int) -> FloatArray:
    if vectors.size == 0:
        return np.zeros((0, n))
    u, sv, _ = np.linalg.svd(vectors.T, full_matrices=False)
    rank = int(np.sum(sv > RANK_TOL * max(1.0, sv[0])))
    return u[:, :rank].T


def real_vectors_in_span(basis: Sequence[ComplexArray], n: int) -> FloatArray:
    """Orthonormal basis of ``span_C(basis)`` intersected with ``R**n``.

    Writing a member as ``B (a + i b)`` with real ``a, b``, the imaginary
    part vanishes iff ``[Im B, Re B] [a; b] = 0``; the real part of every
    such member is ``[Re B, -Im B] [a; b]``.
    """
    if not basis:
        return np.zeros((0, n))
    b = np.column_stack(basis)
    br, bi = b.real, b.imag
    constraint = np.hstack([bi, br])
    _, sv, vt = np.linalg.svd(constraint)
    scale = max(1.0, sv[0] if sv.size else 1.0)
    rank = int(np.sum(sv > RANK_TOL * scale))
    null = vt[rank:].T  # (2m, d)
    members = np.hstack([br, -bi]) @ null
    return _orthonormal_span(members.T, n)


def vorticity_solution_space(n: int, case: RingCase | str) -> VorticitySolutionSpace:
    """Real vorticity vectors for which a regular ``n``-gon is a relative equilibrium.

    ROTATING: vectors equal to a multiple of ``(1, ..., 1)`` plus a real
    member of the kernel of ``C``. TRANSLATING: real members of
    ``span(v_{n-1}) + ker C0``, i.e. vorticities for which ``C0 G`` is a
    multiple of ``v_{n-1}`` for some translation velocity.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    case = RingCase(case)
    if case is RingCase.ROTATING:
        spec = circulant_spectrum(n, MatrixKind.C)
        kernel = [spec.eigenvectors[k] for k in range(n) if abs(spec.closed_form[k]) < KERNEL_TOL]
        real_part = real_vectors_in_span(kernel, n)
        stacked = np.vstack([np.ones((1, n)), real_part])
        basis = _orthonormal_span(stacked, n)
    else:
        spec = circulant_spectrum(n, MatrixKind.C0)
        kernel = [spec.eigenvectors[k] for k in range(n) if abs(spec.closed_form[k]) < KERNEL_TOL]
        kernel.append(spec.eigenvectors[n - 1])
        basis = real_vectors_in_span(kernel, n)
    # canonical orientation for the one-dimensional equal-vorticity answer
    if basis.shape[0] == 1 and basis[0].sum() < 0:
        basis = -basis
    return VorticitySolutionSpace(n=n, case=case, dimension=int(basis.shape[0]), basis=basis)


__all__ = [
    "CirculantSpectrum",
    "MatrixKind",
    "PolygonRing",
    "RingCase",
    "VorticitySolutionSpace",
    "circulant",
    "circulant_spectrum",
    "closed_form_eigenvalues",
    "fourier_vector",
    "polygon_field",
    "polygon_omega",
    "ring_matrix",
    "ring_to_system",
    "roots_of_unity",
    "vorticity_solution_space",
]
