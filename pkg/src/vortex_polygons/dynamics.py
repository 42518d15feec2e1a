"""Helmholtz velocity field, relative-equilibrium classification and integration."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy.integrate import solve_ivp

from .core import (
    MIN_DISTANCE,
    CloseApproachError,
    ComplexArray,
    FloatArray,
    PlanePoint,
    VortexSystem,
    _hamiltonian,
    hamiltonian_scale,
)

#: Default classification tolerance for order-one systems.
DEFAULT_TOL = 1e-9


class EquilibriumKind(str, enum.Enum):
    ABSOLUTE = "ABSOLUTE"
    RIGID_TRANSLATION = "RIGID_TRANSLATION"
    ROTATION = "ROTATION"
    NONE = "NONE"


@dataclass(frozen=True, slots=True)
class EquilibriumReport:
    kind: EquilibriumKind
    omega: float
    translation_velocity: PlanePoint | None
    center: PlanePoint | None
    residual: float

    @property
    def is_equilibrium(self) -> bool:
        return self.kind is not EquilibriumKind.NONE

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "omega": self.omega,
            "translation_velocity": (
                None if self.translation_velocity is None else self.translation_velocity.to_list()
            ),
            "center": None if self.center is None else self.center.to_list(),
            "residual": self.residual,
        }


def _velocities(z: ComplexArray, g: FloatArray) -> ComplexArray:
    # v_k = i sum_{l != k} G_l / conj(z_k - z_l)
    dz = z[:, None] - z[None, :]
    np.fill_diagonal(dz, 1.0)
    w = g[None, :] / np.conj(dz)
    np.fill_diagonal(w, 0.0)
    return 1j * w.sum(axis=1)


def velocities(s: VortexSystem) -> ComplexArray:
    """Velocity of every vortex induced by all the others, as complex numbers."""
    if s.min_distance < MIN_DISTANCE:
        raise CloseApproachError("vortices closer than the minimum distance")
    return _velocities(s.positions, s.vorticities)


def fit_angular_velocity(z: ComplexArray, v: ComplexArray) -> tuple[float, float]:
    """Least-squares ``omega`` in ``v_l - v_k = i omega (z_l - z_k)`` over all pairs.

    Returns ``(omega, residual)`` where the residual is the largest pairwise
    mismatch for the fitted ``omega``.
    """
    k, l = np.triu_indices(z.size, k=1)
    a = 1j * (z[l] - z[k])
    b = v[l] - v[k]
    omega = float(np.sum((np.conj(a) * b).real) / np.sum(np.abs(a) ** 2))
    residual = float(np.max(np.abs(b - omega * a)))
    return omega, residual


def classify(s: VortexSystem, tol: float = DEFAULT_TOL) -> EquilibriumReport:
    """Decide whether ``s`` generates an absolute equilibrium, a rigid
    translation, a rotation about some center, or none of these."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    z = s.positions
    v = velocities(s)
    speed = float(np.max(np.abs(v)))
    omega, residual = fit_angular_velocity(z, v)
    if speed < tol:
        return EquilibriumReport(EquilibriumKind.ABSOLUTE, 0.0, None, None, residual)
    if residual < tol:
        if abs(omega) < tol:
            mean_v = complex(np.mean(v))
            if np.max(np.abs(v - mean_v)) < tol:
                return EquilibriumReport(
                    EquilibriumKind.RIGID_TRANSLATION,
                    0.0,
                    PlanePoint.from_complex(mean_v),
                    None,
                    residual,
                )
        else:
            center = complex(np.mean(z - v / (1j * omega)))
            return EquilibriumReport(
                EquilibriumKind.ROTATION, omega, None, PlanePoint.from_complex(center), residual
            )
    return EquilibriumReport(EquilibriumKind.NONE, omega, None, None, residual)


def oneil_sum(s: VortexSystem) -> float:
    """``sum_{k<l} G_k G_l``; vanishes for every absolute equilibrium."""
    g = s.vorticities
    k, l = np.triu_indices(g.size, k=1)
    return float(np.sum(g[k] * g[l]))


@dataclass(frozen=True)
class Trajectory:
    times: FloatArray
    states: list[VortexSystem]
    max_hamiltonian_drift: float
    max_distance_drift: float

    @property
    def final(self) -> VortexSystem:
        return self.states[-1]

    def max_displacement(self) -> float:
        """Largest distance any vortex travels away from its initial position."""
        z0 = self.states[0].positions
        return max(float(np.max(np.abs(st.positions - z0))) for st in self.states)

    def write_csv(self, fh: TextIO) -> None:
        n = self.states[0].n_vortices
        header = ["t"]
        for k in range(n):
            header += [f"x_{k}", f"y_{k}"]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, st in zip(self.times, self.states):
            row = [repr(float(t))]
            for zk in st.positions:
                row += [repr(float(zk.real)), repr(float(zk.imag))]
            w.writerow(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def integrate(
    s: VortexSystem,
    t_end: float,
    rel_tol: float = 1e-10,
    *,
    n_samples: int | None = None,
) -> Trajectory:
    """Integrate the vortex equations from ``t = 0`` to ``t_end``.

    Uses the Dormand-Prince 5(4) pair with local error control. States are
    recorded at every accepted step, or at ``n_samples`` equally spaced
    times when given. Raises :class:`CloseApproachError` if two vortices
    approach closer than the minimum distance.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not 1e-14 <= rel_tol <= 1e-3:
        raise ValueError("rel_tol must lie in [1e-14, 1e-3]")
    g = s.vorticities
    n = s.n_vortices
    z0 = s.positions
    scale = float(np.max(np.abs(z0 - np.mean(z0)))) + float(np.max(np.abs(z0)))

    def rhs(_t: float, y: FloatArray) -> FloatArray:
        z = y[:n] + 1j * y[n:]
        v = _velocities(z, g)
        return np.concatenate([v.real, v.imag])

    k_idx, l_idx = np.triu_indices(n, k=1)

    def close_approach(_t: float, y: FloatArray) -> float:
        z = y[:n] + 1j * y[n:]
        return float(np.min(np.abs(z[k_idx] - z[l_idx]))) - MIN_DISTANCE

    close_approach.terminal = True  # type: ignore[attr-defined]

    t_eval = None if n_samples is None else np.linspace(0.0, t_end, n_samples)
    # scipy floors rtol at 100 * eps
    rtol = max(rel_tol, 100 * np.finfo(float).eps)
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        np.concatenate([z0.real, z0.imag]),
        method="RK45",
        rtol=rtol,
        atol=rel_tol * scale,
        t_eval=t_eval,
        events=close_approach,
    )
    if sol.status == 1:
        raise CloseApproachError(
            f"vortices came within {MIN_DISTANCE:g} of each other at t = {sol.t_events[0][0]:.6g}"
        )
    if not sol.success:
        # a stalled step size next to a near-collision is a collapse, not a solver bug
        z_last = sol.y[:n, -1] + 1j * sol.y[n:, -1]
        d_last = float(np.min(np.abs(z_last[k_idx] - z_last[l_idx])))
        if d_last < 1e-4 * scale:
            raise CloseApproachError(
                f"step size collapsed at t = {sol.t[-1]:.6g} with vortices {d_last:.3g} apart"
            )
        raise RuntimeError(f"integration failed: {sol.message}")

    zs = sol.y[:n].T + 1j * sol.y[n:].T
    d0 = np.abs(z0[k_idx] - z0[l_idx])
    h0 = _hamiltonian(z0, g)
    h_scale = max(abs(h0), hamiltonian_scale(s))
    h_drift = 0.0
    d_drift = 0.0
    states = []
    for z in zs:
        states.append(VortexSystem(z, g))
        d = np.abs(z[k_idx] - z[l_idx])
        d_drift = max(d_drift, float(np.max(np.abs(d - d0) / d0)))
        if h_scale > 0:
            h_drift = max(h_drift, abs(_hamiltonian(z, g) - h0) / h_scale)
    return Trajectory(np.asarray(sol.t), states, h_drift, d_drift)
