import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from vortex_polygons.core import CloseApproachError, VortexSystem
from vortex_polygons.dynamics import (
    EquilibriumKind,
    classify,
    integrate,
    oneil_sum,
    velocities,
)
from vortex_polygons.nested import absolute_equilibrium


def random_system(seed, n):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-2, 2, size=n) + 1j * rng.uniform(-2, 2, size=n)
    g = rng.uniform(0.3, 2.0, size=n) * rng.choice([-1, 1], size=n)
    return VortexSystem(z, g)


seeds = st.integers(0, 2**32 - 1)


def well_separated(s, d=0.05):
    return s.min_distance > d


def test_vortex_pair_translates():
    v = velocities(VortexSystem([1, -1], [1, -1]))
    assert np.allclose(v, [-0.5j, -0.5j], atol=1e-16)
    r = classify(VortexSystem([1, -1], [1, -1]))
    assert r.kind is EquilibriumKind.RIGID_TRANSLATION
    assert complex(r.translation_velocity) == pytest.approx(-0.5j)


def test_equal_pair_rotates():
    v = velocities(VortexSystem([1, -1], [1, 1]))
    assert v[0] == pytest.approx(0.5j) and v[1] == pytest.approx(-0.5j)
    r = classify(VortexSystem([1, -1], [1, 1]))
    assert r.kind is EquilibriumKind.ROTATION and r.omega == pytest.approx(0.5)


@pytest.mark.parametrize("n", range(2, 10))
def test_unit_ngon_velocities(n):
    z = np.array(oracles.ring(n, 1.0))
    v = velocities(VortexSystem(z, [1.0] * n))
    assert np.allclose(v, 1j * (n - 1) / 2 * z, atol=1e-13)


def test_unit_square_rotation():
    r = classify(VortexSystem([1, 1j, -1, -1j], [1] * 4))
    assert r.kind is EquilibriumKind.ROTATION
    assert r.omega == pytest.approx(1.5, abs=1e-14)
    assert abs(complex(r.center)) < 1e-14


def test_weighted_triangle_rotation():
    s = VortexSystem(oracles.ring(3, 1.0), [1, 2, 3])
    r = classify(s)
    assert r.kind is EquilibriumKind.ROTATION
    assert r.omega == pytest.approx(2.0, abs=1e-13)
    assert r.residual < 1e-12
    # a rotating configuration spins about its center of vorticity
    g = s.vorticities
    assert complex(r.center) == pytest.approx(complex(np.dot(g, s.positions) / g.sum()), abs=1e-13)


def test_scalene_triangle_is_not_an_equilibrium():
    r = classify(VortexSystem([0, 1, 0.3 + 2j], [1, 1, 1]))
    assert r.kind is EquilibriumKind.NONE
    assert r.residual > 1e-3


def test_report_invariants():
    for seed in range(20):
        for s in (random_system(seed, 4), VortexSystem(oracles.ring(5, 1.3), [0.7] * 5)):
            r = classify(s)
            if r.kind is EquilibriumKind.ROTATION:
                assert r.center is not None and r.omega != 0
            if r.kind is EquilibriumKind.RIGID_TRANSLATION:
                assert r.translation_velocity.modulus() > 1e-9
            if r.kind is not EquilibriumKind.NONE:
                assert r.residual < 1e-9


def test_oneil_sums():
    assert oneil_sum(VortexSystem([0, 1], [1, -1])) == -1
    assert oneil_sum(VortexSystem(oracles.ring(4, 1.0), [1] * 4)) == 6
    eq = absolute_equilibrium(2, 1.0)
    assert eq.gamma2 == pytest.approx(-(2 + math.sqrt(3)), rel=1e-15)
    assert abs(oneil_sum(eq.system)) < 1e-12


@settings(max_examples=60)
@given(seeds, st.integers(2, 7))
def test_velocities_match_loop_oracle(seed, n):
    s = random_system(seed, n)
    ref = oracles.helmholtz(list(s.positions), list(s.vorticities))
    v = velocities(s)
    scale = max(1.0, max(abs(x) for x in ref))
    assert np.max(np.abs(v - np.array(ref))) <= 1e-12 * scale


@settings(max_examples=60)
@given(seeds, st.integers(2, 7))
def test_vorticity_weighted_velocity_sum_vanishes(seed, n):
    s = random_system(seed, n)
    v = velocities(s)
    scale = np.sum(np.abs(s.vorticities * v)) + 1.0
    assert abs(np.sum(s.vorticities * v)) <= 1e-13 * scale


@settings(max_examples=60)
@given(seeds, st.integers(2, 6), st.floats(-3, 3), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.2, 5))
def test_similarity_covariance(seed, n, theta, bx, by, lam):
    """Velocities rotate with the configuration and scale as 1/lambda."""
    s = random_system(seed, n)
    a = lam * complex(math.cos(theta), math.sin(theta))
    t = s.transformed(scale=a, shift=complex(bx, by))
    v0 = velocities(s)
    v1 = velocities(t)
    expected = v0 * a / abs(a) ** 2
    assert np.max(np.abs(v1 - expected)) <= 1e-11 * (1 + np.max(np.abs(expected)))
    r0, r1 = classify(s), classify(t)
    assert r0.kind == r1.kind or min(r0.residual, r1.residual) > 1e-12


@settings(max_examples=40)
@given(seeds, st.integers(2, 5), st.floats(0.1, 3))
def test_superposition_of_vorticities(seed, n, c):
    s = random_system(seed, n)
    rng = np.random.default_rng(seed + 1)
    g2 = rng.normal(size=n)
    v1 = velocities(s)
    v2 = velocities(VortexSystem(s.positions, g2))
    v12 = velocities(VortexSystem(s.positions, s.vorticities + c * g2))
    assert np.max(np.abs(v12 - (v1 + c * v2))) <= 1e-12 * (1 + np.max(np.abs(v12)))


def test_triangle_returns_after_one_period():
    s = VortexSystem(oracles.ring(3, 1.0), [1, 1, 1])
    tr = integrate(s, 2 * math.pi, 1e-11)
    assert np.max(np.abs(tr.final.positions - s.positions)) < 1e-8
    assert tr.max_distance_drift < 1e-8
    assert np.all(np.diff(tr.times) > 0)
    assert {st.n_vortices for st in tr.states} == {3}


def test_absolute_equilibrium_stays_put():
    tr = integrate(absolute_equilibrium(2, 1.0).system, 10.0, 1e-10)
    assert tr.max_displacement() < 1e-8


@pytest.mark.parametrize("rel_tol", [1e-6, 1e-8, 1e-10])
def test_hamiltonian_drift_within_tolerance(rel_tol):
    for seed in range(5):
        s = random_system(100 + seed, 3)
        if not well_separated(s, 0.3):
            continue
        tr = integrate(s, 1.0, rel_tol)
        assert tr.max_hamiltonian_drift < 10 * rel_tol


def test_sampled_output_and_csv():
    s = VortexSystem(oracles.ring(3, 1.0), [1, 1, 1])
    tr = integrate(s, 1.0, 1e-9, n_samples=11)
    assert len(tr.times) == 11 and tr.times[-1] == 1.0
    lines = tr.to_csv().splitlines()
    assert lines[0] == "t,x_0,y_0,x_1,y_1,x_2,y_2"
    assert len(lines) == 12
    assert float(lines[-1].split(",")[0]) == 1.0


def test_integrate_validates_arguments():
    s = VortexSystem([1, -1], [1, 1])
    with pytest.raises(ValueError):
        integrate(s, -1.0)
    with pytest.raises(ValueError):
        integrate(s, 1.0, 1e-2)


def test_self_similar_collapse_is_reported():
    # sum G_k G_l = 0 and sum G_k G_l d_kl**2 = 0: the triangle shrinks to a point at t = 3/sqrt(2)
    s = VortexSystem([-1, 1, 1 + 1j * math.sqrt(2)], [2, 2, -1])
    with pytest.raises(CloseApproachError, match="2.1213"):
        integrate(s, 5.0, 1e-12)


def test_stepping_across_collapse_shows_in_drift():
    s = VortexSystem([-1, 1, 1 + 1j * math.sqrt(2)], [2, 2, -1])
    tr = integrate(s, 5.0, 1e-6)
    assert tr.max_hamiltonian_drift > 1e-3
