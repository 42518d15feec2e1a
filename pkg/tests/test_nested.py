import io
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortex_polygons.core import BoundaryError, VortexSystem
from vortex_polygons.dynamics import EquilibriumKind, classify, oneil_sum, velocities
from vortex_polygons.nested import (
    Alignment,
    NestedPolygonConfig,
    PolynomialInstance,
    Regime,
    SCAN_CSV_COLUMNS,
    absolute_equilibrium,
    alignment_of,
    classify_regime,
    count_roots_analytic,
    equation_coefficients,
    equilibrium_ratios,
    f_eval,
    g_eval,
    lambda_n,
    mu_n,
    positive_roots,
    scan_regimes,
    solve_nested,
    write_scan_csv,
)

SQ6 = math.sqrt(6)


def test_mu_and_lambda():
    assert mu_n(2) == pytest.approx(2 + math.sqrt(3), rel=1e-15)
    assert mu_n(3) == pytest.approx(1.5 + math.sqrt(1.25), rel=1e-15)
    assert lambda_n(2) == 4 and lambda_n(3) == 3
    for n in range(2, 65):
        assert abs(mu_n(n) + 1 / mu_n(n) - lambda_n(n)) < 1e-13


def test_coefficients():
    a = equation_coefficients(2, 1.0, Alignment.ALIGNED)
    assert (a.alpha, a.beta, a.gamma) == (5, 5, 24)
    b = equation_coefficients(2, 1.0, "STAGGERED")
    assert (b.alpha, b.beta, b.gamma) == (5, -5, -24)
    # lambda_3 (r**2 + lambda_3 r + 1) at r = -1
    assert equation_coefficients(3, -1.0, "ALIGNED").gamma == -3
    with pytest.raises(ValueError):
        equation_coefficients(3, 0.0, "ALIGNED")


def test_g_and_f_values():
    p = PolynomialInstance(5, 5, 24, 2)
    assert abs(g_eval(p, math.sqrt(5 + 2 * SQ6))) < 1e-12
    q = PolynomialInstance(2.5, -1.5, 0.75, 5)
    assert g_eval(q, 1e-9) == pytest.approx(q.alpha * q.beta - q.gamma, abs=1e-8)
    for n in (3, 4, 7):
        r = PolynomialInstance(2.0, 0.0, 1.0, n)
        assert abs(f_eval(r, 2.0 * n / (n + 2))) < 1e-13


@settings(max_examples=100)
@given(st.integers(2, 9), st.floats(-5, 5), st.floats(-5, 5), st.floats(-20, 20), st.floats(0.05, 3))
def test_f_is_derivative_in_t(n, alpha, beta, gamma, x):
    p = PolynomialInstance(alpha, beta, gamma, n)
    h = 1e-6 * x
    dgdx = (g_eval(p, x + h) - g_eval(p, x - h)) / (2 * h)
    scale = 1 + abs(2 * x * f_eval(p, x * x)) + (abs(alpha) + abs(beta) + x**n + x * x) * n * 1e-3
    assert dgdx == pytest.approx(2 * x * f_eval(p, x * x), abs=1e-5 * scale)


def test_closed_form_roots():
    al = positive_roots(equation_coefficients(2, 1.0, "ALIGNED"))
    assert np.allclose(al, [math.sqrt(5 - 2 * SQ6), math.sqrt(5 + 2 * SQ6)], rtol=0, atol=1e-12)
    st_ = positive_roots(equation_coefficients(2, 1.0, "STAGGERED"))
    assert len(st_) == 1 and st_[0] == pytest.approx(1.0, abs=1e-12)
    opp = positive_roots(equation_coefficients(2, -1.0, "STAGGERED"))
    assert np.allclose(opp, [math.sqrt(2) - 1, math.sqrt(2) + 1], rtol=0, atol=1e-12)


def test_analytic_counts():
    # gamma < alpha beta with alpha, beta > 0: two positive roots
    assert count_roots_analytic(PolynomialInstance(5, 5, 24, 2)) == 2
    # alpha beta - gamma < 0 already forces a single root, whatever alpha + beta is
    assert count_roots_analytic(PolynomialInstance(5, -5, -24, 2)) == 1
    with pytest.raises(BoundaryError):
        count_roots_analytic(PolynomialInstance(5, -5, -25, 2))
    assert count_roots_analytic(PolynomialInstance(5, 5, 30, 2)) == 1
    for n in (3, 4, 6):
        assert count_roots_analytic(PolynomialInstance(-1.0, -2.0, 1.5, n)) == 0


def _random_instance(rng):
    n = int(rng.integers(2, 9))
    alpha, beta = rng.uniform(-6, 6, size=2)
    gamma = rng.uniform(-30, 30)
    return PolynomialInstance(float(alpha), float(beta), float(gamma), n)


def test_analytic_agrees_with_numeric_on_10000_samples():
    rng = np.random.default_rng(20240601)
    checked = 0
    while checked < 10_000:
        p = _random_instance(rng)
        try:
            expected = count_roots_analytic(p)
        except BoundaryError:
            continue
        assert len(positive_roots(p)) == expected, p
        checked += 1


@settings(max_examples=200)
@given(st.integers(2, 9), st.floats(0.05, 5), st.floats(0.05, 5), st.booleans())
def test_roots_are_roots(n, x1, x2, staggered_sign):
    # build an instance with two prescribed roots and check they are found
    alpha = 1.3
    # choose beta, gamma so that x1 and x2 both satisfy G = 0
    a1, a2 = x1 * x1 - alpha, x2 * x2 - alpha
    if abs(a1 - a2) < 1e-3:
        return
    beta = (a1 * x1**n - a2 * x2**n) / (a1 - a2)
    gamma = a1 * (x1**n - beta)
    if staggered_sign:
        pass
    p = PolynomialInstance(alpha, beta, gamma, n)
    roots = positive_roots(p)
    for x in (x1, x2):
        assert min(abs(r - x) for r in roots) <= 1e-9 * x
    for r in roots:
        scale = (r * r + abs(alpha)) * (r**n + abs(beta)) + abs(gamma)
        assert abs(g_eval(p, r)) <= 1e-12 * scale


def test_regime_examples():
    c = classify_regime(2, 1.0)
    assert (c.aligned_count, c.staggered_count) == (2, 1)
    c = classify_regime(3, -1 / mu_n(3))
    assert c.regime is Regime.THRESHOLD and (c.aligned_count, c.staggered_count) == (1, 2)
    for n in range(2, 9):
        c = classify_regime(n, -1.0)
        assert c.regime is Regime.ZERO_TOTAL and (c.aligned_count, c.staggered_count) == (0, 2)


def test_regime_ranges():
    c = classify_regime(4, 0.5)
    assert c.aligned_count == 2 and c.staggered_count_range == (1, 3)
    c = classify_regime(4, -2.0)
    assert c.regime is Regime.INTERMEDIATE and c.aligned_count_range == (1, 3)


def test_scan_rows_for_each_regime():
    mu = mu_n(3)
    rows = scan_regimes(3, [-5, -mu, -1, -1 / mu, -0.1, 0.5, 2])
    assert all(r.consistent for r in rows)
    labels = [r.classification.regime for r in rows]
    assert labels == [
        Regime.STRONG_OPPOSITE,
        Regime.THRESHOLD,
        Regime.ZERO_TOTAL,
        Regime.THRESHOLD,
        Regime.WEAK_OPPOSITE,
        Regime.SAME_SIGN,
        Regime.SAME_SIGN,
    ]


def test_two_gon_same_sign_always_two_aligned():
    rows = scan_regimes(2, np.linspace(0.1, 10, 100))
    assert all(r.aligned_numeric == 2 for r in rows)


def test_scan_csv_and_parallel_scan():
    grid = [-3.0, -0.5, 0.7, 4.0]
    serial = scan_regimes(5, grid)
    parallel = scan_regimes(5, grid, max_workers=2)
    assert serial == parallel
    buf = io.StringIO()
    write_scan_csv(serial, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(SCAN_CSV_COLUMNS)
    assert len(lines) == 5


def test_solve_nested_examples():
    sols = solve_nested(2, 1, 1)
    assert [s.alignment for s in sols].count(Alignment.ALIGNED) == 2
    staggered = [s for s in sols if s.alignment is Alignment.STAGGERED]
    assert len(staggered) == 1
    square = staggered[0].system.positions
    assert np.allclose(np.sort(np.angle(square)), np.sort(np.angle([1, 1j, -1, -1j])), atol=1e-12)
    for s in solve_nested(3, 1, 1):
        if s.alignment is Alignment.ALIGNED:
            assert s.report.residual < 1e-10
    assert len([s for s in solve_nested(3, 1, 1) if s.alignment is Alignment.ALIGNED]) == 2
    opp = solve_nested(2, 1, -1)
    assert all(s.alignment is Alignment.STAGGERED for s in opp)
    assert np.allclose(sorted(s.x for s in opp), [math.sqrt(2) - 1, math.sqrt(2) + 1], atol=1e-12)


def test_solution_tuple_shape():
    alignment, x, system, report = solve_nested(2, 1, 1)[0]
    assert isinstance(system, VortexSystem)
    assert report.kind is EquilibriumKind.ROTATION


def test_zero_total_aligned_root_is_dropped():
    assert 1.0 in [round(x, 12) for x in positive_roots(equation_coefficients(4, -1, "ALIGNED"))]
    assert equilibrium_ratios(4, -1.0, "ALIGNED") == []


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.floats(-8, 8).filter(lambda r: abs(r) > 0.05 and abs(r + 1) > 1e-3))
def test_nested_systems_rotate_about_origin(n, r):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sols = solve_nested(n, 1.0, r, 0.7 + 0.4j)
    for s in sols:
        assert s.report.residual < 1e-9
        if s.report.kind is EquilibriumKind.ROTATION:
            assert abs(complex(s.report.center)) < 1e-9


@settings(max_examples=100)
@given(st.integers(2, 8), st.floats(-20, 20).filter(lambda r: abs(r) > 0.05), st.sampled_from(list(Alignment)))
def test_ring_swap_duality(n, r, alignment):
    a = equilibrium_ratios(n, r, alignment)
    b = equilibrium_ratios(n, 1 / r, alignment)
    assert len(a) == len(b)
    assert np.allclose(sorted(1 / x for x in a), b, rtol=1e-9, atol=0)


def test_config_validation_and_alignment():
    with pytest.raises(ValueError):
        NestedPolygonConfig(4, 1, 1j, 1, 1)  # s2 on a vertex of the first ring
    assert alignment_of(2.0, 3) is Alignment.ALIGNED
    assert alignment_of(2.0 * np.exp(1j * math.pi / 3), 3) is Alignment.STAGGERED
    assert alignment_of(2.0 * np.exp(0.3j), 3) is None


@pytest.mark.parametrize("n", range(2, 9))
def test_absolute_equilibrium(n):
    eq = absolute_equilibrium(n, 1.0)
    assert eq.gamma2 == pytest.approx(-mu_n(n))
    assert np.max(np.abs(velocities(eq.system))) < 1e-10
    q = complex(eq.s2_over_s1)
    assert abs(q**n + eq.gamma2**2) < 1e-12 * eq.gamma2**2
    assert abs(oneil_sum(eq.system)) < 1e-11
    assert classify(eq.system).kind is EquilibriumKind.ABSOLUTE


def test_absolute_equilibrium_two_gon_geometry():
    q = absolute_equilibrium(2, 1.0).s2_over_s1
    assert q.modulus() == pytest.approx(2 + math.sqrt(3), rel=1e-15)
    assert q.arg() == pytest.approx(math.pi / 2, abs=1e-15)
