"""Two concentric regular n-gons with one vorticity per ring.

A configuration is described by the rings' vertex positions ``s1 rho**k``
and ``s2 rho**k`` and vorticities ``gamma1``, ``gamma2``. Writing
``r = gamma2 / gamma1`` and ``x = |s2 / s1|``, it is a relative equilibrium
exactly when ``s2 / s1`` points along a vertex ray (ALIGNED) or a midpoint
ray (STAGGERED) of the first ring and ``x`` is a positive root of

    G(x) = (x**2 - alpha) * (x**n - beta) - gamma

with coefficients depending on ``n``, ``r`` and the alignment. Roots are
isolated on the monotone pieces of ``G``, whose turning points are the
positive zeros of

    F(t) = (n/2 + 1) t**(n/2) - alpha (n/2) t**(n/2 - 1) - beta,  t = x**2.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, TextIO

import numpy as np
from scipy.optimize import brentq

from .core import (
    BoundaryError,
    PlanePoint,
    PointLike,
    VortexError,
    VortexSystem,
    as_complex,
)
from .dynamics import EquilibriumKind, EquilibriumReport, classify
from .polygon import roots_of_unity

BOUNDARY_TOL = 1e-10
DEDUP_RTOL = 1e-9
EQUILIBRIUM_TOL = 1e-9
_EPS = np.finfo(float).eps


def mu_n(n: int) -> float:
    """Threshold ratio ``n/(n-1) + sqrt((n/(n-1))**2 - 1)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    a = n / (n - 1)
    return a + math.sqrt(a * a - 1.0)


def lambda_n(n: int) -> float:
    """``2n/(n-1)``, which equals ``mu_n + 1/mu_n``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return 2.0 * n / (n - 1)


class Alignment(str, enum.Enum):
    ALIGNED = "ALIGNED"
    STAGGERED = "STAGGERED"

    @property
    def angle_offset(self) -> int:
        """Argument of ``s2/s1`` in units of ``pi/n`` (canonical ``K = 0``)."""
        return 0 if self is Alignment.ALIGNED else 1


def alignment_of(q: PointLike, n: int, tol: float = BOUNDARY_TOL) -> Alignment | None:
    """Classify the argument of ``q = s2/s1`` modulo ``2 pi / n``."""
    theta = math.atan2(as_complex(q).imag, as_complex(q).real)
    u = (theta * n / math.pi) % 2.0
    if min(u, 2.0 - u) <= tol * n / math.pi:
        return Alignment.ALIGNED
    if abs(u - 1.0) <= tol * n / math.pi:
        return Alignment.STAGGERED
    return None


@dataclass(frozen=True)
class NestedPolygonConfig:
    n: int
    s1: complex
    s2: complex
    gamma1: float
    gamma2: float

    def __init__(self, n: int, s1: PointLike, s2: PointLike, gamma1: float, gamma2: float):
        n = int(n)
        s1, s2 = as_complex(s1), as_complex(s2)
        if n < 2:
            raise ValueError("n must be >= 2")
        if s1 == 0 or s2 == 0:
            raise ValueError("ring positions must be nonzero")
        if gamma1 == 0 or gamma2 == 0:
            raise ValueError("ring vorticities must be nonzero")
        q = s2 / s1
        if np.min(np.abs(q - roots_of_unity(n))) < 1e-12:
            raise ValueError("the two rings coincide (s2/s1 is a power of rho)")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "s1", s1)
        object.__setattr__(self, "s2", s2)
        object.__setattr__(self, "gamma1", float(gamma1))
        object.__setattr__(self, "gamma2", float(gamma2))

    @property
    def gamma_ratio(self) -> float:
        return self.gamma2 / self.gamma1

    @property
    def x(self) -> float:
        return abs(self.s2 / self.s1)

    @property
    def alignment(self) -> Alignment | None:
        return alignment_of(self.s2 / self.s1, self.n)

    def to_system(self) -> VortexSystem:
        rho = roots_of_unity(self.n)
        z = np.concatenate([self.s1 * rho, self.s2 * rho])
        g = np.concatenate([np.full(self.n, self.gamma1), np.full(self.n, self.gamma2)])
        return VortexSystem(z, g)


@dataclass(frozen=True, slots=True)
class PolynomialInstance:
    """Coefficients of ``G(x) = (x**2 - alpha)(x**n - beta) - gamma``."""

    alpha: float
    beta: float
    gamma: float
    n: int


def equation_coefficients(n: int, gamma_ratio: float, alignment: Alignment | str) -> PolynomialInstance:
    """Coefficients of the ring-ratio equation for the given alignment."""
    if gamma_ratio == 0:
        raise ValueError("gamma_ratio must be nonzero")
    alignment = Alignment(alignment)
    r = float(gamma_ratio)
    lam = lambda_n(n)
    alpha = r + lam
    beta = lam * r + 1.0
    gamma = lam * (r * r + lam * r + 1.0)
    if alignment is Alignment.STAGGERED:
        beta, gamma = -beta, -gamma
    return PolynomialInstance(alpha, beta, gamma, n)


def g_eval(p: PolynomialInstance, x: float) -> float:
    return (x * x - p.alpha) * (x**p.n - p.beta) - p.gamma


def f_eval(p: PolynomialInstance, t: float) -> float:
    """Derivative of ``G`` with respect to ``t = x**2``."""
    h = p.n / 2.0
    return (h + 1.0) * t**h - p.alpha * h * t ** (h - 1.0) - p.beta


def _g_scale(p: PolynomialInstance, x: float) -> float:
    xn = x**p.n
    return (
        x * x * xn
        + abs(p.alpha) * xn
        + abs(p.beta) * x * x
        + abs(p.alpha * p.beta)
        + abs(p.gamma)
    )


def _f_at_zero(p: PolynomialInstance) -> float:
    # limit of F as t -> 0+
    if p.n == 2:
        return -p.alpha - p.beta
    return -p.beta


def root_bound(p: PolynomialInstance) -> float:
    """Every positive root of ``G`` lies below this value."""
    return 1.0 + max(abs(p.alpha), abs(p.beta), abs(p.gamma), abs(p.alpha * p.beta - p.gamma))


def _f_turning_point(p: PolynomialInstance) -> float | None:
    # F' vanishes only at t = alpha (n-2)/(n+2)
    if p.n > 2 and p.alpha > 0:
        return p.alpha * (p.n - 2) / (p.n + 2)
    return None


# --------------------------------------------------------------------------
# numeric path


def _brent(f, a: float, b: float) -> float:
    return brentq(f, a, b, xtol=1e-300, rtol=4 * _EPS, maxiter=500)


def f_positive_roots(p: PolynomialInstance) -> list[float]:
    """Positive zeros of ``F`` (at most two), found on its monotone pieces."""
    t_max = 1.0 + abs(p.alpha) + abs(p.beta)
    nodes = [0.0]
    tc = _f_turning_point(p)
    if tc is not None and tc < t_max:
        nodes.append(tc)
    nodes.append(t_max)
    vals = [_f_at_zero(p)] + [f_eval(p, t) for t in nodes[1:]]
    roots: list[float] = []
    for i in range(len(nodes) - 1):
        a, b = nodes[i], nodes[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if i > 0 and fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(_brent(lambda t: f_eval(p, t), a, b))
    return sorted(roots)


def positive_roots(p: PolynomialInstance) -> list[float]:
    """All roots ``x > 0`` of ``G``, sorted.

    ``G`` is monotone between consecutive square roots of the zeros of
    ``F``; each monotone piece holds at most one root, which is bracketed
    and refined with Brent's method. A turning point where ``G`` vanishes
    to rounding accuracy is reported as a (double) root.
    """
    x_max = root_bound(p)
    crit = [math.sqrt(t) for t in f_positive_roots(p) if 0 < math.sqrt(t) < x_max]
    nodes = [0.0] + crit + [x_max]
    vals = [p.alpha * p.beta - p.gamma] + [g_eval(p, x) for x in nodes[1:]]
    signs = []
    for i, (x, v) in enumerate(zip(nodes, vals)):
        if 0 < i < len(nodes) - 1 and abs(v) <= 64 * _EPS * _g_scale(p, x):
            signs.append(0)
        else:
            signs.append(int(np.sign(v)))
    roots: list[float] = []
    for i in range(len(nodes) - 1):
        a, b = nodes[i], nodes[i + 1]
        if signs[i] == 0 and i > 0:
            roots.append(a)
        if signs[i] * signs[i + 1] < 0:
            roots.append(_brent(lambda x: g_eval(p, x), a, b))
    roots.sort()
    out: list[float] = []
    for x in roots:
        if out and abs(x - out[-1]) <= DEDUP_RTOL * max(abs(x), abs(out[-1])):
            continue
        out.append(x)
    return out


# --------------------------------------------------------------------------
# analytic path


def _sign(value: float, scale: float, name: str, tol: float) -> int:
    if abs(value) <= tol * max(1.0, scale):
        raise BoundaryError(f"{name} = {value:.3e} is within tolerance of zero", name)
    return 1 if value > 0 else -1


def _bisect(f, a: float, b: float, iterations: int = 200) -> float:
    fa = f(a)
    for _ in range(iterations):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        fm = f(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _f_critical_points(p: PolynomialInstance) -> list[float]:
    """Zeros of ``F`` in ``t`` by plain bisection on its monotone pieces."""
    if p.beta == 0 and p.alpha > 0:
        return [p.alpha * p.n / (p.n + 2)]
    t_max = 1.0 + abs(p.alpha) + abs(p.beta)
    pieces = [0.0]
    tc = _f_turning_point(p)
    if tc is not None:
        pieces.append(tc)
    pieces.append(t_max)
    out = []
    for a, b in zip(pieces[:-1], pieces[1:]):
        fa = _f_at_zero(p) if a == 0 else f_eval(p, a)
        fb = f_eval(p, b)
        if fa * fb < 0:
            out.append(_bisect(lambda t: f_eval(p, t), a, b))
    return out


def _count_by_turning_points(p: PolynomialInstance, tol: float) -> int:
    seq = [_sign(p.alpha * p.beta - p.gamma, abs(p.alpha * p.beta) + abs(p.gamma), "alpha*beta-gamma", tol)]
    for t in _f_critical_points(p):
        x = math.sqrt(t)
        seq.append(_sign(g_eval(p, x), _g_scale(p, x), "G at turning point", tol))
    seq.append(1)
    return sum(1 for a, b in zip(seq[:-1], seq[1:]) if a != b)


def _count_n2(p: PolynomialInstance, tol: float) -> int:
    a, b, c = p.alpha, p.beta, p.gamma
    scale = a * a + b * b + abs(c)
    disc = _sign((b - a) ** 2 / 4.0 + c, scale, "gamma+(beta-alpha)^2/4", tol)
    if disc < 0:
        return 0
    pmc = _sign(a * b - c, abs(a * b) + abs(c), "alpha*beta-gamma", tol)
    if pmc < 0:  # gamma > alpha beta
        return 1
    s = _sign(a + b, abs(a) + abs(b), "alpha+beta", tol)
    return 2 if s > 0 else 0


def count_roots_analytic(p: PolynomialInstance, tol: float = BOUNDARY_TOL) -> int:
    """Number of roots ``x > 0`` of ``G`` from the sign-case analysis.

    The sign of ``gamma`` and of ``alpha beta - gamma``, the signs of
    ``alpha`` and ``beta`` and the position of ``(alpha, beta)`` relative to
    the curve ``beta**2 = alpha**n (n-2)**(n-2) / (n+2)**(n-2)`` decide the
    count directly; the remaining cases with ``gamma < 0`` are settled by the
    sign of ``G`` at the zeros of ``F``. Raises :class:`BoundaryError` when a
    deciding quantity is within ``tol`` (relative) of zero.
    """
    n = p.n
    if n == 2:
        return _count_n2(p, tol)
    a, b, c = p.alpha, p.beta, p.gamma
    if abs(c) <= tol * max(1.0, abs(a * b)):
        # gamma = 0: roots x**2 = alpha and x**n = beta
        sa = _sign(a, abs(a), "alpha", tol)
        sb = _sign(b, abs(b), "beta", tol)
        count = (sa > 0) + (sb > 0)
        if count == 2:
            _sign(a ** (n / 2.0) - b, a ** (n / 2.0) + b, "alpha^(n/2)-beta", tol)
        return int(count)
    pmc = _sign(a * b - c, abs(a * b) + abs(c), "alpha*beta-gamma", tol)
    if c > 0:
        if pmc < 0:
            return 1
        sa = _sign(a, abs(a), "alpha", tol)
        sb = _sign(b, abs(b), "beta", tol)
        return 2 if (sa > 0 and sb > 0) else 0
    # gamma < 0: locate (alpha, beta) among the regions of the (alpha, beta) plane
    sb = _sign(b, abs(b), "beta", tol)
    if sb > 0:
        region = "D31"
    else:
        sa = _sign(a, abs(a), "alpha", tol)
        if sa < 0:
            region = "D12"
        else:
            curve = a**n * ((n - 2) / (n + 2)) ** (n - 2)
            q = _sign(b * b - curve, b * b + curve, "beta^2-curve", tol)
            region = "D12" if q > 0 else "D23"
    if pmc < 0:  # alpha beta < gamma < 0
        if region in ("D12", "D31"):
            return 1
        return _count_by_turning_points(p, tol)
    if region == "D12":
        return 0
    return _count_by_turning_points(p, tol)


# --------------------------------------------------------------------------
# regimes


class Regime(str, enum.Enum):
    SAME_SIGN = "same_sign"
    OPPOSITE_SIGN = "opposite_sign"  # n = 2 only
    WEAK_OPPOSITE = "weak_opposite"  # -1/mu < r < 0
    THRESHOLD = "threshold"  # r = -1/mu or -mu
    INTERMEDIATE = "intermediate"  # -mu < r < -1/mu, r != -1
    STRONG_OPPOSITE = "strong_opposite"  # r < -mu
    ZERO_TOTAL = "zero_total"  # r = -1


Count = tuple[int, int]


@dataclass(frozen=True)
class RegimeClassification:
    n: int
    gamma_ratio: float
    regime: Regime
    aligned_count: int | None
    staggered_count: int | None
    aligned_count_range: Count | None
    staggered_count_range: Count | None
    mu_n: float
    lambda_n: float

    @property
    def aligned_bounds(self) -> Count:
        if self.aligned_count is not None:
            return (self.aligned_count, self.aligned_count)
        assert self.aligned_count_range is not None
        return self.aligned_count_range

    @property
    def staggered_bounds(self) -> Count:
        if self.staggered_count is not None:
            return (self.staggered_count, self.staggered_count)
        assert self.staggered_count_range is not None
        return self.staggered_count_range

    def admits(self, aligned: int, staggered: int) -> bool:
        lo_a, hi_a = self.aligned_bounds
        lo_s, hi_s = self.staggered_bounds
        return lo_a <= aligned <= hi_a and lo_s <= staggered <= hi_s


def _is_near(r: float, target: float, tol: float) -> bool:
    return abs(r - target) <= tol * max(1.0, abs(target))


def classify_regime(n: int, gamma_ratio: float, tol: float = BOUNDARY_TOL) -> RegimeClassification:
    """Predicted numbers of aligned and staggered nested equilibria."""
    if gamma_ratio == 0:
        raise ValueError("gamma_ratio must be nonzero")
    r = float(gamma_ratio)
    mu = mu_n(n)

    def make(regime: Regime, aligned: int | Count, staggered: int | Count) -> RegimeClassification:
        return RegimeClassification(
            n=n,
            gamma_ratio=r,
            regime=regime,
            aligned_count=aligned if isinstance(aligned, int) else None,
            staggered_count=staggered if isinstance(staggered, int) else None,
            aligned_count_range=None if isinstance(aligned, int) else aligned,
            staggered_count_range=None if isinstance(staggered, int) else staggered,
            mu_n=mu,
            lambda_n=lambda_n(n),
        )

    if _is_near(r, -1.0, tol):
        return make(Regime.ZERO_TOTAL, 0, 2)
    if n == 2:
        if r > 0:
            return make(Regime.SAME_SIGN, 2, 1)
        return make(Regime.OPPOSITE_SIGN, 1, 2)
    if r > 0:
        return make(Regime.SAME_SIGN, 2, (1, 3))
    if _is_near(r, -1.0 / mu, tol) or _is_near(r, -mu, tol):
        return make(Regime.THRESHOLD, 1, 2)
    if r > -1.0 / mu:
        return make(Regime.WEAK_OPPOSITE, 1, (0, 2))
    if r > -mu:
        return make(Regime.INTERMEDIATE, (1, 3), 2)
    return make(Regime.STRONG_OPPOSITE, 1, (0, 2))


def _is_zero_total(gamma1: float, gamma2: float) -> bool:
    return abs(gamma1 + gamma2) < 1e-12 * max(abs(gamma1), abs(gamma2))


def equilibrium_ratios(n: int, gamma_ratio: float, alignment: Alignment | str) -> list[float]:
    """Values of ``|s2/s1|`` giving a relative equilibrium for this alignment.

    For ALIGNED rings with ``gamma_ratio = -1`` the root ``x = 1`` (which
    would make the rings collide) is removed.
    """
    alignment = Alignment(alignment)
    roots = positive_roots(equation_coefficients(n, gamma_ratio, alignment))
    if alignment is Alignment.ALIGNED and _is_zero_total(1.0, gamma_ratio):
        roots = [x for x in roots if abs(x - 1.0) > DEDUP_RTOL]
    return roots


# --------------------------------------------------------------------------
# solving and absolute equilibria


@dataclass(frozen=True)
class NestedSolution:
    alignment: Alignment
    x: float
    system: VortexSystem
    report: EquilibriumReport
    config: NestedPolygonConfig

    def __iter__(self):
        return iter((self.alignment, self.x, self.system, self.report))


def _config_for(n: int, gamma1: float, gamma2: float, s1: complex, alignment: Alignment, x: float) -> NestedPolygonConfig:
    s2 = x * s1 * complex(math.cos(alignment.angle_offset * math.pi / n), math.sin(alignment.angle_offset * math.pi / n))
    return NestedPolygonConfig(n, s1, s2, gamma1, gamma2)


def solve_nested(
    n: int,
    gamma1: float,
    gamma2: float,
    s1: PointLike = 1.0,
    *,
    tol: float = EQUILIBRIUM_TOL,
) -> list[NestedSolution]:
    """Every two-ring relative equilibrium with the first ring at ``s1``.

    The second ring is placed at ``s2 = x s1`` (ALIGNED) or
    ``s2 = x s1 exp(i pi/n)`` (STAGGERED), one system per positive root
    ``x``, and each system is checked with :func:`classify`.
    """
    if gamma1 == 0 or gamma2 == 0:
        raise ValueError("ring vorticities must be nonzero")
    s1 = as_complex(s1)
    if s1 == 0:
        raise ValueError("s1 must be nonzero")
    r = gamma2 / gamma1
    out: list[NestedSolution] = []
    for alignment in Alignment:
        p = equation_coefficients(n, r, alignment)
        roots = positive_roots(p)
        try:
            predicted = count_roots_analytic(p)
        except BoundaryError as exc:
            warnings.warn(f"{alignment.value}: analytic count undecided ({exc})", stacklevel=2)
        else:
            if predicted != len(roots):
                warnings.warn(
                    f"{alignment.value}: analytic count {predicted} differs from "
                    f"numeric count {len(roots)}",
                    stacklevel=2,
                )
        if alignment is Alignment.ALIGNED and _is_zero_total(gamma1, gamma2):
            roots = [x for x in roots if abs(x - 1.0) > DEDUP_RTOL]
        for x in roots:
            config = _config_for(n, gamma1, gamma2, s1, alignment, x)
            system = config.to_system()
            report = classify(system, tol)
            if report.kind not in (EquilibriumKind.ROTATION, EquilibriumKind.ABSOLUTE):
                raise VortexError(
                    f"root x = {x!r} ({alignment.value}) did not verify: {report.kind.value}, "
                    f"residual {report.residual:.3e}"
                )
            out.append(NestedSolution(alignment, x, system, report, config))
    return out


class AbsoluteEquilibrium(NamedTuple):
    gamma2: float
    s2_over_s1: PlanePoint
    system: VortexSystem


def absolute_equilibrium(n: int, gamma1: float, s1: PointLike = 1.0) -> AbsoluteEquilibrium:
    """The two-ring absolute equilibrium with ``gamma2 = -mu_n gamma1``.

    The outer ring carries the larger vorticity; ``s2/s1`` has modulus
    ``mu_n**(2/n)`` and argument ``pi/n``. The other admissible ratio,
    ``-1/mu_n``, is the same configuration with the rings relabelled.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if gamma1 == 0:
        raise ValueError("gamma1 must be nonzero")
    mu = mu_n(n)
    q = PlanePoint.polar(mu ** (2.0 / n), math.pi / n)
    s1c = as_complex(s1)
    config = NestedPolygonConfig(n, s1c, s1c * complex(q), gamma1, -mu * gamma1)
    return AbsoluteEquilibrium(config.gamma2, q, config.to_system())


# --------------------------------------------------------------------------
# scans


@dataclass(frozen=True)
class RegimeScanRow:
    classification: RegimeClassification
    aligned_numeric: int
    staggered_numeric: int

    @property
    def consistent(self) -> bool:
        return self.classification.admits(self.aligned_numeric, self.staggered_numeric)


def _format_count(c: RegimeClassification, aligned: bool) -> str:
    lo, hi = c.aligned_bounds if aligned else c.staggered_bounds
    return str(lo) if lo == hi else f"{lo}-{hi}"


def _scan_point(args: tuple[int, float]) -> RegimeScanRow:
    n, r = args
    return RegimeScanRow(
        classify_regime(n, r),
        len(equilibrium_ratios(n, r, Alignment.ALIGNED)),
        len(equilibrium_ratios(n, r, Alignment.STAGGERED)),
    )


def scan_regimes(n: int, ratio_grid: Iterable[float], max_workers: int | None = None) -> list[RegimeScanRow]:
    """Predicted and numeric root counts for every ratio in the grid."""
    ratios = [float(r) for r in ratio_grid]
    if any(r == 0 for r in ratios):
        raise ValueError("ratios must be nonzero")
    tasks = [(n, r) for r in ratios]
    if max_workers and max_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(_scan_point, tasks))
    return [_scan_point(t) for t in tasks]


SCAN_CSV_COLUMNS = (
    "n",
    "gamma_ratio",
    "regime_label",
    "aligned_predicted",
    "aligned_numeric",
    "staggered_predicted",
    "staggered_numeric",
    "mu_n",
)


def write_scan_csv(rows: Sequence[RegimeScanRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SCAN_CSV_COLUMNS)
    for row in rows:
        c = row.classification
        w.writerow(
            [
                c.n,
                repr(c.gamma_ratio),
                c.regime.value,
                _format_count(c, True),
                row.aligned_numeric,
                _format_count(c, False),
                row.staggered_numeric,
                repr(c.mu_n),
            ]
        )


def scan_csv(rows: Sequence[RegimeScanRow]) -> str:
    buf = io.StringIO()
    write_scan_csv(rows, buf)
    return buf.getvalue()
