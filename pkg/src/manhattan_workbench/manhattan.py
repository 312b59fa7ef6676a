"""Bowen roots, ray-sweep tracing of the Manhattan curve, rigidity functionals."""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .coding import TruncationParams
from .errors import (BracketFailure, DivergentTail, EntropyBoundWarning, InsufficientPoints,
                     PrecisionFloorWarning, TruncationInsufficient)
from .pressure import PressureEstimate, WeightedPotentialQuery, has_cusp, pressure_estimate
from .schottky import RepPair

DEFAULT_TOL_ROOT = 1e-4
ROOT_XTOL = 1e-13
DEFAULT_RAYS = 33
T_HI_CAP = 64.0
LOWER_OFFSETS = (1e-6, 1e-4, 1e-3, 1e-2, 3e-2, 0.1, 0.3, 0.6)
MIN_CURVE_POINTS = 5


@dataclass(frozen=True)
class BowenRoot:
    a: float
    b: float
    t: float
    error_bar: float
    residual: float
    bracket: tuple[float, float]
    pressure_error: float
    slope: float
    evaluations: int
    solver_error: float = 0.0

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CurvePoint:
    a: float
    b: float
    ray: tuple[float, float]
    theta: float
    t_root: float
    residual: float
    bracket: tuple[float, float]
    error_bar: float
    solver_error: float = 0.0
    t_coarse: float | None = None

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class RigidityReport:
    h1: float
    h2: float
    delta11: float
    bishop_steger_bound: float
    intersection_number: float
    line_deviation: float
    errors: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    @property
    def bishop_steger_gap(self) -> float:
        return self.bishop_steger_bound - self.delta11

    @property
    def thurston_gap(self) -> float:
        return self.intersection_number - self.h1 / self.h2

    def to_dict(self):
        out = asdict(self)
        out["bishop_steger_gap"] = self.bishop_steger_gap
        out["thurston_gap"] = self.thurston_gap
        return out


def thread_count() -> int:
    raw = os.environ.get("MANHATTAN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


class _Pressure:
    """Memoized t ↦ pressure along one normalized ray."""

    def __init__(self, pair, a, b, params):
        self.pair, self.a, self.b, self.params = pair, a, b, params
        self.cache: dict[float, PressureEstimate] = {}

    def __call__(self, t: float) -> PressureEstimate:
        est = self.cache.get(t)
        if est is None:
            est = pressure_estimate(self.pair, WeightedPotentialQuery(self.a, self.b, t), self.params)
            self.cache[t] = est
        return est

    def value(self, t: float) -> float:
        return self(t).value


def _lower_bracket(f: _Pressure, cusp: bool) -> float:
    if cusp:
        # normalized weights: the phase boundary is t = 1/2
        for eps in LOWER_OFFSETS:
            t = 0.5 * (1.0 + eps)
            try:
                v = f.value(t)
            except (TruncationInsufficient, DivergentTail):
                continue
            if v > 0:
                return t
            raise BracketFailure(
                f"pressure is already negative at t = {t:.6g}; the root is too close to the phase "
                "boundary for the truncation")
        raise BracketFailure("no evaluable lower bracket above the phase boundary")
    t = 0.25
    while f.value(t) <= 0:
        t /= 2.0
        if t < 1e-6:
            raise BracketFailure("pressure never positive near t = 0")
    return t


def _upper_bracket(f: _Pressure, lo: float) -> float:
    t = max(1.0, 2.0 * lo)
    while f.value(t) >= 0:
        t *= 2.0
        if t > T_HI_CAP:
            raise BracketFailure(f"pressure still nonnegative at t = {T_HI_CAP}; check the configuration")
    return t


def bowen_root(pair: RepPair, a: float, b: float, params: TruncationParams | None = None,
               tol_root: float = DEFAULT_TOL_ROOT) -> BowenRoot:
    """Root of t ↦ P(−t(aτ + bκ)).

    The ray is normalized to a + b = 1 before solving and the root rescaled,
    so the answer is homogeneous of degree −1 in (a, b) to rounding.  The
    normalized root is converged to ~1e-13; ``tol_root`` is the accuracy the
    caller needs, and PrecisionFloorWarning fires when the pressure error
    bar cannot deliver it.
    """
    q0 = WeightedPotentialQuery(a, b, 1.0)
    s = q0.weight_sum
    an, bn = q0.a / s, q0.b / s
    params = params or TruncationParams()
    f = _Pressure(pair, an, bn, params)
    lo = _lower_bracket(f, has_cusp(pair))
    hi = _upper_bracket(f, lo)
    # converge fully on the normalized ray so the answer does not depend on the scale of (a, b)
    root = brentq(f.value, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)
    est = f(root)
    pos = [t for t, e in f.cache.items() if e.value > 0]
    neg = [t for t, e in f.cache.items() if e.value < 0]
    b_lo = max(pos) if pos else lo
    b_hi = min(neg) if neg else hi
    slope = (f.value(b_hi) - f.value(b_lo)) / (b_hi - b_lo)
    if root not in (b_lo, b_hi) and slope == 0:
        slope = -1.0
    p_err = est.total_error
    err = ROOT_XTOL + p_err / abs(slope)
    if p_err / abs(slope) > tol_root * s:
        warnings.warn(PrecisionFloorWarning(
            f"pressure error {p_err:.3g} limits the root to ±{p_err / abs(slope) / s:.3g}, "
            f"coarser than tol_root = {tol_root:g}"), stacklevel=2)
    solver = ROOT_XTOL + est.error_bar / abs(slope)
    return BowenRoot(a=float(a), b=float(b), t=root / s, error_bar=err / s, residual=abs(est.value),
                     bracket=(b_lo / s, b_hi / s), pressure_error=p_err, slope=slope * s,
                     evaluations=len(f.cache), solver_error=solver / s)


def entropy(pair: RepPair, which: int = 1, params=None, tol_root=DEFAULT_TOL_ROOT) -> BowenRoot:
    a, b = (1.0, 0.0) if which == 1 else (0.0, 1.0)
    r = bowen_root(pair, a, b, params, tol_root)
    if r.t > 1.0 + r.error_bar:
        warnings.warn(EntropyBoundWarning(f"entropy estimate {r.t:.6g} exceeds 1"), stacklevel=2)
    return r


def ray_angles(ray_count: int) -> np.ndarray:
    """Interior ray angles kπ/(2(K+1)), k = 1..K."""
    if ray_count < 3:
        raise ValueError("ray_count must be at least 3")
    return np.arange(1, ray_count + 1) * (math.pi / (2.0 * (ray_count + 1)))


def coarse_params(params: TruncationParams) -> TruncationParams | None:
    """Truncation at ⌈M/2⌉, used to measure the truncation error of derived quantities."""
    half = max(1, math.ceil(params.max_power / 2))
    if half == params.max_power or (params.anchor and abs(params.anchor[1]) > half):
        return None
    return TruncationParams(params.n_max, half, params.anchor)


def _ray(theta: float) -> tuple[float, float]:
    if theta == 0.0:
        return (1.0, 0.0)
    if theta == math.pi / 2:
        return (0.0, 1.0)
    return (math.cos(theta), math.sin(theta))


def _point(pair, theta, params, tol_root, coarse) -> CurvePoint:
    ray = _ray(theta)
    r = bowen_root(pair, ray[0], ray[1], params, tol_root)
    t_c = bowen_root(pair, ray[0], ray[1], coarse, tol_root).t if coarse is not None else None
    return CurvePoint(a=r.t * ray[0], b=r.t * ray[1], ray=ray, theta=float(theta), t_root=r.t,
                      residual=r.residual, bracket=r.bracket, error_bar=r.error_bar,
                      solver_error=r.solver_error, t_coarse=t_c)


def _parallel_map(fn, items, threads):
    threads = threads or thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def trace_curve(pair: RepPair, ray_count: int = DEFAULT_RAYS, params: TruncationParams | None = None,
                tol_root: float = DEFAULT_TOL_ROOT, threads: int | None = None,
                coarse: bool = True) -> list[CurvePoint]:
    """Points δ^{ray}·ray on K interior rays plus both axis endpoints, sorted by a.

    With ``coarse`` each root is also solved at truncation ⌈M/2⌉ so that
    derived quantities can carry a truncation error.
    """
    params = params or TruncationParams()
    cp = coarse_params(params) if coarse else None
    thetas = [0.0, *ray_angles(ray_count), math.pi / 2]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionFloorWarning)
        points = _parallel_map(lambda th: _point(pair, th, params, tol_root, cp), thetas, threads)
    return sorted(points, key=lambda p: (p.a, -p.b))


def _coarse_points(points):
    if any(p.t_coarse is None for p in points):
        return None
    return [CurvePoint(a=p.t_coarse * p.ray[0], b=p.t_coarse * p.ray[1], ray=p.ray, theta=p.theta,
                       t_root=p.t_coarse, residual=p.residual, bracket=p.bracket,
                       error_bar=p.error_bar, solver_error=p.solver_error) for p in points]


def chord_distance(points, h1: float, h2: float) -> np.ndarray:
    a = np.array([p.a for p in points])
    b = np.array([p.b for p in points])
    return np.abs(a / h1 + b / h2 - 1.0) / math.hypot(1.0 / h1, 1.0 / h2)


def _raw_second_differences(points):
    pts = sorted(points, key=lambda p: p.theta)
    a = np.array([p.a for p in pts])
    b = np.array([p.b for p in pts])
    e = np.array([p.solver_error for p in pts])
    h0 = a[1:-1] - a[:-2]
    h1 = a[2:] - a[1:-1]
    s0 = (b[1:-1] - b[:-2]) / h0
    s1 = (b[2:] - b[1:-1]) / h1
    d2 = 2.0 * (s1 - s0) / (h0 + h1)
    # each point moves along its ray by at most its solver error; slopes are O(1)
    err = 4.0 * (e[:-2] / h0 + e[1:-1] * (1 / h0 + 1 / h1) + e[2:] / h1) / (h0 + h1)
    return d2, err


def second_differences(points) -> tuple[np.ndarray, np.ndarray]:
    """Divided second differences of b(a) at interior points, ordered by ray angle, with error bars.

    The error bar is the solver error pushed through the difference formula
    plus twice the change against the coarse-truncation curve when present.
    """
    d2, err = _raw_second_differences(points)
    coarse = _coarse_points(points)
    if coarse is not None:
        d2c, _ = _raw_second_differences(coarse)
        err = err + 2.0 * np.abs(d2 - d2c)
    return d2, err


def _endpoint_slope(points, h1: float) -> tuple[float, float]:
    """α in a(b) = h₁ + αb + βb² through (h₁, 0) and the two nearest traced points,
    with the change against a cubic through one more point as fit error."""
    inner = sorted((p for p in points if p.b > 0), key=lambda p: p.b)[:3]
    ab = [(p.a - h1, p.b) for p in inner]
    A2 = np.array([[b, b * b] for _, b in ab[:2]])
    alpha = float(np.linalg.solve(A2, [a for a, _ in ab[:2]])[0])
    fit_err = 0.0
    if len(ab) == 3:
        A3 = np.array([[b, b * b, b ** 3] for _, b in ab])
        fit_err = abs(float(np.linalg.solve(A3, [a for a, _ in ab])[0]) - alpha)
    return alpha, fit_err


def _functionals(points, h1, h2, d11):
    alpha, fit_err = _endpoint_slope(points, h1)
    return {
        "bishop_steger_gap": h1 * h2 / (h1 + h2) - d11,
        "intersection_number": -alpha,
        "thurston_gap": -alpha - h1 / h2,
        "line_deviation": float(np.max(chord_distance(points, h1, h2))),
        "fit_error": fit_err,
    }


def rigidity_report(pair: RepPair, params: TruncationParams | None = None, points=None,
                    ray_count: int = DEFAULT_RAYS, tol_root: float = DEFAULT_TOL_ROOT,
                    line_tol: float = 1e-3, tol: float = 1e-3,
                    threads: int | None = None) -> RigidityReport:
    """Entropies, δ^{1,1}, Bishop–Steger bound, intersection number, chord deviation.

    Gap error bars combine the solver error of the roots involved, the fit
    error of the endpoint slope, and twice the change of each functional
    between truncations M and ⌈M/2⌉ (truncation errors are strongly
    correlated across rays, so they are propagated by recomputation rather
    than by summing per-root bars).
    """
    params = params or TruncationParams()
    if points is None:
        points = trace_curve(pair, ray_count, params, tol_root, threads)
    if len(points) < MIN_CURVE_POINTS:
        raise InsufficientPoints(f"{len(points)} curve points, need {MIN_CURVE_POINTS}")
    cp = coarse_params(params)
    rays = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionFloorWarning)
        roots = _parallel_map(lambda r: bowen_root(pair, r[0], r[1], params, tol_root), rays, threads)
        coarse = None
        if cp is not None and _coarse_points(points) is not None:
            coarse = _parallel_map(lambda r: bowen_root(pair, r[0], r[1], cp, tol_root), rays, threads)
    r1, r2, r11 = roots
    h1, h2, d11 = r1.t, r2.t, r11.t
    fine = _functionals(points, h1, h2, d11)
    trunc = {k: 0.0 for k in fine}
    if coarse is not None:
        rough = _functionals(_coarse_points(points), coarse[0].t, coarse[1].t, coarse[2].t)
        trunc = {k: 2.0 * abs(fine[k] - rough[k]) for k in fine}

    # solver errors pushed through the formulas
    e1, e2, e11 = r1.solver_error, r2.solver_error, r11.solver_error
    bs_solver = (h2 ** 2 * e1 + h1 ** 2 * e2) / (h1 + h2) ** 2 + e11
    near = sorted((p for p in points if p.b > 0), key=lambda p: p.b)[:2]
    slope_solver = (e1 + sum(p.solver_error for p in near)) / near[0].b
    ratio_solver = e1 / h2 + h1 * e2 / h2 ** 2
    errors = {
        "h1": r1.error_bar, "h2": r2.error_bar, "delta11": r11.error_bar,
        "bishop_steger_gap": bs_solver + trunc["bishop_steger_gap"],
        "intersection_number": slope_solver + fine["fit_error"] + trunc["intersection_number"],
        "thurston_gap": slope_solver + ratio_solver + fine["fit_error"] + trunc["thurston_gap"],
        "line_deviation": trunc["line_deviation"],
    }
    bs_gap, th_gap = fine["bishop_steger_gap"], fine["thurston_gap"]
    deviation = fine["line_deviation"]
    verdicts = {
        "bishop_steger_strict": bool(bs_gap > 2 * errors["bishop_steger_gap"]),
        "thurston_strict": bool(th_gap > 2 * errors["thurston_gap"]),
        "bishop_steger_violated": bool(bs_gap < -2 * errors["bishop_steger_gap"] - tol),
        "thurston_violated": bool(th_gap < -2 * errors["thurston_gap"] - tol),
        "conjugate_consistent": bool(deviation <= line_tol and abs(bs_gap) <= tol and abs(th_gap) <= tol),
    }
    return RigidityReport(h1=h1, h2=h2, delta11=d11, bishop_steger_bound=h1 * h2 / (h1 + h2),
                          intersection_number=fine["intersection_number"], line_deviation=deviation,
                          errors={k: float(v) for k, v in errors.items()}, verdicts=verdicts)
