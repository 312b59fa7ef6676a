"""Isometries of the upper half-plane and the closed-form geometry built on them.

Plane points are Python complex numbers with positive imaginary part.
Boundary points are real floats, with ``math.inf`` standing for the point at
infinity (``-inf`` is accepted and identified with it).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousClass, NoBoundaryFixedPoints, NotHyperbolic

TOL_CLS = 1e-9
DET_TOL = 1e-12
TWO_PI = 2.0 * math.pi
INF = math.inf


class IsometryClass(enum.Enum):
    IDENTITY = "identity"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


def _sign_normalize(m11, m12, m21, m22):
    for v in (m11, m12, m21, m22):
        if v != 0.0:
            if v < 0.0:
                return -m11, -m12, -m21, -m22
            break
    return m11, m12, m21, m22


@dataclass(frozen=True)
class Isometry:
    """An element of PSL(2, R), stored as a sign-normalized unit-determinant matrix."""

    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        vals = [float(v) for v in (self.m11, self.m12, self.m21, self.m22)]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("isometry entries must be finite")
        det = vals[0] * vals[3] - vals[1] * vals[2]
        if det <= 0.0:
            raise ValueError(f"determinant must be positive, got {det!r}")
        self._store(vals, det, DET_TOL)

    def _store(self, vals, det, tol):
        if abs(det - 1.0) > tol and det > 0.0:
            s = math.sqrt(det)
            vals = [v / s for v in vals]
        for name, v in zip(("m11", "m12", "m21", "m22"), _sign_normalize(*vals)):
            object.__setattr__(self, name, v)

    @classmethod
    def _product(cls, vals, scale) -> "Isometry":
        # determinant drift below the rounding noise of the product (scale is
        # the product of the factors' squared norms) is not real drift
        if not all(math.isfinite(v) for v in vals):
            raise OverflowError("isometry entries overflowed")
        out = object.__new__(cls)
        det = vals[0] * vals[3] - vals[1] * vals[2]
        out._store(vals, det, max(DET_TOL, 16.0 * 2.0 ** -52 * scale))
        return out

    @classmethod
    def from_matrix(cls, m) -> "Isometry":
        a = np.asarray(m, dtype=float).reshape(2, 2)
        return cls(a[0, 0], a[0, 1], a[1, 0], a[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def trace(self) -> float:
        return self.m11 + self.m22

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)

    def __call__(self, z):
        return act(self, z)

    def is_identity(self, tol: float = 1e-12) -> bool:
        return (abs(self.m11 - 1) <= tol and abs(self.m22 - 1) <= tol
                and abs(self.m12) <= tol and abs(self.m21) <= tol)

    def almost_equal(self, other: "Isometry", tol: float = 1e-10) -> bool:
        a, b = self.matrix, other.matrix
        return bool(np.max(np.abs(a - b)) <= tol or np.max(np.abs(a + b)) <= tol)

    def to_list(self) -> list[float]:
        return [self.m11, self.m12, self.m21, self.m22]


IDENTITY = Isometry(1.0, 0.0, 0.0, 1.0)


def compose(g: Isometry, h: Isometry) -> Isometry:
    """Matrix product g·h (apply h first), renormalized."""
    vals = (
        g.m11 * h.m11 + g.m12 * h.m21,
        g.m11 * h.m12 + g.m12 * h.m22,
        g.m21 * h.m11 + g.m22 * h.m21,
        g.m21 * h.m12 + g.m22 * h.m22,
    )
    return Isometry._product(vals, _norm2(g) * _norm2(h))


def _norm2(g: Isometry) -> float:
    return g.m11 * g.m11 + g.m12 * g.m12 + g.m21 * g.m21 + g.m22 * g.m22


def inverse(g: Isometry) -> Isometry:
    return Isometry(g.m22, -g.m12, -g.m21, g.m11)


def power(g: Isometry, n: int) -> Isometry:
    """g**n by repeated squaring; negative n uses the inverse."""
    if n < 0:
        g, n = inverse(g), -n
    result, base = IDENTITY, g
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


def check_point(z) -> complex:
    z = complex(z)
    if not z.imag > 0.0 or not math.isfinite(z.real) or not math.isfinite(z.imag):
        raise ValueError(f"plane points need finite coordinates and im > 0, got {z!r}")
    return z


def act(g: Isometry, z) -> complex:
    """Möbius action on a plane point."""
    z = check_point(z)
    return (g.m11 * z + g.m12) / (g.m21 * z + g.m22)


def act_boundary(g: Isometry, xi: float) -> float:
    """Möbius action on the boundary R ∪ {∞}."""
    if math.isinf(xi):
        return INF if g.m21 == 0.0 else g.m11 / g.m21
    den = g.m21 * xi + g.m22
    if den == 0.0:
        return INF
    return (g.m11 * xi + g.m12) / den


def dist(x, y) -> float:
    """Hyperbolic distance, cosh d = 1 + |x−y|²/(2 im x im y), in the stable asinh form."""
    x, y = check_point(x), check_point(y)
    return 2.0 * math.asinh(abs(x - y) / (2.0 * math.sqrt(x.imag * y.imag)))


def classify(g: Isometry, tol: float = TOL_CLS, strict: bool = False) -> IsometryClass:
    t = abs(g.trace)
    if abs(t - 2.0) <= tol:
        if strict:
            raise AmbiguousClass(g.trace, tol)
        if g.is_identity(tol=max(tol, 1e-12)):
            return IsometryClass.IDENTITY
        return IsometryClass.PARABOLIC
    return IsometryClass.HYPERBOLIC if t > 2.0 else IsometryClass.ELLIPTIC


def translation_length(g: Isometry) -> float:
    """2·arccosh(|tr g|/2) for hyperbolic g."""
    if classify(g) is not IsometryClass.HYPERBOLIC:
        raise NotHyperbolic(f"trace {g.trace!r} is not hyperbolic")
    return 2.0 * math.acosh(abs(g.trace) / 2.0)


def fixed_points(g: Isometry):
    """Boundary fixed points.

    Returns ``(attracting, repelling)`` for a hyperbolic element and a
    one-tuple for a parabolic one.  The attracting point is the root of
    cz² + (d−a)z − b = 0 where |cz + d| > 1, i.e. where the derivative
    1/(cz+d)² is smaller than one.
    """
    kind = classify(g)
    if kind in (IsometryClass.ELLIPTIC, IsometryClass.IDENTITY):
        raise NoBoundaryFixedPoints(f"{kind.value} element has no boundary fixed points")
    a, b, c, d = g.m11, g.m12, g.m21, g.m22
    if kind is IsometryClass.PARABOLIC:
        if c == 0.0:
            return (INF,)
        return ((a - d) / (2.0 * c),)
    if c == 0.0:
        finite = b / (d - a)
        return (INF, finite) if abs(a) > abs(d) else (finite, INF)
    # Vieta-stable roots of c z² + (d−a) z − b
    B = d - a
    disc = math.sqrt(max(B * B + 4.0 * b * c, 0.0))
    q = -0.5 * (B + math.copysign(disc, B))
    roots = []
    if q != 0.0:
        roots = [q / c, -b / q]
    else:
        roots = [disc / (2.0 * c), -disc / (2.0 * c)]
    r1, r2 = roots
    if abs(c * r1 + d) >= abs(c * r2 + d):
        return r1, r2
    return r2, r1


def attracting_fixed_point(g: Isometry) -> float:
    return fixed_points(g)[0]


def busemann(xi: float, x, y) -> float:
    """Busemann cocycle B_ξ(x, y) = lim_{z→ξ} d(x, z) − d(y, z)."""
    x, y = check_point(x), check_point(y)
    if math.isinf(xi):
        return math.log(y.imag / x.imag)
    # logs of moduli rather than squares, so very large |ξ| cannot overflow
    return 2.0 * (math.log(abs(x - xi)) - math.log(abs(y - xi))) + math.log(y.imag / x.imag)


def _chart(o: complex) -> np.ndarray:
    # an element A with A·i = o
    s = math.sqrt(o.imag)
    return np.array([[s, o.real / s], [0.0, 1.0 / s]])


def _chart_inv(o: complex) -> np.ndarray:
    s = math.sqrt(o.imag)
    return np.array([[1.0 / s, -o.real / s], [0.0, s]])


def normalize_at(matrices: np.ndarray, o: complex) -> np.ndarray:
    """Conjugate raw matrices (..., 2, 2) so that the basepoint o becomes i."""
    return _chart_inv(o) @ np.asarray(matrices) @ _chart(o)


def boundary_to_chart(xi, o: complex):
    """Image of boundary points under A⁻¹ where A·i = o."""
    if np.ndim(xi) == 0:
        return INF if math.isinf(xi) else (float(xi) - o.real) / o.imag
    xi = np.asarray(xi, dtype=float)
    with np.errstate(invalid="ignore"):
        return np.where(np.isinf(xi), np.inf, (xi - o.real) / o.imag)


def busemann_shift(xi: float, g: Isometry, o=1j) -> float:
    """B_ξ(g·o, o), evaluated from matrix entries so that it stays accurate
    when g·o is very close to the boundary."""
    o = check_point(o)
    h = normalize_at(g.matrix, o)
    eta = boundary_to_chart(xi, o)
    return float(busemann_shift_array(eta, h[None])[0])


def power_busemann_shift(xi: float, g: Isometry, m: int, o=1j) -> float:
    """B_ξ(gᵐ·o, o) for hyperbolic g without forming gᵐ.

    Works in coordinates where g is z ↦ eˡz, so large powers cost no
    precision (the product matrix loses its determinant to cancellation).
    """
    return float(power_busemann_shift_array(xi, g, m, o))


def power_busemann_shift_array(xi, g: Isometry, m, o=1j) -> np.ndarray:
    """Vectorized power_busemann_shift over boundary points xi and exponents m."""
    o = check_point(o)
    if classify(g) is not IsometryClass.HYPERBOLIC:
        raise NotHyperbolic("power_busemann_shift needs a hyperbolic element")
    alpha, beta = fixed_points(g)
    length = translation_length(g)
    xi, m = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(m, dtype=np.int64))
    sign = 1.0 if math.isinf(alpha) or math.isinf(beta) or beta > alpha else -1.0

    # orientation preserving T with T(alpha) = inf, T(beta) = 0
    def T(z):
        if math.isinf(alpha):
            return z - beta
        if math.isinf(beta):
            return -1.0 / (z - alpha)
        return sign * (z - beta) / (z - alpha)

    op = complex(T(o))
    inf = np.isinf(xi)
    at_alpha = (xi == alpha) if not math.isinf(alpha) else inf
    safe = np.where(inf | at_alpha, 0.0, xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        xp = np.real(T(safe.astype(complex)))
    if not math.isinf(alpha):
        # T(inf) is the limit of T along the real line
        xp = np.where(inf, 0.0 if math.isinf(beta) else sign, xp)
    mf = m.astype(float)
    decay = np.exp(-np.abs(mf) * length)
    w = np.where(m > 0, op - xp * decay, op * decay - xp)
    out = np.abs(mf) * length + np.log(np.abs(w) ** 2 / np.abs(op - xp) ** 2)
    out = np.where(at_alpha, -mf * length, out)
    return np.where(m == 0, 0.0, out)


def attracting_fixed_point_array(h) -> np.ndarray:
    """Vectorized attracting fixed point of hyperbolic matrices (..., 2, 2)."""
    h = np.asarray(h, dtype=float)
    a, b, c, d = h[..., 0, 0], h[..., 0, 1], h[..., 1, 0], h[..., 1, 1]
    B = d - a
    disc = np.sqrt(np.maximum(B * B + 4.0 * b * c, 0.0))
    q = -0.5 * (B + np.copysign(disc, B))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = q / c
        r2 = -b / q
        pick = np.abs(c * r1 + d) >= np.abs(c * r2 + d)
        root = np.where(pick, r1, r2)
        upper = np.where(np.abs(a) > np.abs(d), np.inf, b / (d - a))
    return np.where(c == 0.0, upper, root)


def busemann_shift_array(eta, h) -> np.ndarray:
    """Vectorized B_η(h·i, i) for matrices h of shape (..., 2, 2) normalized at i.

    Uses B_η(h·i, i) = log(((a − ηc)² + (b − ηd)²) / (1 + η²)), and
    log(c² + d²) when η = ∞.
    """
    h = np.asarray(h, dtype=float)
    eta = np.asarray(eta, dtype=float)
    a, b, c, d = h[..., 0, 0], h[..., 0, 1], h[..., 1, 0], h[..., 1, 1]
    inf = np.isinf(eta)
    e = np.where(inf, 0.0, eta)
    num = (a - e * c) ** 2 + (b - e * d) ** 2
    fin = np.log(num) - np.log1p(e * e)
    return np.where(inf, np.log(c * c + d * d), fin)


def displacement(g: Isometry, o=1j) -> float:
    """d(o, g·o) from the normalized matrix: cosh d = ‖h‖²_F / 2."""
    o = check_point(o)
    h = normalize_at(g.matrix, o)
    return float(displacement_array(h[None])[0])


def displacement_array(h) -> np.ndarray:
    """Vectorized d(i, h·i) for normalized matrices of shape (..., 2, 2)."""
    h = np.asarray(h, dtype=float)
    f = np.sum(h * h, axis=(-2, -1)) / 2.0
    return np.arccosh(np.maximum(f, 1.0))


def translation_length_array(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    t = np.abs(h[..., 0, 0] + h[..., 1, 1])
    return 2.0 * np.arccosh(np.maximum(t / 2.0, 1.0))


def cayley(z: complex) -> complex:
    """Ψ(z) = i(z − i)/(z + i), from the half-plane to the unit disk."""
    z = check_point(z)
    return 1j * (z - 1j) / (z + 1j)


def cayley_inv(w: complex) -> complex:
    w = complex(w)
    if not abs(w) < 1.0:
        raise ValueError("disk points need |w| < 1")
    return 1j * (1j + w) / (1j - w)


def cayley_boundary(xi: float) -> complex:
    """Ψ on the boundary; ∞ goes to i."""
    if math.isinf(xi):
        return 1j
    return 1j * (xi - 1j) / (xi + 1j)


def boundary_angle(xi: float) -> float:
    """Angle in [0, 2π) of Ψ(ξ) on the unit circle."""
    if math.isinf(xi):
        return math.pi / 2.0
    # Ψ(ξ) = e^{iφ} with ξ = tan((φ − 3π/2)/2)
    phi = 1.5 * math.pi + 2.0 * math.atan(xi)
    return phi % TWO_PI


def angle_to_boundary(phi: float) -> float:
    """Inverse of boundary_angle."""
    u = ((phi - 1.5 * math.pi) % TWO_PI) / 2.0  # in [0, π)
    if u == math.pi / 2.0:
        return INF
    return math.tan(u) if u < math.pi / 2.0 else math.tan(u - math.pi)


def disk_derivative(g: Isometry, xi: float) -> float:
    """|(ΨgΨ⁻¹)'(Ψξ)|, the boundary derivative of g in disk coordinates."""
    w = cayley_boundary(xi)
    # conjugate into SU(1,1): Ψ = [[i, 1], [1, i]] up to scale
    P = np.array([[1j, 1.0], [1.0, 1j]])
    Pinv = np.linalg.inv(P)
    m = P @ g.matrix @ Pinv
    den = m[1, 0] * w + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return abs(det / den ** 2)


@dataclass(frozen=True)
class BoundaryArc:
    """Closed arc of the circle starting at angle ``start`` and running
    counterclockwise for ``length`` radians."""

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length < TWO_PI):
            raise ValueError(f"arc length must lie in (0, 2π), got {self.length!r}")
        object.__setattr__(self, "start", float(self.start) % TWO_PI)
        object.__setattr__(self, "length", float(self.length))

    @classmethod
    def from_interval(cls, lo: float, hi: float) -> "BoundaryArc":
        """Arc running counterclockwise from boundary point lo to hi.

        For finite lo < hi this is the real interval [lo, hi]; for lo > hi it
        is the interval through ∞.
        """
        a, b = boundary_angle(lo), boundary_angle(hi)
        return cls(a, (b - a) % TWO_PI)

    @property
    def end(self) -> float:
        return (self.start + self.length) % TWO_PI

    def endpoints(self) -> tuple[float, float]:
        """Boundary points (lo, hi) bounding the arc."""
        return angle_to_boundary(self.start), angle_to_boundary(self.end)

    def offset(self, phi: float) -> float:
        return (phi - self.start) % TWO_PI

    def contains_angle(self, phi: float, tol: float = 0.0) -> bool:
        off = self.offset(phi)
        return off <= self.length + tol or off >= TWO_PI - tol

    def contains(self, xi: float, tol: float = 0.0) -> bool:
        return self.contains_angle(boundary_angle(xi), tol)

    def contains_arc(self, other: "BoundaryArc", tol: float = 0.0) -> bool:
        off = self.offset(other.start)
        if off > TWO_PI - tol:
            off -= TWO_PI
        return off >= -tol and off + other.length <= self.length + tol

    def overlap(self, other: "BoundaryArc"):
        """Angular interval (start, length) shared with other, or None."""
        for first, second in ((self, other), (other, self)):
            off = first.offset(second.start)
            if off <= first.length:
                return (second.start, min(first.length - off, second.length))
        return None

    def midpoint(self) -> float:
        return (self.start + self.length / 2.0) % TWO_PI

    def to_list(self) -> list[float]:
        return [self.start, self.length]
