"""Brute-force orbit enumeration: counting functions, growth rates, Poincaré sums.

Reduced words are grown block by block.  With quasi-additivity constant C
and minimal block displacement d_min, every extension of a prefix u has
d(o, uv·o) ≥ d(o, u·o) + d_min − C, which is what the pruning uses.  The
radius s_max below which the sample set contains every group element (up
to the L, M budget and the pruning) is reported with each enumeration.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import stats

from . import moebius as mb
from .coding import Alphabet, BlockWord
from .errors import BudgetTooSmallWarning, SaturatedWindow, TooFewClasses
from .schottky import HYPERBOLIC, GroupWord, RepPair, SchottkyRep, quasi_additivity_constant

QA_SAMPLES = 2000
QA_MARGIN = 0.1
FIT_WINDOW = (0.5, 0.9)
MIN_WINDOW_COUNT = 10
SATURATION = 0.95
AUTO_SAMPLES = 20000


@dataclass(frozen=True)
class OrbitSample:
    word: GroupWord
    d1: float
    d2: float

    def dab(self, a: float, b: float) -> float:
        return a * self.d1 + b * self.d2


@dataclass(frozen=True)
class EnumerationBudget:
    """Blocks ≤ L, exponents |m| ≤ M, optional sample cap and pruning radius.

    ``radius=None`` picks the largest radius the (L, M) budget certifies;
    ``radius=math.inf`` disables pruning.
    """

    max_blocks: int = 8
    max_power: int = 20
    max_samples: int | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.max_blocks < 1 or self.max_power < 1:
            raise ValueError("L and M must be at least 1")
        if self.max_samples is not None and self.max_samples < 1:
            raise ValueError("max_samples must be positive")


@dataclass
class OrbitEnumeration:
    """Samples in canonical order plus the completeness radius in min(d₁, d₂)."""

    samples: list[OrbitSample]
    radius: float
    complete_radius: float
    truncated: bool = False
    constants: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def s_max(self, a: float, b: float) -> float:
        """Largest s for which {d^{a,b} ≤ s} is fully enumerated."""
        return (a + b) * min(self.radius, self.complete_radius)

    @cached_property
    def _d(self):
        return np.array([s.d1 for s in self.samples]), np.array([s.d2 for s in self.samples])

    def sorted_dab(self, a: float, b: float) -> np.ndarray:
        d1, d2 = self._d
        return np.sort(a * d1 + b * d2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["word", "d1", "d2"])
            for s in self.samples:
                w.writerow([str(s.word), repr(s.d1), repr(s.d2)])


def _normalized_blocks(rep: SchottkyRep, max_power: int):
    out = []
    for g in rep.generators:
        row = {}
        for m in range(1, max_power + 1):
            for sgn in (1, -1):
                h = mb.normalize_at(mb.power(g.matrix, sgn * m).matrix, rep.basepoint)
                row[sgn * m] = tuple(float(x) for x in h.ravel())
        out.append(row)
    return out


def _dist(h) -> float:
    a, b, c, d = h
    return math.acosh(max((a * a + b * b + c * c + d * d) / 2.0, 1.0))


def _mul(x, y):
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _exponent_order(max_power: int) -> list[int]:
    return [s * k for k in range(1, max_power + 1) for s in (1, -1)]


def _rep_constants(rep: SchottkyRep, budget: EnumerationBudget) -> dict:
    C = quasi_additivity_constant(rep, samples=QA_SAMPLES) + QA_MARGIN
    d_min = min(mb.displacement(mb.power(g.matrix, m), rep.basepoint)
                for g in rep.generators for m in (1, -1))
    d_over = min(mb.displacement(mb.power(g.matrix, budget.max_power + 1), rep.basepoint)
                 for g in rep.generators)
    # a block beyond M forces d ≥ d(gᴹ⁺¹o) only when every extra block adds d_min − C > 0;
    # gᴹ⁺¹ itself sits on that bound, so the certified radius stops just short of it
    return {"C": C, "d_min": d_min, "d_exponent": math.nextafter(d_over, 0.0) if d_min > C else 0.0}


def _search(blocks, k, slack, max_blocks, exps, radius, cap):
    out: list[tuple] = [((), 0.0, 0.0)]
    identity = (1.0, 0.0, 0.0, 1.0)
    frontier = math.inf
    truncated = False
    # iterative DFS with an explicit stack keeps deep budgets off the recursion limit
    stack = [((), identity, identity, -1)]
    while stack:
        word, h1, h2, last = stack.pop()
        if len(word) == max_blocks:
            frontier = min(frontier, _dist(h1) + slack[0], _dist(h2) + slack[1])
            continue
        children = []
        for j in range(k):
            if j == last:
                continue
            for m in exps:
                g1 = _mul(h1, blocks[0][j][m])
                g2 = _mul(h2, blocks[1][j][m])
                d1, d2 = _dist(g1), _dist(g2)
                w = word + ((j, m),)
                if min(d1, d2) <= radius:
                    out.append((w, d1, d2))
                if min(d1 + slack[0], d2 + slack[1]) <= radius:
                    children.append((w, g1, g2, j))
        stack.extend(reversed(children))
        if cap is not None and len(out) > 50 * cap:
            truncated = True
            break
    return out, frontier, truncated


def enumerate_orbit(pair: RepPair, budget: EnumerationBudget) -> OrbitEnumeration:
    """All reduced words within the budget whose min(d₁, d₂) ≤ radius.

    Order: block count, then blocks compared by (letter index, |m|, sign).
    The empty word comes first.  The completeness radius is the smaller of
    the exponent-cap bound and the lower bound carried by the unexplored
    extensions of depth-L prefixes.

    With ``radius=None`` the search starts at the a priori block-count bound
    and widens in steps of the block slack while the depth-L frontier stays
    beyond the radius, up to the exponent cap or AUTO_SAMPLES samples.
    """
    labels = pair.labels
    k = len(labels)
    consts = [_rep_constants(rep, budget) for rep in pair.reps()]
    exp_bound = min(c["d_exponent"] for c in consts)
    blocks = [_normalized_blocks(rep, budget.max_power) for rep in pair.reps()]
    exps = _exponent_order(budget.max_power)
    slack = [c["d_min"] - c["C"] for c in consts]
    cap = budget.max_samples
    L = budget.max_blocks

    if budget.radius is not None:
        radius = float(budget.radius)
        out, frontier, truncated = _search(blocks, k, slack, L, exps, radius, cap)
    else:
        # any word with L + 1 blocks has d ≥ (L + 1)·d_min − L·C
        radius = min(exp_bound, max(0.0, min((L + 1) * c["d_min"] - L * c["C"] for c in consts)))
        step = min(slack)
        while True:
            out, frontier, truncated = _search(blocks, k, slack, L, exps, radius, cap)
            if (step <= 0 or truncated or frontier < radius or radius >= exp_bound
                    or len(out) >= AUTO_SAMPLES):
                break
            radius = min(exp_bound, frontier, radius + step)

    out.sort(key=lambda r: (len(r[0]), [(j, abs(m), m < 0) for j, m in r[0]]))
    if cap is not None and len(out) > cap:
        out = out[:cap]
        truncated = True
    complete = max(0.0, min(exp_bound, frontier, radius))
    if truncated:
        complete = min(complete, max(min(d1, d2) for _, d1, d2 in out))
    samples = [OrbitSample(GroupWord(tuple((labels[j], m) for j, m in w)), d1, d2) for w, d1, d2 in out]
    return OrbitEnumeration(samples, radius, complete, truncated,
                            {"rho1": consts[0], "rho2": consts[1], "frontier": frontier})


def counting_function(enum: OrbitEnumeration, a: float, b: float, s: float) -> int:
    """#{γ : d^{a,b}(o, γo) ≤ s} over the enumerated set."""
    vals = enum.sorted_dab(a, b)
    count = int(np.searchsorted(vals, s, side="right"))
    if s > enum.s_max(a, b) or count >= SATURATION * len(vals):
        warnings.warn(BudgetTooSmallWarning(
            f"counting at s = {s:.4g} is beyond the certified radius {enum.s_max(a, b):.4g} "
            f"or saturates the {len(vals)} samples"), stacklevel=2)
    return count


@dataclass(frozen=True)
class DeltaEstimate:
    value: float
    ci: tuple[float, float]
    window: tuple[float, float]
    s_max: float
    n_samples: int

    @property
    def half_width(self) -> float:
        return (self.ci[1] - self.ci[0]) / 2.0


def delta_estimate(pair: RepPair, a: float, b: float, budget: EnumerationBudget | None = None,
                   enum: OrbitEnumeration | None = None, points: int = 64) -> DeltaEstimate:
    """Least-squares slope of log N(s) on s ∈ [0.5, 0.9]·s_max with a 95% interval."""
    if enum is None:
        enum = enumerate_orbit(pair, budget or EnumerationBudget())
    s_max = enum.s_max(a, b)
    lo, hi = FIT_WINDOW[0] * s_max, FIT_WINDOW[1] * s_max
    vals = enum.sorted_dab(a, b)
    if s_max <= 0 or np.searchsorted(vals, lo, side="right") < MIN_WINDOW_COUNT:
        raise SaturatedWindow(f"fit window [{lo:.3g}, {hi:.3g}] holds too few samples")
    if np.searchsorted(vals, hi, side="right") >= SATURATION * len(vals) and enum.radius > enum.complete_radius:
        raise SaturatedWindow("counting function saturates inside the fit window")
    s = np.linspace(lo, hi, points)
    n = np.searchsorted(vals, s, side="right")
    fit = stats.linregress(s, np.log(n))
    half = stats.t.ppf(0.975, points - 2) * fit.stderr
    return DeltaEstimate(float(fit.slope), (float(fit.slope - half), float(fit.slope + half)),
                         (float(lo), float(hi)), float(s_max), len(vals))


@dataclass(frozen=True)
class PoincarePartial:
    """Partial sums cumulative by block count and by shells of d^{a,b} of width a + b.

    ``growing`` flags divergence-like behaviour: over the upper half of the
    certified radius the shell increments do not decay (log-linear fit slope
    at least zero).  Shell increments scale like exp((δ − s)·r), so the flag
    switches off near the critical exponent.
    """

    value: float
    by_blocks: tuple[float, ...]
    by_radius: tuple[float, ...]
    growing: bool

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.by_blocks)


def _partial(enum: OrbitEnumeration, a: float, b: float, weights: np.ndarray) -> PoincarePartial:
    d1, d2 = enum._d
    lens = np.array([len(s.word) for s in enum.samples])
    by = tuple(float(np.sum(weights[lens <= L])) for L in range(int(lens.max()) + 1))
    # shells of width a + b keep the diagnostic invariant under (a, b) → λ(a, b)
    width = a + b
    dab = (a * d1 + b * d2) / width
    top = int(math.floor(enum.s_max(a, b) / width))
    by_r = tuple(float(np.sum(weights[dab <= r])) for r in range(top + 1))
    inc = np.diff(by_r)
    r = np.arange(1, len(inc) + 1)
    keep = (r >= FIT_WINDOW[0] * top) & (inc > 0)
    growing = False
    if keep.sum() >= 3:
        growing = bool(stats.linregress(r[keep], np.log(inc[keep])).slope >= 0)
    return PoincarePartial(by[-1], by, by_r, growing)


def poincare_partial(pair: RepPair, a: float, b: float, s_exponent: float,
                     budget: EnumerationBudget | None = None, enum: OrbitEnumeration | None = None):
    """Partial sums of Σ exp(−s·d^{a,b}(o, γo)) over the enumerated words."""
    enum = enum or enumerate_orbit(pair, budget or EnumerationBudget())
    d1, d2 = enum._d
    return _partial(enum, a, b, np.exp(-s_exponent * (a * d1 + b * d2)))


def pps_partial(pair: RepPair, a: float, b: float, s_exponent: float,
                budget: EnumerationBudget | None = None, enum: OrbitEnumeration | None = None):
    """Partial sums of Σ exp(−d^{a,b} − s·d₁)."""
    enum = enum or enumerate_orbit(pair, budget or EnumerationBudget())
    d1, d2 = enum._d
    return _partial(enum, a, b, np.exp(-(a * d1 + b * d2) - s_exponent * d1))


def divergence_onset(pair: RepPair, a: float, b: float, budget: EnumerationBudget | None = None,
                     enum: OrbitEnumeration | None = None, tol: float = 1e-3) -> float:
    """Smallest exponent s at which poincare_partial stops looking divergent."""
    enum = enum or enumerate_orbit(pair, budget or EnumerationBudget())
    lo, hi = 0.0, 1.0 / (a + b)
    while poincare_partial(pair, a, b, hi, enum=enum).growing:
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if poincare_partial(pair, a, b, mid, enum=enum).growing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- closed geodesics -------------------------------------------------------

def _arc_samples(rep: SchottkyRep, key, samples: int) -> np.ndarray:
    arc = rep.arcs[key]
    u = np.mod(arc.start + np.linspace(0.0, arc.length, samples) - 1.5 * math.pi, 2.0 * math.pi) / 2.0
    u = np.where(u > math.pi / 2.0, u - math.pi, u)
    return np.tan(np.clip(u, -math.pi / 2.0 + 1e-15, math.pi / 2.0 - 1e-15))


def _arc_floor(rep: SchottkyRep, j: int, m: int, key, samples: int = 257) -> float:
    """Lower bound of τ at block (j, m) when the next point lies in the arc ``key``.

    The potential is minimized over a fine sample of the arc and the largest
    step between neighbouring samples is subtracted as slack.
    """
    gen = rep.generators[j]
    xi = _arc_samples(rep, key, samples)
    if gen.kind == HYPERBOLIC:
        vals = mb.power_busemann_shift_array(xi, gen.matrix, -m, rep.basepoint)
    else:
        inv = mb.normalize_at(mb.power(gen.matrix, -m).matrix, rep.basepoint)
        vals = mb.busemann_shift_array(mb.boundary_to_chart(xi, rep.basepoint), inv[None])
    slack = float(np.max(np.abs(np.diff(vals))))
    return float(np.min(vals)) - slack


def _next_arc(alpha: Alphabet, sym) -> tuple[str, int]:
    j, m = sym
    return (alpha.labels[j], 0 if alpha.kinds[j] != HYPERBOLIC else (1 if m > 0 else -1))


def _potential_floor(rep: SchottkyRep, j: int, m: int, samples: int = 257) -> float:
    """Lower bound of τ at block (j, m) over all admissible next points."""
    label = rep.generators[j].label
    return min(_arc_floor(rep, j, m, key, samples) for key in rep.arcs if key[0] != label)


@dataclass(frozen=True)
class ClosedGeodesic:
    word: BlockWord
    l1: float
    l2: float
    primitive: bool


def _trace_length(blocks, word) -> float:
    h = blocks[word[0]]
    for sym in word[1:]:
        h = _mul(h, blocks[sym])
    tr = abs(h[0] + h[3])
    return 2.0 * math.acosh(tr / 2.0) if tr > 2.0 else 0.0


def _raw_blocks(rep: SchottkyRep, max_power: int) -> dict:
    out = {}
    for j, g in enumerate(rep.generators):
        for m in _exponent_order(max_power):
            out[(j, m)] = tuple(float(x) for x in np.asarray(mb.power(g.matrix, m).matrix).ravel())
    return out


def closed_geodesics(pair: RepPair, a: float, b: float, s: float, max_period: int = 12,
                     max_power: int | None = None) -> list[ClosedGeodesic]:
    """Conjugacy classes (one rotation each) with a·l₁ + b·l₂ ≤ s and period ≤ max_period.

    Each block contributes at least its potential floor given the arc holding
    the attracting point of the rest of the word, which is the arc of the
    next block.  Pruning on the sum of these floors keeps the search complete
    for the stated period and exponent limits.
    """
    alpha = Alphabet.from_pair(pair)
    k = len(alpha)
    keys = sorted({_next_arc(alpha, (j, sg)) for j in range(k) for sg in (1, -1)})

    def cond(j, m):
        row = {}
        for key in keys:
            if key[0] != alpha.labels[j]:
                row[key] = (a * _arc_floor(pair.rho1, j, m, key) if a else 0.0) \
                    + (b * _arc_floor(pair.rho2, j, m, key) if b else 0.0)
        return row

    if max_power is None:
        max_power = 1
        while True:
            f = min(min(cond(j, sg * (max_power + 1)).values()) for j in range(k) for sg in (1, -1))
            if f > s or max_power >= 4096:
                break
            max_power *= 2
    table = {(j, m): cond(j, m) for j in range(k) for m in _exponent_order(max_power)}
    floors = {sym: min(row.values()) for sym, row in table.items()}
    global_floor = min(floors.values())
    if global_floor <= 0:
        raise ValueError("block potential floors are not positive; cannot bound the search")
    symbols = sorted(floors, key=lambda sym: floors[sym])
    arc_of = {sym: _next_arc(alpha, sym) for sym in symbols}
    max_period = min(max_period, int(s // global_floor))
    raw1 = _raw_blocks(pair.rho1, max_power)
    raw2 = _raw_blocks(pair.rho2, max_power)
    out = []

    def accept(word):
        l1 = _trace_length(raw1, word)
        l2 = _trace_length(raw2, word)
        if a * l1 + b * l2 <= s:
            w = BlockWord(tuple(word))
            if w.canonical_rotation().blocks == w.blocks:
                out.append(ClosedGeodesic(w, l1, l2, w.is_primitive))

    # done: conditioned floors of word[:-1]; the last block is bounded by its plain floor
    def rec(word, done):
        n = len(word)
        last = word[-1]
        if n == 1:
            if alpha.kinds[last[0]] == HYPERBOLIC:
                accept(word)
        elif last[0] != word[0][0] and done + table[last][arc_of[word[0]]] <= s:
            accept(word)
        if n == max_period:
            return
        head = word[0]
        for sym in symbols:
            if done + floors[last] + floors[sym] > s:
                break
            if sym[0] == last[0] or sym < head:
                continue
            nd = done + table[last][arc_of[sym]]
            if nd + floors[sym] <= s:
                rec(word + [sym], nd)

    for sym in symbols:
        if floors[sym] > s:
            break
        rec([sym], 0.0)
    out.sort(key=lambda g: (a * g.l1 + b * g.l2, g.word.blocks))
    return out


def thurston_ratio(pair: RepPair, T: float, include_powers: bool = False, max_period: int = 12,
                   min_classes: int = 50) -> tuple[float, int]:
    """Σ l₂ / Σ l₁ over classes with l₁ ≤ T (primitive ones unless include_powers)."""
    geos = closed_geodesics(pair, 1.0, 0.0, T, max_period)
    if not include_powers:
        geos = [g for g in geos if g.primitive]
    if len(geos) < min_classes:
        raise TooFewClasses(f"{len(geos)} classes with l1 <= {T}, need {min_classes}")
    l1 = math.fsum(g.l1 for g in geos)
    l2 = math.fsum(g.l2 for g in geos)
    return l2 / l1, len(geos)


def geodesic_growth(pair: RepPair, a: float, b: float, s: float, max_period: int = 12) -> DeltaEstimate:
    """Slope of log(x·N(x)), N(x) = #{primitive classes : a·l₁ + b·l₂ ≤ x}, on [0.5, 0.9]·s.

    The factor x removes the 1/x of the prime geodesic asymptotic.
    """
    geos = [g for g in closed_geodesics(pair, a, b, s, max_period) if g.primitive]
    vals = np.sort([a * g.l1 + b * g.l2 for g in geos])
    lo, hi = FIT_WINDOW[0] * s, FIT_WINDOW[1] * s
    x = np.linspace(lo, hi, 64)
    n = np.searchsorted(vals, x, side="right")
    if n[0] < MIN_WINDOW_COUNT:
        raise SaturatedWindow("too few closed geodesics in the fit window")
    fit = stats.linregress(x, np.log(x * n))
    half = stats.t.ppf(0.975, len(x) - 2) * fit.stderr
    return DeltaEstimate(float(fit.slope), (float(fit.slope - half), float(fit.slope + half)),
                         (float(lo), float(hi)), float(s), len(vals))


# -- super-multiplicativity -------------------------------------------------

@dataclass(frozen=True)
class SupermultiplicativityReport:
    C: float
    N: int
    constants_by_N: dict
    tested_pairs: int
    violations: list
    empty_shells: list
    quasi_additivity: float

    def to_dict(self):
        return {"C": self.C, "N": self.N, "constants_by_N": self.constants_by_N,
                "tested_pairs": self.tested_pairs, "violations": self.violations,
                "empty_shells": self.empty_shells, "quasi_additivity": self.quasi_additivity}


def shell_sums(enum: OrbitEnumeration, a: float, b: float) -> np.ndarray:
    """b_n = Σ e^{−d^{a,b}} over n−1 < d₁ ≤ n, for the complete shells n ≥ 1."""
    d1, d2 = enum._d
    top = int(math.floor(min(enum.radius, enum.complete_radius)))
    shells = np.zeros(top + 1)
    w = np.exp(-(a * d1 + b * d2))
    idx = np.ceil(d1).astype(int)
    ok = (idx >= 1) & (idx <= top)
    np.add.at(shells, idx[ok], w[ok])
    return shells


def supermultiplicativity_check(pair: RepPair, a: float, b: float, budget: EnumerationBudget | None = None,
                                enum: OrbitEnumeration | None = None, max_N: int = 4) -> SupermultiplicativityReport:
    """Fit the smallest (C, N) with b_n b_m ≤ C Σ_{|i|≤N} b_{n+m+i}.

    C is fitted on pairs with n + m + N below the top shell and tested on the
    pairs reaching it.  N is the smallest value whose C is within a factor 2
    of the best C over N ≤ max_N.
    """
    enum = enum or enumerate_orbit(pair, budget or EnumerationBudget())
    shells = shell_sums(enum, a, b)
    top = len(shells) - 1
    empty = [n for n in range(1, top + 1) if shells[n] == 0.0]

    def ratios(N):
        fit, held = [], []
        for n in range(1, top + 1):
            for m in range(n, top + 1):
                if n + m + N > top or shells[n] == 0 or shells[m] == 0:
                    continue
                window = shells[max(1, n + m - N): n + m + N + 1].sum()
                r = shells[n] * shells[m] / window if window > 0 else math.inf
                (held if n + m + N == top else fit).append(((n, m), r))
        return fit, held

    consts = {}
    for N in range(max_N + 1):
        fit, _ = ratios(N)
        if fit:
            consts[N] = max(r for _, r in fit)
    if not consts:
        return SupermultiplicativityReport(math.nan, 0, {}, 0, [], empty,
                                           enum.constants["rho1"]["C"])
    best = min(consts.values())
    N = min(n for n, c in consts.items() if c <= 2 * best)
    C = consts[N]
    fit, held = ratios(N)
    violations = [pair_nm for pair_nm, r in held if r > C]
    return SupermultiplicativityReport(C, N, consts, len(fit) + len(held), violations, empty,
                                       enum.constants["rho1"]["C"])
