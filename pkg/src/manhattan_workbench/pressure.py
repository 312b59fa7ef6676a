"""Gurevich pressure of −t(aτ + bκ) from anchored periodic partition sums.

Two ways to form Z_n are provided:

exact
    Enumerate every anchored cyclically admissible word with |m| ≤ M and
    sum exp(−t(a·l₁ + b·l₂)) over exact translation lengths.  Feasible for
    n ≤ 4 and M ≤ 20.
accelerated
    A transfer matrix over consecutive block pairs (s, s′).  The edge
    (s, s′) → (s′, s″) carries the exact Busemann potential of block s
    evaluated at the attracting fixed point of s′s″s (of s′s″ when s″ and s
    share a letter).  Periodic words of length ≤ 3 are reproduced exactly;
    longer words are approximated junction by junction.  Exponents beyond M
    are folded into the edges leaving the outermost symbols.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from . import moebius as mb
from .coding import Alphabet, TruncationParams, _letter_cycles, enumerate_periodic
from .errors import ConfigError, DivergentTail, StepTooLarge, TruncationInsufficient
from .schottky import HYPERBOLIC, PARABOLIC, RepPair, SchottkyRep

INFINITE = math.inf
EXACT = "exact"
ACCELERATED = "accelerated"

EXACT_MAX_PERIOD = 4
EXACT_MAX_POWER = 20
TAIL_FACTOR_PARABOLIC = 8
TAIL_MIN_PARABOLIC = 64
TAIL_FACTOR_HYPERBOLIC = 2
INSUFFICIENT_FRACTION = 0.1


@dataclass(frozen=True)
class WeightedPotentialQuery:
    """Weights (a, b) and inverse temperature t of the potential −t(aτ + bκ)."""

    a: float
    b: float
    t: float

    def __post_init__(self):
        a, b, t = float(self.a), float(self.b), float(self.t)
        if not all(math.isfinite(v) for v in (a, b, t)):
            raise ConfigError("a, b, t must be finite")
        if a < 0 or b < 0 or a + b <= 0:
            raise ConfigError(f"weights must be nonnegative and not both zero, got ({a}, {b})")
        if t <= 0:
            raise ConfigError(f"t must be positive, got {t}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "t", t)

    @property
    def weight_sum(self) -> float:
        return self.a + self.b

    @property
    def threshold(self) -> float:
        """Phase-transition point 1/(2(a+b))."""
        return 1.0 / (2.0 * (self.a + self.b))

    def with_t(self, t: float) -> "WeightedPotentialQuery":
        return WeightedPotentialQuery(self.a, self.b, t)

    def swapped(self) -> "WeightedPotentialQuery":
        return WeightedPotentialQuery(self.b, self.a, self.t)

    @property
    def coefficients(self) -> tuple[float, float]:
        """(t·a, t·b): the only combination the weights depend on."""
        return self.t * self.a, self.t * self.b


@dataclass(frozen=True)
class PressureEstimate:
    value: float
    per_n: tuple[tuple[int, float], ...] = ()
    extrapolated: float = INFINITE
    error_bar: float = 0.0
    tail_bound: float = 0.0
    tail_report: dict = field(default_factory=dict)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def total_error(self) -> float:
        return self.error_bar + self.tail_bound

    def to_dict(self) -> dict:
        return {
            "value": "Infinite" if self.is_infinite else self.value,
            "extrapolated": None if math.isinf(self.extrapolated) else self.extrapolated,
            "error_bar": self.error_bar,
            "tail_bound": self.tail_bound,
            "per_n": [list(p) for p in self.per_n],
            "tail_report": self.tail_report,
        }


def has_cusp(pair: RepPair) -> bool:
    return PARABOLIC in pair.kinds


# -- tail model -------------------------------------------------------------

@dataclass(frozen=True)
class TailModel:
    """Brackets 2 log|m| + lo ≤ d(o, pᵐo) ≤ 2 log|m| + hi for |m| ≥ m0.

    ``bounds`` maps (rep index, letter index) to (lo, hi).  The constants
    come from exact distances on |m| ∈ [m0, 4m0]; the limit log‖p − I‖²
    (at the normalized basepoint) is folded into lo, since d − 2 log|m|
    decreases toward it.
    """

    m0: int
    bounds: dict

    @classmethod
    def fit(cls, pair: RepPair, m0: int = 16) -> "TailModel":
        if m0 < 1:
            raise ValueError("m0 must be positive")
        ms = np.arange(m0, 4 * m0 + 1)
        bounds = {}
        for r, rep in enumerate(pair.reps()):
            for j, gen in enumerate(rep.generators):
                if gen.kind != PARABOLIC:
                    continue
                offs = _parabolic_offsets(rep, gen.matrix, np.concatenate([ms, -ms]))
                lo = min(float(offs.min()), _parabolic_limit(rep, gen.matrix))
                bounds[(r, j)] = (lo, float(offs.max()))
        return cls(m0, bounds)

    def spread(self, rep_index: int, letter: int) -> float:
        lo, hi = self.bounds[(rep_index, letter)]
        return hi - lo

    def brackets(self, pair: RepPair, ms) -> bool:
        """True when every fitted bracket holds at the exponents ms (all |m| ≥ m0)."""
        ms = np.asarray(ms)
        if np.any(np.abs(ms) < self.m0):
            raise ValueError("held-out exponents must satisfy |m| >= m0")
        reps = pair.reps()
        for (r, j), (lo, hi) in self.bounds.items():
            offs = _parabolic_offsets(reps[r], reps[r].generators[j].matrix, ms)
            if np.any(offs < lo - 1e-12) or np.any(offs > hi + 1e-12):
                return False
        return True


def _parabolic_offsets(rep: SchottkyRep, p: mb.Isometry, ms) -> np.ndarray:
    # d(o, pᵐo) − 2 log|m|; pᵐ = I + m(p − I) for a unipotent p
    ms = np.asarray(ms, dtype=float)
    h = mb.normalize_at(p.matrix, rep.basepoint)
    sgn = math.copysign(1.0, np.trace(h))
    n = sgn * h - np.eye(2)
    mats = np.eye(2)[None] + ms[:, None, None] * n[None]
    return mb.displacement_array(mats) - 2.0 * np.log(np.abs(ms))


def _parabolic_limit(rep: SchottkyRep, p: mb.Isometry) -> float:
    h = mb.normalize_at(p.matrix, rep.basepoint)
    sgn = math.copysign(1.0, np.trace(h))
    n = sgn * h - np.eye(2)
    return math.log(float(np.sum(n * n)))


def _displacement_powers(rep: SchottkyRep, j: int, ms) -> np.ndarray:
    g = rep.generators[j]
    if g.kind == PARABOLIC:
        ms = np.asarray(ms)
        return _parabolic_offsets(rep, g.matrix, ms) + 2.0 * np.log(np.abs(ms))
    # d(o, gᵐo) = B_ξ(gᵐo, o) maximized, bounded below by |m|·l; the exact value
    # is cheap for moderate m
    return np.array([mb.displacement(mb.power(g.matrix, int(m)), rep.basepoint) for m in ms])


def _check_divergence(pair: RepPair, q: WeightedPotentialQuery) -> None:
    if has_cusp(pair) and q.t * q.weight_sum <= 0.5:
        raise DivergentTail(
            f"t(a+b) = {q.t * q.weight_sum:.6g} <= 1/2: the parabolic tail sum diverges")


# -- exact enumeration ------------------------------------------------------

def _block_stack(rep: SchottkyRep, max_power: int) -> np.ndarray:
    """Raw matrices of every block symbol, letter-major, exponent −M..−1, 1..M."""
    exps = list(range(-max_power, 0)) + list(range(1, max_power + 1))
    return np.array([[mb.power(g.matrix, m).matrix for m in exps] for g in rep.generators])


def _exact_lengths(rep: SchottkyRep, n: int, params: TruncationParams, alpha: Alphabet):
    """Translation lengths of all anchored words of period n, in enumerate order."""
    M = params.max_power
    blocks = _block_stack(rep, M)
    exps = list(range(-M, 0)) + list(range(1, M + 1))
    out = []
    if n == 1:
        return np.array([mb.translation_length(mb.power(rep.generators[w.blocks[0][0]].matrix,
                                                        w.blocks[0][1]))
                         for w in enumerate_periodic(alpha, 1, params)])
    j0, m0 = params.anchor
    first = blocks[j0, exps.index(m0)]
    for path in _letter_cycles(len(alpha), n, j0):
        prod = first[None]
        for j in path[1:]:
            prod = np.einsum("aij,bjk->abik", prod, blocks[j]).reshape(-1, 2, 2)
        out.append(mb.translation_length_array(prod))
    return np.concatenate(out) if out else np.zeros(0)


def exact_log_partition(pair: RepPair, q: WeightedPotentialQuery, n: int,
                        params: TruncationParams) -> float:
    """log Z_n by full enumeration (fallback mode, no tail correction)."""
    if n > EXACT_MAX_PERIOD or params.max_power > EXACT_MAX_POWER:
        raise ConfigError(f"exact mode supports n <= {EXACT_MAX_PERIOD} and M <= {EXACT_MAX_POWER}")
    if params.anchor is None:
        raise ConfigError("exact mode needs an anchor")
    alpha = Alphabet.from_pair(pair)
    l1 = _exact_lengths(pair.rho1, n, params, alpha)
    l2 = _exact_lengths(pair.rho2, n, params, alpha)
    if l1.size == 0:
        return -INFINITE
    ta, tb = q.coefficients
    return float(logsumexp(-(ta * l1 + tb * l2)))


def _slot_tail_fraction(pair: RepPair, q: WeightedPotentialQuery, params: TruncationParams,
                        model: TailModel) -> dict:
    """Per letter: dropped mass of |m| > M over kept mass in one block slot."""
    M = params.max_power
    ta, tb = q.coefficients
    s = q.weight_sum
    ms = np.array(list(range(-M, 0)) + list(range(1, M + 1)))
    out = {}
    for j, kind in enumerate(pair.kinds):
        d1 = _displacement_powers(pair.rho1, j, ms)
        d2 = _displacement_powers(pair.rho2, j, ms)
        kept = math.exp(logsumexp(-(ta * d1 + tb * d2)))
        if kind == PARABOLIC:
            lo1, _ = model.bounds[(0, j)]
            lo2, _ = model.bounds[(1, j)]
            e = 2.0 * q.t * s
            dropped = 2.0 * math.exp(-(ta * lo1 + tb * lo2)) * M ** (1.0 - e) / (e - 1.0)
        else:
            l1 = mb.translation_length(pair.rho1.generators[j].matrix)
            l2 = mb.translation_length(pair.rho2.generators[j].matrix)
            ratio = math.exp(-(ta * l1 + tb * l2))
            dropped = 2.0 * ratio ** (M + 1) / (1.0 - ratio)
        out[pair.labels[j]] = dropped / kept
    return out


# -- junction transfer matrix -----------------------------------------------

def _fingerprint(pair: RepPair) -> tuple:
    return tuple((tuple(tuple(g.matrix.to_list()) for g in rep.generators),
                  rep.basepoint.real, rep.basepoint.imag) for rep in pair.reps()) + (pair.kinds,)


def _source_potential(rep: SchottkyRep, letter: int, m: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """B_η(g⁻¹o, o) for g = (letter)^m, vectorized over edges."""
    gen = rep.generators[letter]
    if gen.kind == HYPERBOLIC:
        return mb.power_busemann_shift_array(eta, gen.matrix, -m, rep.basepoint)
    h = mb.normalize_at(gen.matrix.matrix, rep.basepoint)
    sgn = math.copysign(1.0, np.trace(h))
    n = sgn * h - np.eye(2)
    # (p^m)^{-1} = I − m n for the unipotent normalized p
    inv = np.eye(2)[None] - np.asarray(m, dtype=float)[:, None, None] * n[None]
    return mb.busemann_shift_array(mb.boundary_to_chart(eta, rep.basepoint), inv)


class JunctionModel:
    """Pair-state transfer matrix for one RepPair at truncation M."""

    def __init__(self, pair: RepPair, max_power: int):
        self.pair = pair
        self.max_power = M = int(max_power)
        self.alpha = Alphabet.from_pair(pair)
        self.symbols = self.alpha.symbols(M)
        K = len(self.symbols)
        letters = np.array([j for j, _ in self.symbols])
        exps = np.array([m for _, m in self.symbols])
        self.letters, self.exps = letters, exps

        ok = letters[:, None] != letters[None, :]
        state_id = -np.ones((K, K), dtype=np.int64)
        si, sk = np.nonzero(ok)
        state_id[si, sk] = np.arange(len(si))
        self.state_id = state_id
        self.n_states = len(si)
        self.state_first = si

        # edges (i, k) -> (k, q)
        succ = [np.nonzero(ok[k])[0] for k in range(K)]
        e_state = np.concatenate([np.full(len(succ[k]), u) for u, k in enumerate(sk)])
        e_q = np.concatenate([succ[k] for k in sk])
        e_i, e_k = si[e_state], sk[e_state]
        self.rows = e_state
        self.cols = state_id[e_k, e_q]
        self.edge_src = e_i

        self.tau = []
        self.tail = []
        tail_edge = np.abs(exps[e_i]) == M
        self.tail_edges = np.nonzero(tail_edge)[0]
        for rep in pair.reps():
            raw = np.array([mb.power(rep.generators[j].matrix, int(m)).matrix for j, m in self.symbols])
            eta = self._eta(raw[e_k], raw[e_q], raw[e_i], letters[e_q] != letters[e_i])
            tau = np.empty(len(e_i))
            for j in range(len(pair.kinds)):
                sel = letters[e_i] == j
                tau[sel] = _source_potential(rep, j, exps[e_i][sel], eta[sel])
            self.tau.append(tau)
            self.tail.append(self._tail_table(rep, raw, e_i, e_k, e_q))
        self.lengths = [np.array([mb.translation_length(g.matrix) if g.kind == HYPERBOLIC else 0.0
                                  for g in rep.generators])
                        for rep in pair.reps()]
        self._lock = threading.Lock()

    @staticmethod
    def _eta(gk, gq, gi, wrap):
        prod = np.einsum("eij,ejk->eik", gk, gq)
        prod3 = np.einsum("eij,ejk->eik", prod, gi)
        prod = np.where(wrap[:, None, None], prod3, prod)
        # keep magnitudes moderate; fixed points are scale invariant
        prod /= np.max(np.abs(prod), axis=(1, 2), keepdims=True)
        return mb.attracting_fixed_point_array(prod)

    def _tail_table(self, rep, raw, e_i, e_k, e_q):
        """Exact potentials of the tail exponents M..M₂ on each tail edge, per letter."""
        M = self.max_power
        out = {}
        for j, gen in enumerate(rep.generators):
            sel = self.tail_edges[self.letters[e_i[self.tail_edges]] == j]
            if sel.size == 0:
                continue
            if gen.kind == PARABOLIC:
                M2 = max(TAIL_FACTOR_PARABOLIC * M, TAIL_MIN_PARABOLIC)
            else:
                M2 = TAIL_FACTOR_HYPERBOLIC * M
            steps = np.arange(M, M2 + 1)
            sign = np.sign(self.exps[e_i[sel]])
            ms = sign[:, None] * steps[None, :]
            gk, gq = raw[e_k[sel]], raw[e_q[sel]]
            wrap = self.letters[e_q[sel]] != j
            tau = np.empty(ms.shape)
            powers = {int(m): mb.power(gen.matrix, int(m)).matrix for m in np.unique(ms)}
            for c in range(ms.shape[1]):
                gi = np.array([powers[int(m)] for m in ms[:, c]])
                eta = self._eta(gk, gq, gi, wrap)
                tau[:, c] = _source_potential(rep, j, ms[:, c], eta)
            out[j] = (sel, tau, M2)
        return out

    def edge_log_weights(self, q: WeightedPotentialQuery, tail: bool = True):
        """log edge weights and per-edge relative uncertainty of the tail remainder."""
        ta, tb = q.coefficients
        logw = -(ta * self.tau[0] + tb * self.tau[1])
        unc = np.zeros_like(logw)
        if not tail:
            return logw, unc
        s2 = 2.0 * q.t * q.weight_sum
        model = _tail_model(self.pair)
        for j, kind in enumerate(self.pair.kinds):
            if j not in self.tail[0]:
                continue
            sel, tau1, M2 = self.tail[0][j]
            _, tau2, _ = self.tail[1][j]
            lw = -(ta * tau1 + tb * tau2)
            if kind == PARABOLIC:
                if s2 <= 1.0:
                    raise DivergentTail("parabolic tail diverges for t(a+b) <= 1/2")

                def rem(col, base):
                    return lw[:, col] + s2 * math.log(base) + (1.0 - s2) * math.log(base + 0.5) - math.log(s2 - 1.0)

                r_main = rem(-1, M2)
                alt = np.exp(rem(-2, M2 - 1)) - np.exp(lw[:, -1])
                spread = ta * model.spread(0, j) + tb * model.spread(1, j)
                bracket = np.exp(r_main) * math.expm1(spread)
            else:
                ql = -(ta * self.lengths[0][j] + tb * self.lengths[1][j])
                r_main = lw[:, -1] + ql - math.log1p(-math.exp(ql))
                alt = np.exp(lw[:, -2] + 2 * ql - math.log1p(-math.exp(ql)))
                bracket = 0.0
            total = logsumexp(np.column_stack([lw, r_main]), axis=1)
            logw[sel] = total
            diff = np.abs(np.exp(r_main) - alt)
            unc[sel] = (np.maximum(diff, bracket)) / np.exp(total)
        return logw, unc

    def matrix(self, logw) -> sp.csr_matrix:
        shift = float(np.max(logw))
        w = np.exp(logw - shift)
        return sp.csr_matrix((w, (self.rows, self.cols)), shape=(self.n_states, self.n_states)), shift

    def log_partition(self, q: WeightedPotentialQuery, n_max: int, anchor, tail: bool = True):
        """log Z_n for n = 1..n_max and the per-slot uncertainty of the tail."""
        logw, unc = self.edge_log_weights(q, tail)
        W, shift = self.matrix(logw)
        a_sym = self.symbols.index(tuple(anchor))
        starts = np.nonzero(self.state_first == a_sym)[0]
        out = np.full(n_max, -INFINITE)
        j, m = anchor
        if self.pair.kinds[j] == HYPERBOLIC:
            l1 = mb.translation_length(mb.power(self.pair.rho1.generators[j].matrix, m))
            l2 = mb.translation_length(mb.power(self.pair.rho2.generators[j].matrix, m))
            ta, tb = q.coefficients
            out[0] = -(ta * l1 + tb * l2)
        V = sp.csr_matrix((np.ones(len(starts)), (starts, np.arange(len(starts)))),
                          shape=(self.n_states, len(starts))).toarray()
        log_scale = 0.0
        cols = np.arange(len(starts))
        for n in range(1, n_max + 1):
            V = W @ V
            norm = float(np.max(np.abs(V)))
            if norm == 0.0:
                break
            V /= norm
            log_scale += math.log(norm)
            if n >= 2:
                z = float(np.sum(V[starts, cols]))
                out[n - 1] = math.log(z) + log_scale + n * shift if z > 0 else -INFINITE
        eps = float(np.max(unc)) if unc.size else 0.0
        return out, eps


_MODEL_CACHE: dict = {}
_MODEL_LOCK = threading.Lock()


def junction_model(pair: RepPair, max_power: int) -> JunctionModel:
    key = (_fingerprint(pair), int(max_power))
    with _MODEL_LOCK:
        model = _MODEL_CACHE.get(key)
    if model is None:
        model = JunctionModel(pair, max_power)
        with _MODEL_LOCK:
            if len(_MODEL_CACHE) > 32:
                _MODEL_CACHE.clear()
            _MODEL_CACHE[key] = model
    return model


_TAIL_CACHE: dict = {}


def _tail_model(pair: RepPair) -> TailModel:
    key = _fingerprint(pair)
    model = _TAIL_CACHE.get(key)
    if model is None:
        model = _TAIL_CACHE[key] = TailModel.fit(pair, m0=TAIL_MIN_PARABOLIC)
    return model


# -- public operations ------------------------------------------------------

def partition_sum(pair: RepPair, q: WeightedPotentialQuery, n: int, params: TruncationParams,
                  mode: str = ACCELERATED, tail: bool = True) -> tuple[float, float]:
    """(log Z_n, tail bound on log Z_n).

    ``mode="exact"`` enumerates words and bounds the mass dropped by |m| > M
    through the TailModel; ``mode="accelerated"`` uses the junction model,
    where the dropped mass is folded in and the bound is the remainder's
    uncertainty plus twice the change from truncation ⌈M/2⌉ to M.  ``tail=False`` truncates the accelerator sharply at M
    so it can be compared with exact enumeration.
    """
    if n < 1 or n > params.n_max:
        raise ConfigError(f"period {n} outside 1..{params.n_max}")
    if params.anchor is None:
        raise ConfigError("partition sums need an anchor")
    if mode == EXACT:
        if has_cusp(pair):
            _check_divergence(pair, q)
        logz = exact_log_partition(pair, q, n, params)
        if n == 1:
            return logz, 0.0
        frac = _slot_tail_fraction(pair, q, params, _tail_model(pair))
        return logz, (n - 1) * math.log1p(max(frac.values()))
    if mode != ACCELERATED:
        raise ConfigError(f"unknown mode {mode!r}")
    if tail and has_cusp(pair):
        _check_divergence(pair, q)
    model = junction_model(pair, params.max_power)
    logz, eps = model.log_partition(q, n, params.anchor, tail)
    value, bound = float(logz[n - 1]), n * eps
    half = max(1, math.ceil(params.max_power / 2))
    if tail and half < params.max_power and abs(params.anchor[1]) <= half:
        # the junction context of folded blocks moves with M; measure it
        coarse, _ = junction_model(pair, half).log_partition(q, n, params.anchor, tail)
        bound += 2.0 * abs(value - float(coarse[n - 1]))
    return value, bound


def _increments(logz: np.ndarray, period: int) -> np.ndarray:
    n = len(logz)
    idx = np.arange(1, n - period)  # skip n = 1
    return (logz[idx + period] - logz[idx]) / period


def _period(pair: RepPair) -> int:
    return 2 if len(pair.kinds) == 2 else 1


def _finite_estimate(pair: RepPair, q: WeightedPotentialQuery, params: TruncationParams, tail: bool):
    model = junction_model(pair, params.max_power)
    logz, eps = model.log_partition(q, params.n_max, params.anchor, tail)
    inc = _increments(logz, _period(pair))
    last = inc[-3:]
    return logz, eps, float(np.mean(last)), float(np.max(last) - np.min(last))


def pressure_estimate(pair: RepPair, q: WeightedPotentialQuery, params: TruncationParams | None = None,
                      tail: bool = True) -> PressureEstimate:
    """Extrapolated Gurevich pressure with error bar and tail bound.

    Returns value = INFINITE exactly when a cusp is present and
    t ≤ 1/(2(a+b)).  The tail bound is twice the change from M/2 to M plus
    the remainder's uncertainty per slot.
    """
    params = params or TruncationParams()
    if params.anchor is None:
        raise ConfigError("pressure needs an anchor")
    if has_cusp(pair) and q.t <= q.threshold:
        return PressureEstimate(value=INFINITE)
    logz, eps, value, spread = _finite_estimate(pair, q, params, tail)
    if params.n_max * eps > INSUFFICIENT_FRACTION:
        raise TruncationInsufficient(
            f"tail uncertainty {params.n_max * eps:.3g} of log Z_n at n = {params.n_max} exceeds "
            f"{INSUFFICIENT_FRACTION:.0%}; raise max_power")
    half = max(1, math.ceil(params.max_power / 2))
    tail_bound = eps
    report = {}
    if half < params.max_power and abs(params.anchor[1]) <= half:
        coarse = TruncationParams(params.n_max, half, params.anchor)
        _, eps_c, value_c, _ = _finite_estimate(pair, q, coarse, tail)
        tail_bound += 2.0 * abs(value - value_c)
        report["coarse_change"] = abs(value - value_c)
    report["remainder_uncertainty"] = eps
    if has_cusp(pair) and tail:
        report["letters"] = {
            label: {"remainder_exponent": 2.0 * q.t * q.weight_sum,
                    "tailmodel_spread": [_tail_model(pair).spread(r, j) for r in (0, 1)]}
            for j, label in enumerate(pair.labels) if pair.kinds[j] == PARABOLIC}
    per_n = tuple((n + 1, float(v)) for n, v in enumerate(logz) if math.isfinite(v))
    return PressureEstimate(value=value, per_n=per_n, extrapolated=value, error_bar=spread,
                            tail_bound=tail_bound, tail_report=report)


def pressure_derivative_t(pair: RepPair, q: WeightedPotentialQuery, params: TruncationParams | None = None,
                          h_step: float = 1e-3) -> float:
    """Central difference ∂ₜP at q.t."""
    if h_step <= 0:
        raise ValueError("h_step must be positive")
    if has_cusp(pair) and q.t - h_step <= q.threshold:
        raise StepTooLarge(
            f"t − h = {q.t - h_step:.6g} reaches the phase boundary {q.threshold:.6g}")
    if q.t - h_step <= 0:
        raise StepTooLarge("t − h must stay positive")
    hi = pressure_estimate(pair, q.with_t(q.t + h_step), params)
    lo = pressure_estimate(pair, q.with_t(q.t - h_step), params)
    return (hi.value - lo.value) / (2.0 * h_step)
