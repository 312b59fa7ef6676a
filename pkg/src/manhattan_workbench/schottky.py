"""Extended Schottky representations: generators, ping-pong arcs, words and pairs."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from . import moebius as mb
from .errors import ArcConstructionFailed, ConfigError, UnknownLabel
from .moebius import BoundaryArc, Isometry, IsometryClass

HYPERBOLIC = "hyperbolic"
PARABOLIC = "parabolic"
KINDS = (HYPERBOLIC, PARABOLIC)

ARC_TOL = 1e-9


@dataclass(frozen=True)
class GeneratorSpec:
    label: str
    kind: str
    matrix: Isometry

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"generator {self.label!r}: unknown kind {self.kind!r}")
        if not isinstance(self.matrix, Isometry):
            object.__setattr__(self, "matrix", Isometry.from_matrix(self.matrix))
        if self.matrix.is_identity():
            raise ConfigError(f"generator {self.label!r} is the identity")
        cls = mb.classify(self.matrix)
        expected = IsometryClass.HYPERBOLIC if self.kind == HYPERBOLIC else IsometryClass.PARABOLIC
        if cls is not expected:
            raise ConfigError(
                f"generator {self.label!r} tagged {self.kind} but trace {self.matrix.trace:.12g} "
                f"classifies as {cls.value}")


def arc_keys(generators: Iterable[GeneratorSpec]) -> list[tuple[str, int]]:
    """Symbols of A^±: (label, +1), (label, -1) for hyperbolic letters, (label, 0) for parabolic."""
    keys = []
    for g in generators:
        keys.extend([(g.label, 1), (g.label, -1)] if g.kind == HYPERBOLIC else [(g.label, 0)])
    return keys


def arc_key_name(key: tuple[str, int]) -> str:
    label, sign = key
    return f"{label}^-1" if sign < 0 else label


def parse_arc_key(name: str, generators) -> tuple[str, int]:
    kinds = {g.label: g.kind for g in generators}
    label, inv = (name[:-3], True) if name.endswith("^-1") else (name, False)
    if label not in kinds:
        raise UnknownLabel(f"arc for unknown label {label!r}")
    if kinds[label] == PARABOLIC:
        if inv:
            raise ConfigError(f"parabolic letter {label!r} takes a single arc")
        return (label, 0)
    return (label, -1 if inv else 1)


@dataclass(frozen=True)
class SchottkyRep:
    """One representation: typed generators, optional arcs, basepoint."""

    generators: tuple[GeneratorSpec, ...]
    arcs: Mapping[tuple[str, int], BoundaryArc] | None = None
    basepoint: complex = 1j

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        labels = [g.label for g in gens]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate generator labels in {labels}")
        kinds = [g.kind for g in gens]
        if PARABOLIC in kinds and HYPERBOLIC in kinds[kinds.index(PARABOLIC):]:
            raise ConfigError("hyperbolic generators must precede parabolic ones")
        if len(gens) < 2:
            raise ConfigError("a Schottky representation needs at least two generators")
        object.__setattr__(self, "basepoint", mb.check_point(self.basepoint))
        if self.arcs is not None:
            arcs = dict(self.arcs)
            missing = set(arc_keys(gens)) - set(arcs)
            extra = set(arcs) - set(arc_keys(gens))
            if missing or extra:
                raise ConfigError(f"arc symbols mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
            object.__setattr__(self, "arcs", arcs)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.generators)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(g.kind for g in self.generators)

    @property
    def n_hyperbolic(self) -> int:
        return sum(k == HYPERBOLIC for k in self.kinds)

    @property
    def n_parabolic(self) -> int:
        return sum(k == PARABOLIC for k in self.kinds)

    @property
    def is_extended(self) -> bool:
        """Extended Schottky status: at least one cusp and at least three generators."""
        return self.n_parabolic >= 1 and len(self.generators) >= 3

    def generator(self, label: str) -> GeneratorSpec:
        for g in self.generators:
            if g.label == label:
                return g
        raise UnknownLabel(label)

    def matrices(self) -> np.ndarray:
        return np.array([g.matrix.matrix for g in self.generators])


@dataclass(frozen=True)
class RepPair:
    """Two representations of the same abstract free group."""

    rho1: SchottkyRep
    rho2: SchottkyRep

    def __post_init__(self):
        if self.rho1.labels != self.rho2.labels or self.rho1.kinds != self.rho2.kinds:
            raise ConfigError("paired representations must share labels and kinds in the same order")

    @property
    def labels(self):
        return self.rho1.labels

    @property
    def kinds(self):
        return self.rho1.kinds

    def swapped(self) -> "RepPair":
        return RepPair(self.rho2, self.rho1)

    def reps(self) -> tuple[SchottkyRep, SchottkyRep]:
        return (self.rho1, self.rho2)


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word: blocks (label, exponent) with adjacent labels distinct."""

    blocks: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        blocks = tuple((str(l), int(m)) for l, m in self.blocks)
        for i, (l, m) in enumerate(blocks):
            if m == 0:
                raise ValueError(f"zero exponent at block {i}")
            if i and blocks[i - 1][0] == l:
                raise ValueError(f"adjacent blocks {i - 1}, {i} share label {l!r}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def reduce(cls, blocks) -> "GroupWord":
        """Free reduction: merge equal neighbours and drop cancelled blocks."""
        out: list[list] = []
        for l, m in blocks:
            if m == 0:
                continue
            if out and out[-1][0] == l:
                out[-1][1] += m
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([l, m])
        return cls(tuple((l, m) for l, m in out))

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((l, -m) for l, m in reversed(self.blocks)))

    def __len__(self):
        return len(self.blocks)

    def __str__(self):
        return "".join(f"({l},{m})" for l, m in self.blocks) or "e"


def evaluate(rep: SchottkyRep, w: GroupWord | Iterable) -> Isometry:
    """Product of generator powers in word order; the empty word gives I."""
    blocks = w.blocks if isinstance(w, GroupWord) else tuple(w)
    mats = {g.label: g.matrix for g in rep.generators}
    result = mb.IDENTITY
    for label, m in blocks:
        if label not in mats:
            raise UnknownLabel(label)
        result = mb.compose(result, mb.power(mats[label], m))
    return result


# -- arcs ---------------------------------------------------------------------

def _circle_arc(center: float, radius: float) -> BoundaryArc:
    return BoundaryArc.from_interval(center - radius, center + radius)


_QUARTER = Isometry(math.sqrt(0.5), math.sqrt(0.5), -math.sqrt(0.5), math.sqrt(0.5))


def _map_arc(g: Isometry, arc: BoundaryArc) -> BoundaryArc:
    lo, hi = arc.endpoints()
    a = mb.boundary_angle(mb.act_boundary(g, lo))
    b = mb.boundary_angle(mb.act_boundary(g, hi))
    length = (b - a) % mb.TWO_PI
    if length == 0.0:
        length = arc.length
    return BoundaryArc(a, length)


def _isometric_arcs(g: Isometry) -> tuple[BoundaryArc, BoundaryArc]:
    """Boundary traces of the isometric circles of g and g⁻¹ (in that order)."""
    a, b, c, d = g.m11, g.m12, g.m21, g.m22
    if abs(c) < 1e-12 * max(abs(a), abs(d), 1.0):
        # fixes ∞: work in a chart rotated a quarter turn about i
        h = mb.compose(mb.compose(_QUARTER, g), mb.inverse(_QUARTER))
        back = mb.inverse(_QUARTER)
        arc_g, arc_ginv = _isometric_arcs(h)
        return _map_arc(back, arc_g), _map_arc(back, arc_ginv)
    r = 1.0 / abs(c)
    return _circle_arc(-d / c, r), _circle_arc(a / c, r)


def auto_arcs(rep: SchottkyRep) -> SchottkyRep:
    """Attach arcs from isometric circles (no inflation margin).

    For a hyperbolic h, C_{h⁻¹} is the trace of the isometric circle of h and
    C_h that of h⁻¹.  A parabolic letter gets the single arc covering both of
    its (tangent) isometric circles.
    """
    arcs: dict[tuple[str, int], BoundaryArc] = {}
    for g in rep.generators:
        arc_g, arc_ginv = _isometric_arcs(g.matrix)
        if g.kind == HYPERBOLIC:
            arcs[(g.label, 1)] = arc_ginv
            arcs[(g.label, -1)] = arc_g
        else:
            # the two isometric circles are tangent at the fixed point; join them
            gap1 = arc_g.offset(arc_ginv.start) - arc_g.length
            gap2 = arc_ginv.offset(arc_g.start) - arc_ginv.length
            first = arc_g if abs(gap1) <= abs(gap2) else arc_ginv
            arcs[(g.label, 0)] = BoundaryArc(first.start, arc_g.length + arc_ginv.length)
    out = replace(rep, arcs=arcs)
    overlaps = _overlaps(out, same_letter=False)
    if overlaps:
        (k1, k2, iv) = overlaps[0]
        raise ArcConstructionFailed(
            f"isometric circles of {arc_key_name(k1)} and {arc_key_name(k2)} overlap on the boundary "
            f"(angles {iv[0]:.6f} + {iv[1]:.3e})")
    return out


def _overlaps(rep: SchottkyRep, same_letter: bool = True, tol: float = ARC_TOL):
    keys = list(rep.arcs)
    out = []
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            if not same_letter and keys[i][0] == keys[j][0]:
                continue
            iv = rep.arcs[keys[i]].overlap(rep.arcs[keys[j]])
            if iv is not None and iv[1] > tol:
                out.append((keys[i], keys[j], iv))
    return out


# -- conditions ---------------------------------------------------------------

@dataclass
class ConditionEntry:
    condition: str
    subject: str
    passed: bool
    status: str
    witness: dict = field(default_factory=dict)

    def to_dict(self):
        return {"condition": self.condition, "subject": self.subject, "passed": self.passed,
                "status": self.status, "witness": self.witness}


@dataclass
class ConditionReport:
    entries: list[ConditionEntry]
    extended: bool
    n_generators: int

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def by_condition(self, name: str) -> list[ConditionEntry]:
        return [e for e in self.entries if e.condition == name]

    def to_dict(self):
        return {"passed": self.passed, "extended_schottky": self.extended,
                "n_generators": self.n_generators, "entries": [e.to_dict() for e in self.entries]}

    def summary(self) -> str:
        lines = [f"extended Schottky: {self.extended} ({self.n_generators} generators)"]
        for e in self.entries:
            lines.append(f"  {e.condition:4s} {e.subject:10s} {'pass' if e.passed else 'FAIL'}  {e.status}")
        lines.append("all conditions pass" if self.passed else "condition failure")
        return "\n".join(lines)


def _complement(arc: BoundaryArc) -> BoundaryArc:
    return BoundaryArc(arc.end, mb.TWO_PI - arc.length)


def _image_check(g: Isometry, source: BoundaryArc, target: BoundaryArc):
    """Check g(source) ⊂ target, returning (ok, witness)."""
    img = _map_arc(g, source)
    if target.contains_arc(img, tol=ARC_TOL):
        return True, {}
    lo, hi = source.endpoints()
    wit = {}
    for name, x in (("start", lo), ("end", hi)):
        y = mb.act_boundary(g, x)
        if not target.contains(y, tol=ARC_TOL):
            wit = {"endpoint": name, "point": _json_boundary(x), "image": _json_boundary(y),
                   "image_angle": mb.boundary_angle(y)}
            break
    if not wit:
        wit = {"image_arc": img.to_list(), "target_arc": target.to_list()}
    return False, wit


def _json_boundary(x: float):
    return "inf" if math.isinf(x) else x


def _angle_to(arc_point: float, phi: float) -> float:
    d = abs(arc_point - phi) % mb.TWO_PI
    return min(d, mb.TWO_PI - d)


def verify_conditions(rep: SchottkyRep, power_check: int = 50) -> ConditionReport:
    """Check (C1)-(C3) for the arcs attached to rep.

    (C2) is checked exactly for |n| ≤ power_check; beyond that the report says
    "certified-by-monotonicity" when the complement endpoints' images under
    p^{±k} approach the fixed point monotonically and stay inside C_p.
    """
    if rep.arcs is None:
        rep = auto_arcs(rep)
    entries: list[ConditionEntry] = []
    for g in rep.generators:
        if g.kind != HYPERBOLIC:
            continue
        src = _complement(rep.arcs[(g.label, -1)])
        ok, wit = _image_check(g.matrix, src, rep.arcs[(g.label, 1)])
        entries.append(ConditionEntry("C1", g.label, ok, "exact arc image" if ok else "image escapes C_h", wit))
    for g in rep.generators:
        if g.kind != PARABOLIC:
            continue
        entries.append(_check_c2(g, rep.arcs[(g.label, 0)], power_check))
    overlaps = _overlaps(rep)
    if overlaps:
        for k1, k2, iv in overlaps:
            entries.append(ConditionEntry("C3", f"{arc_key_name(k1)}/{arc_key_name(k2)}", False, "arcs overlap",
                                          {"overlap_start": iv[0], "overlap_length": iv[1]}))
    else:
        entries.append(ConditionEntry("C3", "all", True, "pairwise disjoint"))
    return ConditionReport(entries, rep.is_extended, len(rep.generators))


def _check_c2(g: GeneratorSpec, arc: BoundaryArc, power_check: int) -> ConditionEntry:
    src = _complement(arc)
    fixed = mb.boundary_angle(mb.fixed_points(g.matrix)[0])
    if not arc.contains_angle(fixed):
        return ConditionEntry("C2", g.label, False, "fixed point outside C_p", {"fixed_angle": fixed})
    lo, hi = src.endpoints()
    for sign in (1, -1):
        prev = [math.inf, math.inf]
        pk = mb.IDENTITY
        step = g.matrix if sign > 0 else mb.inverse(g.matrix)
        for k in range(1, power_check + 1):
            pk = mb.compose(pk, step)
            ok, wit = _image_check(pk, src, arc)
            if not ok:
                wit["power"] = sign * k
                return ConditionEntry("C2", g.label, False, f"p^{sign * k} image escapes C_p", wit)
            dists = [_angle_to(mb.boundary_angle(mb.act_boundary(pk, x)), fixed) for x in (lo, hi)]
            if k > 1 and any(d > p + 1e-15 for d, p in zip(dists, prev)):
                return ConditionEntry("C2", g.label, False, "endpoint images not monotone toward the fixed point",
                                      {"power": sign * k, "distances": dists})
            prev = dists
    return ConditionEntry("C2", g.label, True, f"exact for |n| <= {power_check}; certified-by-monotonicity beyond",
                          {"power_check": power_check})


# -- transformations ----------------------------------------------------------

def conjugate_rep(rep: SchottkyRep, g: Isometry) -> SchottkyRep:
    """Conjugate every generator by g; arcs and basepoint are carried along by g."""
    ginv = mb.inverse(g)
    gens = tuple(GeneratorSpec(s.label, s.kind, mb.compose(mb.compose(g, s.matrix), ginv))
                 for s in rep.generators)
    arcs = None if rep.arcs is None else {k: _map_arc(g, a) for k, a in rep.arcs.items()}
    return SchottkyRep(gens, arcs, mb.act(g, rep.basepoint))


def with_generator(rep: SchottkyRep, label: str, matrix: Isometry) -> SchottkyRep:
    """Replace one generator matrix, dropping arcs so they are rebuilt."""
    gens = tuple(GeneratorSpec(s.label, s.kind, matrix) if s.label == label else s for s in rep.generators)
    return SchottkyRep(gens, None, rep.basepoint)


def random_reduced_word(rng: np.random.Generator, labels, n_blocks: int, max_power: int,
                        first_not=None, last_not=None) -> GroupWord:
    blocks = []
    prev = first_not
    for i in range(n_blocks):
        choices = [l for l in labels if l != prev and not (i == n_blocks - 1 and l == last_not)]
        if not choices:
            choices = [l for l in labels if l != prev]
        l = choices[int(rng.integers(len(choices)))]
        m = int(rng.integers(1, max_power + 1)) * (1 if rng.random() < 0.5 else -1)
        blocks.append((l, m))
        prev = l
    return GroupWord(tuple(blocks))


def quasi_additivity_constant(rep: SchottkyRep, samples: int = 500, seed: int = 0,
                              max_blocks: int = 3, max_power: int = 10) -> float:
    """Empirical C in d(o, γₙγₘo) ≥ d(o, γₙo) + d(o, γₘo) − C.

    Pairs are drawn with the last letter of γₙ different from the first letter
    of γₘ, so the product is reduced.  The pair (h₁, h₂) is always included.
    """
    o = rep.basepoint
    labels = rep.labels
    rng = np.random.default_rng(seed)
    pairs = [(GroupWord(((labels[0], 1),)), GroupWord(((labels[1], 1),)))]
    for _ in range(samples):
        wn = random_reduced_word(rng, labels, int(rng.integers(1, max_blocks + 1)), max_power)
        wm = random_reduced_word(rng, labels, int(rng.integers(1, max_blocks + 1)), max_power,
                                 first_not=wn.blocks[-1][0])
        pairs.append((wn, wm))
    worst = 0.0
    for wn, wm in pairs:
        gn, gm = evaluate(rep, wn), evaluate(rep, wm)
        dn, dm = mb.displacement(gn, o), mb.displacement(gm, o)
        dnm = mb.displacement(mb.compose(gn, gm), o)
        worst = max(worst, dn + dm - dnm)
    return worst


def extended_warning(rep: SchottkyRep) -> None:
    if not rep.is_extended:
        warnings.warn(f"representation with {rep.n_hyperbolic} hyperbolic and {rep.n_parabolic} parabolic "
                      "generators is not extended Schottky", stacklevel=2)
