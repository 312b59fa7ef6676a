"""Reference representations built from explicit circle pairings.

F1  two hyperbolic generators and one parabolic, symmetric about the imaginary axis
F2  F1 conjugated by [[2, 1], [1, 1]]
F3  F1 with the first hyperbolic generator's translation length raised by 10%
F4  classical Schottky group on three hyperbolic generators

Every fixture is rebuilt from these recipes and checked against the ping-pong
conditions when first requested.  F2 keeps the arcs of F1 carried over by the
conjugating map, since isometric circles do not transform equivariantly.
"""
from __future__ import annotations

import functools
import math

from . import moebius as mb
from .moebius import Isometry
from .schottky import (HYPERBOLIC, PARABOLIC, GeneratorSpec, RepPair, SchottkyRep, auto_arcs,
                       conjugate_rep, verify_conditions)

CONJUGATOR = Isometry(2.0, 1.0, 1.0, 1.0)
PERTURBATION = 1.10

# half-width of every arc and the arc centres, in degrees measured on the
# circle from the image of 0
ARC_HALF_WIDTH = 28.0
F1_CENTRES = (72.0, 144.0)
F4_HALF_WIDTH = 20.0
F4_CENTRES = (30.0, 90.0, 150.0)


def pair_circles(c1: float, c2: float, r: float) -> Isometry:
    """The element mapping the outside of the circle (c1, r) onto the inside of (c2, r)."""
    return Isometry(c2 / r, (-r * r - c1 * c2) / r, 1.0 / r, -c1 / r)


def _interval(centre_deg: float, half_width_deg: float) -> tuple[float, float]:
    # real interval whose disk image is centred at the given angle
    lo = math.tan(math.radians(centre_deg - half_width_deg) / 2.0)
    hi = math.tan(math.radians(centre_deg + half_width_deg) / 2.0)
    return (lo + hi) / 2.0, (hi - lo) / 2.0


def _symmetric_hyperbolic(centre_deg: float, half_width_deg: float) -> Isometry:
    u, r = _interval(centre_deg, half_width_deg)
    return pair_circles(-u, u, r)


def _cusp(half_width_deg: float) -> Isometry:
    x = math.tan(math.radians(half_width_deg) / 2.0)
    return pair_circles(-x / 2.0, x / 2.0, x / 2.0)


def _verified(rep: SchottkyRep) -> SchottkyRep:
    if rep.arcs is None:
        rep = auto_arcs(rep)
    report = verify_conditions(rep, power_check=50)
    if not report.passed:
        raise RuntimeError("fixture failed its ping-pong check:\n" + report.summary())
    return rep


@functools.lru_cache(maxsize=None)
def f1() -> SchottkyRep:
    gens = (
        GeneratorSpec("h1", HYPERBOLIC, _symmetric_hyperbolic(F1_CENTRES[0], ARC_HALF_WIDTH)),
        GeneratorSpec("h2", HYPERBOLIC, _symmetric_hyperbolic(F1_CENTRES[1], ARC_HALF_WIDTH)),
        GeneratorSpec("p1", PARABOLIC, _cusp(ARC_HALF_WIDTH)),
    )
    return _verified(SchottkyRep(gens))


@functools.lru_cache(maxsize=None)
def f2() -> SchottkyRep:
    return _verified(conjugate_rep(f1(), CONJUGATOR))


@functools.lru_cache(maxsize=None)
def f3() -> SchottkyRep:
    base = f1()
    h1 = base.generators[0].matrix
    u = h1.m11 * (1.0 / h1.m21)  # centre of the target circle
    length = mb.translation_length(h1) * PERTURBATION
    r = u / math.cosh(length / 2.0)
    gens = (GeneratorSpec("h1", HYPERBOLIC, pair_circles(-u, u, r)),) + base.generators[1:]
    return _verified(SchottkyRep(gens))


@functools.lru_cache(maxsize=None)
def f4() -> SchottkyRep:
    gens = tuple(GeneratorSpec(f"h{i + 1}", HYPERBOLIC, _symmetric_hyperbolic(c, F4_HALF_WIDTH))
                 for i, c in enumerate(F4_CENTRES))
    return _verified(SchottkyRep(gens))


REPS = {"F1": f1, "F2": f2, "F3": f3, "F4": f4}

PAIRS = {
    "F1": ("F1", "F1"),
    "F1F2": ("F1", "F2"),
    "F1F3": ("F1", "F3"),
    "F4": ("F4", "F4"),
}


def rep(name: str) -> SchottkyRep:
    return REPS[name]()


def pair(name: str) -> RepPair:
    """Fixture pair by name: F1 (self pair), F1F2 (conjugate), F1F3 (perturbed), F4 (classical)."""
    a, b = PAIRS[name]
    return RepPair(rep(a), rep(b))
