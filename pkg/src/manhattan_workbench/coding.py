"""Block coding of the free group: admissible words, periodic orbits, potentials.

A block symbol is a pair (letter index, exponent) with nonzero exponent.  A
word of blocks is admissible when consecutive blocks carry different letters;
cyclic admissibility also compares the last block with the first.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import moebius as mb
from .errors import NonHyperbolicWord
from .schottky import HYPERBOLIC, PARABOLIC, RepPair, SchottkyRep

Block = tuple[int, int]


@dataclass(frozen=True)
class Alphabet:
    labels: tuple[str, ...]
    kinds: tuple[str, ...]

    @classmethod
    def from_pair(cls, pair: RepPair) -> "Alphabet":
        return cls(tuple(pair.labels), tuple(pair.kinds))

    @classmethod
    def from_rep(cls, rep: SchottkyRep) -> "Alphabet":
        return cls(tuple(rep.labels), tuple(rep.kinds))

    def __len__(self):
        return len(self.labels)

    @property
    def mixing(self) -> bool:
        return len(self.labels) >= 3

    def hyperbolic_letters(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == HYPERBOLIC]

    def parabolic_letters(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == PARABOLIC]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def block_name(self, block: Block) -> str:
        j, m = block
        return f"{self.labels[j]}^{m}"

    def symbols(self, max_power: int) -> list[Block]:
        """Truncated block symbol set, ordered by letter then exponent."""
        return [(j, m) for j in range(len(self.labels))
                for m in itertools.chain(range(-max_power, 0), range(1, max_power + 1))]


@dataclass(frozen=True)
class BlockWord:
    blocks: tuple[Block, ...]

    def __post_init__(self):
        blocks = tuple((int(j), int(m)) for j, m in self.blocks)
        if any(m == 0 for _, m in blocks):
            raise ValueError("block exponents must be nonzero")
        object.__setattr__(self, "blocks", blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    @property
    def linear_admissible(self) -> bool:
        return is_admissible(self, cyclic=False)

    @property
    def cyclic_admissible(self) -> bool:
        return is_admissible(self, cyclic=True)

    def rotate(self, k: int) -> "BlockWord":
        k %= max(len(self.blocks), 1)
        return BlockWord(self.blocks[k:] + self.blocks[:k])

    def inverse(self) -> "BlockWord":
        return BlockWord(tuple((j, -m) for j, m in reversed(self.blocks)))

    def canonical_rotation(self) -> "BlockWord":
        n = len(self.blocks)
        return min((self.rotate(k) for k in range(n)), key=lambda w: w.blocks)

    @property
    def is_primitive(self) -> bool:
        n = len(self.blocks)
        for d in range(1, n):
            if n % d == 0 and self.blocks == self.blocks[:d] * (n // d):
                return False
        return True

    def labelled(self, alpha: Alphabet) -> tuple[tuple[str, int], ...]:
        return tuple((alpha.labels[j], m) for j, m in self.blocks)

    def __str__(self):
        return " ".join(f"{j}^{m}" for j, m in self.blocks)


@dataclass(frozen=True)
class TruncationParams:
    """Truncation of the countable shift: periods up to n_max, exponents up to M."""

    n_max: int = 64
    max_power: int = 8
    anchor: Block | None = (0, 1)

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError("n_max must be at least 2")
        if self.max_power < 1:
            raise ValueError("max_power must be at least 1")
        if self.anchor is not None:
            j, m = self.anchor
            if m == 0 or abs(m) > self.max_power:
                raise ValueError(f"anchor exponent {m} outside 1..{self.max_power}")
            object.__setattr__(self, "anchor", (int(j), int(m)))


def is_admissible(w: BlockWord | Sequence[Block], cyclic: bool = False) -> bool:
    blocks = w.blocks if isinstance(w, BlockWord) else tuple(w)
    if any(m == 0 for _, m in blocks):
        return False
    for (a, _), (b, _) in zip(blocks, blocks[1:]):
        if a == b:
            return False
    if cyclic and len(blocks) > 1 and blocks[-1][0] == blocks[0][0]:
        return False
    return True


def _exponents(max_power: int) -> list[int]:
    # by |m| then sign
    return [s * k for k in range(1, max_power + 1) for s in (1, -1)]


def enumerate_periodic(alpha: Alphabet, n: int, params: TruncationParams) -> Iterator[BlockWord]:
    """Cyclically admissible words of period n with |m| ≤ M.

    With an anchor, only words whose first block is the anchor are produced.
    At period one only hyperbolic letters appear: a lone parabolic block has no
    closed geodesic.
    """
    if n < 1:
        raise ValueError("period must be positive")
    exps = _exponents(params.max_power)
    letters = range(len(alpha))
    if n == 1:
        if params.anchor is not None:
            if alpha.kinds[params.anchor[0]] == HYPERBOLIC:
                yield BlockWord((params.anchor,))
            return
        for j in letters:
            if alpha.kinds[j] == HYPERBOLIC:
                for m in exps:
                    yield BlockWord(((j, m),))
        return
    first_letters = [params.anchor[0]] if params.anchor is not None else list(letters)
    for j0 in first_letters:
        for path in _letter_cycles(len(alpha), n, j0):
            first_exps = [params.anchor[1]] if params.anchor is not None else exps
            for ms in itertools.product(first_exps, *([exps] * (n - 1))):
                yield BlockWord(tuple(zip(path, ms)))


def _letter_cycles(n_letters: int, n: int, first: int):
    def rec(path):
        if len(path) == n:
            if path[-1] != path[0]:
                yield tuple(path)
            return
        for j in range(n_letters):
            if j != path[-1]:
                yield from rec(path + [j])
    yield from rec([first])


def count_periodic(alpha: Alphabet, n: int, params: TruncationParams) -> int:
    """Closed-form count of enumerate_periodic via the letter adjacency matrix."""
    k = len(alpha)
    per = 2 * params.max_power
    if n == 1:
        if params.anchor is not None:
            return int(alpha.kinds[params.anchor[0]] == HYPERBOLIC)
        return len(alpha.hyperbolic_letters()) * per
    A = np.ones((k, k), dtype=np.int64) - np.eye(k, dtype=np.int64)
    An = np.linalg.matrix_power(A, n)
    if params.anchor is not None:
        return int(An[params.anchor[0], params.anchor[0]]) * per ** (n - 1)
    return int(np.trace(An)) * per ** n


def conjugacy_class_representatives(alpha: Alphabet, n: int, params: TruncationParams) -> Iterator[BlockWord]:
    """One word per rotation class (the lexicographically least rotation).

    The anchor is ignored; primitivity is available as ``word.is_primitive``.
    """
    free = TruncationParams(params.n_max, params.max_power, None)
    for w in enumerate_periodic(alpha, n, free):
        if w.canonical_rotation().blocks == w.blocks:
            yield w


# -- geometry of periodic words ------------------------------------------------

def word_matrix(rep: SchottkyRep, w: BlockWord) -> mb.Isometry:
    mats = [g.matrix for g in rep.generators]
    out = mb.IDENTITY
    for j, m in w.blocks:
        out = mb.compose(out, mb.power(mats[j], m))
    return out


def _hyperbolic_length(rep: SchottkyRep, w: BlockWord) -> float:
    g = word_matrix(rep, w)
    if mb.classify(g) is not mb.IsometryClass.HYPERBOLIC:
        raise NonHyperbolicWord(str(w), g.trace)
    return mb.translation_length(g)


def orbit_lengths(pair: RepPair, w: BlockWord) -> tuple[float, float]:
    """Translation lengths (l₁, l₂) of the closed geodesic coded by w."""
    if not w.cyclic_admissible:
        raise ValueError(f"word {w} is not cyclically admissible")
    return _hyperbolic_length(pair.rho1, w), _hyperbolic_length(pair.rho2, w)


def potential(rep: SchottkyRep, w: BlockWord, position: int) -> float:
    """Geometric potential at the periodic point σ^position(w^∞).

    Equals B_ξ(o, g o) where g is the block at ``position`` and ξ the
    attracting fixed point of the word rotated to start there.  It is
    computed in the equivalent form B_η(g⁻¹o, o) with η the attracting fixed
    point of the rotation starting one block later, which avoids the
    cancellation near ξ.
    """
    n = len(w)
    if not w.cyclic_admissible:
        raise ValueError(f"word {w} is not cyclically admissible")
    position %= n
    j, m = w.blocks[position]
    gen = rep.generators[j]
    nxt = w.rotate(position + 1)
    h = word_matrix(rep, nxt)
    if mb.classify(h) is not mb.IsometryClass.HYPERBOLIC:
        raise NonHyperbolicWord(str(nxt), h.trace)
    eta = mb.attracting_fixed_point(h)
    if gen.kind == HYPERBOLIC:
        return mb.power_busemann_shift(eta, gen.matrix, -m, rep.basepoint)
    return mb.busemann_shift(eta, mb.power(gen.matrix, -m), rep.basepoint)


def potential_tau(pair: RepPair, w: BlockWord, position: int) -> float:
    return potential(pair.rho1, w, position)


def potential_kappa(pair: RepPair, w: BlockWord, position: int) -> float:
    return potential(pair.rho2, w, position)


def birkhoff_sum(rep: SchottkyRep, w: BlockWord) -> float:
    return math.fsum(potential(rep, w, i) for i in range(len(w)))


def positivity_gap(rep: SchottkyRep, words, min_period: int = 3) -> float:
    """min S_nτ / n over the words with period ≥ min_period."""
    vals = [birkhoff_sum(rep, w) / len(w) for w in words if len(w) >= min_period]
    if not vals:
        raise ValueError("no words of sufficient period")
    return min(vals)


def random_cyclic_word(rng: np.random.Generator, alpha: Alphabet, n: int, max_power: int) -> BlockWord:
    """Uniform letters subject to cyclic admissibility (rejection on the last letter)."""
    k = len(alpha)
    if n == 1:
        hyp = alpha.hyperbolic_letters()
        j = hyp[int(rng.integers(len(hyp)))]
        m = int(rng.integers(1, max_power + 1)) * int(rng.choice([-1, 1]))
        return BlockWord(((j, m),))
    while True:
        letters = [int(rng.integers(k))]
        for _ in range(n - 1):
            nxt = int(rng.integers(k - 1))
            letters.append(nxt + (nxt >= letters[-1]))
        if letters[-1] != letters[0]:
            break
    ms = [int(rng.integers(1, max_power + 1)) * int(rng.choice([-1, 1])) for _ in range(n)]
    return BlockWord(tuple(zip(letters, ms)))
