"""
Brute-force moments of free variables from non-crossing partitions.

Nothing here touches the S-transform code path: moments are sums over
non-crossing partitions of products of free cumulants, and mixed moments of
free ``x`` and ``y`` keep only partitions whose blocks are monochromatic
(mixed free cumulants of free variables vanish).
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .transforms import CumulantSequence

__all__ = [
    'MAX_ORDER', 'NonCrossingPartition', 'catalan', 'enumerate_nc',
    'is_noncrossing', 'moment_from_cumulants_nc', 'mixed_moment_xy',
    'word_moment', 'WORDS',
]

MAX_ORDER = 16

#: Alternating word patterns accepted by :func:`mixed_moment_xy`.
WORDS = {
    '(xy)^n': lambda n: 'xy' * n,
    '(yx)^n': lambda n: 'yx' * n,
    'y(xy)^n': lambda n: 'y' + 'xy' * n,
    'x(yx)^n': lambda n: 'x' + 'yx' * n,
}


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def is_noncrossing(blocks) -> bool:
    """No ``a < b < c < d`` with ``a, c`` in one block and ``b, d`` in another."""
    for u, v in itertools.combinations(blocks, 2):
        for a, c in itertools.combinations(sorted(u), 2):
            if any(a < b < c for b in v) and any(not (a <= b <= c) for b in v):
                return False
    return True


@dataclass(frozen=True)
class NonCrossingPartition:
    """Blocks of a non-crossing partition of ``{1..n}``, sorted."""

    blocks: tuple

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def sizes(self):
        return tuple(len(b) for b in self.blocks)

    def validate(self) -> bool:
        flat = sorted(i for b in self.blocks for i in b)
        return (all(len(b) > 0 for b in self.blocks)
                and flat == list(range(1, len(flat) + 1))
                and is_noncrossing(self.blocks))

    def __str__(self):
        return '{' + ', '.join(
            '{' + ','.join(map(str, b)) + '}' for b in self.blocks) + '}'


@lru_cache(maxsize=None)
def _nc(length: int):
    # partitions of range(length); the block of 0 is placed first and the
    # gaps it leaves are filled independently
    if length == 0:
        return ((),)
    out = []
    for r in range(length):
        for rest in itertools.combinations(range(1, length), r):
            block = (0, *rest)
            bounds = [*block, length]
            gaps = [(bounds[i] + 1, bounds[i + 1])
                    for i in range(len(block))]
            pieces = [[tuple(tuple(p + lo for p in b) for b in part)
                       for part in _nc(hi - lo)] for lo, hi in gaps]
            for combo in itertools.product(*pieces):
                blocks = [block]
                for part in combo:
                    blocks.extend(part)
                out.append(tuple(sorted(blocks)))
    return tuple(out)


def _check_order(n):
    if n < 1:
        raise ValueError('order must be >= 1')
    if n > MAX_ORDER:
        raise ValueError(f'order too large for enumeration: {n} > {MAX_ORDER}')


def enumerate_nc(n: int):
    """All non-crossing partitions of ``{1..n}`` (there are ``catalan(n)``)."""
    _check_order(n)
    return [NonCrossingPartition(tuple(tuple(i + 1 for i in b) for b in part))
            for part in _nc(n)]


@lru_cache(maxsize=None)
def _size_profile(n: int):
    return tuple(Counter(tuple(sorted(len(b) for b in part))
                         for part in _nc(n)).items())


def moment_from_cumulants_nc(k: CumulantSequence, n: int) -> float:
    """``sum over NC(n) of prod over blocks of k_|V|``."""
    _check_order(n)
    if n > k.order:
        raise ValueError(f'need {n} cumulants, only {k.order} available')
    total = 0.0
    for sizes, count in _size_profile(n):
        total += count * math.prod(k.k(s) for s in sizes)
    return total


def word_moment(kx: CumulantSequence, ky: CumulantSequence, word: str):
    """
    ``phi`` of a word in ``x`` and ``y`` for free ``x, y``.

    Sums over non-crossing partitions of the letter positions whose blocks
    are monochromatic.  The block holding the first position of an interval
    is grown one element at a time; everything it encloses, and everything
    after it, are independent intervals (memoised).
    """
    L = len(word)
    if L > MAX_ORDER:
        raise ValueError(f'order too large: word length {L} > {MAX_ORDER}')
    if set(word) - {'x', 'y'}:
        raise ValueError('words are built from the letters x and y')
    kap = {'x': kx, 'y': ky}
    for c in 'xy':
        if word.count(c) > kap[c].order:
            raise ValueError(f'need {word.count(c)} cumulants of {c}')

    @lru_cache(maxsize=None)
    def interval(i, j):
        if i >= j:
            return 1.0
        return grow(i, 1, j)

    @lru_cache(maxsize=None)
    def grow(p, size, j):
        # block so far ends at p with `size` elements, inside [.., j)
        c = word[p]
        total = kap[c].k(size) * interval(p + 1, j)
        for q in range(p + 1, j):
            if word[q] == c:
                total += interval(p + 1, q) * grow(q, size + 1, j)
        return total

    return interval(0, L)


def mixed_moment_xy(kx: CumulantSequence, ky: CumulantSequence,
                    word: str, n: int) -> float:
    """
    Mixed moment of free ``x, y`` for an alternating pattern.

    Parameters
    ----------
    word : {'(xy)^n', '(yx)^n', 'y(xy)^n', 'x(yx)^n'}
    n : int
        Repetition count of the alternating part.
    """
    if word not in WORDS:
        raise ValueError(f'unknown word pattern {word!r}; '
                         f'expected one of {sorted(WORDS)}')
    return word_moment(kx, ky, WORDS[word](n))
