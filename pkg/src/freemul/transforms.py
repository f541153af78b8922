"""
Moment, cumulant and S-transform machinery.

A variable is described by its moment sequence ``m_1..m_N``.  Its moment
series ``psi(z) = sum m_n z**n`` is inverted under composition and multiplied
by ``(1+z)/z`` to give the S-transform.  For a centred variable the inverse is
a series in ``sqrt(z)`` and comes in two branches; both are carried in an
:class:`STransformPair`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy

from .series import (
    ZERO_SNAP, HalfSeries, add, close, geometric, invert_two_branch,
    invert_unique, mul, solve_outer_composition,
)

__all__ = [
    'DEFAULT_ORDER', 'MeanClass', 'MomentSequence', 'CumulantSequence',
    'STransformPair', 'psi_from_moments', 'cumulant_series',
    'moments_from_cumulants', 'cumulants_from_moments', 's_transform',
    'moments_from_s', 'branch_moments', 'mobius_up', 'mobius_down',
    'is_moment_series',
]

DEFAULT_ORDER = 12


class MeanClass(str, enum.Enum):
    NONZERO_MEAN = 'nonzero_mean'
    ZERO_MEAN = 'zero_mean'
    DEGENERATE_ZERO = 'degenerate_zero'


# =========
# Sequences
# =========

def _as_tuple(values, name):
    values = tuple(float(v) for v in values)
    if len(values) < 1:
        raise ValueError(f'{name} sequence must have order >= 1')
    if not all(numpy.isfinite(values)):
        raise ValueError(f'{name} must be finite')
    return values


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``m_1..m_N`` (``m_0 = 1`` is implicit)."""

    moments: tuple

    def __post_init__(self):
        object.__setattr__(self, 'moments', _as_tuple(self.moments, 'moment'))

    @property
    def order(self) -> int:
        return len(self.moments)

    def m(self, n: int) -> float:
        if n == 0:
            return 1.0
        if n > self.order:
            raise IndexError(f'moment {n} not available (order {self.order})')
        return self.moments[n - 1]

    @property
    def mean(self) -> float:
        return self.moments[0]

    def truncate(self, order: int) -> 'MomentSequence':
        if order > self.order:
            raise ValueError(
                f'need {order} moments, only {self.order} available')
        return MomentSequence(self.moments[:order])

    def hankel(self, depth: int) -> numpy.ndarray:
        """The ``(depth+1) x (depth+1)`` Hankel matrix ``[m_{i+j}]``."""
        full = numpy.concatenate([[1.0], self.truncate(2 * depth).moments])
        idx = numpy.arange(depth + 1)
        return full[idx[:, None] + idx[None, :]]

    def is_positive(self, depth=None, tol=1e-12) -> bool:
        """Hankel positive-semidefiniteness up to ``depth``."""
        depth = self.order // 2 if depth is None else depth
        h = self.hankel(depth)
        scale = max(1.0, float(numpy.max(numpy.abs(h))))
        return bool(numpy.linalg.eigvalsh(h).min() >= -tol * scale)

    def to_dict(self) -> dict:
        return {'moments': list(self.moments)}

    @classmethod
    def from_dict(cls, d) -> 'MomentSequence':
        return cls(d['moments'])


@dataclass(frozen=True)
class CumulantSequence:
    """Free cumulants ``k_1..k_N``."""

    cumulants: tuple

    def __post_init__(self):
        object.__setattr__(self, 'cumulants',
                           _as_tuple(self.cumulants, 'cumulant'))

    @property
    def order(self) -> int:
        return len(self.cumulants)

    def k(self, n: int) -> float:
        if n > self.order:
            raise IndexError(
                f'cumulant {n} not available (order {self.order})')
        return self.cumulants[n - 1]

    def to_dict(self) -> dict:
        return {'cumulants': list(self.cumulants)}

    @classmethod
    def from_dict(cls, d) -> 'CumulantSequence':
        return cls(d['cumulants'])


# =============
# Moment series
# =============

def psi_from_moments(m: MomentSequence) -> HalfSeries:
    """``psi(z) = sum_n m_n z**n``, trusted to ``z**N``."""
    return HalfSeries.from_powers([0.0, *m.moments])


def is_moment_series(psi: HalfSeries) -> bool:
    """
    Whether ``psi`` can be ``sum_{n>=1} m_n z**n``: integer powers only and
    nothing below ``z``.
    """
    return psi.is_integer_power() and (psi.is_zero or psi.min_grade >= 2)


def cumulant_series(k: CumulantSequence) -> HalfSeries:
    """``C(z) = sum_n k_n z**n``, trusted to ``z**N``."""
    return HalfSeries.from_powers([0.0, *k.cumulants])


def _coeff_table(mfull: numpy.ndarray, n: int) -> numpy.ndarray:
    # row s holds [z^n] (z M(z))**s for s = 0..n, using m_0..m_{n-1} only
    zm = numpy.zeros(n + 1)
    zm[1:] = mfull[:n]
    out = numpy.zeros(n + 1)
    power = numpy.zeros(n + 1)
    power[0] = 1.0
    for s in range(1, n + 1):
        power = numpy.convolve(power, zm)[:n + 1]
        out[s] = power[n]
    return out


def moments_from_cumulants(k: CumulantSequence) -> MomentSequence:
    """Moments from free cumulants through ``M(z) = 1 + C[z M(z)]``."""
    N = k.order
    kap = numpy.asarray(k.cumulants)
    mfull = numpy.zeros(N + 1)
    mfull[0] = 1.0
    for n in range(1, N + 1):
        row = _coeff_table(mfull, n)
        mfull[n] = numpy.dot(kap[:n], row[1:])
    return MomentSequence(mfull[1:])


def cumulants_from_moments(m: MomentSequence) -> CumulantSequence:
    """Free cumulants solving ``M(z) = 1 + C[z M(z)]`` for ``C``."""
    N = m.order
    mfull = numpy.concatenate([[1.0], m.moments])
    kap = numpy.zeros(N)
    for n in range(1, N + 1):
        row = _coeff_table(mfull, n)
        # the coefficient of k_n is [z^n](zM)^n = 1
        kap[n - 1] = mfull[n] - numpy.dot(kap[:n - 1], row[1:n])
    return CumulantSequence(kap)


# ===========
# S-transform
# ===========

def mobius_up(chi: HalfSeries) -> HalfSeries:
    """``chi * (1+z)/z``: grade ``k`` receives ``chi_{k+2} + chi_k``."""
    return add(chi.shift(-2), chi)


def mobius_down(s: HalfSeries) -> HalfSeries:
    """``S * z/(1+z)``."""
    window = s.trunc_grade + 2 - s.min_grade
    return mul(s, geometric(-1.0, window, start=1))


@dataclass(frozen=True)
class STransformPair:
    """
    S-transform of a variable.

    ``primary`` is the branch with positive leading coefficient;
    ``secondary`` is the second branch and is present only for
    ``MeanClass.ZERO_MEAN``.
    """

    mean_class: MeanClass
    primary: Optional[HalfSeries] = None
    secondary: Optional[HalfSeries] = None

    def __post_init__(self):
        mc = MeanClass(self.mean_class)
        object.__setattr__(self, 'mean_class', mc)
        p, s = self.primary, self.secondary
        if mc is MeanClass.DEGENERATE_ZERO:
            if p is not None or s is not None:
                raise ValueError('degenerate S-transform carries no series')
            return
        if p is None or p.is_zero:
            raise ValueError('missing primary branch')
        if mc is MeanClass.NONZERO_MEAN:
            if s is not None:
                raise ValueError('nonzero-mean S-transform has one branch')
            if p.min_grade != 0 or not p.is_integer_power():
                raise ValueError('nonzero-mean S-transform must be an '
                                 'integer-power series with a constant term')
        else:
            if s is None:
                raise ValueError('zero-mean S-transform needs two branches')
            if p.min_grade != -1 or s.min_grade != -1:
                raise ValueError('zero-mean S-transform must start at '
                                 'grade -1')
            if not p.allclose(s.flip_odd()):
                raise ValueError('branches violate the sign-flip relation')

    def branches(self):
        return tuple(b for b in (self.primary, self.secondary)
                     if b is not None)

    def __mul__(self, other: 'STransformPair') -> 'STransformPair':
        """Branchwise product; at most one factor may be centred."""
        a, b = self, other
        if MeanClass.DEGENERATE_ZERO in (a.mean_class, b.mean_class):
            raise ValueError('degenerate S-transform cannot be multiplied')
        if a.mean_class is MeanClass.NONZERO_MEAN:
            a, b = b, a
        if b.mean_class is MeanClass.ZERO_MEAN:
            raise ValueError('both factors have vanishing mean; the '
                             'product is not an S-transform')
        if a.mean_class is MeanClass.NONZERO_MEAN:
            return STransformPair(MeanClass.NONZERO_MEAN,
                                  mul(a.primary, b.primary))
        return STransformPair(MeanClass.ZERO_MEAN, mul(a.primary, b.primary),
                              mul(a.secondary, b.primary))

    def to_dict(self) -> dict:
        return {
            'mean_class': self.mean_class.value,
            'primary': None if self.primary is None
            else self.primary.to_dict(),
            'secondary': None if self.secondary is None
            else self.secondary.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> 'STransformPair':
        def load(x):
            return None if x is None else HalfSeries.from_dict(x)
        return cls(MeanClass(d['mean_class']), load(d.get('primary')),
                   load(d.get('secondary')))


def classify(m: MomentSequence) -> MeanClass:
    if abs(m.mean) > ZERO_SNAP:
        return MeanClass.NONZERO_MEAN
    if m.order < 2:
        raise ValueError('a centred moment sequence needs order >= 2')
    if m.m(2) < -ZERO_SNAP:
        raise ValueError('not a moment sequence: negative second moment')
    if abs(m.m(2)) <= ZERO_SNAP:
        return MeanClass.DEGENERATE_ZERO
    return MeanClass.ZERO_MEAN


def s_transform(m: MomentSequence) -> STransformPair:
    """S-transform (one or two branches) of a moment sequence."""
    mc = classify(m)
    if mc is MeanClass.DEGENERATE_ZERO:
        return STransformPair(mc)
    psi = psi_from_moments(m)
    if mc is MeanClass.NONZERO_MEAN:
        return STransformPair(mc, mobius_up(invert_unique(psi)))
    chi, chi_t = invert_two_branch(psi)
    return STransformPair(mc, mobius_up(chi), mobius_up(chi_t))


def _psi_from_s(s: HalfSeries, mean_class: MeanClass, order: int):
    chi = mobius_down(s)
    if mean_class is MeanClass.NONZERO_MEAN:
        psi = invert_unique(chi)
    else:
        psi = solve_outer_composition(chi, 2 * order)
    if psi.trunc_grade < 2 * order:
        raise ValueError(
            f'S-transform determines only {psi.trunc_grade // 2} moments, '
            f'{order} requested')
    return psi.powers(order)[1:]


def branch_moments(s: STransformPair, order: int):
    """
    Moments recovered separately through each branch.

    Returns one array per branch of ``s``.
    """
    if s.mean_class is MeanClass.DEGENERATE_ZERO:
        raise ValueError('degenerate S-transform carries no moments')
    return tuple(_psi_from_s(b, s.mean_class, order) for b in s.branches())


def moments_from_s(s: STransformPair, order: int, tol=None) -> MomentSequence:
    """
    Moments ``m_1..m_order`` from an S-transform.

    Both branches are used when present; they must agree.
    """
    routes = branch_moments(s, order)
    for other in routes[1:]:
        if not close(routes[0], other, tol):
            raise ArithmeticError('branch inconsistency: the two S-transform '
                                  'branches give different moments')
    return MomentSequence(routes[0])
