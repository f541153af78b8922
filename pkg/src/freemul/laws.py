"""
Named laws with closed-form free cumulants and S-transforms.

=====================  ===================  ==========================
kind                   parameters           free cumulants
=====================  ===================  ==========================
``Semicircle``         ``variance``         ``k_2 = variance``
``FreePoisson``        ``rate``             ``k_n = rate``
``ShiftedFreePoisson`` ``rate``, ``shift``  ``k_1 = rate - shift``,
                                            ``k_n = rate`` (n >= 2)
``PointMass``          ``c``                ``k_1 = c``
=====================  ===================  ==========================

``ShiftedFreePoisson(rate, shift)`` is the law of ``p - shift`` for ``p``
free Poisson.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy
from scipy.special import binom

from .series import HalfSeries, add, compose, geometric, mul
from .transforms import (
    CumulantSequence, MeanClass, MomentSequence, STransformPair,
    moments_from_cumulants,
)

__all__ = ['KINDS', 'LawSpec', 'cumulants_of', 'moments_of', 's_closed_form',
           'parse_law']

KINDS = {
    'Semicircle': {'variance': 1.0},
    'FreePoisson': {'rate': 1.0},
    'ShiftedFreePoisson': {'rate': 1.0, 'shift': 1.0},
    'PointMass': {'c': 1.0},
}


@dataclass(frozen=True)
class LawSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f'unknown law kind {self.kind!r}; '
                             f'expected one of {sorted(KINDS)}')
        unknown = set(self.params) - set(KINDS[self.kind])
        if unknown:
            raise ValueError(f'unknown parameters for {self.kind}: '
                             f'{sorted(unknown)}')
        params = {**KINDS[self.kind],
                  **{k: float(v) for k, v in self.params.items()}}
        if params.get('variance', 1.0) <= 0:
            raise ValueError('variance must be positive')
        if params.get('rate', 1.0) <= 0:
            raise ValueError('rate must be positive')
        object.__setattr__(self, 'params', params)

    def __getattr__(self, name):
        try:
            return self.__dict__['params'][name]
        except KeyError:
            raise AttributeError(name) from None

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    @classmethod
    def semicircle(cls, variance=1.0):
        return cls('Semicircle', {'variance': variance})

    @classmethod
    def free_poisson(cls, rate=1.0):
        return cls('FreePoisson', {'rate': rate})

    @classmethod
    def shifted_free_poisson(cls, rate=1.0, shift=1.0):
        return cls('ShiftedFreePoisson', {'rate': rate, 'shift': shift})

    @classmethod
    def point_mass(cls, c=1.0):
        return cls('PointMass', {'c': c})

    def to_dict(self) -> dict:
        return {'kind': self.kind, **self.params}

    @classmethod
    def from_dict(cls, d) -> 'LawSpec':
        d = dict(d)
        try:
            kind = d.pop('kind')
        except KeyError:
            raise ValueError('law spec needs a "kind" field') from None
        return cls(kind, d)


def parse_law(text: str) -> LawSpec:
    """Parse an inline JSON law spec."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f'malformed law JSON: {exc}') from None
    if not isinstance(d, dict):
        raise ValueError('law spec must be a JSON object')
    return LawSpec.from_dict(d)


def cumulants_of(law: LawSpec, order: int) -> CumulantSequence:
    if order < 1:
        raise ValueError('order must be >= 1')
    k = numpy.zeros(order)
    if law.kind == 'Semicircle':
        if order >= 2:
            k[1] = law.variance
    elif law.kind == 'FreePoisson':
        k[:] = law.rate
    elif law.kind == 'ShiftedFreePoisson':
        k[:] = law.rate
        k[0] = law.rate - law.shift
    else:
        k[0] = law.c
    return CumulantSequence(k)


def moments_of(law: LawSpec, order: int) -> MomentSequence:
    return moments_from_cumulants(cumulants_of(law, order))


# ============
# Closed forms
# ============

def _sqrt_one_plus(u: HalfSeries) -> HalfSeries:
    """``sqrt(1 + u)`` for ``u`` without constant term (binomial series)."""
    n = u.trunc_grade // max(u.min_grade, 1) + 1
    outer = HalfSeries.from_powers(binom(0.5, numpy.arange(n + 1)))
    return compose(outer, u)


def _trusted(mean_zero: bool, order: int) -> int:
    # window that s_transform reaches from `order` moments
    return order - 3 if mean_zero else 2 * order - 2


def s_closed_form(law: LawSpec, order: int) -> STransformPair:
    """
    Expansion of the closed-form S-transform, truncated to the window that
    :func:`~freemul.transforms.s_transform` reaches from ``order`` moments.
    """
    if law.kind == 'PointMass':
        raise ValueError('no closed form registered for PointMass')
    if law.kind == 'ShiftedFreePoisson' and law.shift == 0.0:
        law = LawSpec.free_poisson(law.rate)
    work = 2 * order + 8

    if law.kind == 'Semicircle':
        if order < 2:
            raise ValueError('order must be >= 2 for a centred law')
        t = _trusted(True, order)
        lead = 1.0 / math.sqrt(law.variance)
        return STransformPair(MeanClass.ZERO_MEAN,
                              HalfSeries.monomial(-1, lead, t),
                              HalfSeries.monomial(-1, -lead, t))

    if law.kind == 'FreePoisson':
        # 1/(rate + z)
        s = geometric(-1.0 / law.rate, work).scale(1.0 / law.rate)
        return STransformPair(MeanClass.NONZERO_MEAN,
                              s.truncate(_trusted(False, order)))

    # shifted free Poisson: z S solves shift*w^2 + (z + rate - shift) w - z = 0
    lam, a = law.rate, law.shift
    mean = lam - a
    z = HalfSeries.monomial(2, 1.0, work)
    if mean != 0.0:
        # sqrt((z + mean)^2 + 4 a z) on the branch equal to `mean` at z = 0
        u = HalfSeries.from_powers(
            [0.0, 2.0 * (mean + 2.0 * a) / mean ** 2, 1.0 / mean ** 2], work)
        root = _sqrt_one_plus(u).scale(mean)
        w = add(-(z + mean), root).scale(1.0 / (2.0 * a))
        s = w.shift(-2)
        return STransformPair(MeanClass.NONZERO_MEAN,
                              s.truncate(_trusted(False, order)))
    if order < 2:
        raise ValueError('order must be >= 2 for a centred law')
    # mean zero: sqrt(z^2 + 4 rate z) = 2 sqrt(rate) sqrt(z) sqrt(1 + z/(4 rate))
    t = _trusted(True, order)
    root_half = _sqrt_one_plus(HalfSeries.monomial(2, 1.0 / (4.0 * lam), work))
    sqrt_z = HalfSeries.monomial(1, 1.0, work)
    branches = []
    for sign in (1.0, -1.0):
        root = mul(sqrt_z, root_half).scale(sign * 2.0 * math.sqrt(lam))
        w = add(-z, root).scale(1.0 / (2.0 * a))
        branches.append(w.shift(-2).truncate(t))
    return STransformPair(MeanClass.ZERO_MEAN, *branches)
