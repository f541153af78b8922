"""
Free multiplicative convolution of moment sequences.

The moments of ``xy`` (``x``, ``y`` free) come from multiplying
S-transforms.  If one factor is centred its S-transform has two branches in
``sqrt(z)``, and both products are inverted and compared.  If both are
centred every moment of ``xy`` vanishes, and no S-transform is formed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy

from .oracle import mixed_moment_xy
from .series import TOLERANCE, ZERO_SNAP, HalfSeries, compose, mul
from .transforms import (
    MeanClass, MomentSequence, STransformPair, branch_moments,
    cumulant_series, cumulants_from_moments, moments_from_s, s_transform,
)

__all__ = [
    'CaseTag', 'ConvolutionResult', 'AuxiliarySeries', 'IdentityReport',
    'free_mult_convolve', 'second_moment_identity', 'auxiliary_series',
    'verify_proof_identities', 'branch_residual',
]


class CaseTag(str, enum.Enum):
    BOTH_NONZERO = 'both_nonzero'
    ONE_ZERO_MEAN = 'one_zero_mean'
    BOTH_ZERO_MEAN = 'both_zero_mean'


@dataclass(frozen=True)
class ConvolutionResult:
    moments: MomentSequence
    case_tag: CaseTag
    s_product: Optional[STransformPair] = None

    def to_dict(self) -> dict:
        return {
            'case_tag': CaseTag(self.case_tag).value,
            'moments': list(self.moments.moments),
            's_product': None if self.s_product is None
            else self.s_product.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> 'ConvolutionResult':
        s = d.get('s_product')
        return cls(MomentSequence(d['moments']), CaseTag(d['case_tag']),
                   None if s is None else STransformPair.from_dict(s))


def _factor_class(m: MomentSequence) -> MeanClass:
    if abs(m.mean) > ZERO_SNAP:
        return MeanClass.NONZERO_MEAN
    if m.order < 2 or m.m(2) <= ZERO_SNAP:
        # the only admissible centred variable with m_2 = 0 is x = 0
        if m.order >= 2 and m.m(2) < -ZERO_SNAP:
            raise ValueError('invalid moment sequence: zero-mean factor '
                             'with negative second moment')
        if any(abs(v) > ZERO_SNAP for v in m.moments):
            raise ValueError('invalid moment sequence: zero-mean factor '
                             'with vanishing second moment')
        return MeanClass.DEGENERATE_ZERO
    return MeanClass.ZERO_MEAN


def free_mult_convolve(mx: MomentSequence, my: MomentSequence,
                       order: int = None, tol=None) -> ConvolutionResult:
    """
    Moments ``phi((xy)^n)``, ``n = 1..order``, for free ``x`` and ``y``.

    Parameters
    ----------
    mx, my : MomentSequence
        Moments of the factors; each needs at least ``order`` entries.
    order : int, optional
        Number of output moments.  Defaults to the shorter input.
    tol : float, optional
        Agreement tolerance for the two branch routes.

    Returns
    -------
    ConvolutionResult
    """
    order = min(mx.order, my.order) if order is None else order
    mx, my = mx.truncate(order), my.truncate(order)
    cx, cy = _factor_class(mx), _factor_class(my)
    centred = [c is not MeanClass.NONZERO_MEAN for c in (cx, cy)]

    if all(centred):
        return ConvolutionResult(MomentSequence(numpy.zeros(order)),
                                 CaseTag.BOTH_ZERO_MEAN)
    if any(centred):
        tag = CaseTag.ONE_ZERO_MEAN
        if MeanClass.DEGENERATE_ZERO in (cx, cy):
            return ConvolutionResult(MomentSequence(numpy.zeros(order)), tag)
    else:
        tag = CaseTag.BOTH_NONZERO
    # the moments of xy and yx agree, so the centred factor goes first
    if cy is MeanClass.ZERO_MEAN:
        mx, my = my, mx
    product = s_transform(mx) * s_transform(my)
    return ConvolutionResult(moments_from_s(product, order, tol), tag,
                             product)


def branch_residual(mx: MomentSequence, my: MomentSequence,
                    order: int) -> float:
    """
    Largest difference between the moments recovered through the two
    branches of ``S_x S_y`` (zero when no factor is centred).
    """
    mx, my = mx.truncate(order), my.truncate(order)
    if _factor_class(my) is MeanClass.ZERO_MEAN:
        mx, my = my, mx
    routes = branch_moments(s_transform(mx) * s_transform(my), order)
    if len(routes) == 1:
        return 0.0
    return float(numpy.max(numpy.abs(routes[0] - routes[1])))


def second_moment_identity(mx: MomentSequence, my: MomentSequence) -> float:
    """``phi(x^2) phi(y)^2 + phi(x)^2 phi(y^2) - phi(x)^2 phi(y)^2``."""
    x1, x2 = mx.m(1), mx.m(2)
    y1, y2 = my.m(1), my.m(2)
    return x2 * y1 ** 2 + x1 ** 2 * y2 - x1 ** 2 * y1 ** 2


# =======================
# Auxiliary moment series
# =======================

@dataclass(frozen=True)
class AuxiliarySeries:
    """``m1 = sum phi(y (xy)^n) z^n`` and ``m2 = sum phi(x (yx)^n) z^n``."""

    m1: HalfSeries
    m2: HalfSeries


def auxiliary_series(mx: MomentSequence, my: MomentSequence,
                     order: int) -> AuxiliarySeries:
    """Both auxiliary series through ``z**order``, from the oracle."""
    kx = cumulants_from_moments(mx.truncate(order + 1))
    ky = cumulants_from_moments(my.truncate(order + 1))
    m1 = [mixed_moment_xy(kx, ky, 'y(xy)^n', n) for n in range(order + 1)]
    m2 = [mixed_moment_xy(kx, ky, 'x(yx)^n', n) for n in range(order + 1)]
    return AuxiliarySeries(HalfSeries.from_powers(m1),
                           HalfSeries.from_powers(m2))


@dataclass
class IdentityReport:
    """
    Scaled residuals ``max_n |lhs_n - rhs_n| / max(1, |lhs_n|, |rhs_n|)``
    of each identity, over the powers ``z**0 .. z**order``.
    """

    order: int
    residuals: dict = field(default_factory=dict)
    tol: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return all(r < self.tol for r in self.residuals.values())

    def to_dict(self) -> dict:
        return {'order': self.order, 'tol': self.tol,
                'residuals': dict(self.residuals), 'passed': self.passed}


def _residual(lhs: HalfSeries, rhs: HalfSeries, order: int) -> float:
    a = lhs.dense(min(lhs.min_grade, 0), 2 * order)
    b = rhs.dense(min(rhs.min_grade, 0), 2 * order)
    a = numpy.pad(a, (b.size - a.size, 0)) if a.size < b.size else a
    b = numpy.pad(b, (a.size - b.size, 0)) if b.size < a.size else b
    scale = numpy.maximum(1.0, numpy.maximum(numpy.abs(a), numpy.abs(b)))
    return float(numpy.max(numpy.abs(a - b) / scale, initial=0.0))


def verify_proof_identities(mx: MomentSequence, my: MomentSequence,
                            order: int, tol=None) -> IdentityReport:
    """
    Check the functional relations between the moment, cumulant and
    auxiliary series of ``x``, ``y`` and ``xy``, in denominator-free form::

        M_xy = M_yx
        M_xy = C_y[z M2] + 1
        z M1 M2 = C_y[z M2] M_xy
        z M1 M2 = C_x[z M1] M_xy

    All series are built from oracle (non-crossing partition) data, so the
    S-transform code path is not involved.
    """
    kx = cumulants_from_moments(mx.truncate(order))
    ky = cumulants_from_moments(my.truncate(order))
    m_xy = HalfSeries.from_powers(
        [1.0] + [mixed_moment_xy(kx, ky, '(xy)^n', n)
                 for n in range(1, order + 1)])
    m_yx = HalfSeries.from_powers(
        [1.0] + [mixed_moment_xy(kx, ky, '(yx)^n', n)
                 for n in range(1, order + 1)])
    aux = auxiliary_series(mx, my, order - 1)
    zm1, zm2 = aux.m1.shift(2), aux.m2.shift(2)
    c_x, c_y = cumulant_series(kx), cumulant_series(ky)
    cy_zm2 = compose(c_y, zm2)
    cx_zm1 = compose(c_x, zm1)
    z_m1_m2 = mul(zm1, aux.m2)
    report = IdentityReport(order, tol=TOLERANCE if tol is None else tol)
    report.residuals = {
        'M_xy=M_yx': _residual(m_xy, m_yx, order),
        'M_xy=C_y[zM2]+1': _residual(m_xy, cy_zm2 + 1.0, order),
        'zM1M2=C_y[zM2]M_xy': _residual(z_m1_m2, mul(cy_zm2, m_xy), order),
        'zM1M2=C_x[zM1]M_xy': _residual(z_m1_m2, mul(cx_zm1, m_xy), order),
    }
    return report
