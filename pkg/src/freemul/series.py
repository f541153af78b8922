"""
Truncated formal Laurent series in half-integer powers of ``z``.

A :class:`HalfSeries` stores coefficients by *grade*, the exponent measured in
units of ``z**(1/2)``: grade ``-1`` is ``1/sqrt(z)``, grade ``2`` is ``z``.
Every series carries the largest grade whose coefficient is trusted
(``trunc_grade``); coefficients beyond it are unknown, not zero.  Each
operation works out the trusted window of its output from the windows of its
inputs, so chains of compositions and inversions never silently report
garbage in their trailing orders.

The zero series is stored with an empty coefficient tuple and
``min_grade == trunc_grade + 1`` (it is known to vanish up to and including
``trunc_grade``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy

__all__ = [
    'TOLERANCE', 'ZERO_SNAP', 'HalfSeries', 'add', 'mul', 'reciprocal',
    'compose', 'invert_unique', 'invert_two_branch',
    'solve_outer_composition', 'geometric', 'close',
]

#: Default coefficient comparison tolerance.
TOLERANCE = 1e-9

#: Coefficients smaller than this after an operation are set to zero.
ZERO_SNAP = 1e-12


def close(a, b, tol=None):
    """
    Mixed absolute/relative comparison used throughout the package.

    Two numbers agree when ``|a - b| <= tol * max(1, |a|, |b|)``, i.e. the
    test is absolute for coefficients of order one and relative for the large
    high-order moments.
    """
    tol = TOLERANCE if tol is None else tol
    a = numpy.asarray(a, dtype=float)
    b = numpy.asarray(b, dtype=float)
    scale = numpy.maximum(1.0, numpy.maximum(numpy.abs(a), numpy.abs(b)))
    return bool(numpy.all(numpy.abs(a - b) <= tol * scale))


# ===========
# Half series
# ===========

@dataclass(frozen=True)
class HalfSeries:
    """
    Truncated Laurent series ``sum_g c_g z**(g/2)`` for ``g`` in
    ``[min_grade, trunc_grade]``.

    Parameters
    ----------
    min_grade : int
        Grade of the first stored coefficient.  After construction this is
        the true leading grade (leading zeros are stripped).
    coeffs : sequence of float
        Coefficients for grades ``min_grade, min_grade + 1, ...``.  A short
        sequence is padded with exact zeros up to ``trunc_grade``; a long one
        is cut there.
    trunc_grade : int
        Largest trusted grade.
    """

    min_grade: int
    coeffs: tuple
    trunc_grade: int

    def __post_init__(self):
        lo, hi = int(self.min_grade), int(self.trunc_grade)
        arr = numpy.zeros(max(hi - lo + 1, 0))
        raw = numpy.asarray(list(self.coeffs), dtype=float)[:arr.size]
        if not numpy.all(numpy.isfinite(raw)):
            raise ValueError('series coefficients must be finite')
        arr[:raw.size] = raw
        arr[numpy.abs(arr) < ZERO_SNAP] = 0.0
        nz = numpy.flatnonzero(arr)
        if nz.size == 0:
            lo, arr = hi + 1, arr[:0]
        else:
            lo, arr = lo + int(nz[0]), arr[nz[0]:]
        object.__setattr__(self, 'min_grade', lo)
        object.__setattr__(self, 'trunc_grade', hi)
        object.__setattr__(self, 'coeffs', tuple(float(c) for c in arr))

    # ------------
    # constructors
    # ------------

    @classmethod
    def from_grades(cls, terms: Mapping[int, float], trunc_grade: int):
        """Build a series from a ``{grade: coefficient}`` mapping."""
        if not terms:
            return cls.zero(trunc_grade)
        lo = min(terms)
        arr = numpy.zeros(max(trunc_grade - lo + 1, 0))
        for g, c in terms.items():
            if g <= trunc_grade:
                arr[g - lo] = c
        return cls(lo, tuple(arr), trunc_grade)

    @classmethod
    def zero(cls, trunc_grade: int):
        return cls(trunc_grade + 1, (), trunc_grade)

    @classmethod
    def monomial(cls, grade: int, coeff: float = 1.0, trunc_grade=None):
        """``coeff * z**(grade/2)``, exact up to ``trunc_grade``."""
        if trunc_grade is None:
            trunc_grade = grade
        return cls(grade, (coeff,), trunc_grade)

    @classmethod
    def from_powers(cls, coeffs: Iterable[float], trunc_grade=None, start=0):
        """
        Integer-power series ``sum_n coeffs[n - start] z**n``.

        ``trunc_grade`` defaults to the grade of the last supplied power.
        """
        coeffs = list(coeffs)
        arr = numpy.zeros(2 * len(coeffs) - 1 if coeffs else 0)
        arr[::2] = coeffs
        if trunc_grade is None:
            trunc_grade = 2 * (start + len(coeffs) - 1)
        return cls(2 * start, tuple(arr), trunc_grade)

    # ---------
    # accessors
    # ---------

    @property
    def is_zero(self):
        return len(self.coeffs) == 0

    def coeff(self, grade: int) -> float:
        """Coefficient at ``grade``; raises if the grade is not trusted."""
        if grade > self.trunc_grade:
            raise IndexError(
                f'grade {grade} beyond trusted window {self.trunc_grade}')
        if grade < self.min_grade:
            return 0.0
        return self.coeffs[grade - self.min_grade]

    def __getitem__(self, grade):
        return self.coeff(grade)

    def dense(self, lo: int, hi=None) -> numpy.ndarray:
        """Coefficients for grades ``lo..hi`` (default ``trunc_grade``)."""
        hi = self.trunc_grade if hi is None else hi
        if hi > self.trunc_grade:
            raise IndexError(
                f'grade {hi} beyond trusted window {self.trunc_grade}')
        if lo > self.min_grade and not self.is_zero and any(
                self.coeffs[:lo - self.min_grade]):
            raise ValueError('nonzero coefficients below requested window')
        out = numpy.zeros(max(hi - lo + 1, 0))
        for i, c in enumerate(self.coeffs):
            g = self.min_grade + i
            if lo <= g <= hi:
                out[g - lo] = c
        return out

    def powers(self, n_max=None) -> numpy.ndarray:
        """Coefficients of ``z**0 .. z**n_max`` of an integer-power series."""
        if not self.is_integer_power():
            raise ValueError('series has half-integer powers')
        if self.min_grade < 0 and not self.is_zero:
            raise ValueError('series has negative powers')
        if n_max is None:
            n_max = self.trunc_grade // 2
        return self.dense(0, 2 * n_max)[::2]

    def terms(self) -> dict:
        """Nonzero coefficients as ``{grade: coefficient}``."""
        return {self.min_grade + i: c
                for i, c in enumerate(self.coeffs) if c != 0.0}

    def is_integer_power(self, tol=0.0) -> bool:
        """True when every odd grade has a (near) zero coefficient."""
        return all(abs(c) <= tol for g, c in self.terms().items() if g % 2)

    def truncate(self, trunc_grade: int) -> 'HalfSeries':
        if trunc_grade > self.trunc_grade:
            raise ValueError('cannot extend the trusted window')
        return HalfSeries(self.min_grade, self.coeffs, trunc_grade)

    def shift(self, grades: int) -> 'HalfSeries':
        """Exact multiplication by ``z**(grades/2)``."""
        return HalfSeries(self.min_grade + grades, self.coeffs,
                          self.trunc_grade + grades)

    def scale(self, factor: float) -> 'HalfSeries':
        return HalfSeries(self.min_grade,
                          tuple(factor * c for c in self.coeffs),
                          self.trunc_grade)

    def flip_odd(self) -> 'HalfSeries':
        """Substitute ``sqrt(z) -> -sqrt(z)``: negate odd-grade terms."""
        return HalfSeries(self.min_grade,
                          tuple(-c if (self.min_grade + i) % 2 else c
                                for i, c in enumerate(self.coeffs)),
                          self.trunc_grade)

    def max_abs_diff(self, other: 'HalfSeries') -> float:
        """Largest coefficient difference over the common trusted window."""
        lo = min(self.min_grade, other.min_grade)
        hi = min(self.trunc_grade, other.trunc_grade)
        if hi < lo:
            return 0.0
        return float(numpy.max(numpy.abs(
            _window(self, lo, hi) - _window(other, lo, hi)), initial=0.0))

    def allclose(self, other: 'HalfSeries', tol=None) -> bool:
        """Coefficientwise :func:`close` over the common trusted window."""
        lo = min(self.min_grade, other.min_grade)
        hi = min(self.trunc_grade, other.trunc_grade)
        if hi < lo:
            return True
        return close(_window(self, lo, hi), _window(other, lo, hi), tol)

    # -------------
    # serialization
    # -------------

    def to_dict(self) -> dict:
        return {'min_grade': self.min_grade, 'coeffs': list(self.coeffs),
                'trunc_grade': self.trunc_grade}

    @classmethod
    def from_dict(cls, d: Mapping) -> 'HalfSeries':
        return cls(int(d['min_grade']), tuple(d['coeffs']),
                   int(d['trunc_grade']))

    # ---------
    # operators
    # ---------

    def __add__(self, other):
        if not isinstance(other, HalfSeries):
            other = HalfSeries.monomial(0, float(other), self.trunc_grade)
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, HalfSeries):
            return mul(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def __repr__(self):
        body = ' + '.join(f'{c:g}*z^({g}/2)' for g, c in self.terms().items())
        return f'HalfSeries({body or "0"} + O(z^({self.trunc_grade + 1}/2)))'


def _window(s: HalfSeries, lo: int, hi: int) -> numpy.ndarray:
    out = numpy.zeros(hi - lo + 1)
    for i, c in enumerate(s.coeffs):
        g = s.min_grade + i
        if lo <= g <= hi:
            out[g - lo] = c
    return out


# ==========
# Arithmetic
# ==========

def add(a: HalfSeries, b: HalfSeries) -> HalfSeries:
    """Coefficientwise sum, trusted up to the shorter of the two windows."""
    hi = min(a.trunc_grade, b.trunc_grade)
    lo = min(a.min_grade, b.min_grade, hi + 1)
    return HalfSeries(lo, tuple(_window(a, lo, hi) + _window(b, lo, hi)), hi)


def mul(a: HalfSeries, b: HalfSeries) -> HalfSeries:
    """Cauchy product on grades."""
    lo = a.min_grade + b.min_grade
    hi = min(a.trunc_grade + b.min_grade, b.trunc_grade + a.min_grade)
    if a.is_zero or b.is_zero:
        return HalfSeries.zero(hi)
    prod = numpy.convolve(numpy.asarray(a.coeffs), numpy.asarray(b.coeffs))
    return HalfSeries(lo, tuple(prod[:max(hi - lo + 1, 0)]), hi)


def reciprocal(a: HalfSeries) -> HalfSeries:
    """Multiplicative inverse ``1/a``; raises for the zero series."""
    if a.is_zero:
        raise ZeroDivisionError('non-invertible: zero series')
    u = numpy.asarray(a.coeffs) / a.coeffs[0]
    v = numpy.zeros(u.size)
    v[0] = 1.0
    for k in range(1, u.size):
        v[k] = -numpy.dot(u[1:k + 1], v[k - 1::-1])
    m = a.min_grade
    return HalfSeries(-m, tuple(v / a.coeffs[0]), a.trunc_grade - 2 * m)


def geometric(ratio: float, trunc_grade: int, start: int = 0) -> HalfSeries:
    """Exact integer-power series ``z**start / (1 - ratio*z)``."""
    n = max((trunc_grade - 2 * start) // 2 + 1, 0)
    return HalfSeries.from_powers(ratio ** numpy.arange(n), trunc_grade,
                                  start=start)


# ===========
# Composition
# ===========

def _substitute(outer_powers, inner: numpy.ndarray, hi: int) -> numpy.ndarray:
    """
    ``sum_n outer_powers[n] * inner**n`` on grades ``0..hi``.

    ``inner`` is dense from grade 0 and must vanish at grade 0.
    """
    out = numpy.zeros(hi + 1)
    inner = inner[:hi + 1]
    power = numpy.zeros(hi + 1)
    power[0] = 1.0
    for n, c in enumerate(outer_powers):
        if n > 0:
            power = numpy.convolve(power, inner)[:hi + 1]
            if not power.any():
                break
        if c != 0.0:
            out += c * power
    return out


def compose(outer: HalfSeries, inner: HalfSeries) -> HalfSeries:
    """
    Formal substitution ``outer(inner(z))``.

    ``outer`` must be an integer-power series without negative powers and
    ``inner`` must start at grade 1 or higher.
    """
    if not outer.is_integer_power():
        raise ValueError('outer series must be an integer-power series')
    if not outer.is_zero and outer.min_grade < 0:
        raise ValueError('outer series has negative powers')
    if inner.min_grade <= 0:
        raise ValueError('divergent composition: inner series has a '
                         'nonvanishing constant or negative-grade term')
    alphas = outer.powers()
    # first unknown outer term contributes at grade n_u * inner.min_grade
    n_u = outer.trunc_grade // 2 + 1
    hi = n_u * inner.min_grade - 1
    nonzero = [n for n in range(1, alphas.size) if alphas[n] != 0.0]
    if nonzero:
        hi = min(hi, (nonzero[0] - 1) * inner.min_grade + inner.trunc_grade)
    hi = max(hi, -1)
    inner_dense = numpy.zeros(hi + 1)
    if not inner.is_zero:
        top = min(hi, inner.trunc_grade)
        if top >= inner.min_grade:
            inner_dense[inner.min_grade:top + 1] = inner.dense(
                inner.min_grade, top)
    return HalfSeries(0, tuple(_substitute(alphas, inner_dense, hi)), hi)


def invert_unique(f: HalfSeries) -> HalfSeries:
    """
    Compositional inverse of an integer-power series with nonzero linear
    term.

    Returns ``g`` with ``compose(f, g) = z`` over the trusted window, solving
    for one coefficient of ``g`` per power of ``z``.
    """
    if not f.is_integer_power():
        raise ValueError('series has half-integer powers')
    if f.is_zero or f.min_grade > 2:
        raise ValueError('no unique inverse; use invert_two_branch')
    if f.min_grade < 2:
        raise ValueError('series has a constant or negative-power term')
    a = f.powers()
    N = a.size - 1
    b = numpy.zeros(N + 1)
    b[1] = 1.0 / a[1]
    inner = numpy.zeros(2 * N + 1)
    inner[2] = b[1]
    for n in range(2, N + 1):
        c = _substitute(a, inner, 2 * n)[2 * n]
        b[n] = -c / a[1]
        inner[2 * n] = b[n]
    return HalfSeries.from_powers(b, f.trunc_grade)


def _branch(alpha_grades: numpy.ndarray, beta1: float, K: int) -> numpy.ndarray:
    # alpha_grades[g]: coefficient of w**g in psi(w**2); beta dense from grade 0
    a2 = alpha_grades[4]
    beta = numpy.zeros(K + 1)
    beta[1] = beta1
    outer = alpha_grades[::2]
    for k in range(2, K + 1):
        c = _substitute(outer, beta, k + 1)[k + 1]
        beta[k] = -c / (2.0 * a2 * beta1)
    return beta


def invert_two_branch(f: HalfSeries):
    """
    The two compositional inverses, as series in ``sqrt(z)``, of
    ``f = a2 z**2 + a3 z**3 + ...`` with ``a2 > 0``.

    Returns ``(chi, chi_tilde)`` where ``chi`` has positive leading
    coefficient ``1/sqrt(a2)``.  Both branches are solved independently from
    their own leading coefficient, so the relation between them is a genuine
    check rather than a construction.
    """
    if not f.is_integer_power():
        raise ValueError('series has half-integer powers')
    if not f.is_zero and f.min_grade < 4:
        if f.min_grade == 2:
            raise ValueError('series has a linear term; use invert_unique')
        raise ValueError('series has a constant or negative-power term')
    a = f.powers()
    if a.size < 3 or a[2] == 0.0:
        raise ValueError('degenerate: second moment vanishes')
    if a[2] < 0.0:
        raise ValueError('not a positive-definite moment sequence')
    # psi as a series in w = sqrt(z): coefficient a_n at w**(2n)
    N = a.size - 1
    w_coeffs = numpy.zeros(2 * N + 1)
    w_coeffs[::2] = a
    K = N - 1
    root = 1.0 / math.sqrt(a[2])
    out = []
    for beta1 in (root, -root):
        beta = _branch(w_coeffs, beta1, K)
        out.append(HalfSeries(1, tuple(beta[1:]), K))
    return tuple(out)


def solve_outer_composition(inner: HalfSeries, target_trunc: int) -> HalfSeries:
    """
    The integer-power series ``psi`` with ``psi(inner(z)) = z``, where
    ``inner = b1 sqrt(z) + b2 z + ...``.

    The output is trusted up to ``min(target_trunc, 2 * (inner.trunc_grade
    + 1))``: the coefficient of ``z**n`` needs ``inner`` through grade
    ``n - 1``.
    """
    if inner.min_grade != 1:
        raise ValueError(
            f'unsupported leading grade {inner.min_grade}; expected 1')
    hi = min(int(target_trunc), 2 * (inner.trunc_grade + 1))
    n_max = hi // 2
    beta = numpy.zeros(n_max + 1)
    top = min(n_max, inner.trunc_grade)
    beta[1:top + 1] = inner.dense(1, top)
    b1 = beta[1]
    alpha = numpy.zeros(n_max + 1)
    # powers[m] = beta**m on grades 0..n_max
    powers = [None, beta.copy()]
    for m in range(2, n_max + 1):
        powers.append(numpy.convolve(powers[-1], beta)[:n_max + 1])
    for n in range(1, n_max + 1):
        rhs = 1.0 if n == 2 else 0.0
        rhs -= sum(alpha[m] * powers[m][n] for m in range(1, n))
        alpha[n] = rhs / b1 ** n
    return HalfSeries.from_powers(alpha, hi)
