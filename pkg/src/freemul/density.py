"""
Spectral densities by Stieltjes inversion.

The Cauchy transform ``g(z)`` of a law is either a root of a bivariate
polynomial ``P(g, z) = 0`` or, as an approximate fallback, a Jacobi continued
fraction built from moments.  The density is ``-Im g(x + i eps) / pi``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

import numpy

from .transforms import MomentSequence

__all__ = [
    'DEFAULT_EPSILON', 'DEFAULT_STEP', 'BUILTIN_CURVES', 'AlgebraicCurve',
    'DensityCurve', 'builtin_curve', 'support_grid', 'solve_density',
    'jacobi_from_moments', 'approx_density_from_moments', 'moment_cauchy',
]

DEFAULT_EPSILON = 1e-4
DEFAULT_STEP = 1e-3

# [i][j] -> coefficient of g**i z**j
BUILTIN_CURVES = {
    'semicircle_x_freepoisson': {(4, 2): 1.0, (1, 1): -1.0, (0, 0): 1.0},
    'freepoisson_x_shiftedfreepoisson': {
        (4, 2): 1.0, (3, 2): 1.0, (2, 1): -1.0, (1, 1): -1.0, (0, 0): 1.0},
}


# ===============
# Algebraic curve
# ===============

class AlgebraicCurve(object):
    """
    Bivariate polynomial ``P(g, z) = sum_ij c[i][j] g**i z**j``.

    Parameters
    ----------
    coeffs : array_like
        2D grid indexed by (power of ``g``, power of ``z``).
    """

    def __init__(self, coeffs):
        c = numpy.atleast_2d(numpy.asarray(coeffs, dtype=float))
        if c.ndim != 2:
            raise ValueError('curve coefficients must form a 2D grid')
        if not numpy.any(c):
            raise ValueError('curve polynomial is zero')
        if not numpy.any(c[1:]):
            raise ValueError('curve must have degree >= 1 in g')
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self) -> int:
        return int(numpy.flatnonzero(numpy.any(self.coeffs, axis=1))[-1])

    def g_polynomial(self, z) -> numpy.ndarray:
        """Coefficients in ``g`` (ascending) at each ``z``: shape (..., deg+1)."""
        z = numpy.asarray(z, dtype=complex)
        zp = z[..., None] ** numpy.arange(self.coeffs.shape[1])
        return zp @ self.coeffs[:self.degree + 1].T

    def __call__(self, g, z):
        g = numpy.asarray(g, dtype=complex)
        a = self.g_polynomial(z)
        return numpy.sum(a * g[..., None] ** numpy.arange(a.shape[-1]),
                         axis=-1)

    def roots(self, z) -> numpy.ndarray:
        """All roots in ``g`` at each ``z``, Newton-polished."""
        a = numpy.atleast_2d(self.g_polynomial(z))
        lead = a[:, -1]
        if numpy.any(lead == 0):
            return numpy.array([_roots_scalar(row) for row in a])
        # batched companion matrices
        d = a.shape[1] - 1
        comp = numpy.zeros((a.shape[0], d, d), dtype=complex)
        comp[:, 0, :] = -a[:, -2::-1] / lead[:, None]
        comp[:, numpy.arange(1, d), numpy.arange(d - 1)] = 1.0
        r = numpy.linalg.eigvals(comp)
        return _polish(a, r)

    def to_dict(self) -> dict:
        return {'coeffs': self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, d) -> 'AlgebraicCurve':
        return cls(d['coeffs'])

    def __eq__(self, other):
        return (isinstance(other, AlgebraicCurve)
                and self.coeffs.shape == other.coeffs.shape
                and numpy.array_equal(self.coeffs, other.coeffs))

    def __repr__(self):
        terms = [f'{c:g}*g^{i}*z^{j}'
                 for (i, j), c in numpy.ndenumerate(self.coeffs) if c]
        return f'AlgebraicCurve({" + ".join(terms)})'


def _roots_scalar(asc):
    r = numpy.roots(asc[::-1])
    return _polish(asc[None, :], r[None, :])[0] if r.size else r


def _polish(asc, r, steps=3):
    # Newton steps; the companion eigenvalues are already close
    k = numpy.arange(asc.shape[1])
    dk = numpy.arange(1, asc.shape[1])
    for _ in range(steps):
        p = numpy.einsum('nk,nrk->nr', asc, r[..., None] ** k)
        dp = numpy.einsum('nk,nrk->nr', asc[:, 1:] * dk,
                          r[..., None] ** (dk - 1))
        ok = numpy.abs(dp) > 0
        r = numpy.where(ok, r - numpy.divide(p, dp, where=ok,
                                             out=numpy.zeros_like(p)), r)
    return r


def builtin_curve(name: str) -> AlgebraicCurve:
    try:
        terms = BUILTIN_CURVES[name]
    except KeyError:
        raise ValueError(f'unknown curve {name!r}; expected one of '
                         f'{sorted(BUILTIN_CURVES)}') from None
    c = numpy.zeros((1 + max(i for i, _ in terms),
                     1 + max(j for _, j in terms)))
    for (i, j), v in terms.items():
        c[i, j] = v
    return AlgebraicCurve(c)


# =============
# Density curve
# =============

@dataclass
class DensityCurve:
    """
    Sampled density on a real grid.

    ``cauchy`` holds the complex Cauchy transform values the density was
    read from, when available.
    """

    grid: numpy.ndarray
    values: numpy.ndarray
    epsilon: float
    cauchy: Optional[numpy.ndarray] = None
    approximate: bool = False

    def __post_init__(self):
        self.grid = numpy.asarray(self.grid, dtype=float)
        self.values = numpy.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ValueError('grid and values must be 1D of equal length')
        if numpy.any(self.values < 0):
            raise ValueError('density values must be nonnegative')

    def integral(self) -> float:
        return float(numpy.trapezoid(self.values, self.grid))

    def moment(self, n: int) -> float:
        return float(numpy.trapezoid(self.grid ** n * self.values, self.grid))

    def cdf(self) -> numpy.ndarray:
        """Cumulative trapezoidal integral at the grid points."""
        inc = 0.5 * (self.values[1:] + self.values[:-1]) * numpy.diff(
            self.grid)
        return numpy.concatenate([[0.0], numpy.cumsum(inc)])

    def support(self, threshold=1e-3):
        """Smallest and largest abscissa where the density exceeds threshold."""
        idx = numpy.flatnonzero(self.values > threshold)
        if idx.size == 0:
            return None
        return float(self.grid[idx[0]]), float(self.grid[idx[-1]])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(['x', 'density'])
        for x, v in zip(self.grid, self.values):
            w.writerow([repr(float(x)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, epsilon=DEFAULT_EPSILON) -> 'DensityCurve':
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls([float(r['x']) for r in rows],
                   [float(r['density']) for r in rows], epsilon)

    def to_dict(self) -> dict:
        return {'x': self.grid.tolist(), 'density': self.values.tolist(),
                'epsilon': self.epsilon, 'approximate': self.approximate}

    @classmethod
    def from_dict(cls, d) -> 'DensityCurve':
        return cls(d['x'], d['density'], d['epsilon'],
                   approximate=d.get('approximate', False))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def support_grid(lo: float, hi: float, step: float = DEFAULT_STEP):
    """
    Cell-centred abscissae ``lo + (k + 1/2) step`` covering ``[lo, hi]``.

    Integer multiples of ``step`` (in particular 0) sit on cell boundaries,
    so the grid never samples an integrable spike at such a point.
    """
    if not hi > lo or step <= 0:
        raise ValueError('need lo < hi and step > 0')
    n = int(round((hi - lo) / step))
    return lo + (numpy.arange(n) + 0.5) * step


def _check_grid(grid, epsilon):
    grid = numpy.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError('grid must be a nonempty 1D array')
    if numpy.any(numpy.diff(grid) <= 0):
        raise ValueError('grid must be strictly increasing')
    if not epsilon > 0:
        raise ValueError('epsilon must be positive')
    return grid


# ================
# Curve inversion
# ================

def _nearest(r, g0):
    """Root nearest ``g0`` and whether it is clearly the right one."""
    d = numpy.abs(r - g0)
    order = numpy.argsort(d)
    d1 = d[order[0]]
    d2 = d[order[1]] if r.size > 1 else numpy.inf
    radius = 0.05 * max(1.0, abs(g0))
    return r[order[0]], d1, (d2 >= 4.0 * d1 and d1 <= radius)


def _step(r1, rm, g0):
    # accept a step only if going through the midpoint picks the same root
    g1, _, ok1 = _nearest(r1, g0)
    if not ok1:
        return None
    gm, _, okm = _nearest(rm, g0)
    if not okm:
        return None
    g1m, _, ok = _nearest(r1, gm)
    return g1 if ok and g1m == g1 else None


def _continue(curve, z0, z1, g0, depth=0, max_depth=40):
    zm = 0.5 * (z0 + z1)
    r1 = curve.roots(z1)[0]
    g1 = _step(r1, curve.roots(zm)[0], g0)
    if g1 is not None:
        return g1
    if depth < max_depth:
        gm = _continue(curve, z0, zm, g0, depth + 1, max_depth)
        return _continue(curve, zm, z1, gm, depth + 1, max_depth)
    g1, d1, _ = _nearest(r1, g0)
    if d1 > 0.25 * max(1.0, abs(g0)):
        raise RuntimeError(
            f'root tracking failed at x = {z1.real:.6g}: no root within the '
            f'continuation radius')
    return g1


def solve_density(curve: AlgebraicCurve, grid, epsilon=DEFAULT_EPSILON):
    """
    Density from an algebraic equation for the Cauchy transform.

    The physical root is picked at the rightmost abscissa as the one
    closest to ``1/z``, then followed leftwards by continuation.  A step is
    bisected unless the nearest root is clearly separated from the others
    and the same root is reached by going through the midpoint.
    """
    grid = _check_grid(grid, epsilon)
    z = grid + 1j * epsilon
    all_roots = curve.roots(z)
    mid_roots = curve.roots(0.5 * (z[1:] + z[:-1]))
    g = numpy.empty(grid.size, dtype=complex)
    r = all_roots[-1]
    g[-1] = r[numpy.argmin(numpy.abs(r - 1.0 / z[-1]))]
    for k in range(grid.size - 2, -1, -1):
        gk = _step(all_roots[k], mid_roots[k], g[k + 1])
        g[k] = gk if gk is not None else \
            _continue(curve, z[k + 1], z[k], g[k + 1])
    values = numpy.maximum(-g.imag / numpy.pi, 0.0)
    return DensityCurve(grid, values, epsilon, cauchy=g)


# ==========================
# Moment-based approximation
# ==========================

def jacobi_from_moments(m: MomentSequence, depth: int):
    """
    Three-term recurrence coefficients ``(a_0..a_{d-1}, b_1..b_d)``.

    Uses the Cholesky factor of the ``(d+1) x (d+1)`` Hankel matrix
    (Golub-Welsch), which needs moments up to ``2d``.  The ``b`` are the
    squared off-diagonal entries.
    """
    h = m.hankel(depth)
    n = depth + 1
    r = numpy.zeros((n, n))
    scale = max(1.0, float(numpy.max(numpy.abs(h))))
    for i in range(n):
        piv = h[i, i] - numpy.dot(r[:i, i], r[:i, i])
        if piv <= 1e-12 * scale:
            raise ValueError(f'moment sequence not positive to required '
                             f'depth (Hankel breakdown at depth {i})')
        r[i, i] = numpy.sqrt(piv)
        for j in range(i + 1, n):
            r[i, j] = (h[i, j] - numpy.dot(r[:i, i], r[:i, j])) / r[i, i]
    a = numpy.zeros(depth)
    b = numpy.zeros(depth)
    for j in range(depth):
        a[j] = r[j, j + 1] / r[j, j]
        if j > 0:
            a[j] -= r[j - 1, j] / r[j - 1, j - 1]
        b[j] = (r[j + 1, j + 1] / r[j, j]) ** 2
    return a, b


def approx_density_from_moments(m: MomentSequence, grid,
                                epsilon=DEFAULT_EPSILON, depth=None):
    """
    Approximate density from finitely many moments.

    Jacobi coefficients from the Hankel matrix feed a continued fraction for
    the Cauchy transform, closed with a square-root terminator that repeats
    the deepest coefficients.  The result is flagged ``approximate``.
    """
    grid = _check_grid(grid, epsilon)
    if m.order < 4:
        raise ValueError('need at least 4 moments')
    depth = m.order // 2 if depth is None else depth
    a, b = jacobi_from_moments(m, depth)
    z = grid + 1j * epsilon
    g = _cf_cauchy_full(a, b, z)
    values = numpy.maximum(-g.imag / numpy.pi, 0.0)
    return DensityCurve(grid, values, epsilon, cauchy=g, approximate=True)


def _cf_cauchy_full(a, b, z):
    # g = 1/(z - a0 - b1/(z - a1 - ... - b_d t)); the tail t repeats
    # (a_{d-1}, b_d) and is the semicircle-type root decaying like 1/z
    w = z - a[-1]
    r = numpy.sqrt(b[-1])
    t = (w - numpy.sqrt(w - 2.0 * r) * numpy.sqrt(w + 2.0 * r)) / (2.0 * b[-1])
    for k in range(a.size - 1, -1, -1):
        t = 1.0 / (z - a[k] - b[k] * t)
    return t


def moment_cauchy(m: MomentSequence, z):
    """Truncated expansion ``sum_{n=0}^{N} m_n / z**(n+1)`` at large ``|z|``."""
    z = numpy.asarray(z, dtype=complex)
    full = numpy.concatenate([[1.0], m.moments])
    return sum(c / z ** (n + 1) for n, c in enumerate(full))
