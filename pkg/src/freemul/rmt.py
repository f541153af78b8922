"""
Monte Carlo spectra of products of independent random matrices.

Each trial draws a Gaussian Wigner or Wishart matrix ``A`` and an independent
Wishart matrix ``B``.  It collects the eigenvalues of the symmetric matrix
``B^(1/2) A B^(1/2)``, which has the same spectrum as ``AB``.
"""

from __future__ import annotations

import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy

from .density import DensityCurve

__all__ = [
    'ENSEMBLE_PAIRS', 'SimConfig', 'SpectrumSample', 'trial_rng',
    'sample_wigner', 'sample_wishart', 'product_spectrum',
    'compare_histogram', 'sample_from_density',
]

#: ensemble pair -> builtin density curve it should follow
ENSEMBLE_PAIRS = {
    'wigner_x_wishart': 'semicircle_x_freepoisson',
    'wishart_x_shifted_wishart': 'freepoisson_x_shiftedfreepoisson',
}


@dataclass(frozen=True)
class SimConfig:
    n: int = 50
    trials: int = 4000
    seed: int = 20070401
    ensemble_pair: str = 'wigner_x_wishart'
    bins: int = 100

    def __post_init__(self):
        if self.n < 2:
            raise ValueError('matrix size n must be >= 2')
        if self.trials < 1:
            raise ValueError('trials must be >= 1')
        if self.bins < 10:
            raise ValueError('bins must be >= 10')
        if self.ensemble_pair not in ENSEMBLE_PAIRS:
            raise ValueError(f'unknown ensemble pair {self.ensemble_pair!r}')
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError('seed must be a 64-bit unsigned integer')


@dataclass(frozen=True)
class SpectrumSample:
    eigenvalues: numpy.ndarray
    config: SimConfig

    def __post_init__(self):
        ev = numpy.asarray(self.eigenvalues, dtype=float)
        if ev.size != self.config.n * self.config.trials:
            raise ValueError('sample size does not match n * trials')
        if not numpy.all(numpy.isfinite(ev)):
            raise ValueError('nonfinite eigenvalue in sample')
        object.__setattr__(self, 'eigenvalues', ev)

    def moment(self, k: int) -> float:
        return float(numpy.mean(self.eigenvalues ** k))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write('eigenvalue\n')
        numpy.savetxt(buf, self.eigenvalues, fmt='%.17g')
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {'config': asdict(self.config),
                'eigenvalues': self.eigenvalues.tolist()}

    @classmethod
    def from_dict(cls, d) -> 'SpectrumSample':
        return cls(d['eigenvalues'], SimConfig(**d['config']))


def trial_rng(seed: int, trial: int) -> numpy.random.Generator:
    """Independent generator for one trial, derived from ``(seed, trial)``."""
    return numpy.random.default_rng(
        numpy.random.SeedSequence(int(seed), spawn_key=(int(trial),)))


def sample_wigner(n: int, rng: numpy.random.Generator) -> numpy.ndarray:
    """
    Gaussian symmetric matrix whose independent entries (upper triangle
    including the diagonal) all have variance ``1/n``.
    """
    if n < 2:
        raise ValueError('n must be >= 2')
    g = rng.standard_normal((n, n))
    upper = numpy.triu(g)
    return (upper + numpy.triu(g, 1).T) / numpy.sqrt(n)


def sample_wishart(n: int, rng: numpy.random.Generator,
                   shift: float = 0.0) -> numpy.ndarray:
    """``A A^T / n - shift * I`` with ``A`` square standard Gaussian."""
    if n < 2:
        raise ValueError('n must be >= 2')
    a = rng.standard_normal((n, n))
    w = a @ a.T / n
    if shift:
        w -= shift * numpy.eye(n)
    return w


def _psd_sqrt(b):
    lam, v = numpy.linalg.eigh(b)
    return (v * numpy.sqrt(numpy.clip(lam, 0.0, None))) @ v.T


def _trial(config: SimConfig, t: int) -> numpy.ndarray:
    rng = trial_rng(config.seed, t)
    if config.ensemble_pair == 'wigner_x_wishart':
        a = sample_wigner(config.n, rng)
        b = sample_wishart(config.n, rng)
    else:
        b = sample_wishart(config.n, rng)
        a = sample_wishart(config.n, rng, shift=1.0)
    r = _psd_sqrt(b)
    try:
        return numpy.linalg.eigvalsh(r @ a @ r)
    except numpy.linalg.LinAlgError as exc:
        raise RuntimeError(f'eigensolver failed in trial {t}: {exc}') from exc


def product_spectrum(config: SimConfig, threads: int = 1) -> SpectrumSample:
    """
    Eigenvalues of ``B^(1/2) A B^(1/2)`` over all trials, ordered by trial.

    The result does not depend on ``threads``.
    """
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda t: _trial(config, t),
                                  range(config.trials)))
    else:
        parts = [_trial(config, t) for t in range(config.trials)]
    return SpectrumSample(numpy.concatenate(parts), config)


def compare_histogram(sample: SpectrumSample, density: DensityCurve,
                      bins=None) -> dict:
    """
    Histogram of the sample against a density, on bins spanning the
    density grid.

    ``l1_distance`` is ``sum_b |count_b / N - P_b|`` where ``P_b`` is the
    density mass of bin ``b``, and ``ks_distance`` is the largest gap between
    the empirical CDF and the density CDF, normalised to unit mass.
    Eigenvalues outside the grid are put in the edge bins and counted in
    ``out_of_range_fraction``.
    """
    bins = sample.config.bins if bins is None else bins
    ev = sample.eigenvalues
    lo, hi = float(density.grid[0]), float(density.grid[-1])
    edges = numpy.linspace(lo, hi, bins + 1)
    outside = (ev < lo) | (ev > hi)
    counts, _ = numpy.histogram(numpy.clip(ev, lo, hi), bins=edges)
    frac = counts / ev.size
    cdf = density.cdf()
    mass = numpy.diff(numpy.interp(edges, density.grid, cdf))
    total = cdf[-1]
    width = edges[1] - edges[0]
    srt = numpy.sort(ev)
    model = numpy.interp(srt, density.grid, cdf) / total if total > 0 \
        else numpy.zeros_like(srt)
    emp_hi = numpy.arange(1, srt.size + 1) / srt.size
    emp_lo = numpy.arange(srt.size) / srt.size
    ks = float(max(numpy.max(numpy.abs(emp_hi - model)),
                   numpy.max(numpy.abs(emp_lo - model))))
    return {
        'l1_distance': float(numpy.sum(numpy.abs(frac - mass))),
        'ks_distance': ks,
        'out_of_range_fraction': float(numpy.mean(outside)),
        'density_mass': float(total),
        'bins': int(bins),
        'edges': edges.tolist(),
        'histogram': (frac / width).tolist(),
        'predicted': (mass / width).tolist(),
    }


def sample_from_density(density: DensityCurve, size: int,
                        rng: numpy.random.Generator) -> numpy.ndarray:
    """Inverse-CDF draws from a tabulated density."""
    cdf = density.cdf()
    cdf = cdf / cdf[-1]
    u = rng.random(size)
    keep = numpy.concatenate([[True], numpy.diff(cdf) > 0])
    return numpy.interp(u, cdf[keep], density.grid[keep])
