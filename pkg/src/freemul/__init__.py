"""
Free multiplicative convolution through the S-transform, including the case
of a centred factor, with a non-crossing-partition oracle, spectral density
extraction and random-matrix checks.
"""

__version__ = '0.1.0'

from .series import HalfSeries, TOLERANCE
from .transforms import (
    MomentSequence, CumulantSequence, STransformPair, MeanClass,
    s_transform, moments_from_s, moments_from_cumulants,
    cumulants_from_moments,
)
from .convolution import free_mult_convolve, CaseTag
from .laws import LawSpec, moments_of, cumulants_of, s_closed_form

__all__ = [
    'HalfSeries', 'TOLERANCE', 'MomentSequence', 'CumulantSequence',
    'STransformPair', 'MeanClass', 's_transform', 'moments_from_s',
    'moments_from_cumulants', 'cumulants_from_moments', 'free_mult_convolve',
    'CaseTag', 'LawSpec', 'moments_of', 'cumulants_of', 's_closed_form',
]
