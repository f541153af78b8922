"""
Command-line interface.

::

    freemul moments    --law '{"kind": "Semicircle", "variance": 1}' --order 6
    freemul stransform --law '{"kind": "FreePoisson", "rate": 1}'
    freemul convolve   --a '{"kind": "Semicircle"}' --b '{"kind": "FreePoisson"}'
    freemul density    --curve semicircle_x_freepoisson > density.csv
    freemul simulate   --pair wigner_x_wishart --eigs-out eigs.csv
    freemul verify     --a '{"kind": "Semicircle"}' --b '{"kind": "FreePoisson"}'

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy

from . import __version__
from .convolution import (
    branch_residual, free_mult_convolve, verify_proof_identities,
)
from .density import (
    BUILTIN_CURVES, DEFAULT_EPSILON, DEFAULT_STEP, AlgebraicCurve,
    approx_density_from_moments, builtin_curve, solve_density, support_grid,
)
from .laws import LawSpec, moments_of
from .oracle import MAX_ORDER, mixed_moment_xy
from .rmt import (
    ENSEMBLE_PAIRS, SimConfig, compare_histogram, product_spectrum,
)
from .series import TOLERANCE
from .transforms import (
    DEFAULT_ORDER, MomentSequence, cumulants_from_moments, s_transform,
)

SEED_ENV = 'FREEMUL_SEED'

#: plotting windows that cover the support of the builtin curves
WINDOWS = {
    'semicircle_x_freepoisson': (-3.5, 3.5),
    'freepoisson_x_shiftedfreepoisson': (-3.0, 4.5),
}


class InputError(Exception):
    pass


def _load_json(text: str):
    """Inline JSON, or ``@path`` / an existing path to a JSON file."""
    if text.startswith('@'):
        text = Path(text[1:]).read_text()
    elif not text.lstrip().startswith(('{', '[')) and Path(text).is_file():
        text = Path(text).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f'malformed JSON: {exc}') from None


def _moments_input(text: str, order: int) -> MomentSequence:
    d = _load_json(text)
    if not isinstance(d, dict):
        raise InputError('expected a JSON object (law spec or moments)')
    if 'moments' in d:
        m = MomentSequence.from_dict(d)
        if m.order < order:
            raise InputError(f'{m.order} moments supplied, {order} needed')
        return m.truncate(order)
    return moments_of(LawSpec.from_dict(d), order)


def _fmt(v: float) -> str:
    v = 0.0 if abs(v) < 1e-12 else float(v)
    return f'{v:.15g}'


def _emit(args, text: str):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# ========
# Commands
# ========

def cmd_moments(args):
    m = _moments_input(args.law, args.order)
    if args.format == 'json':
        _emit(args, json.dumps(m.to_dict()) + '\n')
    else:
        _emit(args, ','.join(_fmt(v) for v in m.moments) + '\n')
    return 0


def cmd_stransform(args):
    s = s_transform(_moments_input(args.law, args.order))
    _emit(args, json.dumps(s.to_dict(), indent=2) + '\n')
    return 0


def cmd_convolve(args):
    ma = _moments_input(args.a, args.order)
    mb = _moments_input(args.b, args.order)
    res = free_mult_convolve(ma, mb, args.order, tol=args.tol)
    if args.format == 'csv':
        _emit(args, res.case_tag.value + '\n'
              + ','.join(_fmt(v) for v in res.moments.moments) + '\n')
    else:
        _emit(args, json.dumps(res.to_dict(), indent=2) + '\n')
    return 0


def _curve_from_args(args):
    if args.curve_file:
        return AlgebraicCurve.from_dict(_load_json(args.curve_file))
    return builtin_curve(args.curve)


def cmd_density(args):
    if args.moments:
        lo = -5.0 if args.xmin is None else args.xmin
        hi = 5.0 if args.xmax is None else args.xmax
        m = _moments_input(args.moments, args.order)
        d = approx_density_from_moments(m, support_grid(lo, hi, args.step),
                                        args.epsilon)
    else:
        if not args.curve and not args.curve_file:
            raise InputError('give --curve, --curve-file or --moments')
        default = WINDOWS.get(args.curve, (-5.0, 5.0))
        lo = default[0] if args.xmin is None else args.xmin
        hi = default[1] if args.xmax is None else args.xmax
        d = solve_density(_curve_from_args(args),
                          support_grid(lo, hi, args.step), args.epsilon)
    _emit(args, d.to_json() + '\n' if args.format == 'json' else d.to_csv())
    return 0


def cmd_simulate(args):
    seed = args.seed
    if os.environ.get(SEED_ENV):
        seed = int(os.environ[SEED_ENV])
    config = SimConfig(args.n, args.trials, seed, args.pair, args.bins)
    sample = product_spectrum(config, threads=args.threads)
    if args.eigs_out:
        Path(args.eigs_out).write_text(sample.to_csv())
    name = args.curve or ENSEMBLE_PAIRS[args.pair]
    curve = (AlgebraicCurve.from_dict(_load_json(args.curve_file))
             if args.curve_file else builtin_curve(name))
    default = WINDOWS.get(name, (-5.0, 5.0))
    lo = default[0] if args.xmin is None else args.xmin
    hi = default[1] if args.xmax is None else args.xmax
    density = solve_density(curve, support_grid(lo, hi, args.step),
                            args.epsilon)
    hist = compare_histogram(sample, density)
    if args.hist_out:
        Path(args.hist_out).write_text(json.dumps(hist))
    report = {
        'config': {'n': config.n, 'trials': config.trials,
                   'seed': config.seed, 'ensemble_pair': config.ensemble_pair,
                   'bins': config.bins},
        'l1_distance': hist['l1_distance'],
        'ks_distance': hist['ks_distance'],
        'out_of_range_fraction': hist['out_of_range_fraction'],
        'empirical_moments': [sample.moment(k) for k in range(1, 5)],
    }
    _emit(args, json.dumps(report, indent=2) + '\n')
    return 0


def cmd_verify(args):
    ma = _moments_input(args.a, args.order)
    mb = _moments_input(args.b, args.order)
    report = verify_proof_identities(ma, mb, args.order, tol=args.tol)
    out = report.to_dict()
    # branch disagreement is reported below rather than raised
    res = free_mult_convolve(ma, mb, args.order, tol=numpy.inf)
    out['case_tag'] = res.case_tag.value
    if res.s_product is not None:
        out['branch_residual'] = branch_residual(ma, mb, args.order)
    ka, kb = cumulants_from_moments(ma), cumulants_from_moments(mb)
    oracle = [mixed_moment_xy(ka, kb, '(xy)^n', n)
              for n in range(1, min(args.order, MAX_ORDER // 2) + 1)]
    s_route = res.moments.moments[:len(oracle)]
    diff = numpy.abs(numpy.subtract(oracle, s_route))
    out['oracle_residual'] = float(numpy.max(
        diff / numpy.maximum(1.0, numpy.abs(oracle)), initial=0.0))
    passed = (report.passed and out.get('branch_residual', 0.0) < args.tol
              and out['oracle_residual'] < args.tol)
    out['passed'] = passed
    _emit(args, json.dumps(out, indent=2) + '\n')
    return 0 if passed else 1


# ======
# Parser
# ======

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog='freemul',
        description='Free multiplicative convolution via the S-transform.')
    p.add_argument('--version', action='version', version=__version__)
    sub = p.add_subparsers(dest='command', required=True)

    def common(sp, order=DEFAULT_ORDER, fmt='json'):
        sp.add_argument('--order', type=int, default=order)
        sp.add_argument('--tol', type=float, default=TOLERANCE)
        sp.add_argument('--format', choices=('json', 'csv'), default=fmt)
        sp.add_argument('--output', '-o', default=None)

    sp = sub.add_parser('moments', help='moments of a law')
    sp.add_argument('--law', required=True,
                    help='law spec JSON (inline, @file or path)')
    common(sp, fmt='csv')
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser('stransform', help='S-transform of a law or moments')
    sp.add_argument('--law', required=True)
    common(sp)
    sp.set_defaults(func=cmd_stransform)

    for name, func, order, hlp in (
            ('convolve', cmd_convolve, DEFAULT_ORDER, 'moments of x*y'),
            ('verify', cmd_verify, 8, 'identity and branch checks')):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument('--a', required=True,
                        help='law spec or {"moments": [...]} for x')
        sp.add_argument('--b', required=True,
                        help='law spec or {"moments": [...]} for y')
        common(sp, order=order)
        sp.set_defaults(func=func)

    def grid_flags(sp):
        sp.add_argument('--curve', choices=sorted(BUILTIN_CURVES))
        sp.add_argument('--curve-file',
                        help='JSON {"coeffs": [[...], ...]} indexed [g][z]')
        sp.add_argument('--xmin', type=float, default=None)
        sp.add_argument('--xmax', type=float, default=None)
        sp.add_argument('--step', type=float, default=DEFAULT_STEP)
        sp.add_argument('--epsilon', type=float, default=DEFAULT_EPSILON)

    sp = sub.add_parser('density', help='density as x,density CSV')
    grid_flags(sp)
    sp.add_argument('--moments', default=None,
                    help='approximate from a law spec or moments instead')
    common(sp, fmt='csv')
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser('simulate', help='Monte Carlo product spectrum')
    sp.add_argument('--pair', choices=sorted(ENSEMBLE_PAIRS),
                    default='wigner_x_wishart')
    sp.add_argument('--n', type=int, default=50)
    sp.add_argument('--trials', type=int, default=4000)
    sp.add_argument('--seed', type=int, default=SimConfig.seed)
    sp.add_argument('--bins', type=int, default=100)
    sp.add_argument('--threads', type=int, default=1)
    sp.add_argument('--eigs-out', default=None)
    sp.add_argument('--hist-out', default=None)
    grid_flags(sp)
    sp.add_argument('--output', '-o', default=None)
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except (InputError, ValueError, KeyError, IndexError, OSError) as exc:
        parser.exit(2, f'freemul {args.command}: error: {exc}\n')
    except (ArithmeticError, RuntimeError) as exc:
        parser.exit(1, f'freemul {args.command}: failed: {exc}\n')


if __name__ == '__main__':
    sys.exit(main())
