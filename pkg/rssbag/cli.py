"""The `rssbag` command line.

    rssbag benchmark --data blood.csv --T 11 --repeats 5 --seed 7
    rssbag benchmark --manifest ledger.manifest.json --workers 4
    rssbag train --data train.csv --out model/ --sampler RSS --seed 1
    rssbag predict --model model/ --data x.csv
    rssbag variance-lab --dist bernoulli:0.5 --loss exp --K 2 --m 10 --trials 100000
    rssbag bound --M 1 --n 100 --delta 0.05 --variance 0.01
    rssbag stats friedman --input ledger.csv --metric accuracy
    rssbag synth --kind twonorm --n 2000 --d 20 --out twonorm.csv

Every flag can also come from the environment as `RSSBAG_<COMMAND>_<FLAG>`
(`train --batch-size` reads `RSSBAG_TRAIN_BATCH_SIZE`, `variance-lab --m` reads
`RSSBAG_VARIANCE_LAB_M`); a flag on the command line wins. `--manifest-out` is
shared by every command and reads `RSSBAG_MANIFEST_OUT`.
Reports are JSON on stdout unless `--out` names a file. Any `rssbag` error
ends the process with status 2 after a single `error[<code>]: <message>` line
on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Final, List, Optional, Sequence

import pandas as pd

from . import __version__
from .concurrent.pool import default_workers
from .data.dataset import Standardization, load_csv, load_features, standardize
from .ensemble.ensemble import DEFAULT_T, EnsembleConfig, EnsembleModel, Fusion, fuse_predict, train_ensemble
from .evaluation.ledger import METRICS, compare_methods, rank_table, read_ledger, to_frame, write_ledger
from .evaluation.stats import cd_diagram, friedman_tau_f, nemenyi_cd
from .experiments.benchmark import BenchmarkConfig, BenchmarkResult, k_sweep, run_baselines, run_benchmark
from .experiments.manifest import RunManifest
from .experiments.synthetic import SyntheticKind, generate
from .lab.bound import bound_value
from .lab.distribution import FiniteMarginDistribution
from .lab.variance import decay_table, exact_moments, gap_report
from .losses import LossKind
from .mlp.config import BATCH_SIZE, EPOCHS, HIDDEN, LEARNING_RATE, MlpConfig
from .numerics.rng import RngStream
from .sampling.sampler import SamplerConfig, SamplingKind
from ._algae.exceptions import ContractViolation, RssbagException, StructuralError
from ._algae.strings import envname
from ._algae.utils import raiseif

logger = logging.getLogger(__name__)

ENV_PREFIX: Final[str] = 'RSSBAG_'
EXIT_ERROR: Final[int] = 2
SCALER: Final[str] = 'standardization.json'
RUN_MANIFEST: Final[str] = 'run.json'
TRUE: Final = ('1', 'true', 'yes', 'on')


def _option(parser: argparse.ArgumentParser, command: Optional[str], *flags: str, **kwargs):
    """`add_argument` whose default may come from `RSSBAG_<COMMAND>_<FLAG>`, or `RSSBAG_<FLAG>` for shared flags."""
    prefix = envname(ENV_PREFIX, command) + '_' if command else ENV_PREFIX
    name = envname(prefix, flags[0])
    value = os.environ.get(name)

    if value is not None:
        if kwargs.get('action') == 'store_true':
            kwargs['default'] = value.strip().lower() in TRUE
        elif kwargs.get('nargs') in ('+', '*'):
            convert = kwargs.get('type', str)
            try:
                kwargs['default'] = [convert(item) for item in value.split()]
            except (ValueError, argparse.ArgumentTypeError) as error:
                raise ContractViolation(f':[{name}={value}]: {error}') from error
        else:
            kwargs['default'] = value

        kwargs['required'] = False

    parser.add_argument(*flags, **kwargs)


def _set_size(value: str) -> Optional[int]:
    if str(value).lower() == 'auto':
        return None

    try:
        K = int(value)
    except ValueError:
        K = 0

    if K < 1:
        raise argparse.ArgumentTypeError(f'expected auto or a positive integer, got {value!r}')

    return K


def _positive(value: str) -> int:
    number = int(value)

    if number < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {value!r}')

    return number


def _expand(value: str, parse, both: tuple) -> tuple:
    return tuple(parse(v) for v in (both if value == 'both' else (value,)))


def _emit(report, out: Optional[Path] = None):
    text = json.dumps(report, indent=2) + '\n'

    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding='utf-8')


def _record(path: Optional[Path], command: str, config: dict, seed: Optional[int], inputs: Sequence,
            outputs: Sequence, start: float, timings: dict = None):
    if path is None:
        return

    manifest = RunManifest.of(command, config, seed, inputs)
    manifest.outputs = [str(output) for output in outputs] + [str(path)]
    manifest.wall_clock = time.perf_counter() - start
    manifest.timings = dict(timings or {})
    manifest.save(path)

    logger.info('manifest written to %s', path)


def _mlp_config(args) -> MlpConfig:
    """Hyperparameters only; widths are set once the data is known."""
    return MlpConfig(1, 2, tuple(args.hidden), not args.no_batch_norm, args.dropout, args.clip_norm,
                     args.learning_rate, args.epochs, args.batch_size)


def _parse_dist(value: str) -> FiniteMarginDistribution:
    kind, _, argument = value.partition(':')

    if kind == 'bernoulli':
        try:
            return FiniteMarginDistribution.bernoulli(float(argument))
        except ValueError as error:
            raise ContractViolation(f':[{value}]: Expected bernoulli:<p>.') from error
    if kind == 'table':
        return FiniteMarginDistribution.from_table(argument)

    raise ContractViolation(f':[{value}]: Expected bernoulli:<p> or table:<file.json>.')


def cmd_benchmark(args) -> int:
    start = time.perf_counter()

    if args.manifest is not None:
        recorded = RunManifest.load(args.manifest)
        raiseif(
            recorded.command != 'benchmark',
            StructuralError(f':[{args.manifest}]: Recorded command is {recorded.command}, not benchmark.')
        )
        recorded.verify_inputs()
        settings = recorded.config
    else:
        raiseif(
            args.seed is None,
            ContractViolation(':[--seed]: benchmark needs an explicit seed.')
        )
        raiseif(
            not args.data,
            ContractViolation(':[--data]: benchmark needs at least one dataset.')
        )

        config = BenchmarkConfig(args.seed, args.T, args.repeats, args.ratio, args.K, args.cycles,
                                 tuple(SamplingKind.parse(k) for k in args.kinds),
                                 _expand(args.loss, LossKind.parse, ('exp', 'log')),
                                 _expand(args.fusion, Fusion.parse, ('vote', 'mean')), _mlp_config(args))
        settings = {
            'benchmark': config.to_dict(),
            'data': [str(Path(path).resolve()) for path in args.data],
            'label_column': args.label_column,
            'baselines': args.baselines,
            'k_sweep': list(args.k_sweep or []),
            'out': str(args.out or 'ledger.csv')
        }

    config = BenchmarkConfig.from_dict(settings['benchmark'])
    out = Path(args.out or settings['out'])
    result = BenchmarkResult()

    for path in settings['data']:
        data = load_csv(path, settings['label_column'])
        logger.info('%s: %d rows, %d features, %d classes', data.name, len(data), data.dim, data.class_count)

        result.extend(run_benchmark(data, config, args.workers))
        if settings['baselines']:
            result.extend(run_baselines(data, config, args.workers))
        if settings['k_sweep']:
            result.extend(k_sweep(data, settings['k_sweep'], config, args.workers))

    out.parent.mkdir(parents=True, exist_ok=True)
    write_ledger(out, result.records)

    manifest = args.manifest_out or out.with_suffix('.manifest.json')
    _record(manifest, 'benchmark', settings, config.seed, settings['data'], [out], start, result.timings)

    frame = to_frame(result.records)
    _emit({
        'ledger': str(out),
        'manifest': str(manifest),
        'rows': len(result.records),
        'methods': result.methods(),
        'mean_accuracy': frame.groupby('method', sort=False)['accuracy'].mean().to_dict(),
        'mean_macro_f1': frame.groupby('method', sort=False)['macro_f1'].mean().to_dict()
    })

    return 0


def cmd_train(args) -> int:
    start = time.perf_counter()
    data = load_csv(args.data, args.label_column)
    scaler = None

    if not args.no_standardize:
        data, _, scaler = standardize(data)

    config = EnsembleConfig(_mlp_config(args), SamplerConfig(args.sampler, args.K, args.cycles), args.T,
                            args.loss, args.fusion, args.seed)
    K, m = config.sampler.resolve(len(data))
    model = train_ensemble(config, data, workers=args.workers)
    model.save(args.out)

    if scaler is not None:
        (args.out / SCALER).write_text(json.dumps(scaler.to_dict()), encoding='utf-8')

    settings = {'ensemble': config.to_dict(), 'data': str(Path(args.data).resolve()),
                'label_column': args.label_column, 'standardize': scaler is not None}
    _record(args.manifest_out or args.out / RUN_MANIFEST, 'train', settings, args.seed, [args.data], [args.out], start)

    _emit({'model': str(args.out), 'T': len(model), 'K': K, 'm': m, 'sampler': config.sampler.kind.value,
           'loss': config.loss.value, 'fusion': config.fusion.value, 'plans_digest': model.plans_digest})

    return 0


def cmd_predict(args) -> int:
    start = time.perf_counter()
    model = EnsembleModel.load(args.model)
    features = load_features(args.data, model.models[0].config.input_dim, args.label_column)

    if (args.model / SCALER).is_file():
        features = Standardization.from_dict(json.loads((args.model / SCALER).read_text(encoding='utf-8'))).transform(features)

    fused = fuse_predict(model, features, args.fusion, args.upto)
    frame = pd.DataFrame({'label': [model.classes[int(label)] for label in fused.labels]})

    if args.out is None:
        frame.to_csv(sys.stdout, index=False, lineterminator='\n')
    else:
        frame.to_csv(args.out, index=False, lineterminator='\n')

    _record(args.manifest_out, 'predict', {'model': str(args.model), 'fusion': args.fusion, 'upto': args.upto},
            None, [args.data], [args.out] if args.out else [], start)

    return 0


def cmd_variance_lab(args) -> int:
    start = time.perf_counter()
    dist = _parse_dist(args.dist)
    loss = LossKind.parse(args.loss)
    rng = RngStream(args.seed)

    report = gap_report(loss, dist, args.K, args.m, args.trials, rng.child(0), args.workers).to_dict()
    report['exact_moments'] = {
        kind.value: asdict(exact_moments(kind, loss, dist, args.K, args.m)) for kind in SamplingKind
    }

    if args.decay:
        report['decay'] = decay_table(loss, dist, args.K, args.decay, args.trials, rng.child(1), args.workers)

    _emit(report, args.out)
    _record(args.manifest_out, 'variance-lab', {'dist': args.dist, 'loss': loss.value, 'K': args.K, 'm': args.m,
            'trials': args.trials, 'decay': args.decay}, args.seed, [], [args.out] if args.out else [], start)

    return 0


def cmd_bound(args) -> int:
    start = time.perf_counter()
    report = bound_value(args.M, args.n, args.delta, args.variance, args.approx_error)
    settings = {'M': args.M, 'N': args.n, 'delta': args.delta, 'variance': args.variance,
                'approx_error': args.approx_error}

    _emit({**settings, **report.to_dict()}, args.out)
    _record(args.manifest_out, 'bound', settings, None, [], [args.out] if args.out else [], start)

    return 0


def _paired_methods(methods: Sequence[str]) -> List[tuple]:
    """Every `RSS-...` method with its `SRS-...` twin."""
    return [(method, 'SRS' + method[3:]) for method in methods
            if method.startswith('RSS-') and 'SRS' + method[3:] in methods]


def cmd_stats(args) -> int:
    start = time.perf_counter()
    inputs = [args.input] if args.input else []

    if args.test == 'nemenyi' and args.input is None:
        raiseif(
            args.k is None or args.n is None,
            ContractViolation(':[nemenyi]: Give --input or both --k and --n.')
        )
        report = {'k': args.k, 'n': args.n, 'alpha': args.alpha, 'cd': nemenyi_cd(args.k, args.n, args.alpha)}
    else:
        raiseif(
            args.input is None,
            ContractViolation(f':[{args.test}]: --input ledger is required.')
        )
        frame = read_ledger(args.input)

        if args.test == 'ttest':
            pairs = [(args.a, args.b)] if args.a and args.b else _paired_methods(sorted(frame['method'].unique()))
            raiseif(
                not pairs,
                ContractViolation(':[ttest]: No RSS/SRS method pairs in the ledger; name them with --a and --b.')
            )
            report = {'metric': args.metric, 'alpha': args.alpha, 'comparisons': [
                row for a, b in pairs for row in compare_methods(frame, a, b, args.metric, args.alpha)
            ]}
        else:
            table = rank_table(frame, args.metric)
            n, k = table.shape
            report = {'metric': args.metric, 'alpha': args.alpha, 'n': n, 'k': k,
                      'mean_ranks': dict(zip(table.methods, table.mean_ranks.tolist()))}

            if args.test == 'friedman':
                report.update(friedman_tau_f(table, args.alpha).to_dict())
            else:
                rows = cd_diagram(table, args.alpha)
                report.update(cd=rows[0]['cd'], diagram=rows)

    _emit(report, args.out)
    _record(args.manifest_out, f'stats {args.test}', {'metric': args.metric, 'alpha': args.alpha}, None,
            inputs, [args.out] if args.out else [], start)

    return 0


def cmd_synth(args) -> int:
    start = time.perf_counter()
    data = generate(args.kind, args.n, args.d, args.classes, args.seed)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    data.to_csv(args.out)

    settings = {'kind': SyntheticKind.parse(args.kind).value, 'n': args.n, 'd': args.d, 'classes': data.class_count}
    _emit({'out': str(args.out), **settings})
    _record(args.manifest_out, 'synth', settings, args.seed, [], [args.out], start)

    return 0


def _mlp_options(parser: argparse.ArgumentParser, command: str):
    _option(parser, command, '--hidden', type=_positive, nargs='+', default=list(HIDDEN))
    _option(parser, command, '--epochs', type=int, default=EPOCHS)
    _option(parser, command, '--batch-size', type=_positive, default=BATCH_SIZE)
    _option(parser, command, '--learning-rate', type=float, default=LEARNING_RATE)
    _option(parser, command, '--no-batch-norm', action='store_true', help='disable batch normalization')
    _option(parser, command, '--dropout', type=float, default=0.0)
    _option(parser, command, '--clip-norm', type=float, default=None)


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog='rssbag', description='Ranked-set-sampling bagging of MLPs.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for progress, -vv for debug')

    common = argparse.ArgumentParser(add_help=False)
    _option(common, None, '--manifest-out', type=Path, default=None, help='where to write the run manifest')

    commands = parser.add_subparsers(dest='command', required=True)

    benchmark = commands.add_parser('benchmark', parents=[common], help='SRS vs RSS on repeated splits')
    _option(benchmark, 'benchmark', '--data', type=Path, nargs='+')
    _option(benchmark, 'benchmark', '--manifest', type=Path, default=None, help='rerun a recorded benchmark')
    _option(benchmark, 'benchmark', '--label-column', type=int, default=-1)
    _option(benchmark, 'benchmark', '--seed', type=int, default=None)
    _option(benchmark, 'benchmark', '--T', type=_positive, default=DEFAULT_T)
    _option(benchmark, 'benchmark', '--repeats', type=_positive, default=30)
    _option(benchmark, 'benchmark', '--ratio', type=float, default=0.7)
    _option(benchmark, 'benchmark', '--K', type=_set_size, default=None, help='auto (floor of sqrt |train|) or an integer')
    _option(benchmark, 'benchmark', '--cycles', type=_positive, default=None)
    _option(benchmark, 'benchmark', '--kinds', nargs='+', default=['SRS', 'RSS'])
    _option(benchmark, 'benchmark', '--loss', choices=('exp', 'log', 'both'), default='exp')
    _option(benchmark, 'benchmark', '--fusion', choices=('vote', 'mean', 'both'), default='mean')
    _option(benchmark, 'benchmark', '--baselines', action='store_true', help='add the MLP/BN/DO/BN&DO/CGN baselines')
    _option(benchmark, 'benchmark', '--k-sweep', type=_positive, nargs='+', default=None)
    _option(benchmark, 'benchmark', '--workers', type=_positive, default=default_workers())
    _option(benchmark, 'benchmark', '--out', type=Path, default=None)
    _mlp_options(benchmark, 'benchmark')
    benchmark.set_defaults(handler=cmd_benchmark)

    train = commands.add_parser('train', parents=[common], help='train and save one ensemble')
    _option(train, 'train', '--data', type=Path, required=True)
    _option(train, 'train', '--out', type=Path, required=True)
    _option(train, 'train', '--label-column', type=int, default=-1)
    _option(train, 'train', '--sampler', choices=('SRS', 'RSS'), default='RSS')
    _option(train, 'train', '--K', type=_set_size, default=None)
    _option(train, 'train', '--cycles', type=_positive, default=None)
    _option(train, 'train', '--T', type=_positive, default=DEFAULT_T)
    _option(train, 'train', '--loss', choices=('exp', 'log'), default='exp')
    _option(train, 'train', '--fusion', choices=('vote', 'mean'), default='mean')
    _option(train, 'train', '--seed', type=int, default=0)
    _option(train, 'train', '--no-standardize', action='store_true')
    _option(train, 'train', '--workers', type=_positive, default=default_workers())
    _mlp_options(train, 'train')
    train.set_defaults(handler=cmd_train)

    predict = commands.add_parser('predict', parents=[common], help='label rows with a saved ensemble')
    _option(predict, 'predict', '--model', type=Path, required=True)
    _option(predict, 'predict', '--data', type=Path, required=True)
    _option(predict, 'predict', '--label-column', type=int, default=-1)
    _option(predict, 'predict', '--fusion', choices=('vote', 'mean'), default=None)
    _option(predict, 'predict', '--upto', type=_positive, default=None)
    _option(predict, 'predict', '--out', type=Path, default=None)
    predict.set_defaults(handler=cmd_predict)

    lab = commands.add_parser('variance-lab', parents=[common], help='SRS vs RSS risk variance')
    _option(lab, 'variance-lab', '--dist', default='bernoulli:0.5', help='bernoulli:<p> or table:<file.json>')
    _option(lab, 'variance-lab', '--loss', choices=('exp', 'log'), default='exp')
    _option(lab, 'variance-lab', '--K', type=_positive, default=2)
    _option(lab, 'variance-lab', '--m', type=_positive, default=10)
    _option(lab, 'variance-lab', '--trials', type=int, default=100000, help='0 for exact results only')
    _option(lab, 'variance-lab', '--decay', type=_positive, nargs='+', default=None, help='cycle counts for the decay table')
    _option(lab, 'variance-lab', '--seed', type=int, default=0)
    _option(lab, 'variance-lab', '--workers', type=_positive, default=default_workers())
    _option(lab, 'variance-lab', '--out', type=Path, default=None)
    lab.set_defaults(handler=cmd_variance_lab)

    bound = commands.add_parser('bound', parents=[common], help='evaluate the variance-based risk bound')
    _option(bound, 'bound', '--M', type=float, required=True)
    _option(bound, 'bound', '--n', type=int, required=True)
    _option(bound, 'bound', '--delta', type=float, default=0.05)
    _option(bound, 'bound', '--variance', type=float, required=True)
    _option(bound, 'bound', '--approx-error', type=float, default=0.0)
    _option(bound, 'bound', '--out', type=Path, default=None)
    bound.set_defaults(handler=cmd_bound)

    stats = commands.add_parser('stats', parents=[common], help='significance tests on a results ledger')
    stats.add_argument('test', choices=('friedman', 'nemenyi', 'ttest'))
    _option(stats, 'stats', '--input', type=Path, default=None)
    _option(stats, 'stats', '--metric', choices=METRICS, default='accuracy')
    _option(stats, 'stats', '--alpha', type=float, default=0.05)
    _option(stats, 'stats', '--a', default=None, help='ttest: method expected to be better')
    _option(stats, 'stats', '--b', default=None, help='ttest: reference method')
    _option(stats, 'stats', '--k', type=int, default=None, help='nemenyi without a ledger')
    _option(stats, 'stats', '--n', type=int, default=None, help='nemenyi without a ledger')
    _option(stats, 'stats', '--out', type=Path, default=None)
    stats.set_defaults(handler=cmd_stats)

    synth = commands.add_parser('synth', parents=[common], help='write a synthetic dataset')
    _option(synth, 'synth', '--kind', choices=tuple(kind.value for kind in SyntheticKind), default='twonorm')
    _option(synth, 'synth', '--n', type=_positive, default=2000)
    _option(synth, 'synth', '--d', type=_positive, default=20)
    _option(synth, 'synth', '--classes', type=_positive, default=3)
    _option(synth, 'synth', '--seed', type=int, default=0)
    _option(synth, 'synth', '--out', type=Path, required=True)
    synth.set_defaults(handler=cmd_synth)

    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = _parse_args(argv)
    except RssbagException as error:
        sys.stderr.write(f'error[{error.code}]: {error}\n')
        return EXIT_ERROR

    logging.basicConfig(level={0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG),
                        format='%(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)

    try:
        return args.handler(args)
    except RssbagException as error:
        message = ' '.join(str(error).split())
        sys.stderr.write(f'error[{error.code}]: {message}\n')
        return EXIT_ERROR


if __name__ == '__main__':
    raise SystemExit(main())
