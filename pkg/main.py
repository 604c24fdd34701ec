"""
Gibbs-type prior toolkit - Command Line Interface
"""
import argparse
import json
import sys
import time

import pandas as pd

from src import __version__, setup_logging
from src.errors import GibbsError
from src.gibbs.model import GibbsModel
from src.gibbs.partition import Partition
from src.gibbs.prior import eppf, k_pmf, predict, sample_partition_sequential
from src.posterior.sampler import sample_posterior_batch
from src.sampling.rng import RngState
from src.sampling.sticks import DEFAULT_EPS
from src.simulation.engine import SUITES, run_suite
from src.simulation.metrics import MetricsCollector
from src.simulation.species import species_discovery_sim

# h = 1 at alpha = 1/2 when no model file is given
DEFAULT_MODEL = {'alpha': 0.5, 'family': {'type': 'pitman_yor', 'theta': 0.0}}


def say(message):
    """Progress lines go to stderr so stdout carries only the payload."""
    print(message, file=sys.stderr)


def _int_list(text):
    try:
        return [int(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog='gibbs-prior', description=__doc__.strip())
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--model', help='GibbsModel JSON file (default: alpha=0.5, h = 1)')
    parser.add_argument('--seed', type=int, default=None, help='master seed (default 0, or the config seed for verify)')
    parser.add_argument('--out', help='output path (default: stdout)')
    parser.add_argument('--format', choices=('json', 'csv'), default='json')
    parser.add_argument('--config', help='verification config JSON file')
    parser.add_argument('--log-level', default=None, help='package logger level, e.g. DEBUG')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('eppf', help='probability of one labeled partition')
    p.add_argument('--blocks', type=_int_list, required=True, help='block sizes, e.g. 2,1')

    p = sub.add_parser('kpmf', help='law of the number of blocks K_n')
    p.add_argument('--n', type=int, required=True)

    p = sub.add_parser('predict', help='prediction rule after a partition')
    p.add_argument('--blocks', type=_int_list, required=True)

    p = sub.add_parser('sample-partition', help='prior partitions by sequential seating')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--draws', type=int, default=1)

    p = sub.add_parser('sample-posterior', help='posterior random measures')
    p.add_argument('--blocks', type=_int_list, required=True)
    p.add_argument('--draws', type=int, default=1)
    p.add_argument('--representation', choices=('T1', 'T2'), default='T1')
    p.add_argument('--eps', type=float, default=DEFAULT_EPS)
    p.add_argument('--method', choices=('auto', 'exact', 'rejection', 'sir'), default='auto')
    p.add_argument('--workers', type=int, default=1)

    p = sub.add_parser('verify', help='run a verification suite')
    p.add_argument('suite', choices=sorted(SUITES) + ['all'])
    p.add_argument('--workers', type=int, default=None)

    p = sub.add_parser('species', help='new species in m further draws')
    p.add_argument('--blocks', type=_int_list, default=[], help='observed block sizes; empty for the prior')
    p.add_argument('--m', type=_int_list, default=[100, 1000, 10000])
    p.add_argument('--reps', type=int, default=1000)
    p.add_argument('--eps', type=float, default=1e-3)
    return parser


def load_model(path):
    if path is None:
        return GibbsModel.from_dict(DEFAULT_MODEL)
    with open(path) as f:
        return GibbsModel.from_json(f.read())


def emit(args, payload, rows):
    """Write payload as JSON or rows as CSV to --out or stdout."""
    if args.format == 'csv':
        text = pd.DataFrame(rows).to_csv(index=False, float_format='%.17g')
    else:
        text = json.dumps(payload, indent=2) + '\n'
    if args.out:
        with open(args.out, 'w') as f:
            f.write(text)
        say(f"   ✓ Wrote {args.out}")
    else:
        sys.stdout.write(text)


def cmd_eppf(args, model):
    p = Partition(tuple(args.blocks))
    value = eppf(model, p)
    payload = {'model': model.to_dict(), 'partition': list(p.block_sizes), 'value': value.value,
               **value.to_dict()}
    emit(args, payload, [{'partition': str(p), 'value': value.value, 'log_magnitude': value.log_magnitude}])
    return 0


def cmd_kpmf(args, model):
    probs = k_pmf(model, args.n)
    rows = [{'k': k, 'probability': float(q)} for k, q in enumerate(probs, start=1)]
    emit(args, {'model': model.to_dict(), 'n': args.n, 'pmf': rows}, rows)
    return 0


def cmd_predict(args, model):
    p = Partition(tuple(args.blocks))
    new_table_prob, existing = predict(model, p)
    rows = [{'atom': j, 'probability': float(q)} for j, q in enumerate(existing, start=1)]
    rows.append({'atom': 'new', 'probability': new_table_prob})
    emit(args, {'model': model.to_dict(), 'partition': list(p.block_sizes),
                'existing': [float(q) for q in existing], 'new': new_table_prob}, rows)
    return 0


def cmd_sample_partition(args, model):
    rng = RngState(args.seed)
    draws = [sample_partition_sequential(rng, model, args.n) for _ in range(args.draws)]
    rows = [{'draw': i, 'blocks': ','.join(map(str, p.block_sizes)), 'k': p.k} for i, p in enumerate(draws)]
    emit(args, {'model': model.to_dict(), 'n': args.n, 'seed': args.seed,
                'partitions': [list(p.block_sizes) for p in draws]}, rows)
    return 0


def cmd_sample_posterior(args, model):
    p = Partition(tuple(args.blocks))
    say(f"\n🎲 Sampling {args.draws} {args.representation} posteriors after {p}...")
    measures = sample_posterior_batch(args.seed, model, p, args.draws, args.representation,
                                      workers=args.workers, eps=args.eps, method=args.method)
    rows = []
    for i, measure in enumerate(measures):
        rows += [{'draw': i, 'part': 'fixed', 'atom': j, 'mass': float(w)}
                 for j, w in enumerate(measure.fixed_atoms, start=1)]
        rows += [{'draw': i, 'part': 'fresh', 'atom': j, 'mass': float(w)}
                 for j, w in enumerate(measure.continuous, start=1)]
        rows.append({'draw': i, 'part': 'residual', 'atom': 0, 'mass': measure.residual})
    emit(args, {'model': model.to_dict(), 'partition': list(p.block_sizes), 'seed': args.seed,
                'draws': [m.to_dict() for m in measures]}, rows)
    return 0


def cmd_species(args, model):
    n = sum(args.blocks)
    p = Partition(tuple(args.blocks)) if args.blocks else None
    say(f"\n🔭 Species discovery after {p if p else 'no data'}, m in {args.m}, {args.reps} reps...")
    result = species_discovery_sim(RngState(args.seed), model, n, p, args.m, args.reps, eps=args.eps)
    rows = [{'m': m, 'rep': r, 'scaled_new_blocks': float(x)}
            for m, values in result.scaled.items() for r, x in enumerate(values)]
    rows += [{'m': 'limit', 'rep': r, 'scaled_new_blocks': float(x)} for r, x in enumerate(result.limit)]
    ks = result.ks_by_m()
    for m, distance in ks.items():
        say(f"   → m={m}: KS distance to the limit {distance:.4f}")
    emit(args, {'model': model.to_dict(), 'seed': args.seed, 'ks_by_m': {str(m): d for m, d in ks.items()},
                'scaled': {str(m): v.tolist() for m, v in result.scaled.items()},
                'limit': result.limit.tolist()}, rows)
    return 0


def cmd_verify(args):
    overrides = {}
    if args.config:
        with open(args.config) as f:
            overrides = json.load(f)
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.workers is not None:
        overrides['workers'] = args.workers
    names = sorted(SUITES) if args.suite == 'all' else [args.suite]

    collector = MetricsCollector()
    for name in names:
        suite_start = time.time()
        say(f"\n📌 Running suite {name}...")
        report = collector.record_suite(run_suite(name, overrides))
        say(f"   ✓ {len(report.cases)} cases in {time.time() - suite_start:.2f}s, "
            f"per-case level {report.alpha_level:.3g}")
        for case in report.failures():
            detail = case.error or f"{case.statistic_name}={case.statistic:.6g}, p_or_gap={case.p_or_gap:.3g}"
            say(f"   ✗ {case.case_id}: {detail}")

    say("\n" + "=" * 70)
    say("📊 VERIFICATION SUMMARY")
    say("=" * 70)
    say(f"{'Suite':<18} | {'Cases':>6} | {'Failed':>6} | Result")
    say("-" * 70)
    for report in collector.reports:
        say(f"{report.suite_name:<18} | {len(report.cases):>6d} | {len(report.failures()):>6d} | "
            f"{'PASS' if report.overall_pass else 'FAIL'}")
    say("=" * 70)

    if args.out:
        if args.format == 'csv':
            collector.save_to_csv(args.out)
        else:
            collector.save_to_json(args.out)
        say(f"   ✓ Wrote {args.out}")
    elif args.format == 'csv':
        sys.stdout.write(collector.summary_frame().to_csv(index=False, float_format='%.17g'))
    else:
        sys.stdout.write(json.dumps(collector.generate_report(), indent=2) + '\n')
    return 0 if collector.overall_pass else 1


COMMANDS = {
    'eppf': cmd_eppf,
    'kpmf': cmd_kpmf,
    'predict': cmd_predict,
    'sample-partition': cmd_sample_partition,
    'sample-posterior': cmd_sample_posterior,
    'species': cmd_species,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command != "verify" and args.seed is None:
        args.seed = 0
    setup_logging(level=args.log_level)
    say(f"🚀 gibbs-prior {__version__}: {args.command}")
    say("=" * 70)
    start_time = time.time()
    try:
        if args.command == 'verify':
            status = cmd_verify(args)
        else:
            model = load_model(args.model)
            say(f"   Model: {model}")
            status = COMMANDS[args.command](args, model)
    except GibbsError as exc:
        say(f"❌ {type(exc).__name__}: {exc}")
        return 1
    say(f"\n⏱️  Finished in {time.time() - start_time:.2f}s")
    return status


if __name__ == "__main__":
    sys.exit(main())
