"""
mamboctl - MamBo experiment control

Subcommands:
    synth    write a synthetic split (features, protocol, manifest)
    train    config -> run directory with checkpoints and run log
    score    checkpoint + manifest -> score file
    metrics  score file + protocol -> EER (and min t-DCF)
    report   score files of retained checkpoints -> Best / Avg table
    inspect  checkpoint -> config echo, parameter count, fingerprint

Exit codes: 0 success, 1 usage error, 2 data or format error.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace

import torch

from .backbone.checkpoint import config_pairs, load_checkpoint
from .backbone.model import count_parameters, score_features
from .config.experiment import load_experiment, save_experiment
from .data.dataset import LabeledDataset, load_dataset
from .data.protocol import read_protocol
from .data.shaping import DEFAULT_T_FIXED
from .data.synth import SynthSpec, write_synth, synth_generate
from .errors import ConfigError, MamboError
from .metrics.det import CostCoefficients, compute_eer, compute_min_tdcf, join_scores
from .metrics.report import evaluate_set, format_report
from .metrics.scores import read_scores, write_scores
from .platform import DigestBackend, get_profile
from .training.loop import read_checkpoint_index, train_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
SCORE_BATCH = 32


class UsageError(Exception):
    """Bad flags or arguments"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_tdcf_flags(parser):
    parser.add_argument('--tdcf-c0', type=float, help='t-DCF constant term')
    parser.add_argument('--tdcf-c1', type=float, help='t-DCF miss weight')
    parser.add_argument('--tdcf-c2', type=float, help='t-DCF false-alarm weight')


def _tdcf_coeffs(args):
    given = [args.tdcf_c0, args.tdcf_c1, args.tdcf_c2]
    if all(v is None for v in given):
        return None
    if any(v is None for v in given):
        raise UsageError("--tdcf-c0, --tdcf-c1 and --tdcf-c2 must be given together")
    try:
        return CostCoefficients(*given).validate()
    except ConfigError as e:
        raise UsageError(str(e))


def build_parser():
    parser = _Parser(
        prog='mamboctl',
        description="MamBo anti-spoofing backbone experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s synth --out data/train --split train --F 64 --seed 7
  %(prog)s train exp.cfg --seed 7
  %(prog)s score runs/exp/checkpoints/epoch_004.mbck data/eval/manifest.txt --out eval.scores
  %(prog)s metrics eval.scores data/eval/protocol.txt --tdcf-c0 0 --tdcf-c1 0.5 --tdcf-c2 2
  %(prog)s report --run runs/exp --set EVAL data/eval/protocol.txt s1.scores s2.scores
  %(prog)s inspect runs/exp/checkpoints/epoch_004.mbck
"""
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    subparsers = parser.add_subparsers(dest='command', help='Command to execute')

    # Synth command
    synth = subparsers.add_parser('synth', help='Write a synthetic split')
    synth.add_argument('--out', required=True, help='Output directory')
    synth.add_argument('--config', help='Experiment config supplying [synth] values')
    synth.add_argument('--split', default='train', help='Split name (default: train)')
    synth.add_argument('--n-bonafide', type=int, help='Bonafide utterances')
    synth.add_argument('--n-spoof', type=int, help='Spoof utterances')
    synth.add_argument('--T', type=int, help='Frames per utterance')
    synth.add_argument('--F', type=int, help='Feature dims')
    synth.add_argument('--local-magnitude', type=float, help='Burst amplitude (0 disables)')
    synth.add_argument('--local-frames', type=int, help='Burst length in adjacent frames')
    synth.add_argument('--global-magnitude', type=float, help='Offset amplitude (0 disables)')
    synth.add_argument('--seed', type=int, help='Dataset seed')

    # Train command
    train = subparsers.add_parser('train', help='Train from an experiment config')
    train.add_argument('config', help='Experiment config file')
    train.add_argument('--seed', type=int, help='Run seed (overrides [train] seed)')
    train.add_argument('--out', help='Run directory (overrides [output] run_dir)')

    # Score command
    score = subparsers.add_parser('score', help='Score utterances with a checkpoint')
    score.add_argument('checkpoint', help='Checkpoint file')
    score.add_argument('manifest', help='Feature manifest')
    score.add_argument('--out', required=True, help='Score file to write')
    score.add_argument('--T-fixed', dest='T_fixed', type=int, default=DEFAULT_T_FIXED,
                       help=f'Frames per utterance (default: {DEFAULT_T_FIXED})')

    # Metrics command
    metrics = subparsers.add_parser('metrics', help='EER and min t-DCF of a score file')
    metrics.add_argument('scores', help='Score file')
    metrics.add_argument('protocol', help='Protocol with keys')
    _add_tdcf_flags(metrics)

    # Report command
    report = subparsers.add_parser('report', help='Best / Avg across checkpoints')
    report.add_argument('--set', dest='sets', nargs='+', action='append', required=True,
                        metavar='NAME PROTOCOL SCORES',
                        help='Evaluation set name, protocol and score files in rank order')
    report.add_argument('--run', help='Run directory whose checkpoints.txt gives epochs')
    _add_tdcf_flags(report)

    # Inspect command
    inspect = subparsers.add_parser('inspect', help='Describe a checkpoint')
    inspect.add_argument('checkpoint', help='Checkpoint file')

    return parser


def cmd_synth(args):
    spec = SynthSpec()
    if args.config:
        spec = load_experiment(args.config).synth
    overrides = {
        'n_bonafide': args.n_bonafide, 'n_spoof': args.n_spoof, 'T': args.T, 'F': args.F,
        'local_magnitude': args.local_magnitude, 'local_frames': args.local_frames,
        'global_magnitude': args.global_magnitude,
        'seed': args.seed,
    }
    spec = replace(spec, split=args.split, **{k: v for k, v in overrides.items() if v is not None})
    utterances = write_synth(spec, args.out)
    n_spoof = sum(1 for u in utterances if u.entry.key == 'spoof')
    print(f"[Synth] {args.out}: {len(utterances) - n_spoof} bonafide, {n_spoof} spoof, "
          f"T={spec.T} F={spec.F} seed={spec.seed}")
    return EXIT_OK


def _datasets(cfg):
    if cfg.data.uses_files:
        train = load_dataset(cfg.resolve(cfg.data.train_manifest), cfg.resolve(cfg.data.train_protocol))
        dev = load_dataset(cfg.resolve(cfg.data.dev_manifest), cfg.resolve(cfg.data.dev_protocol))
    else:
        train = LabeledDataset.from_synth(synth_generate(cfg.synth_split('train')))
        dev = LabeledDataset.from_synth(synth_generate(cfg.synth_split('dev')))
    for name, ds in (('train', train), ('dev', dev)):
        if ds.input_dim != cfg.backbone.input_dim:
            raise ConfigError(f"{name} features have F={ds.input_dim}, "
                              f"[backbone] input_dim={cfg.backbone.input_dim}")
    return train, dev


def cmd_train(args):
    cfg = load_experiment(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    run_dir = args.out or cfg.resolve(cfg.output.run_dir)
    train, dev = _datasets(cfg)
    os.makedirs(run_dir, exist_ok=True)
    save_experiment(os.path.join(run_dir, 'config.cfg'), cfg)
    log = train_run(cfg.backbone, cfg.train, train, dev, run_dir, T_fixed=cfg.data.T_fixed)
    print(f"[Train] {run_dir}: {len(log.epochs)} epochs, {len(log.checkpoints)} checkpoints kept")
    for rank, rec in enumerate(log.checkpoints, 1):
        print(f"  {rank}. epoch {rec.epoch}  dev_loss={rec.dev_loss:.6f}  {rec.path}")
    return EXIT_OK


def cmd_score(args):
    model = load_checkpoint(args.checkpoint).build_model()
    dataset = load_dataset(args.manifest)
    if dataset.input_dim != model.cfg.input_dim:
        raise ConfigError(f"{args.manifest}: features have F={dataset.input_dim}, "
                          f"checkpoint expects input_dim={model.cfg.input_dim}")
    model.eval()
    scores = {}
    with torch.no_grad():
        for start in range(0, len(dataset), SCORE_BATCH):
            indices = range(start, min(start + SCORE_BATCH, len(dataset)))
            x, _ = dataset.batch(indices, args.T_fixed)
            for i, s in zip(indices, score_features(x, model).score.tolist()):
                scores[dataset.ids[i]] = s
    write_scores(args.out, scores)
    print(f"[Score] {args.out}: {len(scores)} utterances, sha256={DigestBackend.file_sha256(args.out)}")
    return EXIT_OK


def cmd_metrics(args):
    coeffs = _tdcf_coeffs(args)
    records = join_scores(read_scores(args.scores), read_protocol(args.protocol), args.scores)
    eer, _ = compute_eer(records)
    print(f"EER={100 * eer:.2f}")
    if coeffs is not None:
        print(f"min_tDCF={compute_min_tdcf(records, coeffs):.4f}")
    return EXIT_OK


def cmd_report(args):
    coeffs = _tdcf_coeffs(args)
    epochs = None
    if args.run:
        epochs = [r.epoch for r in read_checkpoint_index(args.run)]
    reports = []
    for spec in args.sets:
        if len(spec) < 3:
            raise UsageError("--set needs NAME PROTOCOL and at least one score file")
        name, protocol, score_paths = spec[0], spec[1], spec[2:]
        entries = read_protocol(protocol)
        score_sets = [(path, read_scores(path)) for path in score_paths]
        reports.append(evaluate_set(name, entries, score_sets, coeffs, epochs))
    sys.stdout.write(format_report(reports))
    return EXIT_OK


def cmd_inspect(args):
    checkpoint = load_checkpoint(args.checkpoint)
    for key, value in config_pairs(checkpoint.config):
        print(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
    for key in sorted(checkpoint.metadata):
        print(f"meta.{key}={checkpoint.metadata[key]}")
    print(f"parameters={count_parameters(checkpoint.build_model())}")
    print(f"sha256={DigestBackend.file_sha256(args.checkpoint)}")
    return EXIT_OK


COMMANDS = {
    'synth': cmd_synth,
    'train': cmd_train,
    'score': cmd_score,
    'metrics': cmd_metrics,
    'report': cmd_report,
    'inspect': cmd_inspect,
}


def run_command(argv=None):
    """
    Parse argv and run one subcommand.

    Returns:
        int: exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='[%(name)s] %(message)s', stream=sys.stderr, force=True)
    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    get_profile()
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (MamboError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


def main():
    sys.exit(run_command())


if __name__ == '__main__':
    main()
