##############################################################################
#
# Copyright (c) 2026 lidar.robustness Contributors.
# All Rights Reserved.
#
# This software is subject to the provisions of the Zope Public License,
# Version 2.1 (ZPL).  A copy of the ZPL should accompany this distribution.
# THIS SOFTWARE IS PROVIDED "AS IS" AND ANY AND ALL EXPRESS OR IMPLIED
# WARRANTIES ARE DISCLAIMED, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
# WARRANTIES OF TITLE, MERCHANTABILITY, AGAINST INFRINGEMENT, AND FITNESS
# FOR A PARTICULAR PURPOSE.
#
##############################################################################
"""The ``lidar-robustness`` command

Subcommands ``corrupt``, ``denoise``, ``evaluate`` and ``report``. Exit
status is 0 on success, 1 if some frames failed and 2 for argument or
configuration errors.

The log level is ``WARNING`` unless ``--verbose``/``--quiet`` or the
``LIDAR_ROBUSTNESS_LOG_LEVEL`` environment variable say otherwise.
"""
import argparse
import dataclasses
import logging
import os
import sys

from lidar.robustness import pipeline
from lidar.robustness.config import DatasetManifest
from lidar.robustness.config import DenoiseConfig
from lidar.robustness.config import load_manifest
from lidar.robustness.exceptions import RobustnessError
from lidar.robustness.report import format_report


__all__ = [
    'main',
    'make_parser',
]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2

LOG_LEVEL_ENV = 'LIDAR_ROBUSTNESS_LOG_LEVEL'


def _csv(convert=str):
    def parse(text):
        try:
            return tuple(convert(v.strip()) for v in text.split(',')
                         if v.strip())
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e
    return parse


def _common(parser):
    parser.add_argument('--manifest', help='TOML run manifest')
    parser.add_argument('--seed', type=int, help='base seed')
    parser.add_argument('--jobs', type=int, default=1,
                        help='worker processes (default: %(default)s)')
    parser.add_argument('--classes', type=_csv(),
                        help='comma-separated class names')
    parser.add_argument('--severities', type=_csv(int),
                        help='comma-separated severities 0-5')
    parser.add_argument('--kinds', type=_csv(),
                        help='comma-separated corruption kinds')
    parser.add_argument('--allow-partial', action='store_true', default=None,
                        help='average over incomplete CE/CR tables')
    parser.add_argument('--labels-in-lidar', action='store_true',
                        default=None,
                        help='label boxes are already in the LiDAR frame')
    parser.add_argument('--knn-k', type=int, help='denoiser neighbors')
    parser.add_argument('--knn-sigma', type=float,
                        help='denoiser threshold in standard deviations')
    parser.add_argument('--recall-points', type=int, choices=(11, 40),
                        help='AP interpolation points')
    parser.add_argument('--subset', type=int,
                        help='sample this many frames (0: all)')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='count', default=0)
    verbosity.add_argument('-q', '--quiet', action='store_true')


def make_parser():
    parser = argparse.ArgumentParser(
        prog='lidar-robustness',
        description='Corrupt KITTI LiDAR data and measure detector'
                    ' robustness.')
    commands = parser.add_subparsers(dest='command', required=True)

    corrupt = commands.add_parser('corrupt', help='write corrupted frames')
    _common(corrupt)
    corrupt.add_argument('--root', help='KITTI split directory')
    corrupt.add_argument('--output', help='output directory')
    corrupt.add_argument('--link-clean', action='store_true', default=None,
                         help='symlink severity 0 instead of copying')
    corrupt.add_argument('--targets', type=_csv(),
                         help='classes whose boxes are corrupted'
                              ' (default: all)')
    corrupt.add_argument('--n-layers', type=int, choices=(32, 64),
                         help='beams binned by layer_del')
    corrupt.set_defaults(handler=_corrupt)

    denoise = commands.add_parser('denoise', help='remove KNN outliers')
    _common(denoise)
    denoise.add_argument('input', help='directory of .bin files')
    denoise.add_argument('output', help='output directory')
    denoise.add_argument('--per-cluster', action='store_true', default=None,
                         help='threshold against each neighborhood')
    denoise.set_defaults(handler=_denoise)

    evaluate = commands.add_parser('evaluate', help='compute robustness')
    _common(evaluate)
    evaluate.add_argument('--gt', help='ground-truth label directory')
    evaluate.add_argument('--det', required=True,
                          help='detections, det/<detector>/<kind>/<sev>')
    evaluate.add_argument('--calib', help='calibration directory')
    evaluate.add_argument('--corrupted',
                          help='corruption output root (mutated labels)')
    evaluate.add_argument('--output', help='report directory')
    evaluate.add_argument('--score-floor', type=float,
                          help='ignore detections scored below this')
    evaluate.set_defaults(handler=_evaluate)

    report = commands.add_parser('report', help='format report CSVs')
    _common(report)
    report.add_argument('reports', nargs='+', help='report CSV files')
    report.set_defaults(handler=_report)
    return parser


def _configure_logging(args):
    if args.quiet:
        level = logging.ERROR
    elif args.verbose:
        level = logging.DEBUG if args.verbose > 1 else logging.INFO
    else:
        name = os.environ.get(LOG_LEVEL_ENV, 'WARNING').upper()
        level = logging.getLevelName(name)
        if not isinstance(level, int):
            level = logging.WARNING
    logging.basicConfig(level=level,
                        format='%(levelname)s %(name)s: %(message)s')


def _manifest(args):
    manifest = load_manifest(args.manifest) if args.manifest \
        else DatasetManifest()
    denoise = manifest.denoise
    if args.knn_k is not None or args.knn_sigma is not None \
            or getattr(args, 'per_cluster', None):
        denoise = DenoiseConfig(
            args.knn_k if args.knn_k is not None else denoise.k,
            args.knn_sigma if args.knn_sigma is not None
            else denoise.n_sigma,
            bool(getattr(args, 'per_cluster', None) or denoise.per_cluster))
    evaluation = manifest.evaluation
    changes = {}
    if args.recall_points is not None:
        changes['recall_points'] = args.recall_points
    if args.allow_partial:
        changes['allow_partial'] = True
    if getattr(args, 'score_floor', None) is not None:
        changes['score_floor'] = args.score_floor
    if changes:
        evaluation = dataclasses.replace(evaluation, **changes)
    return manifest.replace(
        root=getattr(args, 'root', None),
        output=getattr(args, 'output', None)
        if args.command == 'corrupt' else None,
        seed=args.seed,
        classes=args.classes,
        severities=args.severities,
        kinds=args.kinds,
        subset=args.subset,
        labels_in_lidar=args.labels_in_lidar,
        link_clean=getattr(args, 'link_clean', None),
        targets=getattr(args, 'targets', None),
        n_layers=getattr(args, 'n_layers', None),
        denoise=denoise,
        evaluation=evaluation,
    )


def _exit_status(summary):
    if summary.failed:
        logger.error("%d of %d units failed", summary.failed,
                     summary.done + summary.failed)
        return EXIT_PARTIAL
    return EXIT_OK


def _corrupt(args, manifest):
    return _exit_status(pipeline.cmd_corrupt(manifest, jobs=args.jobs))


def _denoise(args, manifest):
    config = manifest.denoise
    return _exit_status(pipeline.cmd_denoise(
        args.input, args.output, config.k, config.n_sigma,
        config.per_cluster, jobs=args.jobs))


def _evaluate(args, manifest):
    gt = args.gt or manifest.labels_dir
    calib = args.calib or manifest.calib_dir
    corrupted = args.corrupted or (manifest.output if args.manifest
                                   else None)
    kinds = args.kinds or (manifest.kinds if args.manifest else None)
    report = pipeline.cmd_evaluate(
        gt, args.det, calib, classes=manifest.classes, kinds=kinds,
        config=manifest.evaluation,
        labels_in_lidar=manifest.labels_in_lidar,
        corrupted_root=corrupted, output_dir=args.output)
    if not args.output:
        sys.stdout.write(format_report(report))
    return EXIT_OK


def _report(args, manifest):
    sys.stdout.write(pipeline.cmd_report(args.reports))
    return EXIT_OK


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    try:
        manifest = _manifest(args)
        return args.handler(args, manifest)
    except (RobustnessError, OSError) as e:
        logger.error("%s", e)
        return EXIT_USAGE


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
