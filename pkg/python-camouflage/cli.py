#!/usr/bin/env python3
"""
Command-line entry point: score candidate honeyfile names, dump directory
fits, run the local-vs-sampled experiment and inspect corpora.
"""
import argparse
import json
import logging
import os
import sys

from camouflage import (MIN_CLUSTER_FILES, DirectoryContext, centroid_table, fit_directory,
                        rank_candidates)
from config import Config
from corpus import (SamplePlan, enumerate_directories, filter_repositories, load_manifest,
                    scan_filesystem)
from embedding import HashedEmbedder, TokenizedEmbedder, load_text_vectors
from errors import CamouflageError, DegenerateDirectory, InvalidInput
from reporting import (FORMATS, reports_to_frame, summary_table, write_experiment, write_frame,
                       write_object, write_records)
from stats_eval import log_histogram, resolve_jobs, run_experiment
from synthetic import generate_synthetic_manifests, manifest_lines, write_manifest
from vmf_mixture import mixture_to_dict

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def _common_parser(config):
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group('common arguments')
    group.add_argument('--seed', type=int, default=config.SEED)
    group.add_argument('--jobs', type=int, default=config.JOBS,
                       help='worker count (0 = one per physical core)')
    group.add_argument('--log-level', default=config.LOG_LEVEL,
                       choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    group.add_argument('-o', '--output', default=None, help='output file (default stdout)')
    group.add_argument('--format', dest='fmt', choices=FORMATS, default='json')
    return parser


def _embedding_parser(config):
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group('embedding arguments')
    group.add_argument('--min-n', type=int, default=config.MIN_N)
    group.add_argument('--max-n', type=int, default=config.MAX_N)
    group.add_argument('--dim', type=int, default=config.DIM)
    group.add_argument('--buckets', type=int, default=config.BUCKETS)
    group.add_argument('--vec-file', default=None,
                       help='pretrained textual vectors; unknown names use hashed n-grams')
    group.add_argument('--tokenize', action='store_true',
                       help='embed filenames as the mean of their word/digit tokens')
    return parser


def _fit_parser(config):
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group('mixture arguments')
    group.add_argument('--k-min', type=int, default=config.K_MIN)
    group.add_argument('--k-max', type=int, default=config.K_MAX)
    group.add_argument('--restarts', type=int, default=config.RESTARTS)
    group.add_argument('--max-iters', type=int, default=config.MAX_ITERS)
    group.add_argument('--tol', type=float, default=config.TOL)
    return parser


def _directory_source(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--dir', dest='directory', help='live directory whose files are scored against')
    source.add_argument('--names-file',
                        help='JSON list of filenames, or {"dir_path": ..., "names": [...]}')
    source.add_argument('--manifest', help='JSON-Lines manifest (with --repo and --dir-path)')
    parser.add_argument('--repo', help='repo_id inside --manifest')
    parser.add_argument('--dir-path', default='', help='directory inside --repo (default root)')
    parser.add_argument('--include-hidden', action='store_true',
                        help='count dot-files of --dir')
    parser.add_argument('--with-subdirectories', action='store_true',
                        help='score against subdirectory names as well as file names')


def build_parser(config=None):
    config = config or Config()
    common = _common_parser(config)
    embedding = _embedding_parser(config)
    fitting = _fit_parser(config)

    parser = argparse.ArgumentParser(
        prog='camouflage',
        description='Camouflage scores of honeyfile names against their directory.')
    commands = parser.add_subparsers(dest='command', required=True)

    score = commands.add_parser('score', parents=[common, embedding, fitting],
                                help='rank candidate names by camouflage')
    _directory_source(score)
    score.add_argument('-c', '--candidate', dest='candidates', action='append', default=[],
                       help='candidate filename (repeatable)')
    score.add_argument('--no-locals', action='store_true',
                       help="normalize over the candidates only, not the directory's own files")
    score.set_defaults(handler=cmd_score)

    fit = commands.add_parser('fit', parents=[common, embedding, fitting],
                              help='dump the selected vMF mixture of a directory')
    _directory_source(fit)
    fit.set_defaults(handler=cmd_fit)

    evaluate = commands.add_parser('evaluate', parents=[common, embedding, fitting],
                                   help='local vs cross-repository decoy experiment')
    evaluate.add_argument('--manifest', required=True)
    evaluate.add_argument('--output-dir', default='camouflage-report')
    evaluate.add_argument('--max-directories', type=int, default=config.MAX_DIRECTORIES,
                          help='directories to score, sampled with the seed (0 = all)')
    evaluate.add_argument('--samples-per-directory', type=int,
                          default=config.SAMPLES_PER_DIRECTORY)
    evaluate.add_argument('--min-items', type=int, default=config.MIN_DIRECTORY_ITEMS)
    evaluate.add_argument('--files-only', action='store_true',
                          help='count only files toward the directory item threshold')
    evaluate.add_argument('--with-subdirectories', action='store_true',
                          help='score subdirectory names as directory members')
    evaluate.add_argument('--bins', type=int, default=20)
    evaluate.set_defaults(handler=cmd_evaluate)

    scan = commands.add_parser('scan', parents=[common], help='list directories of a live tree')
    scan.add_argument('root')
    scan.add_argument('--max-depth', type=int, default=None)
    scan.add_argument('--exclude-hidden', action='store_true')
    scan.add_argument('--min-items', type=int, default=0)
    scan.set_defaults(handler=cmd_scan)

    histogram = commands.add_parser('histogram', parents=[common],
                                    help='items-per-directory histogram rows')
    source = histogram.add_mutually_exclusive_group(required=True)
    source.add_argument('--manifest')
    source.add_argument('--root')
    histogram.add_argument('--bins', type=int, default=20)
    histogram.add_argument('--min-items', type=int, default=config.MIN_DIRECTORY_ITEMS)
    histogram.add_argument('--max-depth', type=int, default=None)
    histogram.set_defaults(handler=cmd_histogram)

    synth = commands.add_parser('synth', parents=[common],
                                help='write the synthetic themed manifest')
    synth.add_argument('--repos', type=int, default=200)
    synth.set_defaults(handler=cmd_synth)
    return parser


def build_provider(args, config):
    ngram_cfg = config.ngram_config(min_n=args.min_n, max_n=args.max_n, dim=args.dim,
                                    bucket_count=args.buckets, seed=args.seed)
    if args.vec_file:
        if not os.path.isfile(args.vec_file):
            raise InvalidInput(f"vector file {args.vec_file!r} does not exist")
        provider = load_text_vectors(args.vec_file, ngram_cfg)
    else:
        provider = HashedEmbedder(ngram_cfg)
    return TokenizedEmbedder(provider) if args.tokenize else provider


def build_fit_config(args, config):
    return config.fit_config(max_iters=args.max_iters, tol=args.tol,
                             restarts=args.restarts, seed=args.seed)


def _read_names_file(path):
    if not os.path.isfile(path):
        raise InvalidInput(f"names file {path!r} does not exist")
    with open(path, encoding='utf-8') as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: malformed JSON ({exc.msg})")
    if isinstance(payload, dict):
        return payload.get('dir_path', os.path.basename(path)), payload.get('names', [])
    return os.path.basename(path), payload


def load_directory_names(args):
    """(dir_path, file names) from --dir, --names-file or --manifest."""
    if args.directory:
        if not os.path.isdir(args.directory):
            raise InvalidInput(f"{args.directory!r} is not a directory")
        names = sorted(entry.name for entry in os.scandir(args.directory)
                       if (entry.is_file(follow_symlinks=False)
                            or (args.with_subdirectories and entry.is_dir(follow_symlinks=False)))
                       and (args.include_hidden or not entry.name.startswith('.')))
        return args.directory, names
    if args.names_file:
        return _read_names_file(args.names_file)

    if not os.path.isfile(args.manifest):
        raise InvalidInput(f"manifest {args.manifest!r} does not exist")
    if not args.repo:
        raise InvalidInput("--manifest needs --repo")
    manifests = [m for m in load_manifest(args.manifest) if m.repo_id == args.repo]
    if not manifests:
        raise InvalidInput(f"repository {args.repo!r} not in {args.manifest}")
    for record in enumerate_directories(manifests, min_items=1):
        if record.dir_path == args.dir_path:
            names = record.item_names if args.with_subdirectories else record.file_names
            return record.dir_path, list(names)
    raise InvalidInput(f"directory {args.dir_path!r} not found in {args.repo!r}")


def _directory_context(args, provider):
    dir_path, names = load_directory_names(args)
    return DirectoryContext.from_names(dir_path, names, provider)


def cmd_score(args, config):
    provider = build_provider(args, config)
    ctx = _directory_context(args, provider)
    reports = rank_candidates(args.candidates, ctx, provider, build_fit_config(args, config),
                              with_locals=not args.no_locals,
                              k_min=args.k_min, k_max=args.k_max)
    if args.fmt == 'csv':
        write_frame(reports_to_frame(reports), args.output)
    else:
        write_records([r.to_dict() for r in reports], args.output, 'json')
    return 0


def cmd_fit(args, config):
    provider = build_provider(args, config)
    ctx = _directory_context(args, provider)
    if len(ctx) < MIN_CLUSTER_FILES:
        raise DegenerateDirectory(f"{ctx.dir_path!r} has {len(ctx)} files; "
                                  f"mixture fitting needs at least {MIN_CLUSTER_FILES}")
    model = fit_directory(ctx, build_fit_config(args, config), args.k_min, args.k_max,
                          jobs=resolve_jobs(args.jobs))
    selection = model.selection
    payload = {
        'dir_path': ctx.dir_path,
        'provider_id': provider.provider_id,
        'k_star': selection.k_star,
        'ms_by_k': {str(k): ms for k, ms in selection.ms_by_k.items()},
        'mixture': mixture_to_dict(selection.fits[selection.k_star]),
        'assignments': {name: int(a) for name, a in zip(ctx.names, selection.assignments)},
        'centroid_table': centroid_table(ctx, model),
    }
    write_object(payload, args.output)
    return 0


def cmd_evaluate(args, config):
    if not os.path.isfile(args.manifest):
        raise InvalidInput(f"manifest {args.manifest!r} does not exist")
    if args.max_directories < 0:
        raise InvalidInput(f"--max-directories must be >= 0, got {args.max_directories}")
    provider = build_provider(args, config)
    manifests = filter_repositories(load_manifest(args.manifest))
    plan = SamplePlan(seed=args.seed, samples_per_directory=args.samples_per_directory)
    report = run_experiment(manifests, provider, build_fit_config(args, config), plan,
                            max_directories=args.max_directories or None, jobs=args.jobs,
                            count_subdirectories=not args.files_only,
                            k_min=args.k_min, k_max=args.k_max, bins=args.bins,
                            min_items=args.min_items,
                            score_subdirectories=args.with_subdirectories)
    write_experiment(report, args.output_dir)
    sys.stdout.write(summary_table(report))
    return 0


def cmd_scan(args, config):
    records = scan_filesystem(args.root, include_hidden=not args.exclude_hidden,
                              max_depth=args.max_depth)
    rows = [r.to_dict() for r in records if r.item_count >= args.min_items]
    if args.fmt == 'csv':
        for row in rows:
            row['item_names'] = '/'.join(row['item_names'])
    write_records(rows, args.output, args.fmt)
    return 0


def cmd_histogram(args, config):
    if args.manifest:
        if not os.path.isfile(args.manifest):
            raise InvalidInput(f"manifest {args.manifest!r} does not exist")
        records = enumerate_directories(filter_repositories(load_manifest(args.manifest)),
                                        min_items=args.min_items)
    else:
        records = [r for r in scan_filesystem(args.root, max_depth=args.max_depth)
                   if r.item_count >= max(1, args.min_items)]
    rows = [b._asdict() for b in log_histogram([r.item_count for r in records], args.bins)]
    write_records(rows, args.output, args.fmt, columns=['low', 'high', 'count'])
    return 0


def cmd_synth(args, config):
    manifests = generate_synthetic_manifests(n_repos=args.repos, seed=args.seed)
    if args.output:
        write_manifest(args.output, manifests)
    else:
        sys.stdout.writelines(manifest_lines(manifests))
    return 0


def main(argv=None):
    try:
        config = Config()
    except CamouflageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    args = build_parser(config).parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT,
                        stream=sys.stderr)
    try:
        return args.handler(args, config)
    except CamouflageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
