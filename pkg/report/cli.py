#!/usr/bin/env python3
"""
Command line entry points for the unfair item analysis toolkit.

Usage:
    python -m report.cli analyze scores.csv --out-dir results
    python -m report.cli generate --items items.json --examinees 200 --out exam.csv
    python -m report.cli compare --group A=group_a.csv --group B=group_b.csv
    python -m report.cli experiment --seeds 20 --cap 0.45
"""

import json
import logging
import os
import sys

import click

from config.config import GENERATOR_CONFIG, LOGGING_CONFIG, REPORT_CONFIG
from data.ingest import ScoreFileError, load_score_file, normalize, serialize_score_csv
from data.irt_generator import CohortSpec, ExamGenerator, ItemSpecError, load_item_spec
from models.analysis_pipeline import ItemAnalysisPipeline
from models.consensus import ConsensusCollapseError, ConsensusConfig
from models.detection_experiment import DetectionExperiment, ExperimentParams
from models.regression import DegenerateCohortError
from report.groups import compare_groups
from report.plot import plane_documents
from report.writer import build_report, render_text_report, serialize_report, write_report_files, write_text

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DEGENERATE = 2

CUTOFF_RULES = {'mad': 'mad_scaled', 'fixed': 'fixed'}


def configure_logging(level=None):
    logging.basicConfig(level=level or LOGGING_CONFIG['level'], format=LOGGING_CONFIG['format'])


def _fail(ctx, message, code):
    click.echo(f"Error: {message}", err=True)
    ctx.exit(code)


def consensus_options(command):
    """Options shared by every command that runs the elimination loop."""
    options = [
        click.option('--cutoff-rule', type=click.Choice(sorted(CUTOFF_RULES)), default=None,
                     help='Robust MAD-scaled cutoff or a fixed d_f.'),
        click.option('--fixed-cutoff', type=float, default=None, help='d_f used by the fixed rule.'),
        click.option('--mad-multiplier', type=float, default=None, help='Multiplier on the scaled MAD.'),
        click.option('--cutoff-floor', type=float, default=None, help='Smallest d_f the MAD rule may return.'),
        click.option('--max-iterations', type=click.IntRange(min=1), default=None,
                     help='Round limit, defaults to the number of items.'),
        click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
                     help='JSON file with consensus settings.')
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_consensus_config(config_path=None, cutoff_rule=None, fixed_cutoff=None, mad_multiplier=None,
                           cutoff_floor=None, max_iterations=None):
    """
    Resolve consensus settings: flags over the --config file over the defaults.

    Returns:
        ConsensusConfig: validated settings
    """
    values = {}
    if config_path is not None:
        try:
            with open(config_path, encoding='utf-8') as handle:
                values = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise ValueError(f"Cannot read config file {config_path}: {e}") from e
        if not isinstance(values, dict):
            raise ValueError(f"Config file {config_path} must hold a JSON object")

    flags = {
        'cutoff_rule': CUTOFF_RULES.get(cutoff_rule, cutoff_rule),
        'fixed_cutoff': fixed_cutoff,
        'mad_multiplier': mad_multiplier,
        'cutoff_floor': cutoff_floor,
        'max_iterations': max_iterations
    }
    values.update({key: value for key, value in flags.items() if value is not None})
    return ConsensusConfig.from_dict(values)


@click.group()
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR']), default=None,
              help='Logging level, defaults to UNFAIR_ITEMS_LOG_LEVEL or INFO.')
def cli(log_level):
    """Unfair item analysis: find test items that disturb the fair-item consensus."""
    configure_logging(log_level)


@cli.command()
@click.argument('input_path', type=click.Path(dir_okay=False))
@consensus_options
@click.option('--out-dir', type=click.Path(file_okay=False), default='analysis_output', show_default=True)
@click.option('--plot', type=click.Choice(['svg', 'none']), default='svg', show_default=True)
@click.option('--format', 'output_format', type=click.Choice(['json', 'text']), default='text', show_default=True,
              help='What to print on stdout; both report files are always written.')
@click.pass_context
def analyze(ctx, input_path, cutoff_rule, fixed_cutoff, mad_multiplier, cutoff_floor, max_iterations,
            config_path, out_dir, plot, output_format):
    """Analyze a score CSV and write report.json, report.txt and the plane plots."""
    try:
        cfg = build_consensus_config(config_path, cutoff_rule, fixed_cutoff, mad_multiplier,
                                     cutoff_floor, max_iterations)
        raw = load_score_file(input_path)
        analysis = ItemAnalysisPipeline(cfg).analyze(raw)
    except (DegenerateCohortError, ConsensusCollapseError) as e:
        _fail(ctx, e, EXIT_DEGENERATE)
    except (ScoreFileError, ValueError) as e:
        _fail(ctx, e, EXIT_VALIDATION)

    report = build_report(analysis)
    try:
        write_report_files(report, out_dir)
        if plot == 'svg':
            for file_name, svg in plane_documents(analysis):
                write_text(os.path.join(out_dir, file_name), svg)
    except OSError as e:
        _fail(ctx, f"Cannot write output to {out_dir}: {e}", EXIT_VALIDATION)

    click.echo(serialize_report(report) if output_format == 'json' else render_text_report(report), nl=False)
    ctx.exit(EXIT_OK)


def _truth_path(out):
    return os.path.splitext(out)[0] + '.truth.json'


@cli.command()
@click.option('--items', 'items_path', type=click.Path(dir_okay=False), required=True,
              help='JSON item spec: list of {id?, a, b, c?, cap?}.')
@click.option('--examinees', type=click.IntRange(min=1), required=True)
@click.option('--seed', type=int, default=GENERATOR_CONFIG['seed'], show_default=True)
@click.option('--theta', type=click.Choice(['uniform', 'normal']),
              default=GENERATOR_CONFIG['theta_distribution'], show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), required=True, help='Score CSV to write.')
@click.pass_context
def generate(ctx, items_path, examinees, seed, theta, out):
    """Simulate a dichotomous exam from capped 3PL items."""
    try:
        item_ids, items = load_item_spec(items_path)
        cohort = CohortSpec(n_examinees=examinees, seed=seed, theta_distribution=theta)
        exam = ExamGenerator(items, item_ids).generate(cohort)
    except (ItemSpecError, ValueError) as e:
        _fail(ctx, e, EXIT_VALIDATION)

    truth = json.dumps(exam.truth_record(), indent=REPORT_CONFIG['json_indent']) + '\n'
    try:
        write_text(out, serialize_score_csv(exam.scores))
        write_text(_truth_path(out), truth)
    except OSError as e:
        _fail(ctx, f"Cannot write {out}: {e}", EXIT_VALIDATION)

    click.echo(f"Wrote {exam.scores.n_examinees} examinees x {exam.scores.n_items} items to {out}")
    ctx.exit(EXIT_OK)


def _parse_group(value):
    label, sep, path = value.partition('=')
    if not sep or not label or not path:
        raise ValueError(f"Groups are given as LABEL=PATH, got '{value}'")
    return label, path


@cli.command()
@click.option('--group', 'group_specs', multiple=True, required=True, help='LABEL=PATH, at least twice.')
@consensus_options
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='JSON file for the comparison table.')
@click.pass_context
def compare(ctx, group_specs, cutoff_rule, fixed_cutoff, mad_multiplier, cutoff_floor, max_iterations,
            config_path, out):
    """Compare flagged items across examinee groups and the pooled cohort."""
    try:
        cfg = build_consensus_config(config_path, cutoff_rule, fixed_cutoff, mad_multiplier,
                                     cutoff_floor, max_iterations)
        groups = [(label, normalize(load_score_file(path))) for label, path in map(_parse_group, group_specs)]
        comparison = compare_groups(groups, cfg)
    except (DegenerateCohortError, ConsensusCollapseError) as e:
        _fail(ctx, e, EXIT_DEGENERATE)
    except (ScoreFileError, ValueError) as e:
        _fail(ctx, e, EXIT_VALIDATION)

    if out is not None:
        try:
            write_text(out, json.dumps(comparison.to_dict(), indent=REPORT_CONFIG['json_indent']) + '\n')
        except OSError as e:
            _fail(ctx, f"Cannot write {out}: {e}", EXIT_VALIDATION)

    if comparison.item_ids:
        click.echo(comparison.to_text())
    else:
        click.echo('No item was flagged in any group')
    ctx.exit(EXIT_OK)


@cli.command()
@click.option('--seeds', type=click.IntRange(min=1), default=None, help='Number of seeds, starting at 0.')
@click.option('--cap', type=click.FloatRange(min=0, max=1, min_open=True, max_open=True), default=None,
              help='Probability ceiling of the injected unfair items.')
@click.option('--unfair', type=click.IntRange(min=0), default=None, help='Unfair items per exam.')
@click.option('--items', 'n_items', type=click.IntRange(min=3), default=None)
@click.option('--examinees', type=click.IntRange(min=2), default=None)
@click.option('--n-jobs', type=int, default=None, help='joblib workers, -1 for all cores.')
@click.option('--all-fair', is_flag=True, help='Inject no unfair items (false positive control).')
@consensus_options
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='JSON file for per-seed outcomes.')
@click.pass_context
def experiment(ctx, seeds, cap, unfair, n_items, examinees, n_jobs, all_fair, cutoff_rule, fixed_cutoff,
               mad_multiplier, cutoff_floor, max_iterations, config_path, out):
    """Seeded Monte Carlo recall and false positive check of the elimination loop."""
    try:
        cfg = build_consensus_config(config_path, cutoff_rule, fixed_cutoff, mad_multiplier,
                                     cutoff_floor, max_iterations)
        overrides = {
            'n_items': n_items,
            'n_examinees': examinees,
            'n_unfair': 0 if all_fair else unfair,
            'unfair_cap': cap
        }
        params = ExperimentParams(consensus=cfg, **{k: v for k, v in overrides.items() if v is not None})
        if params.n_unfair > params.n_items:
            raise ValueError(f"Cannot make {params.n_unfair} of {params.n_items} items unfair")
        summary = DetectionExperiment(params).run(None if seeds is None else range(seeds), n_jobs)
    except (DegenerateCohortError, ConsensusCollapseError) as e:
        _fail(ctx, e, EXIT_DEGENERATE)
    except ValueError as e:
        _fail(ctx, e, EXIT_VALIDATION)

    if out is not None:
        try:
            write_text(out, json.dumps(summary.to_dict(), indent=REPORT_CONFIG['json_indent']) + '\n')
        except OSError as e:
            _fail(ctx, f"Cannot write {out}: {e}", EXIT_VALIDATION)

    click.echo(f"Seeds: {summary.n_seeds}")
    click.echo(f"Unfair items per exam: {params.n_unfair} (cap {params.unfair_cap})")
    click.echo(f"Seeds with every unfair item flagged: {summary.seeds_with_full_recall}")
    click.echo(f"Mean false positives per seed: {summary.mean_false_positives:.2f}")
    click.echo(f"Seeds with no item flagged: {summary.seeds_without_flags}")
    click.echo(f"Seeds where elimination did not grow the positive-distance sum: {summary.seeds_with_contraction}")
    ctx.exit(EXIT_OK)


def main(argv=None):
    """
    Run the CLI and return its exit code instead of exiting.

    Args:
        argv (list): arguments without the program name, sys.argv[1:] when None

    Returns:
        int: 0 on success, 1 on validation errors, 2 on degenerate cohorts
    """
    try:
        code = cli.main(args=argv, prog_name='unfair-items', standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_VALIDATION
    except click.exceptions.Abort:
        click.echo('Aborted!', err=True)
        return EXIT_VALIDATION
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
