import json
import logging
import os

import pandas as pd

from config.config import REPORT_CONFIG
from models.consensus import AnalysisResult, Iteration, RescoredTotals
from models.regression import ItemPoint

logger = logging.getLogger(__name__)


def _point_to_dict(point):
    return {
        'id': point.item_id,
        'b0': point.b0,
        'b1': point.b1,
        'd': point.d,
        'mean_item_score': point.mean_item_score,
        'n_examinees': point.n_examinees,
        'residual_variance': point.residual_variance
    }


def _point_from_dict(data):
    return ItemPoint(
        item_id=data['id'],
        b0=data['b0'],
        b1=data['b1'],
        d=data['d'],
        mean_item_score=data['mean_item_score'],
        n_examinees=data['n_examinees'],
        residual_variance=data['residual_variance']
    )


def _ordered(ids, reference):
    return [item_id for item_id in reference if item_id in ids]


def analysis_result_to_dict(result):
    """JSON-ready form of an AnalysisResult; sets are listed in item order."""
    item_order = [point.item_id for point in result.iterations[0].item_points]
    rescored = result.rescored_totals
    return {
        'iterations': [
            {
                'd_f': iteration.d_f,
                'removed': _ordered(iteration.removed, item_order),
                'item_points': [_point_to_dict(point) for point in iteration.item_points]
            }
            for iteration in result.iterations
        ],
        'fair_items': _ordered(result.fair_items, item_order),
        'unfair_items': [{'id': item_id, 'd': d} for item_id, d in result.unfair_items],
        'survivor_points': [_point_to_dict(point) for point in result.survivor_points],
        'rescored': {
            'max_score': rescored.max_score,
            'examinees': [
                {'id': examinee_id, 'score': score, 'percentage': percentage}
                for examinee_id, score, percentage in zip(rescored.examinee_ids, rescored.scores, rescored.percentages)
            ]
        }
    }


def analysis_result_from_dict(data):
    rescored = data['rescored']
    return AnalysisResult(
        iterations=tuple(
            Iteration(
                item_points=tuple(_point_from_dict(p) for p in iteration['item_points']),
                d_f=iteration['d_f'],
                removed=frozenset(iteration['removed'])
            )
            for iteration in data['iterations']
        ),
        fair_items=frozenset(data['fair_items']),
        unfair_items=tuple((entry['id'], entry['d']) for entry in data['unfair_items']),
        survivor_points=tuple(_point_from_dict(p) for p in data['survivor_points']),
        rescored_totals=RescoredTotals(
            examinee_ids=tuple(e['id'] for e in rescored['examinees']),
            scores=tuple(e['score'] for e in rescored['examinees']),
            max_score=rescored['max_score'],
            percentages=tuple(e['percentage'] for e in rescored['examinees'])
        )
    )


def build_report(analysis):
    """
    Assemble the report document for one analysis.

    Args:
        analysis (ItemAnalysis): pipeline output

    Returns:
        dict: report with config, iterations, fair/unfair items, classical
              statistics, difficulty bands, rescored totals and the
              positive-distance sums before and after elimination
    """
    result = analysis.result
    points = result.final_points()
    body = analysis_result_to_dict(result)
    return {
        'config': analysis.config.to_dict(),
        'iterations': body['iterations'],
        'fair_items': body['fair_items'],
        'unfair_items': [
            {'id': item_id, 'b0': points[item_id].b0, 'b1': points[item_id].b1, 'd': d}
            for item_id, d in result.unfair_items
        ],
        'classic': [
            {
                'id': s.item_id,
                'r': s.r,
                'p_value': s.p_value,
                'b1': s.b1_difficulty,
                'region': analysis.regions[s.item_id].value
            }
            for s in analysis.classic_stats
        ],
        'difficulty': [{'id': e.item_id, 'b1': e.b1, 'band': e.band} for e in analysis.difficulty],
        'below_floor': list(analysis.below_floor),
        'rescored': body['rescored'],
        'sum_positive_distances_before': result.sum_positive_distances_before,
        'sum_positive_distances_after': result.sum_positive_distances_after
    }


def serialize_report(report):
    return json.dumps(report, indent=REPORT_CONFIG['json_indent'], ensure_ascii=False) + '\n'


def parse_report(text):
    return json.loads(text)


def _fmt(value, digits=4):
    return 'undefined' if value is None else f"{value:.{digits}f}"


def render_text_report(report):
    """Plain-text rendering of the report document."""
    cfg = report['config']
    lines = ['UNFAIR ITEM ANALYSIS', '=' * 60]
    lines.append(
        f"Cutoff rule: {cfg['cutoff_rule']} (multiplier {cfg['mad_multiplier']}, floor {cfg['cutoff_floor']}, "
        f"fixed {cfg['fixed_cutoff']})"
    )
    lines.append(f"Rounds: {len(report['iterations'])}")
    for number, iteration in enumerate(report['iterations'], start=1):
        removed = ', '.join(map(str, iteration['removed'])) or 'none'
        lines.append(f"  round {number}: {len(iteration['item_points'])} items, "
                     f"d_f = {iteration['d_f']:.4f}, removed: {removed}")

    lines.append('')
    if report['unfair_items']:
        ids = ', '.join(str(entry['id']) for entry in report['unfair_items'])
        distances = ', '.join(f"{entry['d']:.2f}" for entry in report['unfair_items'])
        lines.append(f"Unfair items: {ids}; distances from the ideal line: {distances}")
    else:
        lines.append('Unfair items: none')
    lines.append(f"Fair items: {len(report['fair_items'])}")
    if report['below_floor']:
        lines.append(f"Items below line CD (not plotted): {', '.join(map(str, report['below_floor']))}")
    lines.append(
        f"Sum of positive distances: {report['sum_positive_distances_before']:.4f} before, "
        f"{report['sum_positive_distances_after']:.4f} after elimination"
    )

    lines.append('')
    lines.append('Classical comparison')
    classic = pd.DataFrame(
        [
            [_fmt(row['r'], 3), f"{row['p_value']:.3f}", f"{row['b1']:.3f}", row['region']]
            for row in report['classic']
        ],
        index=[str(row['id']) for row in report['classic']],
        columns=['r', 'p_value', 'b1', 'region']
    )
    lines.append(classic.to_string())

    lines.append('')
    lines.append('Difficulty profile (by b1)')
    for entry in report['difficulty']:
        lines.append(f"  {entry['id']}: b1 = {entry['b1']:.3f} ({entry['band']})")

    rescored = report['rescored']
    lines.append('')
    lines.append(f"Rescored totals (maximum {rescored['max_score']:g})")
    for examinee in rescored['examinees']:
        lines.append(f"  {examinee['id']}: {examinee['score']:g} ({examinee['percentage']:.1f}%)")
    return '\n'.join(lines) + '\n'


def write_text(path, text):
    """Write a UTF-8 text file with '\\n' line endings."""
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(text)
    logger.info(f"Wrote {path}")
    return path


def write_report_files(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    json_path = write_text(os.path.join(out_dir, REPORT_CONFIG['json_file']), serialize_report(report))
    text_path = write_text(os.path.join(out_dir, REPORT_CONFIG['text_file']), render_text_report(report))
    return json_path, text_path
