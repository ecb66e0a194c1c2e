"""JSON / CSV writers and the printed experiment summary."""
import json
import logging
import os
import sys

import pandas as pd
from tabulate import tabulate

from errors import InvalidInput

logger = logging.getLogger(__name__)

FORMATS = ('json', 'csv')
REPORT_COLUMNS = ['dir_path', 'candidate', 'simple', 'cluster', 'k_star', 'nearest',
                  'norm_simple', 'norm_cluster']


def dumps(payload):
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def reports_to_frame(reports):
    return pd.DataFrame([r.to_row() for r in reports], columns=REPORT_COLUMNS)


def _frame_to_csv(frame):
    return frame.to_csv(index=False, lineterminator='\n')


def _emit(text, path):
    if path is None or path == '-':
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    logger.info(f"Wrote {path}")


def write_records(records, path=None, fmt='json', columns=None):
    """Write a list of dicts as a JSON array or as CSV (stdout when path is None)."""
    if fmt not in FORMATS:
        raise InvalidInput(f"unknown output format {fmt!r}; expected one of {FORMATS}")
    if fmt == 'json':
        _emit(dumps(records), path)
    else:
        _emit(_frame_to_csv(pd.DataFrame(records, columns=columns)), path)


def write_frame(frame, path=None):
    _emit(_frame_to_csv(frame), path)


def write_object(payload, path=None):
    _emit(dumps(payload), path)


def write_experiment(report, out_dir):
    """report.json, directory_scores.csv and pooled_scores.csv under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        'report': os.path.join(out_dir, 'report.json'),
        'directory_scores': os.path.join(out_dir, 'directory_scores.csv'),
        'pooled_scores': os.path.join(out_dir, 'pooled_scores.csv'),
    }
    _emit(dumps(report.to_dict()), paths['report'])
    rows = [row for d in report.directories for row in d.to_rows()]
    _emit(_frame_to_csv(pd.DataFrame(rows)), paths['directory_scores'])
    _emit(_frame_to_csv(pd.DataFrame(report.pooled_rows(),
                                     columns=['metric', 'population', 'value'])),
          paths['pooled_scores'])
    return paths


def summary_table(report):
    rows = []
    for metric, summary in report.aggregate.items():
        rows.append(['all', metric, summary.local_median, summary.sampled_median,
                     summary.ks.statistic, summary.ks.p_value])
    for name, entry in report.strata.items():
        for metric in ('simple', 'cluster'):
            ks = entry[metric]
            if ks is None:
                rows.append([name, metric, None, None, None, None])
            else:
                rows.append([name, metric, None, None, ks.statistic, ks.p_value])
    table = tabulate(rows, headers=['stratum', 'metric', 'local median', 'sampled median',
                                    'KS', 'p-value'],
                     floatfmt='.3f', missingval='-')
    footer = (f"directories scored: {len(report.directories)}  "
              f"skipped: {report.skipped}  fallback: {report.fallback}  "
              f"KS difference (cluster - simple): {report.ks_difference:+.3f}")
    if report.power_law is not None:
        footer += (f"\npower law of directory sizes: alpha={report.power_law.alpha:.2f} "
                   f"x_min={report.power_law.x_min}")
    return f"{table}\n{footer}\n"
