"""CSV/JSON ingestion and result serialization.

All floats are printed with 17 significant digits so a written file
reloads to bit-identical values. CSVs carry a header row, comma
delimiter, "." decimal point.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .core import Dataset
from .experiments import McReport
from .inference import CiTable


def _g17(v) -> str:
    return format(float(v), ".17g")


def sniff_header(path) -> list:
    with open(path, newline="") as fh:
        row = next(csv.reader(fh), None)
    if not row:
        raise ValueError(f"{path}: empty file")
    return [c.strip() for c in row]


def load_csv(path, response_cols, covariate_cols=None, intercept: bool = True,
             count: bool = False) -> Dataset:
    """Read a dataset from a headered CSV.

    response_cols names the response column(s); covariate_cols defaults
    to every remaining column in file order. intercept prepends an
    all-ones column. count=True validates the single response column as
    nonnegative integers.
    """
    if count and len(response_cols) != 1:
        raise ValueError("count data takes exactly one response column")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        header = [c.strip() for c in header]
        raw_rows = [row for row in reader if row and any(c.strip() for c in row)]
    if not raw_rows:
        raise ValueError(f"{path}: no data rows")
    index = {name: j for j, name in enumerate(header)}
    for name in response_cols:
        if name not in index:
            raise ValueError(f"column {name!r} not found in {path}")
    if covariate_cols is None:
        covariate_cols = [c for c in header if c not in set(response_cols)]
    else:
        for name in covariate_cols:
            if name not in index:
                raise ValueError(f"column {name!r} not found in {path}")

    def cell(row, ri, name):
        j = index[name]
        if j >= len(row):
            raise ValueError(f"row {ri}: expected {len(header)} fields, got {len(row)}")
        raw = row[j].strip()
        try:
            val = float(raw)
        except ValueError:
            raise ValueError(
                f"row {ri}, column {name!r}: could not parse {raw!r} as a number")
        if not np.isfinite(val):
            raise ValueError(f"row {ri}, column {name!r}: non-finite value {raw!r}")
        return val

    n = len(raw_rows)
    xs = np.empty((n, len(covariate_cols)))
    ys = np.empty((n, len(response_cols)))
    for i, row in enumerate(raw_rows):
        ri = i + 1  # 1-based over data rows
        for j, name in enumerate(covariate_cols):
            xs[i, j] = cell(row, ri, name)
        for j, name in enumerate(response_cols):
            v = cell(row, ri, name)
            if count and (v < 0 or v != round(v)):
                raw = row[index[name]].strip()
                raise ValueError(f"row {ri}, column {name!r}: {raw!r} is not "
                                 "a nonnegative integer count")
            ys[i, j] = v
    if intercept:
        xs = np.column_stack([np.ones(n), xs])
    if count:
        return Dataset(x=xs, y_count=ys[:, 0])
    return Dataset(x=xs, y_cont=ys)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def write_coefficients(path, table: CiTable):
    _write_csv(path, ["parameter", "estimate", "se", "t_abs", "ci_lo", "ci_hi"],
               ([table.names[k], _g17(table.estimate[k]), _g17(table.se[k]),
                 _g17(table.t_abs[k]), _g17(table.lo[k]), _g17(table.hi[k])]
                for k in range(len(table.names))))


def write_mc_report(path, report: McReport):
    _write_csv(path, ["setting", "estimator", "n", "parameter", "bias", "sd",
                      "asd", "rmse", "coverage", "replicates", "failed"],
               ([r.setting, r.estimator, str(r.n), r.parameter, _g17(r.bias),
                 _g17(r.sd), _g17(r.asd), _g17(r.rmse), _g17(r.coverage),
                 str(r.replicates), str(r.failed)]
                for r in report.rows))


def write_pit(path, sorted_pit, uniform_quantile):
    _write_csv(path, ["sorted_pit", "uniform_quantile"],
               ([_g17(u), _g17(q)]
                for u, q in zip(sorted_pit, uniform_quantile)))


def write_dataset_csv(path, dataset: Dataset, cov_names, resp_names,
                      drop_intercept: bool = True):
    x = dataset.x[:, 1:] if drop_intercept else dataset.x
    if x.shape[1] != len(cov_names):
        raise ValueError("covariate name count does not match design")
    y = dataset.y_cont if dataset.y_cont is not None else dataset.y_count[:, None]
    if y.shape[1] != len(resp_names):
        raise ValueError("response name count does not match data")
    _write_csv(path, list(cov_names) + list(resp_names),
               ([_g17(v) for v in np.concatenate([x[i], y[i]])]
                for i in range(dataset.n)))


def write_meta(path, meta: dict):
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_results(result, out_dir, meta: dict | None = None) -> list:
    """Serialize a result object into out_dir; returns written paths.

    CiTable -> coefficients.csv; McReport -> mc_report.csv;
    (sorted_pit, uniform_quantile) -> pit.csv. meta, when given, lands
    in meta.json alongside.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if isinstance(result, CiTable):
        p = os.path.join(out_dir, "coefficients.csv")
        write_coefficients(p, result)
        written.append(p)
    elif isinstance(result, McReport):
        p = os.path.join(out_dir, "mc_report.csv")
        write_mc_report(p, result)
        written.append(p)
    elif isinstance(result, tuple) and len(result) == 2:
        p = os.path.join(out_dir, "pit.csv")
        write_pit(p, result[0], result[1])
        written.append(p)
    else:
        raise TypeError(f"no serializer for {type(result).__name__}")
    if meta is not None:
        p = os.path.join(out_dir, "meta.json")
        write_meta(p, meta)
        written.append(p)
    return written
