"""
Fano Sampler Module
===================
Sampling harness over many (cubic, line) pairs. Every sampled line gets one
row in a pandas DataFrame with its splitting type, h0 table, Gram rank and
the structural checks of the 2-form; summaries are grouped by splitting
type and can be exported to an Excel report.
"""

from __future__ import annotations

import functools
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple

import pandas as pd

from cech_pairing import (
    connecting_sigma_from_quadrics,
    gram_from_quadrics,
    lagrangian_defects,
    sigma_splitting_components,
)
from cubic_geometry import (
    DEFAULT_COEFF_BOUND,
    CubicFourfold,
    Line,
    cubic_through_line,
    enumerate_lines_mod_p,
    jacobian_on_line,
    line_to_json,
    random_line,
    worker_count,
)
from exact_algebra import GeometryError, PrimeField, make_field
from fano_tangent import TWIST_RANGE, splitting_from_quadrics

EXPECTED_H0 = {-2: 0, 0: 4, 1: 7, 2: 10}

RECORD_COLUMNS = (
    ["seed", "line", "field", "smooth", "type"]
    + [f"h0({j})" for j in TWIST_RANGE]
    + ["h0_ok", "tangent_dim", "gram_rank", "antisymmetric", "lagrangian", "sigma_zero", "leading_rank", "cocycle_ok", "error"]
)


def line_record(Y: CubicFourfold, line: Line, seed: Optional[int] = None) -> Dict[str, object]:
    """
    All per-line checks for one line of Y, as a flat dict.

    Geometry errors are recorded in the ``error`` column rather than raised.
    """
    record: Dict[str, object] = {column: None for column in RECORD_COLUMNS}
    record.update(seed=seed, line=json.dumps(line_to_json(line)["span"]), field=Y.field.name)
    try:
        jr = jacobian_on_line(Y, line)
        record["smooth"] = jr.is_smooth()
        if not record["smooth"]:
            return record
        sd = splitting_from_quadrics(jr)
        sigma = connecting_sigma_from_quadrics(jr)
        components = sigma_splitting_components(sigma, sd, jr)
        gram = gram_from_quadrics(jr)
        defects = lagrangian_defects(jr, components.splitting, sigma)
    except GeometryError as e:
        record["error"] = type(e).__name__
        return record

    record["type"] = sd.kind.value
    for j, value in sd.h0_table.items():
        record[f"h0({j})"] = value
    record["h0_ok"] = all(sd.h0_table[j] == v for j, v in EXPECTED_H0.items())
    record["tangent_dim"] = len(gram.basis)
    record["gram_rank"] = gram.rank
    record["antisymmetric"] = gram.is_antisymmetric()
    record["lagrangian"] = all(x == 0 for x in defects)
    record["sigma_zero"] = ",".join(str(i) for i in components.vanishing_components())
    record["leading_rank"] = components.leading_rank()
    record["cocycle_ok"] = sigma.pairing_vanishes(jr)
    return record


def _record_for_seed(args) -> Dict[str, object]:
    """Draw the line and the cubic directly over the target field."""
    seed, coeff_bound, prime = args
    field = make_field(prime)
    try:
        line = random_line(seed, coeff_bound, field)
        Y = cubic_through_line(line, seed, coeff_bound)
    except (GeometryError, ZeroDivisionError) as e:
        record: Dict[str, object] = {column: None for column in RECORD_COLUMNS}
        record.update(seed=seed, field=field.name, error=type(e).__name__)
        return record
    return line_record(Y, line, seed)


def _record_for_line(args) -> Dict[str, object]:
    Y, line = args
    return line_record(Y, line)


def _with_warnings(function, job) -> Tuple[Dict[str, object], List[Tuple[type, str]]]:
    """Run one job and hand back the warnings it raised along with its result."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = function(job)
    return result, [(w.category, str(w.message)) for w in caught]


def _collect(function, jobs: List, workers: Optional[int]) -> List[Dict[str, object]]:
    """
    Map ``function`` over ``jobs``, in worker processes when there are several.

    Warnings raised by the jobs are re-emitted here once per distinct
    (category, message), so the caller sees the same warnings whatever the
    worker count.
    """
    workers = worker_count(workers)
    task = functools.partial(_with_warnings, function)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(task, jobs))
    else:
        outcomes = [task(job) for job in jobs]
    seen = set()
    for _, caught in outcomes:
        for category, message in caught:
            if (category, message) not in seen:
                seen.add((category, message))
                warnings.warn(message, category, stacklevel=2)
    return [record for record, _ in outcomes]


def sample_random_lines(
    count: int,
    seed: int = 0,
    coeff_bound: int = DEFAULT_COEFF_BOUND,
    prime: Optional[int] = None,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Sample random lines with a random cubic through each.

    Args:
        count: Number of (cubic, line) pairs
        seed: Seed of the first pair; pair i uses seed + i
        coeff_bound: Bound on the random integer coefficients
        prime: Draw each pair over GF(prime) when given
        workers: Worker processes (FANO_WORKERS when omitted)

    Returns:
        DataFrame with one row per pair
    """
    jobs = [(seed + i, coeff_bound, prime) for i in range(count)]
    records = _collect(_record_for_seed, jobs, workers)
    print(f"✅ Sampled {len(records)} lines (seed {seed}, bound {coeff_bound})", file=sys.stderr)
    return pd.DataFrame.from_records(records, columns=RECORD_COLUMNS)


def sample_lines_mod_p(
    Y: CubicFourfold, p: int, limit: Optional[int] = None, workers: Optional[int] = None
) -> pd.DataFrame:
    """Enumerate the F_p-lines of Y and check every one of them."""
    Yp = Y.change_field(PrimeField(p))
    lines = enumerate_lines_mod_p(Yp, p, limit=limit, workers=workers)
    print(f"✅ Found {len(lines)} lines over GF({p})", file=sys.stderr)
    records = _collect(_record_for_line, [(Yp, line) for line in lines], workers)
    return pd.DataFrame.from_records(records, columns=RECORD_COLUMNS)


def summarize(df: pd.DataFrame) -> pd.DataFrame:
    """Per splitting type: counts, Gram rank range and how many lines pass each check."""
    smooth = df[df["smooth"].eq(True) & df["error"].isna()]
    if smooth.empty:
        return pd.DataFrame(columns=["lines", "min_gram_rank", "max_gram_rank", "antisymmetric", "lagrangian", "h0_ok"])
    summary = smooth.groupby("type").agg(
        lines=("line", "count"),
        min_gram_rank=("gram_rank", "min"),
        max_gram_rank=("gram_rank", "max"),
        antisymmetric=("antisymmetric", "sum"),
        lagrangian=("lagrangian", "sum"),
        h0_ok=("h0_ok", "sum"),
    )
    return summary.reset_index()


def write_report(df: pd.DataFrame, output_path: str) -> pd.DataFrame:
    """
    Write the per-line table and its summary to an Excel workbook.

    Returns:
        The summary DataFrame
    """
    summary = summarize(df)
    with pd.ExcelWriter(output_path, engine="openpyxl") as writer:
        df.to_excel(writer, sheet_name="Lines", index=False)
        summary.to_excel(writer, sheet_name="Summary", index=False)
    print(f"✅ Report saved to '{output_path}'", file=sys.stderr)
    return summary


def records_to_json(df: pd.DataFrame) -> List[Dict[str, object]]:
    """Rows as plain JSON-ready dicts (NaN becomes None)."""
    cleaned = df.astype(object).where(pd.notna(df), None)
    return cleaned.to_dict(orient="records")
