"""
Tabular reports for the command line and the HTTP service.
Turns engine results into pandas frames, regenerates the figure sweeps and writes CSV.
"""

import logging
import sys
from concurrent.futures import ProcessPoolExecutor

import pandas as pd

from backend.data.figure_grids import FIGURES, TQ2_FIELD_ORDERS, UBFIN_KS, k4_points
from engines.asym import ubfin_bound
from engines.exact import closed_form_expectation, tq2_value
from utils.errors import InputError
from utils.settings import get_settings

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.15g"


def expectation_frame(report):
    """Rows i,expectation,stderr,method for an ExpectationReport."""
    return pd.DataFrame(
        {
            "i": list(range(1, len(report.per_strand) + 1)),
            "expectation": report.per_strand,
            "stderr": report.stderr,
            "method": [report.method] * len(report.per_strand),
        }
    )


def alpha_frame(profile):
    rows = profile.rows()
    return pd.DataFrame(
        {
            "s": [s for s, _, _ in rows],
            "alpha": [a for _, a, _ in rows],
            "binom_n_minus_1_s": [b for _, _, b in rows],
        },
        dtype=object,
    )


def simulation_frame(report, strands, seed):
    return pd.DataFrame(
        {
            "strand": list(strands),
            "mean": report.per_strand,
            "stderr": report.stderr,
            "trials": [report.trials] * len(report.per_strand),
            "seed": [seed] * len(report.per_strand),
        }
    )


def bound_frame(bounds):
    """Rows k,p,P,case_i,case_ii,total,normalized for a list of AsymptoticBound."""
    return pd.DataFrame(
        [
            {
                "k": b.k,
                "p": b.p,
                "P": b.P,
                "case_i": b.case_i,
                "case_ii": b.case_ii,
                "total": b.total,
                "normalized": b.normalized,
            }
            for b in bounds
        ],
        columns=["k", "p", "P", "case_i", "case_ii", "total", "normalized"],
    )


def _tq2_row(q):
    return {"q": q, "normalized": tq2_value(q) / 2}


def _k4_row(point):
    x, alpha, y = point
    return {"x": x, "alpha": alpha, "normalized": closed_form_expectation(4, x, y) / 4}


def _ubfin_row(k):
    return {"k": k, "normalized": ubfin_bound(k) / k}


def _map_rows(fn, items):
    """Evaluate rows in a process pool capped by RA_THREADS; output keeps input order."""
    workers = min(get_settings().threads, len(items))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def sweep_figure(name):
    """
    Recompute one figure's data series.

    Args:
        name (str): fig_tq2, fig_k4 or fig_ubfin

    Returns:
        pandas.DataFrame: Same columns as the vendored golden CSV
    """
    if name == "fig_tq2":
        rows, columns = _map_rows(_tq2_row, TQ2_FIELD_ORDERS), ["q", "normalized"]
    elif name == "fig_k4":
        rows, columns = _map_rows(_k4_row, k4_points()), ["x", "alpha", "normalized"]
    elif name == "fig_ubfin":
        rows, columns = _map_rows(_ubfin_row, UBFIN_KS), ["k", "normalized"]
    else:
        raise InputError(f"unknown figure {name!r}; choose one of {', '.join(FIGURES)}")
    logger.info("swept %s: %d rows", name, len(rows))
    return pd.DataFrame(rows, columns=columns)


def write_csv(frame, out):
    """Write a frame as CSV to a path, or to stdout when out is '-'."""
    if out in (None, "-"):
        frame.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return
    frame.to_csv(out, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %d rows to %s", len(frame), out)
