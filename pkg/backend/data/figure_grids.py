"""
Independent-variable grids of the published figure sweeps, plus loaders for the
vendored expected values under backend/data/golden/.
"""

from pathlib import Path

import pandas as pd

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

# Prime powers q plotted for the k=2 optimum
TQ2_FIELD_ORDERS = [
    2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 37, 41, 43, 47, 49, 53, 59,
    61, 64, 67, 71, 73, 79, 81, 83, 89, 97, 101, 103, 107, 109, 113, 121, 125, 127, 128, 131, 137,
    139, 149, 151, 157,
]

# Ratio y/x grid per edge multiplicity x for G_4(x, y)
K4_RATIOS = {
    5: [0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0],
    10: [round(0.1 * i, 2) for i in range(1, 21)],
    100: [
        0.1, 0.2, 0.25, 0.35, 0.4, 0.45, 0.5, 0.55, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0,
        1.1, 1.15, 1.25, 1.3, 1.35, 1.4, 1.45, 1.5, 1.55, 1.6, 1.65, 1.7, 1.75, 1.8, 1.85, 1.9,
        1.95, 2.0,
    ],
    1000: [round(0.05 * i, 2) for i in range(2, 41)],
}

UBFIN_KS = list(range(3, 201))

FIGURES = ("fig_tq2", "fig_k4", "fig_ubfin")


def k4_points():
    """
    (x, alpha, y) triples of the G_4 sweep, in plotting order.

    Returns:
        list: Tuples with y = alpha * x as an integer
    """
    points = []
    for x, ratios in K4_RATIOS.items():
        for alpha in ratios:
            points.append((x, alpha, int(round(alpha * x))))
    return points


def load_golden(name):
    """
    Read the vendored expected values of one figure.

    Args:
        name (str): One of FIGURES

    Returns:
        pandas.DataFrame: Columns as in the CSV header
    """
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}")
    return pd.read_csv(GOLDEN_DIR / f"{name}.csv")
