"""Python bindings for the parabest heat-equation solver and its estimators."""

import csv
import io

from ._parabest import (
    IncompatibleMeshes,
    Mesh,
    __version__,
    common_coarsening,
    common_refinement,
    eoc,
    macro_square,
    preset,
    preset_names,
    run_checks,
    run_preset,
)


def parse_rows(text):
    """Per-step CSV text as a dict of column name to list of floats."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    columns = {name: [] for name in header}
    for row in reader:
        for name, value in zip(header, row):
            columns[name].append(float(value))
    return columns


__all__ = [
    "IncompatibleMeshes",
    "Mesh",
    "__version__",
    "common_coarsening",
    "common_refinement",
    "eoc",
    "macro_square",
    "parse_rows",
    "preset",
    "preset_names",
    "run_checks",
    "run_preset",
]
