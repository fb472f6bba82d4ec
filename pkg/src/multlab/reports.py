"""CSV output.  Every file starts with a header row; floats carry 12
significant digits so that reruns reproduce the files byte for byte."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

SUMMARY_COLUMNS = ("check", "criterion", "suite", "anchor", "value", "target", "tolerance",
                   "passed", "asserted")


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(v)


def write_rows(path, rows, columns=None) -> Path:
    """Write dict rows; columns default to first-seen key order."""
    path = Path(path)
    if columns is None:
        columns = []
        for r in rows:
            columns += [k for k in r if k not in columns]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_cell(r.get(c)) for c in columns])
    return path


def write_summary(path, checks) -> Path:
    return write_rows(path, [asdict(c) for c in checks], SUMMARY_COLUMNS)


# ---------------------------------------------------------------- object dumps

def _axes(dim):
    return ["x", "y"][:dim]


def write_mesh(path, mesh) -> Path:
    """One row per node: index, coordinates, weight, boundary flag."""
    rows = [{"index": i, **dict(zip(_axes(mesh.dim), p)), "weight": w, "boundary": bool(b)}
            for i, (p, w, b) in enumerate(zip(mesh.points, mesh.weights, mesh.boundary_mask))]
    return write_rows(path, rows, ["index", *_axes(mesh.dim), "weight", "boundary"])


def _triplets(path, M, value_name) -> Path:
    i, j = np.nonzero(M)
    rows = [{"row": a, "col": b, value_name: M[a, b]} for a, b in zip(i, j)]
    return write_rows(path, rows, ["row", "col", value_name])


def write_operator(path, op) -> Path:
    """Nonzero entries of L on the unknowns; indices refer to ``op.domain``."""
    return _triplets(path, op.matrix, "value")


def write_kernel(path, K) -> Path:
    """Kernel entries ``k(x_row, y_col)`` as triplets (zeros skipped)."""
    return _triplets(path, K.K, "kernel")


def write_eigenvalues(path, es) -> Path:
    rows = [{"index": k, "mu": m, "sqrt_mu": s} for k, (m, s) in enumerate(zip(es.mu, es.sqrt_mu))]
    return write_rows(path, rows, ["index", "mu", "sqrt_mu"])


def write_matrix_text(path, M) -> Path:
    """Whitespace separated text dump, one matrix row per line."""
    path = Path(path)
    np.savetxt(path, np.atleast_2d(M), fmt="%.17g")
    return path


def write_symbol_tables(path, tables) -> Path:
    """Transform samples on the positive uniform grid and the graded psi ladder.

    The two grids differ, so the rows carry a ``grid`` column; columns that do
    not exist on a grid are left empty.
    """
    ks = sorted(tables.psi)
    cols = ["grid", "t", "fhat", "fhat_sharp", "fhat_flat", "sharp"] + [f"psi_{k}" for k in ks]
    rows = []
    pos = tables.tgrid > 0
    for j in np.flatnonzero(pos):
        rows.append({"grid": "uniform", "t": tables.tgrid[j], "fhat": tables.fhat[j],
                     "fhat_sharp": None if tables.fhat_sharp is None else tables.fhat_sharp[j],
                     "fhat_flat": None if tables.fhat_flat is None else tables.fhat_flat[j]})
    if tables.tlog is not None:
        for j, t in enumerate(tables.tlog):
            r = {"grid": "graded", "t": t, "sharp": tables.sharp_log[j]}
            r.update({f"psi_{k}": tables.psi[k][j] for k in ks})
            rows.append(r)
    return write_rows(path, rows, cols)
