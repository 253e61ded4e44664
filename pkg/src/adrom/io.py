"""Run artifacts: binary matrix files, CSV exports, JSON manifests.

Matrix file layout: 8-byte magic ``ADRMAT01``, little-endian int64 rows and
cols, then rows*cols float64 values in column-major order. CSV floats are
written with 17 significant digits so they round-trip float64.
"""

import json
import platform
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

MATRIX_MAGIC = b"ADRMAT01"
FLOAT_FMT = "%.17g"


def write_matrix(path, mat):
    mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        np.array(mat.shape, dtype="<i8").tofile(fh)
        mat.ravel(order="F").astype("<f8").tofile(fh)
    return path


def read_matrix(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(MATRIX_MAGIC))
        if magic != MATRIX_MAGIC:
            raise ValueError(f"{path}: not a matrix file (bad magic {magic!r})")
        rows, cols = np.fromfile(fh, dtype="<i8", count=2)
        data = np.fromfile(fh, dtype="<f8", count=rows * cols)
    if data.size != rows * cols:
        raise ValueError(f"{path}: truncated matrix file")
    return data.reshape((rows, cols), order="F")


def write_matrix_csv(path, mat, header=None):
    """Plain CSV export of a matrix (one row per line); meant for small
    matrices, probes, and plotting, not for full-size trajectories."""
    mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
    path = Path(path)
    head = "" if header is None else header
    np.savetxt(path, mat, fmt=FLOAT_FMT, delimiter=",", header=head,
               comments="")
    return path


def write_csv(path, columns, names):
    """Write named columns (equal-length 1D arrays) as CSV."""
    arrs = [np.asarray(c) for c in columns]
    if len({a.shape[0] for a in arrs}) != 1:
        raise ValueError("CSV columns must have equal length")
    return write_matrix_csv(path, np.column_stack(arrs),
                            header=",".join(names))


def read_csv(path):
    """Read a CSV written by write_csv; returns (names, columns)."""
    with open(path) as fh:
        names = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return names, [data[:, j] for j in range(data.shape[1])]


def config_dict(config):
    """Plain-dict view of a RunConfig (nested dataclasses expanded)."""
    return asdict(config)


def environment_dict():
    from . import kernels
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "kernel_backend": kernels.BACKEND,
    }


def write_manifest(path, config, extra=None):
    """JSON run manifest: full configuration, environment, and run facts.

    The configuration section round-trips losslessly through
    ``cli.config_from_dict``.
    """
    doc = {
        "config": config_dict(config),
        "environment": environment_dict(),
    }
    if extra:
        doc.update(extra)
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, default=_jsonify)
        fh.write("\n")
    return path


def read_manifest(path):
    with open(path) as fh:
        return json.load(fh)


def _jsonify(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)!r}")
