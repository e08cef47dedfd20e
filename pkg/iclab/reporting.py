"""Writing results: JSON reports, flat CSV tables and output directories."""
import csv
import json
import math
import os
import os.path as osp

import numpy as np

# env var overriding the output directory of every run
OUTPUT_ENV_VAR = "IC_LAB_OUT"
DEFAULT_OUTPUT_DIR = "results"


def to_jsonable(obj):
    """Recursively convert numpy values, tuples and dataclass dicts into
    plain JSON types. Non-finite floats become None (JSON null)."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def write_json(obj, file_path):
    with open(file_path, "w") as fout:
        json.dump(to_jsonable(obj), fout, indent=2, allow_nan=False)
    return file_path


def write_csv(rows, file_path, columns=None):
    """Write a list of flat dicts as CSV, columns in ``columns`` order (keys
    of the first row if None)."""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(file_path, "w", newline="") as fout:
        writer = csv.DictWriter(fout, fieldnames=columns,
                                extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_value(row.get(k)) for k in columns})
    return file_path


def _csv_value(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_csv(file_path):
    with open(file_path, newline="") as fin:
        return list(csv.DictReader(fin))


def resolve_output_dir(output_dir=None):
    """Output directory, ``IC_LAB_OUT`` taking precedence over
    ``output_dir``."""
    env_dir = os.environ.get(OUTPUT_ENV_VAR)
    if env_dir:
        return env_dir
    return DEFAULT_OUTPUT_DIR if output_dir is None else output_dir


def make_output_dir(output_dir=None, name=None):
    """Create (if needed) and return the output directory.

    ``IC_LAB_OUT`` overrides ``output_dir``. When ``name`` is given the
    results go into a subdirectory of that name.
    """
    path = resolve_output_dir(output_dir)
    if name:
        path = osp.join(path, name)
    os.makedirs(path, exist_ok=True)
    return path


def summary_line(command, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"{command}: {status}"
    return f"{line} ({detail})" if detail else line
