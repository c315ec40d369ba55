"""Text file formats: tensors, factor sets, traces, histories, reports.

All formats are line-oriented and diff-able.  Numeric fields in the tensor
and factor files carry 17 significant digits, which round-trips float64
exactly.  Trace, history and report files are JSON lines; non-finite floats
are serialized as the strings "inf", "-inf" and "nan" so the files stay
standard JSON.
"""

import json
import math

import numpy as np

from .solve import ConvergenceTrace, TraceRecord
from .tensors import FactorSet, as_tensor3

__all__ = [
    "write_tensor", "read_tensor", "write_factors", "read_factors",
    "write_trace", "read_trace", "write_history", "read_history",
    "write_jsonl", "read_jsonl", "write_json", "json_dumps",
]

_FMT = "%.17g"


def _format_row(values):
    return " ".join(_FMT % v for v in values)


def write_tensor(path, T):
    """Write `tensor3 I J K` then the entries, first index fastest."""
    T = as_tensor3(T)
    I, J, K = T.shape
    flat = T.reshape(-1, order="F")  # i fastest, then j, then k
    with open(path, "w") as fh:
        fh.write(f"tensor3 {I} {J} {K}\n")
        for start in range(0, flat.size, I):
            fh.write(_format_row(flat[start:start + I]) + "\n")


def read_tensor(path):
    """Read a tensor file written by `write_tensor`."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 4 or tokens[0] != "tensor3":
        raise ValueError(f"{path}: not a tensor3 file")
    try:
        I, J, K = (int(t) for t in tokens[1:4])
        values = np.array([float(t) for t in tokens[4:]])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed tensor file: {exc}") from None
    if values.size != I * J * K:
        raise ValueError(
            f"{path}: expected {I * J * K} values, found {values.size}")
    return as_tensor3(values.reshape((I, J, K), order="F"))


def write_factors(path, factors):
    """Write `factors I J K R` then A, B, C row-major, blank-line separated."""
    I, J, K = factors.dims
    with open(path, "w") as fh:
        fh.write(f"factors {I} {J} {K} {factors.rank}\n")
        for idx, M in enumerate((factors.A, factors.B, factors.C)):
            if idx:
                fh.write("\n")
            for row in M:
                fh.write(_format_row(row) + "\n")


def read_factors(path):
    """Read a factor file written by `write_factors`."""
    with open(path) as fh:
        header = fh.readline().split()
        body = fh.read()
    if len(header) != 5 or header[0] != "factors":
        raise ValueError(f"{path}: not a factors file")
    try:
        I, J, K, R = (int(t) for t in header[1:])
        values = np.array([float(t) for t in body.split()])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed factors file: {exc}") from None
    expected = (I + J + K) * R
    if values.size != expected:
        raise ValueError(f"{path}: expected {expected} values, found {values.size}")
    A = values[:I * R].reshape(I, R)
    B = values[I * R:(I + J) * R].reshape(J, R)
    C = values[(I + J) * R:].reshape(K, R)
    return FactorSet(A, B, C)


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj == "inf":
        return float("inf")
    if obj == "-inf":
        return float("-inf")
    if obj == "nan":
        return float("nan")
    return obj


def write_jsonl(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(_sanitize(rec), sort_keys=True) + "\n")


def read_jsonl(path):
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(_restore(json.loads(line)))
    return records


def json_dumps(record):
    return json.dumps(_sanitize(record), sort_keys=True)


def write_json(path, record):
    with open(path, "w") as fh:
        fh.write(json_dumps(record) + "\n")


def trace_rows(trace, timings=False):
    """Trace records as JSON-ready dicts.

    wall_ms is zeroed unless timings is requested, keeping output files
    byte-reproducible across identically seeded runs.
    """
    rows = []
    for r in trace.records:
        rows.append({
            "iter": r.iteration,
            "objective": r.objective,
            "jred": r.reduced,
            "sigma_min": list(r.sigma_min),
            "wall_ms": r.wall_ms if timings else 0.0,
            "flags": list(r.flags),
        })
    return rows


def write_trace(path, trace, timings=False):
    write_jsonl(path, trace_rows(trace, timings=timings))


def read_trace(path):
    """Read a trace file back into a ConvergenceTrace (no history)."""
    trace = ConvergenceTrace()
    for row in read_jsonl(path):
        trace.records.append(TraceRecord(
            iteration=int(row["iter"]),
            objective=float(row["objective"]),
            reduced=float(row["jred"]),
            sigma_min=tuple(row["sigma_min"]),
            kr_rank=tuple(row.get("kr_rank", ())),
            wall_ms=float(row["wall_ms"]),
            flags=tuple(row["flags"]),
        ))
    return trace


def write_history(path, history):
    """Per-iteration factors as JSON lines: iter, A, B, C."""
    rows = [{"iter": k + 1, "A": F.A, "B": F.B, "C": F.C}
            for k, F in enumerate(history)]
    write_jsonl(path, rows)


def read_history(path):
    """Read a history file; returns the list of FactorSet per iteration."""
    history = []
    for row in read_jsonl(path):
        history.append(FactorSet(np.array(row["A"], dtype=np.float64),
                                 np.array(row["B"], dtype=np.float64),
                                 np.array(row["C"], dtype=np.float64)))
    return history
