"""File formats: problem, POVM, and isometry JSON plus sweep CSV.

All floats are written with 17 significant digits, enough for an exact
binary round trip, and object keys are sorted, so rereading a file and
rewriting it reproduces it byte for byte.  Complex numbers are always
``[re, im]`` pairs.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .dilation import RESIDUAL, DilationResult
from .states import (
    INCONCLUSIVE,
    DensityMatrix,
    Povm,
    ProblemSpec,
    PureState,
    density_of,
    make_benchmark_two_qubit_states,
    make_coherent_state,
)


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return f"{x:.17g}"


def canonical_dumps(obj, indent: int = 0) -> str:
    """JSON with sorted keys and 17-significant-digit floats."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"object keys must be strings, got {key!r}")
            items.append(f"{pad}  {json.dumps(key)}: "
                         + canonical_dumps(obj[key], indent + 2).lstrip())
        if not items:
            return pad + "{}"
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        items = [canonical_dumps(v, indent + 2) for v in obj]
        if not items:
            return pad + "[]"
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + _format_float(float(obj))
    if isinstance(obj, str):
        return pad + json.dumps(obj)
    if obj is None:
        return pad + "null"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(obj) + "\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def encode_complex_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_complex_matrix(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)


def encode_complex_vector(v: np.ndarray) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=complex)]


def decode_complex_vector(data) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data], dtype=complex)


# --------------------------------------------------------------------------
# Problem files
# --------------------------------------------------------------------------

def expand_state_entry(entry: dict, num_qubits: int) -> list:
    """Expand one problem-file state entry into concrete states.

    Entry types: ``pure`` (amplitudes), ``density`` (matrix), ``coherent``
    (truncated coherent state of the given complex amplitude), and
    ``benchmark2q`` (the three nearly orthogonal two-qubit states, expanding
    to three entries).
    """
    kind = entry.get("type")
    if kind == "pure":
        return [PureState(decode_complex_vector(entry["amplitudes"]))]
    if kind == "density":
        return [DensityMatrix(decode_complex_matrix(entry["matrix"]))]
    if kind == "coherent":
        re, im = entry["alpha"]
        return [make_coherent_state(complex(re, im), num_qubits)]
    if kind == "benchmark2q":
        if num_qubits != 2:
            raise ValueError("benchmark2q entries require num_qubits = 2")
        return list(make_benchmark_two_qubit_states(tuple(entry["a"])))
    raise ValueError(f"unknown state entry type {kind!r}")


def read_problem(path, noise_lambda: float = 0.0) -> ProblemSpec:
    """Load a problem file into a :class:`ProblemSpec`."""
    data = read_json(path)
    num_qubits = int(data["num_qubits"])
    states = []
    for entry in data["states"]:
        states.extend(expand_state_entry(entry, num_qubits))
    dim = 2 ** num_qubits
    dms = [s if isinstance(s, DensityMatrix) else density_of(s) for s in states]
    for s in dms:
        if s.dim != dim:
            raise ValueError(f"state dimension {s.dim} does not match num_qubits {num_qubits}")
    priors = data.get("priors")
    if priors is None:
        priors = [1.0 / len(dms)] * len(dms)
    return ProblemSpec(states=tuple(dms), priors=np.asarray(priors, dtype=float),
                       noise_lambda=noise_lambda)


def problem_payload(spec: ProblemSpec) -> dict:
    """Problem-file payload (states stored as density matrices)."""
    num_qubits = (spec.dim - 1).bit_length()
    if 2 ** num_qubits != spec.dim:
        raise ValueError("only power-of-two dimensions can be serialized")
    return {
        "num_qubits": num_qubits,
        "states": [{"type": "density", "matrix": encode_complex_matrix(s.matrix)}
                   for s in spec.states],
        "priors": [float(p) for p in spec.priors],
    }


def write_problem(path, spec: ProblemSpec) -> None:
    write_json(path, problem_payload(spec))


# --------------------------------------------------------------------------
# POVM and isometry files
# --------------------------------------------------------------------------

def _encode_label(label):
    return label if isinstance(label, (int, np.integer)) else str(label)


def _decode_label(raw):
    if isinstance(raw, int):
        return raw
    if raw == INCONCLUSIVE:
        return INCONCLUSIVE
    if raw == RESIDUAL:
        return RESIDUAL
    raise ValueError(f"unknown label {raw!r}")


def povm_payload(povm: Povm, meta: dict | None = None) -> dict:
    payload = {
        "dim": povm.dim,
        "elements": [{"label": _encode_label(lbl), "matrix": encode_complex_matrix(e)}
                     for lbl, e in zip(povm.labels, povm.elements)],
    }
    if meta is not None:
        payload["meta"] = meta
    return payload


def write_povm(path, povm: Povm, meta: dict | None = None) -> None:
    write_json(path, povm_payload(povm, meta))


def read_povm(path) -> Povm:
    data = read_json(path)
    dim = int(data["dim"])
    labels = tuple(_decode_label(e["label"]) for e in data["elements"])
    elements = tuple(decode_complex_matrix(e["matrix"]) for e in data["elements"])
    return Povm(dim=dim, elements=elements, labels=labels)


def isometry_payload(dil: DilationResult, meta: dict | None = None) -> dict:
    payload = {
        "domain_dim": dil.domain_dim,
        "target_qubits": dil.target_qubits,
        "total_rank": dil.total_rank,
        "delta": float(dil.delta),
        "outcome_map": [_encode_label(lbl) for lbl in dil.outcome_map],
        "matrix": encode_complex_matrix(dil.isometry),
    }
    if meta is not None:
        payload["meta"] = meta
    return payload


def write_isometry(path, dil: DilationResult, meta: dict | None = None) -> None:
    write_json(path, isometry_payload(dil, meta))


def read_isometry(path) -> DilationResult:
    data = read_json(path)
    return DilationResult(
        domain_dim=int(data["domain_dim"]),
        total_rank=int(data["total_rank"]),
        target_qubits=int(data["target_qubits"]),
        isometry=decode_complex_matrix(data["matrix"]),
        outcome_map=tuple(_decode_label(l) for l in data["outcome_map"]),
        delta=float(data["delta"]),
    )


# --------------------------------------------------------------------------
# Sweep CSV and benchmark report schema
# --------------------------------------------------------------------------

SWEEP_HEADER = ("lambda", "p_succ", "p_err", "p_inc", "error_to_success")


def write_sweep_csv(path, rows) -> None:
    """Rows of (lambda, p_succ, p_err, p_inc, ratio); lambda in scientific notation."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SWEEP_HEADER) + "\n")
        for lam, p_succ, p_err, p_inc, ratio in rows:
            ratio_s = "inf" if math.isinf(ratio) else _format_float(float(ratio))
            fh.write(f"{lam:.10e},{_format_float(float(p_succ))},"
                     f"{_format_float(float(p_err))},{_format_float(float(p_inc))},"
                     f"{ratio_s}\n")


def read_sweep_csv(path) -> list:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != SWEEP_HEADER:
            raise ValueError(f"unexpected sweep header {header}")
        for line in fh:
            lam, p_succ, p_err, p_inc, ratio = line.strip().split(",")
            rows.append((float(lam), float(p_succ), float(p_err), float(p_inc),
                         float(ratio)))
    return rows


#: Schema of the benchmark report (validated by :func:`validate_bench_report`).
BENCH_REPORT_SCHEMA = {
    "type": "object",
    "required": ["meta", "rows"],
    "properties": {
        "meta": {
            "type": "object",
            "required": ["tool", "version", "tol", "seed"],
        },
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["scheme", "qubits", "task", "seconds"],
                "properties": {
                    "scheme": {"type": "string"},
                    "qubits": {"type": "integer", "minimum": 1},
                    "task": {"type": "string", "enum": ["solve", "rank_one", "isometry"]},
                    "seconds": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}


def validate_bench_report(report: dict) -> None:
    """Raise ValueError when a benchmark report does not match the schema."""
    if not isinstance(report, dict):
        raise ValueError("report must be an object")
    for key in BENCH_REPORT_SCHEMA["required"]:
        if key not in report:
            raise ValueError(f"report is missing {key!r}")
    meta = report["meta"]
    if not isinstance(meta, dict):
        raise ValueError("meta must be an object")
    for key in BENCH_REPORT_SCHEMA["properties"]["meta"]["required"]:
        if key not in meta:
            raise ValueError(f"meta is missing {key!r}")
    rows = report["rows"]
    if not isinstance(rows, list):
        raise ValueError("rows must be an array")
    row_schema = BENCH_REPORT_SCHEMA["properties"]["rows"]["items"]
    tasks = row_schema["properties"]["task"]["enum"]
    for row in rows:
        if not isinstance(row, dict):
            raise ValueError("every row must be an object")
        for key in row_schema["required"]:
            if key not in row:
                raise ValueError(f"row is missing {key!r}")
        if not isinstance(row["scheme"], str):
            raise ValueError("scheme must be a string")
        if not isinstance(row["qubits"], int) or row["qubits"] < 1:
            raise ValueError("qubits must be a positive integer")
        if row["task"] not in tasks:
            raise ValueError(f"task must be one of {tasks}")
        if not isinstance(row["seconds"], (int, float)) or row["seconds"] < 0:
            raise ValueError("seconds must be a nonnegative number")
