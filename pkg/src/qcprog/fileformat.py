"""The ``.qprog`` program file format.

A program file is a JSON document::

    {
      "format": "qprog",
      "version": 1,
      "dimension": 2,
      "processes": [
        {"name": "flip", "kraus": [[[[0, 0], [1, 0]], [[1, 0], [0, 0]]]]}
      ],
      "measurement": {"m0": MATRIX, "m1": MATRIX},
      "initial_state": {"pure": VECTOR}            # or {"density": MATRIX}
    }

Every complex scalar is a two-element ``[re, im]`` array, a VECTOR is a list
of scalars and a MATRIX is a row-major list of rows. ``format`` and
``version`` are optional on input and always written on output. Nothing is
evaluated: entries must be numeric literals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import Tolerances, resolve
from .errors import DimensionMismatch, InvalidState, ParseError, ValidationError
from .program import Program, prepare_state, validate
from .superop import SuperOperator

FORMAT = "qprog"
VERSION = 1


@dataclass(frozen=True, eq=False)
class ProgramFile:
    program: Program
    rho0: np.ndarray
    pure: np.ndarray | None = None
    source: str | None = None


def _scalar(node, where: str) -> complex:
    if (
        not isinstance(node, list)
        or len(node) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in node)
    ):
        raise ParseError("complex scalar must be a [re, im] pair of numbers", where)
    re, im = float(node[0]), float(node[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ParseError("complex scalar must be finite", where)
    return complex(re, im)


def _vector(node, d: int, where: str) -> np.ndarray:
    if not isinstance(node, list):
        raise ParseError("expected a list of [re, im] scalars", where)
    if len(node) != d:
        raise DimensionMismatch(f"{where}: expected length {d}, got {len(node)}")
    return np.array([_scalar(x, f"{where}[{i}]") for i, x in enumerate(node)], dtype=complex)


def _matrix(node, d: int, where: str) -> np.ndarray:
    if not isinstance(node, list):
        raise ParseError("expected a list of rows", where)
    if len(node) != d:
        raise DimensionMismatch(f"{where}: expected {d} rows, got {len(node)}")
    return np.array([_vector(row, d, f"{where}[{i}]") for i, row in enumerate(node)], dtype=complex)


def _field(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", where)
    if key not in obj:
        raise ParseError(f"missing field {key!r}", where)
    return obj[key]


def loads(text: str, tol: Tolerances | None = None, source: str | None = None) -> ProgramFile:
    """Parse and validate program-file text.

    Raises
    ------
    ParseError
        Malformed JSON (with line and column) or a structurally invalid tree
        (with a ``$.path`` location).
    DimensionMismatch
        A matrix or vector of the wrong size.
    ValidationError
        Completeness or trace-preservation residuals above tolerance, or an
        unusable initial state.
    """
    tol = resolve(tol)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc

    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "$")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise ParseError(f"unknown format {fmt!r}", "$.format")
    version = doc.get("version", VERSION)
    if version != VERSION:
        raise ParseError(f"unsupported version {version!r}", "$.version")

    d = _field(doc, "dimension", "$")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError("dimension must be a positive integer", "$.dimension")

    procs_node = _field(doc, "processes", "$")
    if not isinstance(procs_node, list) or not procs_node:
        raise ParseError("processes must be a nonempty list", "$.processes")
    processes, names = [], []
    for k, pn in enumerate(procs_node):
        where = f"$.processes[{k}]"
        name = _field(pn, "name", where)
        if not isinstance(name, str) or not name:
            raise ParseError("name must be a nonempty string", f"{where}.name")
        kraus = _field(pn, "kraus", where)
        if not isinstance(kraus, list) or not kraus:
            raise ParseError("kraus must be a nonempty list of matrices", f"{where}.kraus")
        ops = [_matrix(mat, d, f"{where}.kraus[{i}]") for i, mat in enumerate(kraus)]
        processes.append(SuperOperator(ops))
        names.append(name)
    if len(set(names)) != len(names):
        raise ParseError("process names must be unique", "$.processes")

    meas = _field(doc, "measurement", "$")
    m0 = _matrix(_field(meas, "m0", "$.measurement"), d, "$.measurement.m0")
    m1 = _matrix(_field(meas, "m1", "$.measurement"), d, "$.measurement.m1")

    init = _field(doc, "initial_state", "$")
    if not isinstance(init, dict) or len(init) != 1 or not ({"pure", "density"} & set(init)):
        raise ParseError("initial_state must have exactly one of 'pure' or 'density'", "$.initial_state")
    pure = None
    if "pure" in init:
        pure = _vector(init["pure"], d, "$.initial_state.pure")
        raw = pure
    else:
        raw = _matrix(init["density"], d, "$.initial_state.density")

    program = Program(tuple(processes), m0, m1, names=tuple(names))
    report = validate(program, tol)
    if not report.ok:
        raise ValidationError("program failed validation", list(report.failures))
    try:
        rho0 = prepare_state(raw, d, tol, strict=True)
    except InvalidState as exc:
        raise ValidationError(str(exc), [{"check": "initial_state", "message": str(exc)}]) from exc
    return ProgramFile(program=program, rho0=rho0, pure=pure, source=source)


def load(path: str | Path, tol: Tolerances | None = None) -> ProgramFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(exc.strerror or str(exc), str(path)) from exc
    return loads(text, tol, source=str(path))


def parse_program(path: str | Path, tol: Tolerances | None = None) -> Program:
    return load(path, tol).program


def _enc_scalar(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _enc_vector(v) -> list:
    return [_enc_scalar(z) for z in np.asarray(v, dtype=complex).ravel()]


def _enc_matrix(a) -> list:
    return [_enc_vector(row) for row in np.asarray(a, dtype=complex)]


def to_document(program: Program, state) -> dict:
    """JSON-ready tree; ``state`` is a pure vector or a density matrix."""
    s = np.asarray(state, dtype=complex)
    init = {"pure": _enc_vector(s)} if s.ndim == 1 else {"density": _enc_matrix(s)}
    return {
        "format": FORMAT,
        "version": VERSION,
        "dimension": program.dim,
        "processes": [
            {"name": name, "kraus": [_enc_matrix(k) for k in e.kraus]}
            for name, e in zip(program.names, program.processes)
        ],
        "measurement": {"m0": _enc_matrix(program.m0), "m1": _enc_matrix(program.m1)},
        "initial_state": init,
    }


def dumps(program: Program, state) -> str:
    return json.dumps(to_document(program, state), indent=1) + "\n"


def dump(program: Program, state, path: str | Path) -> None:
    Path(path).write_text(dumps(program, state), encoding="utf-8")
