"""Lossless JSON state files (``sympt-state-v1``)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .symcore import MAX_QUBITS, InvalidInputError, SymmetricState

FORMAT = "sympt-state-v1"


class StateFileError(ValueError):
    """Malformed or invalid state file; the message carries line/field diagnostics."""


def _num(x: float) -> str:
    return format(float(x), ".17g")


def dumps_state(s: SymmetricState, rank_tol: float) -> str:
    entries = ",\n    ".join(f"[{_num(z.real)}, {_num(z.imag)}]" for z in s.matrix.ravel())
    return (
        "{\n"
        f'  "format": "{FORMAT}",\n'
        f'  "n_qubits": {s.n_qubits},\n'
        f'  "rank_tol": {_num(rank_tol)},\n'
        '  "matrix": [\n'
        f"    {entries}\n"
        "  ]\n"
        "}\n"
    )


def save_state(path, s: SymmetricState, rank_tol: float) -> Path:
    path = Path(path)
    path.write_text(dumps_state(s, rank_tol))
    return path


def loads_state(text: str, source: str = "<string>") -> tuple[SymmetricState, float]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise StateFileError(f"{source}:{err.lineno}:{err.colno}: invalid JSON ({err.msg})") from None
    if not isinstance(doc, dict):
        raise StateFileError(f"{source}: top level must be an object")
    if doc.get("format") != FORMAT:
        raise StateFileError(f"{source}: field 'format' must be {FORMAT!r}, got {doc.get('format')!r}")
    n = doc.get("n_qubits")
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= MAX_QUBITS:
        raise StateFileError(f"{source}: field 'n_qubits' must be an integer in 1..{MAX_QUBITS}, got {n!r}")
    tol = doc.get("rank_tol")
    if not isinstance(tol, (int, float)) or isinstance(tol, bool) or not tol > 0:
        raise StateFileError(f"{source}: field 'rank_tol' must be a positive number, got {tol!r}")
    entries = doc.get("matrix")
    if not isinstance(entries, list) or len(entries) != (n + 1) ** 2:
        got = len(entries) if isinstance(entries, list) else type(entries).__name__
        raise StateFileError(f"{source}: field 'matrix' must list {(n + 1) ** 2} [re, im] pairs, got {got}")
    values = np.empty((n + 1) ** 2, dtype=complex)
    for idx, pair in enumerate(entries):
        ok = (isinstance(pair, list) and len(pair) == 2
              and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair))
        if not ok:
            raise StateFileError(f"{source}: field 'matrix[{idx}]' must be a [re, im] pair of numbers, got {pair!r}")
        values[idx] = complex(pair[0], pair[1])
    try:
        s = SymmetricState(n, values.reshape(n + 1, n + 1))
        s.check_density()
    except InvalidInputError as err:
        raise StateFileError(f"{source}: field 'matrix': {err}") from None
    return s, float(tol)


def load_state(path) -> tuple[SymmetricState, float]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise StateFileError(f"{path}: cannot read ({err.strerror})") from None
    return loads_state(text, str(path))
