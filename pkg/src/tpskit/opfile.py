"""JSON operator specification files.

A spec file declares a dimension and named operators, each either a dense
complex matrix (entries as [re, im] pairs, row-major) or a Pauli string
over IXYZ (dimension 2^length).  Optional sections name generator lists
for bipartition checks and complex state vectors.  Parse failures raise
SpecFileError with the offending field spelled out; they are usage
errors, not computation errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .parity import pauli_string_matrix


class SpecFileError(ValueError):
    """Malformed operator specification file."""


@dataclass
class OperatorSpecFile:
    dim: int
    operators: dict
    states: dict = field(default_factory=dict)
    a1_generators: list = field(default_factory=list)
    a2_generators: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def operator(self, name: str) -> np.ndarray:
        if name not in self.operators:
            raise SpecFileError(f"no operator named {name!r} in spec file")
        return self.operators[name]

    def state(self, name: str) -> np.ndarray:
        if name not in self.states:
            raise SpecFileError(f"no state named {name!r} in spec file")
        return self.states[name]

    def generator_matrices(self, which: str) -> list:
        names = self.a1_generators if which == "a1" else self.a2_generators
        if not names:
            raise SpecFileError(f"spec file declares no {which}_generators")
        return [self.operator(n) for n in names]


def _complex_entry(value, where: str) -> complex:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise SpecFileError(f"{where}: expected an [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


def _dense_matrix(rows, dim: int, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != dim:
        raise SpecFileError(f"{where}: expected {dim} rows")
    out = np.empty((dim, dim), dtype=complex)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise SpecFileError(f"{where} row {r}: expected {dim} entries")
        for c, entry in enumerate(row):
            out[r, c] = _complex_entry(entry, f"{where} row {r} col {c}")
    return out


def _state_vector(entries, dim: int, where: str) -> np.ndarray:
    if not isinstance(entries, list) or len(entries) != dim:
        raise SpecFileError(f"{where}: expected {dim} amplitudes")
    vec = np.array([_complex_entry(e, f"{where} entry {k}")
                    for k, e in enumerate(entries)])
    norm = np.linalg.norm(vec)
    if norm < 1e-14:
        raise SpecFileError(f"{where}: state vector is zero")
    return vec / norm


def parse_pauli_token(token: str, dim=None) -> np.ndarray:
    """A bare Pauli string like "XX" or "ZZI", optionally checked against dim."""
    if not token or any(ch not in "IXYZ" for ch in token):
        raise SpecFileError(f"not a Pauli string over IXYZ: {token!r}")
    M = pauli_string_matrix(token)
    if dim is not None and M.shape[0] != dim:
        raise SpecFileError(
            f"Pauli string {token!r} has dimension {M.shape[0]}, spec declares {dim}")
    return M


def parse_spec(data: dict) -> OperatorSpecFile:
    if not isinstance(data, dict):
        raise SpecFileError("top level must be a JSON object")
    if "dim" not in data:
        raise SpecFileError("missing required field 'dim'")
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise SpecFileError(f"'dim' must be a positive integer, got {dim!r}")

    operators = {}
    for k, entry in enumerate(data.get("operators", [])):
        where = f"operators[{k}]"
        if not isinstance(entry, dict) or "name" not in entry:
            raise SpecFileError(f"{where}: expected an object with a 'name'")
        name = entry["name"]
        if name in operators:
            raise SpecFileError(f"{where}: duplicate operator name {name!r}")
        if ("matrix" in entry) == ("pauli" in entry):
            raise SpecFileError(f"{where}: need exactly one of 'matrix' or 'pauli'")
        if "pauli" in entry:
            operators[name] = parse_pauli_token(entry["pauli"], dim)
        else:
            operators[name] = _dense_matrix(entry["matrix"], dim, f"{where}.matrix")

    states = {}
    for k, entry in enumerate(data.get("states", [])):
        where = f"states[{k}]"
        if not isinstance(entry, dict) or "name" not in entry or "vector" not in entry:
            raise SpecFileError(f"{where}: expected an object with 'name' and 'vector'")
        name = entry["name"]
        if name in states:
            raise SpecFileError(f"{where}: duplicate state name {name!r}")
        states[name] = _state_vector(entry["vector"], dim, f"{where}.vector")

    def name_list(key):
        names = data.get(key, data.get(key.replace("_", "-"), []))
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise SpecFileError(f"'{key}' must be a list of operator names")
        for n in names:
            if n not in operators:
                raise SpecFileError(f"'{key}' references unknown operator {n!r}")
        return list(names)

    return OperatorSpecFile(
        dim=dim,
        operators=operators,
        states=states,
        a1_generators=name_list("a1_generators"),
        a2_generators=name_list("a2_generators"),
        metadata=data.get("metadata", {}),
    )


def load_spec(path: str) -> OperatorSpecFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SpecFileError(f"cannot read spec file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecFileError(
            f"invalid JSON in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_spec(data)
