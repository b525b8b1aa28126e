"""JSON encoding helpers shared by model documents, configs and reports.

Complex matrices travel as nested lists of ``[re, im]`` pairs; vectors as
lists of pairs.
"""

from __future__ import annotations

import numpy as np


def complex_matrix_to_json(a) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def complex_vector_to_json(v) -> list:
    v = np.asarray(v, dtype=complex).ravel()
    return [[float(x.real), float(x.imag)] for x in v]


def _pair(value, where):
    if (not isinstance(value, (list, tuple))) or len(value) != 2:
        raise ValueError(f"{where}: expected a [re, im] pair, got {value!r}")
    re, im = value
    if not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
        raise ValueError(f"{where}: pair entries must be numbers")
    return complex(re, im)


def complex_matrix_from_json(data, where="matrix") -> np.ndarray:
    """Decode a nested [re, im] document; ndarray input passes through."""
    if isinstance(data, np.ndarray):
        return np.atleast_2d(np.asarray(data, dtype=complex))
    if not isinstance(data, list) or not data:
        raise ValueError(f"{where}: expected a non-empty nested list")
    rows = []
    width = None
    for i, row in enumerate(data):
        if not isinstance(row, list) or not row:
            raise ValueError(f"{where}[{i}]: expected a non-empty list")
        rows.append([_pair(v, f"{where}[{i}][{k}]") for k, v in enumerate(row)])
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(f"{where}[{i}]: ragged row (len {len(row)} != {width})")
    return np.array(rows, dtype=complex)


def complex_vector_from_json(data, where="vector") -> np.ndarray:
    if isinstance(data, np.ndarray):
        return np.asarray(data, dtype=complex).ravel()
    if not isinstance(data, list) or not data:
        raise ValueError(f"{where}: expected a non-empty list")
    return np.array([_pair(v, f"{where}[{k}]") for k, v in enumerate(data)],
                    dtype=complex)


def real_vector_from_json(data, where="values") -> np.ndarray:
    if isinstance(data, np.ndarray):
        return np.asarray(data, dtype=float).ravel()
    if not isinstance(data, list) or not data:
        raise ValueError(f"{where}: expected a non-empty list of numbers")
    for k, v in enumerate(data):
        if not isinstance(v, (int, float)):
            raise ValueError(f"{where}[{k}]: expected a number, got {v!r}")
    return np.asarray(data, dtype=float)


def encode_float(x: float):
    """JSON-safe float: infinities become the strings "inf"/"-inf"."""
    x = float(x)
    if np.isposinf(x):
        return "inf"
    if np.isneginf(x):
        return "-inf"
    return x


def decode_float(x) -> float:
    if x == "inf":
        return float("inf")
    if x == "-inf":
        return float("-inf")
    return float(x)
