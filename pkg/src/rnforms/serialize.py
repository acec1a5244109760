"""JSON encoding of complex vectors and matrices.

Complex scalars travel as ``[re, im]`` pairs; matrices are row-major nested
lists of pairs.  No binary formats, so fixtures stay diffable.
"""

from __future__ import annotations

import numpy as np


def complex_to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    if not isinstance(p, (list, tuple)) or len(p) != 2:
        raise ValueError(f"expected [re, im] pair, got {p!r}")
    return complex(float(p[0]), float(p[1]))


def vector_to_json(v: np.ndarray) -> list:
    return [complex_to_pair(z) for z in np.asarray(v, dtype=np.complex128)]


def vector_from_json(data) -> np.ndarray:
    return np.array([pair_to_complex(p) for p in data], dtype=np.complex128)


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[complex_to_pair(z) for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    rows = [[pair_to_complex(p) for p in row] for row in data]
    m = np.array(rows, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError("matrix JSON must be a nested list of [re, im] pairs")
    return m
