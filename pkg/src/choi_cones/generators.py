"""Built-in maps and states shared by the CLI and the demos."""

from __future__ import annotations

import numpy as np

from .core import QuantumMap, matrix_unit
from .schmidt import isotropic_state, witness_map

# positive, not 2-positive map on M_3: X -> diag(2x00 + x22, x00 + 2x11, x11 + 2x22) - X
CHOI3_WEIGHTS = np.array([[2.0, 0.0, 1.0], [1.0, 2.0, 0.0], [0.0, 1.0, 2.0]])


def identity_map(n: int) -> QuantumMap:
    return QuantumMap.from_kraus([np.eye(n)])


def transpose_map(n: int) -> QuantumMap:
    # e_ij X e_ij = X[j, i] e_ij
    return QuantumMap.from_pairs([(matrix_unit(n, i, j), matrix_unit(n, i, j)) for i in range(n) for j in range(n)])


def trace_map(n: int) -> QuantumMap:
    """``X -> Tr(X) I``."""
    return QuantumMap.from_pairs([(matrix_unit(n, a, b), matrix_unit(n, b, a)) for a in range(n) for b in range(n)])


def choi3_map() -> QuantumMap:
    n = 3
    pairs = [
        (w * matrix_unit(n, a, b), matrix_unit(n, b, a))
        for a in range(n)
        for b in range(n)
        if (w := CHOI3_WEIGHTS[a, b]) != 0
    ]
    pairs.append((-np.eye(n), np.eye(n)))
    return QuantumMap.from_pairs(pairs)


def depolarizing_map(lam: float, n: int) -> QuantumMap:
    """``X -> lam X + (1 - lam) Tr(X) I / n``; CP iff ``-1/(n^2-1) <= lam <= 1``."""
    return lam * identity_map(n) + ((1.0 - lam) / n) * trace_map(n)


def measure_prepare_map(n: int) -> QuantumMap:
    """Diagonal dephasing ``X -> sum_i X[i, i] e_ii``: rank-one Kraus operators ``e_ii``."""
    return QuantumMap.from_kraus([matrix_unit(n, i, i) for i in range(n)])


def _parse(name: str) -> tuple[str, float | None]:
    base, sep, arg = name.partition(":")
    if not sep:
        return base, None
    try:
        return base, float(arg)
    except ValueError:
        raise ValueError(f"generator parameter must be a number, got {arg!r}") from None


MAP_GENERATORS = ("identity", "transpose", "choi3", "depolarizing", "witness", "measure-prepare", "trace")
STATE_GENERATORS = ("isotropic",)


def generate(name: str, n: int) -> tuple[str, QuantumMap | np.ndarray, str]:
    """Return ``(kind, object, preferred representation)`` for a generator name.

    ``kind`` is ``"map"`` or ``"state"``.
    """
    base, arg = _parse(name)
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    needs_arg = base in ("depolarizing", "witness", "isotropic")
    if needs_arg != (arg is not None):
        raise ValueError(f"generator {base!r} {'needs' if needs_arg else 'takes no'} parameter")
    if base == "identity":
        return "map", identity_map(n), "kraus"
    if base == "measure-prepare":
        return "map", measure_prepare_map(n), "kraus"
    if base == "transpose":
        return "map", transpose_map(n), "pairs"
    if base == "trace":
        return "map", trace_map(n), "pairs"
    if base == "choi3":
        if n != 3:
            raise ValueError("choi3 is defined on 3x3 matrices only")
        return "map", choi3_map(), "pairs"
    if base == "depolarizing":
        return "map", depolarizing_map(arg, n), "pairs"
    if base == "witness":
        if n < 2:
            raise ValueError("witness maps need n >= 2")
        return "map", witness_map(arg, n), "pairs"
    if base == "isotropic":
        return "state", isotropic_state(arg, n), "state"
    raise ValueError(f"unknown generator {name!r}; choose from {', '.join(MAP_GENERATORS + STATE_GENERATORS)}")
