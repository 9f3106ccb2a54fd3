"""Canonical JSON for the CLI's input files and reports.

Canonical means sorted keys, compact separators and floats written with 17
significant digits (``-0`` folded to ``0``), so that parsing then
re-serialising a canonical file reproduces it byte for byte.  Complex
entries are ``[re, im]`` pairs and matrices are row-major nested lists.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DimensionError, QuantumMap, map_from_std_choi, std_choi

REPS = ("kraus", "pairs", "choi")


class FormatError(ValueError):
    """Malformed or inconsistent input file."""


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise FormatError(f"non-finite number {x!r} cannot be serialised")
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def dumps(obj) -> str:
    """Canonical serialisation of JSON-like data (dicts, lists, str, bool, int, float, None)."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in m]
    return [encode_matrix(row) for row in m]


def decode_matrix(data, ndim: int = 2) -> np.ndarray:
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix payload is not a nested numeric array: {exc}") from None
    if a.ndim != ndim + 1 or a.shape[-1] != 2:
        raise FormatError(f"expected a {ndim}-d array of [re, im] pairs, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise FormatError("matrix payload contains non-finite entries")
    return a[..., 0] + 1j * a[..., 1]


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True, eq=False)
class MapFile:
    dim: int
    rep: str
    payload: object
    meta: dict = field(default_factory=dict)

    def to_map(self) -> QuantumMap:
        n = self.dim
        if self.rep == "kraus":
            return QuantumMap.from_kraus(self.payload) if self.payload else QuantumMap.zero(n)
        if self.rep == "pairs":
            return QuantumMap.from_pairs(self.payload, dim=n)
        return map_from_std_choi(self.payload)

    @classmethod
    def from_map(cls, phi: QuantumMap, rep: str = "pairs", meta: dict | None = None) -> "MapFile":
        from .positivity import kraus

        if rep == "kraus":
            payload = kraus(phi)
        elif rep == "pairs":
            payload = phi.pairs
        elif rep == "choi":
            payload = std_choi(phi)
        else:
            raise FormatError(f"unknown representation {rep!r}")
        return cls(phi.dim, rep, payload, dict(meta or {}))

    def to_json(self) -> dict:
        if self.rep == "kraus":
            payload = [encode_matrix(v) for v in self.payload]
        elif self.rep == "pairs":
            payload = [[encode_matrix(a), encode_matrix(b)] for a, b in self.payload]
        else:
            payload = encode_matrix(self.payload)
        return {"kind": "map", "dim": self.dim, "rep": self.rep, "payload": payload, "meta": self.meta}


@dataclass(frozen=True, eq=False)
class StateFile:
    dims: tuple[int, int]
    rho: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": "state", "dims": list(self.dims), "rho": encode_matrix(self.rho), "meta": self.meta}


def _expect(cond: bool, msg: str):
    if not cond:
        raise FormatError(msg)


def parse(data: dict):
    """Build a ``MapFile``, ``StateFile`` or cyclic-vector matrix from parsed JSON."""
    _expect(isinstance(data, dict), "top level must be an object")
    kind = data.get("kind", "map")
    meta = data.get("meta", {})
    _expect(isinstance(meta, dict), "meta must be an object")
    if kind == "map":
        dim, rep = data.get("dim"), data.get("rep")
        _expect(isinstance(dim, int) and not isinstance(dim, bool) and dim >= 1, f"invalid dim {dim!r}")
        _expect(rep in REPS, f"rep must be one of {REPS}, got {rep!r}")
        raw = data.get("payload")
        _expect(isinstance(raw, list), "payload must be an array")
        if rep == "kraus":
            payload = [decode_matrix(v) for v in raw]
            _expect(all(v.shape == (dim, dim) for v in payload), "Kraus operators must be dim x dim")
        elif rep == "pairs":
            _expect(all(isinstance(p, list) and len(p) == 2 for p in raw), "pairs must be [A, B] arrays")
            payload = [(decode_matrix(a), decode_matrix(b)) for a, b in raw]
            _expect(all(a.shape == b.shape == (dim, dim) for a, b in payload), "pair matrices must be dim x dim")
        else:
            payload = decode_matrix(raw)
            _expect(payload.shape == (dim * dim, dim * dim), "Choi matrix must be dim^2 x dim^2")
        return MapFile(dim, rep, payload, meta)
    if kind == "state":
        dims = data.get("dims")
        _expect(isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) and d >= 1 for d in dims), "dims must be [d1, d2]")
        rho = decode_matrix(data.get("rho"))
        d = dims[0] * dims[1]
        _expect(rho.shape == (d, d), f"state must be {d}x{d}")
        return StateFile((dims[0], dims[1]), rho, meta)
    if kind == "x0":
        m = decode_matrix(data.get("matrix"))
        _expect(m.shape[0] == m.shape[1], "x0 must be square")
        return m
    raise FormatError(f"unknown kind {kind!r}")


def loads(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    return parse(data)


def read(path: str | Path) -> tuple[object, bytes]:
    """Parse a file; also return its raw bytes (for digests)."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path} is not UTF-8 text") from None
    return loads(text), raw


def write(obj, path: str | Path | None = None) -> str:
    text = dumps(obj.to_json() if hasattr(obj, "to_json") else obj) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def x0_file(m: np.ndarray) -> dict:
    return {"kind": "x0", "matrix": encode_matrix(m)}


__all__ = [
    "DimensionError",
    "FormatError",
    "MapFile",
    "StateFile",
    "decode_matrix",
    "digest",
    "dumps",
    "encode_matrix",
    "format_float",
    "loads",
    "parse",
    "read",
    "write",
    "x0_file",
]
