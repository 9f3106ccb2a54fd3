"""Dense matrix utilities and representations of linear maps on M_n.

A linear map is stored as a stack of pairs ``(A_i, B_i)`` with
``phi(X) = sum_i A_i @ X @ B_i``.  Every linear map on a matrix algebra has
such a form, so one container serves completely positive and arbitrary maps
alike.

Bipartite operators are plain ``ndarray`` objects of shape
``(d1*d2, d1*d2)``.  The first tensor factor is the commutant side and the
second factor is the algebra side.  A matrix ``x`` of shape ``(d2, d1)`` is
identified with the vector ``J(x) = (I (x) x) omega`` where
``omega = sum_l e_l (x) e_l``, i.e. ``J(x)[l*d2 + r] = x[r, l]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_RTOL = 1e-10
RANK_RTOL = 1e-9


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def is_hermitian(x: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        return False
    scale = 1.0 + (np.abs(x).max() if x.size else 0.0)
    return bool(np.abs(x - x.conj().T).max(initial=0.0) <= rtol * scale)


def hermitian_part(x: np.ndarray) -> np.ndarray:
    return (x + x.conj().T) / 2


def square_dim(size: int) -> int:
    """Return ``n`` with ``n*n == size`` or raise."""
    n = int(round(np.sqrt(size)))
    if n * n != size:
        raise DimensionError(f"{size} is not a perfect square")
    return n


def _dims(x: np.ndarray, dims: Sequence[int] | None) -> tuple[int, int]:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {x.shape}")
    if dims is None:
        n = square_dim(x.shape[0])
        return n, n
    d1, d2 = (int(d) for d in dims)
    if d1 * d2 != x.shape[0]:
        raise DimensionError(f"dims {d1}x{d2} do not match size {x.shape[0]}")
    return d1, d2


def vec(x: np.ndarray) -> np.ndarray:
    """``J(x)``: column-major vectorisation, ``J(x)[l*d2 + r] = x[r, l]``."""
    x = np.asarray(x)
    return x.T.reshape(-1)


def unvec(v: np.ndarray, dims: Sequence[int] | int) -> np.ndarray:
    """Inverse of :func:`vec`; returns the ``(d2, d1)`` matrix."""
    if isinstance(dims, (int, np.integer)):
        d1 = d2 = int(dims)
    else:
        d1, d2 = dims
    v = np.asarray(v)
    if v.shape != (d1 * d2,):
        raise DimensionError(f"vector of length {v.shape} does not match {d1}x{d2}")
    return v.reshape(d1, d2).T


def omega(n: int) -> np.ndarray:
    """Unnormalised maximally entangled vector ``sum_l e_l (x) e_l``."""
    return np.eye(n, dtype=complex).reshape(-1)


def omega_projector(n: int) -> np.ndarray:
    """``Omega = |omega><omega|`` (trace ``n``)."""
    w = omega(n)
    return np.outer(w, w.conj())


def swap(n: int) -> np.ndarray:
    return np.eye(n * n, dtype=complex).reshape(n, n, n, n).transpose(1, 0, 2, 3).reshape(n * n, n * n)


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def matrix_units(n: int) -> Iterable[tuple[int, int, np.ndarray]]:
    for i in range(n):
        for j in range(n):
            yield i, j, matrix_unit(n, i, j)


def kron(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(x), np.asarray(y))


def partial_trace(x: np.ndarray, side: str = "first", dims: Sequence[int] | None = None) -> np.ndarray:
    """Trace out the ``"first"`` or ``"second"`` tensor factor."""
    d1, d2 = _dims(x, dims)
    t = np.asarray(x).reshape(d1, d2, d1, d2)
    if side == "first":
        return np.einsum("iaib->ab", t)
    if side == "second":
        return np.einsum("aibi->ab", t)
    raise ValueError(f"side must be 'first' or 'second', got {side!r}")


def partial_transpose(x: np.ndarray, side: str = "first", dims: Sequence[int] | None = None) -> np.ndarray:
    d1, d2 = _dims(x, dims)
    t = np.asarray(x).reshape(d1, d2, d1, d2)
    if side == "first":
        t = t.transpose(2, 1, 0, 3)
    elif side == "second":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"side must be 'first' or 'second', got {side!r}")
    return t.reshape(d1 * d2, d1 * d2)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so that its largest-modulus entry is real positive."""
    i = int(np.argmax(np.abs(v)))
    if abs(v[i]) == 0:
        return v
    return v * (abs(v[i]) / v[i])


@dataclass(frozen=True, eq=False)
class QuantumMap:
    """Linear map ``X -> sum_i left[i] @ X @ right[i]`` on ``n x n`` matrices.

    ``choi`` optionally caches the standard Choi matrix; ``meta`` carries
    free-form provenance (e.g. the condition number of a reconstruction).
    """

    dim: int
    left: np.ndarray
    right: np.ndarray
    choi: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = int(self.dim)
        left = np.asarray(self.left, dtype=complex).reshape(-1, n, n) if np.size(self.left) else np.zeros((0, n, n), complex)
        right = np.asarray(self.right, dtype=complex).reshape(-1, n, n) if np.size(self.right) else np.zeros((0, n, n), complex)
        if left.shape != right.shape:
            raise DimensionError(f"pair stacks differ: {left.shape} vs {right.shape}")
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "left", _freeze(left))
        object.__setattr__(self, "right", _freeze(right))
        if self.choi is not None:
            c = np.asarray(self.choi)
            if c.shape != (n * n, n * n):
                raise DimensionError(f"cached Choi matrix has shape {c.shape}")
            object.__setattr__(self, "choi", _freeze(c))

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[np.ndarray, np.ndarray]], dim: int | None = None) -> "QuantumMap":
        pairs = list(pairs)
        if dim is None:
            if not pairs:
                raise ValueError("dim is required for an empty pair list")
            dim = np.asarray(pairs[0][0]).shape[0]
        for a, b in pairs:
            if np.shape(a) != (dim, dim) or np.shape(b) != (dim, dim):
                raise DimensionError(f"pair shapes {np.shape(a)}, {np.shape(b)} do not match dim {dim}")
        left = np.array([a for a, _ in pairs], dtype=complex).reshape(-1, dim, dim)
        right = np.array([b for _, b in pairs], dtype=complex).reshape(-1, dim, dim)
        return cls(dim, left, right)

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "QuantumMap":
        """``X -> sum_i V_i^dagger X V_i``, i.e. ``sum_i Ad_{V_i}``."""
        kraus = [np.asarray(v, dtype=complex) for v in kraus]
        return cls.from_pairs([(v.conj().T, v) for v in kraus])

    @classmethod
    def zero(cls, dim: int) -> "QuantumMap":
        return cls(dim, np.zeros((0, dim, dim)), np.zeros((0, dim, dim)))

    @property
    def pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.left, self.right))

    @property
    def n_pairs(self) -> int:
        return self.left.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return map_apply(self, x)

    def __add__(self, other: "QuantumMap") -> "QuantumMap":
        if not isinstance(other, QuantumMap):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError("cannot add maps of different dimension")
        return QuantumMap(self.dim, np.concatenate([self.left, other.left]), np.concatenate([self.right, other.right]))

    def __mul__(self, c: complex) -> "QuantumMap":
        return QuantumMap(self.dim, complex(c) * self.left, self.right)

    __rmul__ = __mul__

    def __neg__(self) -> "QuantumMap":
        return -1 * self

    def __sub__(self, other: "QuantumMap") -> "QuantumMap":
        return self + (-other)

    def __repr__(self) -> str:
        return f"QuantumMap(dim={self.dim}, n_pairs={self.n_pairs})"


def ad(v: np.ndarray) -> QuantumMap:
    """``Ad_V: X -> V^dagger X V``."""
    return QuantumMap.from_kraus([v])


def elementary(m: np.ndarray, n: np.ndarray) -> QuantumMap:
    """``phi_{M,N}: X -> M X N``."""
    return QuantumMap.from_pairs([(m, n)])


def map_apply(phi: QuantumMap, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (phi.dim, phi.dim):
        raise DimensionError(f"map acts on {phi.dim}x{phi.dim} matrices, got {x.shape}")
    if phi.n_pairs == 0:
        return np.zeros((phi.dim, phi.dim), dtype=complex)
    return (phi.left @ x @ phi.right).sum(axis=0)


def map_predual(phi: QuantumMap) -> QuantumMap:
    """Trace-pairing predual: ``Tr(phi(X) rho) == Tr(X phi_*(rho))``."""
    return QuantumMap(phi.dim, phi.right, phi.left)


def choi_factors(phi: QuantumMap, x0: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Columns ``U, W`` with ``std_choi(phi o Ad_{x0^dagger}) = U @ W^dagger``.

    ``U[:, s] = J(A_s x0)`` and ``W[:, s] = J(B_s^dagger x0)``; with ``x0=None``
    the identity is used.
    """
    a, b = phi.left, phi.right.conj().transpose(0, 2, 1)
    if x0 is not None:
        a = a @ x0
        b = b @ x0
    n2 = phi.dim * phi.dim
    u = a.transpose(0, 2, 1).reshape(-1, n2).T
    w = b.transpose(0, 2, 1).reshape(-1, n2).T
    return u, w


def std_choi(phi: QuantumMap) -> np.ndarray:
    """``sum_ij e_ij (x) phi(e_ij)``."""
    if phi.choi is not None:
        return np.array(phi.choi)
    u, w = choi_factors(phi)
    return u @ w.conj().T


def map_from_std_choi(c: np.ndarray) -> QuantumMap:
    """Recover the map whose standard Choi matrix is ``c``.

    Hermitian input uses the eigendecomposition and yields pairs
    ``(A_i, lambda_i A_i^dagger)``; otherwise an SVD is used.
    """
    c = np.asarray(c, dtype=complex)
    n = _dims(c, None)[0]
    if is_hermitian(c):
        lam, vecs = np.linalg.eigh(hermitian_part(c))
        keep = np.abs(lam) > RANK_RTOL * max(np.abs(lam).max(initial=0.0), 1e-300)
        mats = [unvec(_phase_fix(vecs[:, i]), n) for i in np.flatnonzero(keep)]
        pairs = [(m, l * m.conj().T) for m, l in zip(mats, lam[keep])]
    else:
        u, s, wh = np.linalg.svd(c)
        keep = s > RANK_RTOL * max(s.max(initial=0.0), 1e-300)
        pairs = [(unvec(u[:, i], n), s[i] * unvec(wh[i].conj(), n).conj().T) for i in np.flatnonzero(keep)]
    return QuantumMap.from_pairs(pairs, dim=n) if pairs else QuantumMap.zero(n)


def compose(phi: QuantumMap, psi: QuantumMap) -> QuantumMap:
    """``phi o psi`` (apply ``psi`` first)."""
    if phi.dim != psi.dim:
        raise DimensionError("cannot compose maps of different dimension")
    n = phi.dim
    left = np.einsum("iab,jbc->ijac", phi.left, psi.left).reshape(-1, n, n)
    right = np.einsum("jab,ibc->ijac", psi.right, phi.right).reshape(-1, n, n)
    out = QuantumMap(n, left, right)
    if out.n_pairs > n * n:
        out = map_from_std_choi(std_choi(out))
    return out


def max_unit_gap(phi: QuantumMap, psi: QuantumMap | None = None) -> float:
    """``max_ij max|phi(e_ij) - psi(e_ij)|`` without forming ``n^4`` arrays at once."""
    delta = phi if psi is None else phi - psi
    if delta.n_pairs == 0:
        return 0.0
    if delta.n_pairs == 1:
        # entries are products A[k, i] B[j, l]
        return float(np.abs(delta.left[0]).max() * np.abs(delta.right[0]).max())
    best = 0.0
    for i in range(delta.dim):
        # entries (j, k, l) of delta(e_ij)[k, l] = sum_s A_s[k, i] B_s[j, l]
        block = np.einsum("sk,sjl->jkl", delta.left[:, :, i], delta.right)
        best = max(best, float(np.abs(block).max()))
    return best


def random_matrix(rng: np.random.Generator, shape, scale: float = 1.0) -> np.ndarray:
    """Standard complex Gaussian matrix."""
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_map(rng: np.random.Generator, n: int, n_pairs: int = 3) -> QuantumMap:
    """Generic (not Hermiticity preserving) map with Gaussian pairs."""
    return QuantumMap(n, random_matrix(rng, (n_pairs, n, n)), random_matrix(rng, (n_pairs, n, n)))


def random_hp_map(rng: np.random.Generator, n: int, n_pos: int = 2, n_neg: int = 0) -> QuantumMap:
    """Hermiticity-preserving map ``sum Ad_{V_i} - sum Ad_{W_j}``."""
    pos = QuantumMap.from_kraus(list(random_matrix(rng, (n_pos, n, n))))
    if n_neg == 0:
        return pos
    return pos - QuantumMap.from_kraus(list(random_matrix(rng, (n_neg, n, n))))
