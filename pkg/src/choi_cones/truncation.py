"""Compressions to finite subspaces and convergence experiments.

For an orthonormal family ``P`` (``N x d``) and an invertible ``x0``, let ``Q``
be the Gram-Schmidt orthonormalisation of ``x0 P``.  Hilbert-Schmidt operators
from ``span P`` to ``span Q`` are stored as ``d x d`` coefficient matrices
``y`` and

    iota(y) = Q y P^dagger          pi(x) = Q^dagger x P

so ``iota`` is an isometry and ``pi`` its adjoint.  On vectorised operators
``iota`` is the ``N^2 x d^2`` matrix ``conj(P) (x) Q``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import DimensionError, QuantumMap, map_apply, map_predual, max_unit_gap, random_matrix
from .correspondence import CyclicVector, as_cyclic
from .superpos import d_norm

GRAM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal columns of ``basis`` (``N x d``)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[1] > b.shape[0] or b.shape[1] == 0:
            raise DimensionError(f"basis must be N x d with 1 <= d <= N, got {b.shape}")
        gram = b.conj().T @ b
        if np.abs(gram - np.eye(b.shape[1])).max() > GRAM_TOL:
            raise ValueError("basis vectors are not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors: np.ndarray) -> "Subspace":
        """Orthonormalise the columns of ``vectors`` (in order)."""
        return cls(_gram_schmidt(np.asarray(vectors, dtype=complex)))

    @classmethod
    def coordinate(cls, n_ambient: int, indices: Sequence[int]) -> "Subspace":
        return cls(np.eye(n_ambient)[:, list(indices)])

    @classmethod
    def random(cls, rng: np.random.Generator, n_ambient: int, d: int) -> "Subspace":
        return cls.span(random_matrix(rng, (n_ambient, d)))

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def _gram_schmidt(m: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(m)
    # fix the QR phase freedom: positive diagonal of R
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def _check(f: Subspace, x0: CyclicVector):
    if f.ambient != x0.dim:
        raise DimensionError(f"subspace lives in C^{f.ambient}, x0 in C^{x0.dim}")


def image_basis(f: Subspace, x0: CyclicVector) -> np.ndarray:
    """Orthonormal basis of ``x0 F`` from Gram-Schmidt on ``x0 f_i`` in order."""
    _check(f, x0)
    return _gram_schmidt(x0.matrix @ f.basis)


def iota(y: np.ndarray, f: Subspace, x0: CyclicVector) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (f.dim, f.dim):
        raise DimensionError(f"expected a {f.dim}x{f.dim} coefficient matrix, got {y.shape}")
    return image_basis(f, x0) @ y @ f.basis.conj().T


def pi(x: np.ndarray, f: Subspace, x0: CyclicVector) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (f.ambient, f.ambient):
        raise DimensionError(f"expected an {f.ambient}x{f.ambient} operator, got {x.shape}")
    return image_basis(f, x0).conj().T @ x @ f.basis


def embedding(f: Subspace, x0: CyclicVector) -> np.ndarray:
    """Matrix of ``iota`` on vectorised operators: ``J(iota y) = E J(y)``."""
    return np.kron(f.basis.conj(), image_basis(f, x0))


def compress(x: np.ndarray, f: Subspace, x0: CyclicVector) -> np.ndarray:
    """``pi o X o iota`` as a ``d^2 x d^2`` matrix."""
    x = np.asarray(x)
    n2 = f.ambient**2
    if x.shape != (n2, n2):
        raise DimensionError(f"expected a {n2}x{n2} operator, got {x.shape}")
    e = embedding(f, x0)
    return e.conj().T @ x @ e


def compressed_cyclic(f: Subspace, x0: CyclicVector) -> CyclicVector:
    """``pi(x0)``: triangular in the chosen bases, hence invertible."""
    return CyclicVector(pi(x0.matrix, f, x0))


def diag_cyclic(n: int, p: float, normalized: bool = False) -> CyclicVector:
    """``diag(j^{-(1+p)/2})`` for ``j = 1..n``."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not p > 0:
        raise ValueError(f"need p > 0, got {p}")
    d = np.arange(1, n + 1, dtype=float) ** (-(1.0 + p) / 2.0)
    if normalized:
        d = d / np.linalg.norm(d)
    return CyclicVector(np.diag(d), normalized=normalized)


# ---------------------------------------------------------------------------
# convergence experiments


@dataclass(frozen=True, eq=False)
class Family:
    """Sequence ``m -> phi_m`` with a putative limit ``target``."""

    name: str
    dim: int
    members: Callable[[int], QuantumMap]
    indices: tuple[int, ...]
    target: QuantumMap
    x0: CyclicVector | None = None
    params: dict = field(default_factory=dict)


def rank_one_unit(n: int, m: int, scale: float = 1.0) -> np.ndarray:
    """``scale * e_m e_m^dagger`` with 1-based ``m``."""
    v = np.zeros((n, n))
    v[m - 1, m - 1] = scale
    return v


def adseq(p: float, eps: float, n: int) -> Family:
    """``Ad_{V_m}`` with ``V_m = m^{(1+eps)/2} e_m e_m^dagger`` against the unnormalised diagonal x0."""
    from .core import ad

    return Family(
        "adseq",
        n,
        lambda m: ad(rank_one_unit(n, m, m ** ((1.0 + eps) / 2.0))),
        tuple(range(1, n + 1)),
        QuantumMap.zero(n),
        diag_cyclic(n, p, normalized=False),
        {"p": p, "eps": eps, "N": n},
    )


def interpolation(phi: QuantumMap, length: int, start: QuantumMap | None = None) -> Family:
    """``phi_m = (1 - 1/m) phi + (1/m) start`` (``start`` defaults to zero)."""
    start = start if start is not None else QuantumMap.zero(phi.dim)
    return Family(
        "interp",
        phi.dim,
        lambda m: (1.0 - 1.0 / m) * phi + (1.0 / m) * start,
        tuple(range(1, length + 1)),
        phi,
        params={"length": length},
    )


def constant(phi: QuantumMap, length: int) -> Family:
    return Family("constant", phi.dim, lambda m: phi, tuple(range(1, length + 1)), phi, params={"length": length})


def from_list(maps: Sequence[QuantumMap], target: QuantumMap) -> Family:
    maps = list(maps)
    if not maps or any(q.dim != target.dim for q in maps):
        raise ValueError("need a non-empty list of maps matching the target dimension")
    return Family("list", target.dim, lambda m: maps[m - 1], tuple(range(1, len(maps) + 1)), target)


@dataclass(frozen=True)
class Row:
    m: int
    d_norm: float
    d_gap: float
    unit_gap: float
    weak_gap: float
    cb_proxy: float
    cb_running_max: float


COLUMNS = tuple(Row.__dataclass_fields__)


def _test_states(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """Random trace-class operators of unit trace norm."""
    out = random_matrix(rng, (count, n, n))
    for t in out:
        t /= np.linalg.svd(t, compute_uv=False).sum()
    return out


def convergence_run(
    family: Family,
    x0: CyclicVector | None = None,
    test_size: int = 20,
    seed: int = 0,
    threads: int = 1,
) -> list[Row]:
    """Tabulate the D-norm and weak*-proxy gaps of ``family`` against its target.

    ``weak_gap`` is ``max_T max_ij |Tr((phi_m - phi)(e_ij) T)|`` over seeded
    random trace-class ``T``; ``cb_proxy = ||phi_m(I)||``, exact for CP maps.
    """
    x0 = as_cyclic(x0 if x0 is not None else family.x0, family.dim)
    n = family.dim
    tests = _test_states(np.random.default_rng([seed & (2**64 - 1), 31337]), n, test_size)
    eye = np.eye(n)

    def row(m: int) -> tuple:
        phi_m = family.members(m)
        delta = QuantumMap.zero(n) if phi_m is family.target else phi_m - family.target
        pre = map_predual(delta)
        weak = max((float(np.abs(map_apply(pre, t)).max()) for t in tests), default=0.0)
        return (
            m,
            d_norm(phi_m, x0).value,
            d_norm(delta, x0).value,
            max_unit_gap(delta),
            weak,
            float(np.linalg.norm(map_apply(phi_m, eye), 2)),
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            raw = list(pool.map(row, family.indices))
    else:
        raw = [row(m) for m in family.indices]
    rows, running = [], 0.0
    for r in raw:
        running = max(running, r[5])
        rows.append(Row(*r, cb_running_max=running))
    return rows


def trend(values: Sequence[float], rtol: float = 1e-9) -> str:
    """``'to_zero'``, ``'constant'`` or ``'to_infinity'`` for a monotone prefix, else ``'mixed'``."""
    v = np.asarray(values, dtype=float)
    if v.size < 2 or np.allclose(v, v[0], rtol=rtol, atol=0.0):
        return "constant"
    d = np.diff(v)
    if np.all(d <= 0):
        return "to_zero"
    if np.all(d >= 0):
        return "to_infinity"
    return "mixed"


def rows_as_dicts(rows: Sequence[Row]) -> list[dict]:
    return [asdict(r) for r in rows]
