"""Choi matrices relative to a separating and cyclic vector.

For ``B(K)`` acting on ``H = HS(K)`` by left multiplication a vector
``x0 in H`` is separating and cyclic exactly when it is invertible as an
operator (in finite dimension).  With ``E0 = |J(x0)><J(x0)|``

    C_phi = (id (x) phi)(E0)        D_phi = (id (x) phi_*)(E0)

so that ``C_phi`` is the standard Choi matrix of ``phi o Ad_{x0^dagger}`` and
``D_phi = C_{phi_*}``.  Both correspondences are bijective here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DimensionError,
    QuantumMap,
    ad,
    choi_factors,
    compose,
    map_from_std_choi,
    map_predual,
    random_matrix,
    vec,
)

CYCLIC_FLOOR = 1e-10
NORM_TOL = 1e-12


class NotCyclicError(ValueError):
    """The matrix is (numerically) not invertible, so not separating and cyclic."""


@dataclass(frozen=True, eq=False)
class CyclicVector:
    """An invertible ``n x n`` matrix viewed as a vector of ``HS(K)``.

    ``normalized`` asserts unit Hilbert-Schmidt norm.  The diagonal family
    used for the D-norm example is deliberately unnormalised, hence the flag.
    """

    matrix: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"x0 must be square, got shape {m.shape}")
        s = np.linalg.svd(m, compute_uv=False)
        if s.size == 0 or s[-1] < CYCLIC_FLOOR * s[0]:
            raise NotCyclicError(f"x0 is not invertible (sigma_min/sigma_max = {s[-1] / s[0] if s[0] else 0:.3e})")
        if self.normalized and abs(np.linalg.norm(m) - 1.0) > NORM_TOL:
            raise ValueError(f"x0 flagged normalized but has norm {np.linalg.norm(m)!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, m: np.ndarray, normalize: bool = True) -> "CyclicVector":
        m = np.asarray(m, dtype=complex)
        if normalize:
            return cls(m / np.linalg.norm(m), normalized=True)
        return cls(m, normalized=False)

    @classmethod
    def mes(cls, n: int) -> "CyclicVector":
        """``I / sqrt(n)``: the maximally entangled choice (standard Choi matrix / n)."""
        return cls(np.eye(n) / np.sqrt(n), normalized=True)

    @classmethod
    def identity(cls, n: int) -> "CyclicVector":
        """Unnormalised ``I``; ``choi_C`` then equals the standard Choi matrix."""
        return cls(np.eye(n), normalized=False)

    @classmethod
    def random(cls, rng: np.random.Generator, n: int, cond: float | None = None) -> "CyclicVector":
        """Gaussian x0, or one with prescribed condition number ``cond``."""
        if cond is None:
            m = random_matrix(rng, (n, n))
        else:
            u, _ = np.linalg.qr(random_matrix(rng, (n, n)))
            w, _ = np.linalg.qr(random_matrix(rng, (n, n)))
            s = np.geomspace(1.0, 1.0 / cond, n) if n > 1 else np.ones(1)
            m = (u * s) @ w.conj().T
        return cls.from_matrix(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm_sq(self) -> float:
        """``||x0||_HS^2``, the trace of ``E0``."""
        return float(np.linalg.norm(self.matrix) ** 2)

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @property
    def vector(self) -> np.ndarray:
        return vec(self.matrix)

    def inv(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)


def as_cyclic(x0, n: int | None = None) -> CyclicVector:
    if x0 is None:
        if n is None:
            raise ValueError("dimension needed to build the default x0")
        return CyclicVector.mes(n)
    if isinstance(x0, CyclicVector):
        return x0
    return CyclicVector.from_matrix(x0, normalize=False)


def _check(phi: QuantumMap, x0: CyclicVector):
    if phi.dim != x0.dim:
        raise DimensionError(f"map dimension {phi.dim} differs from x0 dimension {x0.dim}")


def e0(x0: CyclicVector) -> np.ndarray:
    """``E0 = |J(x0)><J(x0)|``; its trace is ``x0.norm_sq`` (1 when normalised)."""
    v = x0.vector
    return np.outer(v, v.conj())


def choi_C(phi: QuantumMap, x0: CyclicVector | None = None) -> np.ndarray:
    """``(id (x) phi)(E0)``, the bounded-operator Choi matrix."""
    x0 = as_cyclic(x0, phi.dim)
    _check(phi, x0)
    u, w = choi_factors(phi, x0.matrix)
    return u @ w.conj().T


def choi_D(phi: QuantumMap, x0: CyclicVector | None = None) -> np.ndarray:
    """``(id (x) phi_*)(E0)``, the trace-class Choi matrix (same formula on the predual)."""
    return choi_C(map_predual(phi), x0)


def _local_dim(x: np.ndarray, n: int) -> int:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape[0] % n:
        raise DimensionError(f"operator of shape {x.shape} is not on C^d (x) C^{n}")
    return x.shape[0] // n


def tilde_apply(phi: QuantumMap, x: np.ndarray) -> np.ndarray:
    """Amplification ``id (x) phi`` applied blockwise."""
    d = _local_dim(x, phi.dim)
    n = phi.dim
    t = np.asarray(x, dtype=complex).reshape(d, n, d, n)
    if phi.n_pairs == 0:
        return np.zeros_like(np.asarray(x, dtype=complex))
    out = np.einsum("sab,ibjc,scd->iajd", phi.left, t, phi.right)
    return out.reshape(d * n, d * n)


def tilde_predual(phi: QuantumMap, rho: np.ndarray) -> np.ndarray:
    """``id (x) phi_*``; sends ``sigma' (x) tau`` to ``sigma' (x) phi_*(tau)``."""
    return tilde_apply(map_predual(phi), rho)


def pair(x: np.ndarray, rho: np.ndarray) -> complex:
    """Bilinear pairing ``<X, rho> = Tr(X rho)``."""
    x, rho = np.asarray(x), np.asarray(rho)
    if x.shape != rho.shape or x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"cannot pair shapes {x.shape} and {rho.shape}")
    return complex(np.einsum("ij,ji->", x, rho))


def commutant_functional(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """First-factor density of ``omega_{xi,eta}`` on the commutant.

    The commutant acts by right multiplication; ``R_y`` sits on the first
    tensor factor as ``y^T``, so ``omega_{xi,eta}(R_y) = (y xi | eta)``
    corresponds to ``|conj(eta)><conj(xi)|``.
    """
    return np.outer(np.conj(eta), np.asarray(xi))


def map_from_C(c: np.ndarray, x0: CyclicVector | None = None) -> QuantumMap:
    """Inverse of :func:`choi_C`: ``psi o Ad_{(x0^dagger)^-1}`` with ``psi`` read off ``c``.

    The condition number of ``x0`` is recorded in ``meta['x0_cond']``.
    """
    psi = map_from_std_choi(c)
    x0 = as_cyclic(x0, psi.dim)
    _check(psi, x0)
    undo = ad(np.linalg.inv(x0.matrix.conj().T))
    phi = compose(psi, undo)
    return QuantumMap(phi.dim, phi.left, phi.right, meta={"x0_cond": x0.cond})


def map_from_D(d: np.ndarray, x0: CyclicVector | None = None) -> QuantumMap:
    """Inverse of :func:`choi_D`."""
    phi = map_predual(map_from_C(d, x0))
    cond = as_cyclic(x0, phi.dim).cond
    return QuantumMap(phi.dim, phi.left, phi.right, meta={"x0_cond": cond})
