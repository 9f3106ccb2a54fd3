"""Complete positivity and k-positivity checks, with Kraus extraction.

``phi`` is k-positive iff ``<J(x)| C_phi |J(x)> >= 0`` for every ``x`` of rank
at most ``k``.  The minimum of that quadratic form is searched by a see-saw:
write ``x = Xi H^dagger`` with ``Xi, H`` having ``k`` columns; with one factor
fixed (and orthonormalised) the objective is a Hermitian form in the other,
minimised exactly by its lowest eigenvector.  This is a heuristic, so a
``NO_VIOLATION_FOUND`` verdict is not a certificate.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import (
    DimensionError,
    QuantumMap,
    _dims,
    _phase_fix,
    hermitian_part,
    is_hermitian,
    std_choi,
    unvec,
    vec,
)
from .correspondence import CyclicVector, as_cyclic, choi_C, choi_D

_STALL_SWEEPS = 3


class NotCompletelyPositive(ValueError):
    pass


class NotHermitianPreserving(ValueError):
    """The Choi matrix is not Hermitian, so no quadratic-form test applies."""


class Status(str, enum.Enum):
    VIOLATED = "violated"
    NO_VIOLATION_FOUND = "no_violation_found"


@dataclass(frozen=True)
class SeeSawConfig:
    restarts: int = 32
    max_iters: int = 200
    tol: float = 1e-9
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.tol <= 0 or self.threads < 1:
            raise ValueError(f"invalid see-saw configuration {self}")

    def budget(self) -> dict:
        return {"restarts": self.restarts, "iterations": self.max_iters, "tolerance": self.tol}


@dataclass(frozen=True, eq=False)
class Verdict:
    """Outcome of a rank-k quadratic-form search.

    ``witness`` is the unit vector ``J(x_best)`` and is set only when the
    status is ``VIOLATED``; ``point`` always holds the best ``x`` found.
    """

    status: Status
    k: int
    achieved_min: float
    witness: np.ndarray | None
    point: np.ndarray
    budget: dict = field(default_factory=dict)
    sweeps: int = 0

    @property
    def violated(self) -> bool:
        return self.status is Status.VIOLATED


class CPCheck(NamedTuple):
    ok: bool
    min_eig: float
    hermitian: bool


def quadratic_form(c: np.ndarray, v: np.ndarray) -> float:
    """``Re <v| C |v>``."""
    return float(np.real(np.vdot(v, c @ v)))


def _lowest(m: np.ndarray) -> tuple[float, np.ndarray]:
    lam, vecs = np.linalg.eigh(hermitian_part(m))
    return float(lam[0]), _phase_fix(vecs[:, 0])


def _one_run(c: np.ndarray, k: int, d1: int, d2: int, cfg: SeeSawConfig, restart: int):
    rng = np.random.default_rng([cfg.seed & (2**64 - 1), restart])
    xi = rng.standard_normal((d2, k)) + 1j * rng.standard_normal((d2, k))
    h = rng.standard_normal((d1, k)) + 1j * rng.standard_normal((d1, k))
    x = xi @ h.conj().T
    x /= np.linalg.norm(x)
    value = quadratic_form(c, vec(x))
    eye1, eye2 = np.eye(d1), np.eye(d2)
    stall = 0
    sweeps = 0
    for sweeps in range(1, cfg.max_iters + 1):
        prev = value
        # left factor free, right factor fixed: J(Xi Q^dagger) = (conj(Q) (x) I) vec(Xi)
        u, _, wh = np.linalg.svd(x)
        q = wh.conj().T[:, :k]
        lift = np.kron(q.conj(), eye2)
        value, z = _lowest(lift.conj().T @ c @ lift)
        x = z.reshape(k, d2).T @ q.conj().T
        # right factor free, left factor fixed: J(Q G) = (I (x) Q) vec(G)
        u, _, _ = np.linalg.svd(x)
        q = u[:, :k]
        lift = np.kron(eye1, q)
        value, z = _lowest(lift.conj().T @ c @ lift)
        x = q @ z.reshape(d1, k).T
        if k == min(d1, d2):
            break
        stall = stall + 1 if prev - value < cfg.tol else 0
        if stall >= _STALL_SWEEPS:
            break
    x /= np.linalg.norm(x)
    return quadratic_form(c, vec(x)), x, sweeps


def min_rank_k_form(
    c: np.ndarray,
    k: int,
    cfg: SeeSawConfig | None = None,
    dims: Sequence[int] | None = None,
) -> Verdict:
    """Minimise ``<J(x)|C|J(x)>`` over unit ``x`` with ``rank x <= k``."""
    cfg = cfg or SeeSawConfig()
    d1, d2 = _dims(c, dims)
    if not 1 <= k <= min(d1, d2):
        raise ValueError(f"k must lie in [1, {min(d1, d2)}], got {k}")
    if not is_hermitian(c):
        raise NotHermitianPreserving("Choi matrix is not Hermitian")
    c = hermitian_part(np.asarray(c, dtype=complex))

    def run(r):
        return _one_run(c, k, d1, d2, cfg, r)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(run, range(cfg.restarts)))
    else:
        results = [run(r) for r in range(cfg.restarts)]
    best = min(range(len(results)), key=lambda r: (results[r][0], r))
    _, x, _ = results[best]
    v = vec(x)
    value = quadratic_form(c, v)
    violated = value < -cfg.tol
    return Verdict(
        status=Status.VIOLATED if violated else Status.NO_VIOLATION_FOUND,
        k=k,
        achieved_min=value,
        witness=v if violated else None,
        point=x,
        budget=cfg.budget(),
        sweeps=sum(r[2] for r in results),
    )


def is_cp(phi: QuantumMap, x0: CyclicVector | None = None, tol: float = 1e-9) -> CPCheck:
    """``C_phi >= -tol``; the same inertia holds for ``D_phi``."""
    c = choi_C(phi, as_cyclic(x0, phi.dim))
    herm = is_hermitian(c)
    min_eig = float(np.linalg.eigvalsh(hermitian_part(c))[0])
    return CPCheck(herm and min_eig >= -tol, min_eig, herm)


def is_cp_via_D(phi: QuantumMap, x0: CyclicVector | None = None, tol: float = 1e-9) -> CPCheck:
    d = choi_D(phi, as_cyclic(x0, phi.dim))
    herm = is_hermitian(d)
    min_eig = float(np.linalg.eigvalsh(hermitian_part(d))[0])
    return CPCheck(herm and min_eig >= -tol, min_eig, herm)


def kraus(phi: QuantumMap, tol: float = 1e-9) -> list[np.ndarray]:
    """Operators ``V_i`` with ``phi = sum_i Ad_{V_i}``, i.e. ``phi(X) = sum V_i^dagger X V_i``."""
    c = std_choi(phi)
    if not is_hermitian(c):
        raise NotCompletelyPositive("Choi matrix is not Hermitian")
    lam, vecs = np.linalg.eigh(hermitian_part(c))
    if lam[0] < -tol:
        raise NotCompletelyPositive(f"Choi matrix has eigenvalue {lam[0]:.3e}")
    cutoff = 1e-9 * max(lam[-1], 1e-300)
    out = []
    for i in np.flatnonzero(lam > cutoff)[::-1]:
        m = unvec(_phase_fix(vecs[:, i]), phi.dim)
        out.append(np.sqrt(lam[i]) * m.conj().T)
    return out


def is_k_positive(
    phi: QuantumMap,
    k: int,
    x0: CyclicVector | None = None,
    cfg: SeeSawConfig | None = None,
) -> Verdict:
    if not 1 <= k <= phi.dim:
        raise ValueError(f"k must lie in [1, {phi.dim}], got {k}")
    return min_rank_k_form(choi_C(phi, as_cyclic(x0, phi.dim)), k, cfg)


def is_positive(phi: QuantumMap, x0: CyclicVector | None = None, cfg: SeeSawConfig | None = None) -> Verdict:
    """Positivity is 1-positivity: product vectors are the rank-one ``J(x)``."""
    return is_k_positive(phi, 1, x0, cfg)


def amplified_form(phi: QuantumMap, x0: CyclicVector, xis: Sequence[np.ndarray], etas: Sequence[np.ndarray]) -> float:
    """``((id_k (x) phi)(eta eta^dagger) xi | xi)`` for ``x = sum_i |xi_i><eta_i|``.

    Here ``xi = sum_i e_i (x) xi_i`` and ``eta = sum_i e_i (x) x0 eta_i``; this
    equals ``<J(x)| C_phi |J(x)>`` and is evaluated without forming ``C_phi``.
    """
    k = len(xis)
    if len(etas) != k:
        raise DimensionError("need as many xi as eta vectors")
    n = phi.dim
    eta = np.concatenate([x0.matrix @ np.asarray(e) for e in etas])
    xi = np.concatenate([np.asarray(e) for e in xis])
    big = np.outer(eta, eta.conj()).reshape(k, n, k, n)
    amp = np.einsum("sab,ibjc,scd->iajd", phi.left, big, phi.right).reshape(k * n, k * n)
    return float(np.real(np.vdot(xi, amp @ xi)))
