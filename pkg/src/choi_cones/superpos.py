"""k-superpositivity (entanglement breaking at k = 1) together with the D-norm.

A completely positive ``phi`` is k-superpositive iff ``D_phi`` has Schmidt
number at most ``k``.  A decomposition ``D_phi = sum_i |v_i><v_i|`` with
``schmidt_rank(v_i) <= k`` turns into Kraus operators of rank ``<= k`` via
``V_i = unvec(v_i) x0^-1`` (since ``D_{Ad_V} = |J(V x0)><J(V x0)|``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import QuantumMap, choi_factors, map_predual, partial_transpose, unvec
from .correspondence import CyclicVector, as_cyclic, choi_C, choi_D, map_from_C, pair, tilde_predual
from .positivity import NotCompletelyPositive, SeeSawConfig, is_cp
from .schmidt import (
    Decomposition,
    DecompositionNotFound,
    Witness,
    sn_lower,
    sn_upper,
    trace_norm,
)


class Answer(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class SuperposVerdict:
    """``YES`` carries rank-<=k Kraus operators, ``NO`` a k-positive witness map.

    For ``NO``, ``pairing = <C_psi, D_phi>`` (negative) with ``psi = witness_map``.
    """

    answer: Answer
    k: int
    kraus: list | None = None
    decomposition: Decomposition | None = None
    witness: Witness | None = None
    witness_map: QuantumMap | None = None
    pairing: float | None = None
    lower: int | None = None
    best_residual: float | None = None


@dataclass(frozen=True)
class DNormValue:
    value: float
    x0: CyclicVector


def d_norm(phi: QuantumMap, x0: CyclicVector | None = None) -> DNormValue:
    """Trace norm of ``D_phi``.

    Few pairs give a low-rank factorisation ``D = U W^dagger``; the norm is
    then read off an ``r x r`` core instead of an ``n^2 x n^2`` SVD.
    """
    x0 = as_cyclic(x0, phi.dim)
    if phi.n_pairs == 0:
        return DNormValue(0.0, x0)
    u, w = choi_factors(map_predual(phi), x0.matrix)
    if phi.n_pairs < u.shape[0]:
        _, ru = np.linalg.qr(u)
        _, rw = np.linalg.qr(w)
        value = float(np.linalg.svd(ru @ rw.conj().T, compute_uv=False).sum())
    else:
        value = trace_norm(u @ w.conj().T)
    return DNormValue(value, x0)


def _require_cp(phi, x0, tol=1e-9):
    check = is_cp(phi, x0, tol)
    if not check.ok:
        raise NotCompletelyPositive(f"map is not completely positive (min eig {check.min_eig:.3e})")


def kraus_from_decomposition(dec: Decomposition, scale: float, x0: CyclicVector) -> list[np.ndarray]:
    """``V_i = sqrt(scale * p_i) unvec(v_i) x0^-1``."""
    inv = x0.inv()
    n = x0.dim
    return [np.sqrt(scale * p) * unvec(v, n) @ inv for p, v in dec.terms]


def is_k_superpositive(
    phi: QuantumMap,
    k: int,
    x0: CyclicVector | None = None,
    cfg: SeeSawConfig | None = None,
) -> SuperposVerdict:
    cfg = cfg or SeeSawConfig()
    x0 = as_cyclic(x0, phi.dim)
    n = phi.dim
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    _require_cp(phi, x0)
    d = choi_D(phi, x0)
    d = (d + d.conj().T) / 2
    scale = float(np.trace(d).real)
    if scale <= 1e-14 * max(1.0, np.abs(d).max()):
        return SuperposVerdict(Answer.YES, k, kraus=[], decomposition=None, best_residual=0.0)
    rho = d / scale
    up = sn_upper(rho, k, cfg)
    if up.found:
        return SuperposVerdict(
            Answer.YES,
            k,
            kraus=kraus_from_decomposition(up.decomposition, scale, x0),
            decomposition=up.decomposition,
            best_residual=up.best_residual,
        )
    low = sn_lower(rho, cfg)
    if low.bound >= k + 1:
        w = low.witness
        # the witness operator is block-positive at level w.k >= k, hence also at level k
        psi = map_from_C(w.operator, x0)
        value = float(np.real(pair(choi_C(psi, x0), d)))
        return SuperposVerdict(
            Answer.NO, k, witness=w, witness_map=psi, pairing=value, lower=low.bound, best_residual=up.best_residual
        )
    return SuperposVerdict(Answer.UNKNOWN, k, lower=low.bound, best_residual=up.best_residual)


@dataclass(frozen=True, eq=False)
class EBVerdict:
    answer: Answer
    superpos: SuperposVerdict
    samples: int
    samples_ppt: int
    min_sample_pt_eig: float


def eb_sample_screen(phi: QuantumMap, seed: int = 0, samples: int = 50, tol: float = 1e-9) -> tuple[int, float]:
    """PPT screen of ``(id (x) phi_*)(|x><x|)`` on random pure ``x``.

    Returns the number of PPT outputs and the smallest partial-transpose
    eigenvalue seen (outputs are trace-normalised first).
    """
    n = phi.dim
    rng = np.random.default_rng([seed & (2**64 - 1), 104729])
    ok, worst = 0, 0.0
    for _ in range(samples):
        v = rng.standard_normal(n * n) + 1j * rng.standard_normal(n * n)
        v /= np.linalg.norm(v)
        out = tilde_predual(phi, np.outer(v, v.conj()))
        tr = float(np.trace(out).real)
        if tr <= 1e-14:
            ok += 1
            continue
        out = out / tr
        eig = float(np.linalg.eigvalsh(partial_transpose((out + out.conj().T) / 2))[0])
        worst = min(worst, eig)
        ok += bool(eig >= -tol)
    return ok, worst


def is_entanglement_breaking(
    phi: QuantumMap,
    x0: CyclicVector | None = None,
    cfg: SeeSawConfig | None = None,
    samples: int = 50,
) -> EBVerdict:
    """1-superpositivity plus :func:`eb_sample_screen`.

    The screen only records how many outputs are PPT; it does not override
    the verdict.
    """
    cfg = cfg or SeeSawConfig()
    verdict = is_k_superpositive(phi, 1, x0, cfg)
    ok, worst = eb_sample_screen(phi, cfg.seed, samples, cfg.tol)
    return EBVerdict(verdict.answer, verdict, samples, ok, worst)


def eb_kraus_rank_one(phi: QuantumMap, x0: CyclicVector | None = None, cfg: SeeSawConfig | None = None) -> list[np.ndarray]:
    """Rank-one Kraus operators of an entanglement-breaking map."""
    verdict = is_k_superpositive(phi, 1, x0, cfg)
    if verdict.answer is not Answer.YES:
        raise DecompositionNotFound(f"no separable decomposition of D_phi found ({verdict.answer.value})")
    return verdict.kraus
