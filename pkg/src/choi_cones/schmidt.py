"""Schmidt-number bounds for bipartite states, plus the built-in test states.

Lower bounds come from k-positive witnesses: if ``<W, rho> < 0`` for a
k-block-positive ``W`` (the Choi matrix of a k-positive map) then the
Schmidt number of ``rho`` exceeds ``k``.  Upper bounds come from explicit
decompositions ``rho = sum_i p_i |v_i><v_i|`` with ``schmidt_rank(v_i) <= k``.
Neither side is complete; the gap is reported, never rounded away.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .core import (
    QuantumMap,
    _dims,
    hermitian_part,
    is_hermitian,
    map_from_std_choi,
    matrix_unit,
    omega,
    partial_transpose,
    unvec,
    vec,
)
from .correspondence import CyclicVector
from .positivity import SeeSawConfig, Verdict, is_k_positive, min_rank_k_form

STATE_TOL = 1e-9
UPPER_RESIDUAL = 1e-6


class NotAState(ValueError):
    pass


class DecompositionNotFound(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``v = sum_i coefficients[i] * first[i] (x) second[i]``."""

    coefficients: np.ndarray
    first: np.ndarray
    second: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ia,ib->ab", self.coefficients, self.first, self.second).reshape(-1)


def schmidt_decompose(v: np.ndarray, dims: Sequence[int] | None = None, tol: float = 1e-9) -> SchmidtDecomposition:
    v = np.asarray(v, dtype=complex)
    if dims is None:
        n = int(round(np.sqrt(v.size)))
        dims = (n, n)
    d1, d2 = dims
    x = unvec(v, (d1, d2))
    u, s, wh = np.linalg.svd(x, full_matrices=False)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    # J(u w^dagger) = conj(w) (x) u
    return SchmidtDecomposition(s, wh, u.T, rank)


def schmidt_rank(v: np.ndarray, tol: float = 1e-9, dims: Sequence[int] | None = None) -> int:
    """Rank of the reshaped matrix; 0 for the zero vector."""
    return schmidt_decompose(v, dims, tol).rank


def top_k_weight(v: np.ndarray, k: int, dims: Sequence[int] | None = None) -> float:
    """``max |<w|v>|^2`` over unit ``w`` of Schmidt rank ``<= k``."""
    s = schmidt_decompose(v, dims).coefficients
    return float(np.sum(s[:k] ** 2))


def witness_map(t: float, n: int) -> QuantumMap:
    """``X -> t Tr(X) I - X``; k-positive exactly when ``t >= k``."""
    if n < 2:
        raise ValueError("witness_map needs n >= 2")
    # Tr(X) I = sum_ij e_ji X e_ij
    pairs = [(t * matrix_unit(n, j, i), matrix_unit(n, i, j)) for i in range(n) for j in range(n)]
    pairs.append((-np.eye(n), np.eye(n)))
    return QuantumMap.from_pairs(pairs)


def maximally_entangled(n: int) -> np.ndarray:
    """``P_Omega``, the normalised maximally entangled projector."""
    w = omega(n) / np.sqrt(n)
    return np.outer(w, w.conj())


def isotropic_state(fidelity: float, n: int) -> np.ndarray:
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {fidelity}")
    p = maximally_entangled(n)
    return fidelity * p + (1 - fidelity) * (np.eye(n * n) - p) / (n * n - 1)


def random_state(rng: np.random.Generator, dims: Sequence[int], rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt (Ginibre) ensemble; ``rank`` < full gives the induced measure."""
    d = int(np.prod(dims))
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def validate_state(rho: np.ndarray, dims: Sequence[int] | None = None, tol: float = STATE_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    _dims(rho, dims)
    if not is_hermitian(rho, tol):
        raise NotAState("not Hermitian")
    rho = hermitian_part(rho)
    lam = np.linalg.eigvalsh(rho)
    if lam[0] < -tol:
        raise NotAState(f"negative eigenvalue {lam[0]:.3e}")
    if abs(np.trace(rho).real - 1) > tol:
        raise NotAState(f"trace {np.trace(rho).real!r} is not 1")
    return rho


def ppt_check(rho: np.ndarray, tol: float = STATE_TOL, dims: Sequence[int] | None = None) -> bool:
    """Positive partial transpose; equals separability for 2x2 and 2x3."""
    rho = validate_state(rho, dims)
    return bool(np.linalg.eigvalsh(partial_transpose(rho, "first", dims))[0] >= -tol)


def ppt_is_exact(dims: Sequence[int]) -> bool:
    d1, d2 = sorted(dims)
    return d1 == 1 or (d1 == 2 and d2 <= 3)


# --------------------------------------------------------------------------
# lower bounds


@dataclass(frozen=True, eq=False)
class Witness:
    """k-block-positive ``operator`` with ``<operator, rho> = value < 0``."""

    k: int
    operator: np.ndarray
    value: float
    kind: str
    validation: Verdict | None = None

    @property
    def map(self) -> QuantumMap:
        """Map whose standard Choi matrix is the witness (square dims only)."""
        return map_from_std_choi(self.operator)


@dataclass(frozen=True, eq=False)
class LowerBound:
    bound: int
    witness: Witness | None


def fidelity_witness(v: np.ndarray, k: int, dims: Sequence[int] | None = None) -> np.ndarray:
    """``c_k(v) I - |v><v|`` with ``c_k`` the top-k Schmidt weight; k-block-positive."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return top_k_weight(v, k, dims) * np.eye(v.size) - np.outer(v, v.conj())


def _optimise_fidelity(rho, v0, k, dims):
    """Locally minimise ``c_k(v) - <v|rho|v>`` over unit ``v``."""

    def fun(t):
        v = t[: t.size // 2] + 1j * t[t.size // 2 :]
        n2 = float(np.vdot(v, v).real)
        x = unvec(v, dims)
        u, s, wh = np.linalg.svd(x)
        trunc = vec((u[:, :k] * s[:k]) @ wh[:k])
        rv = rho @ v
        h = (float(np.sum(s[:k] ** 2)) - float(np.vdot(v, rv).real)) / n2
        g = ((trunc - rv) - h * v) / n2
        return h, np.concatenate([2 * g.real, 2 * g.imag])

    t0 = np.concatenate([v0.real, v0.imag])
    res = minimize(fun, t0, jac=True, method="L-BFGS-B", options={"maxiter": 200})
    v = res.x[: res.x.size // 2] + 1j * res.x[res.x.size // 2 :]
    return v / np.linalg.norm(v)


def _candidates(rho: np.ndarray, k: int, dims, n_opt: int = 3):
    lam, vecs = np.linalg.eigh(rho)
    order = np.argsort(lam)[::-1]
    for i in order:
        yield "fidelity", fidelity_witness(vecs[:, i], k, dims)
    for i in order[:n_opt]:
        v = _optimise_fidelity(rho, vecs[:, i], k, dims)
        yield "fidelity-opt", fidelity_witness(v, k, dims)
    d1, d2 = dims
    if k == 1:
        _, vec_pt = np.linalg.eigh(partial_transpose(rho, "first", dims))
        v = vec_pt[:, 0]
        yield "partial-transpose", partial_transpose(np.outer(v, v.conj()), "first", dims)
    if d1 == d2 and k < d1:
        yield "witness-map", np.asarray(_witness_choi(k, d1))


def _witness_choi(k: int, n: int) -> np.ndarray:
    return k * np.eye(n * n) - np.outer(omega(n), omega(n))


def _validate_witness(w: np.ndarray, k: int, dims, cfg: SeeSawConfig) -> Verdict:
    d1, d2 = dims
    if d1 == d2:
        return is_k_positive(map_from_std_choi(w), k, CyclicVector.identity(d1), cfg)
    return min_rank_k_form(w, k, cfg, dims)


def sn_lower(
    rho: np.ndarray,
    cfg: SeeSawConfig | None = None,
    dims: Sequence[int] | None = None,
    validate: bool = True,
) -> LowerBound:
    """Largest ``k+1`` certified by a k-positive witness with negative pairing.

    Every accepted witness is re-checked with the see-saw at its level ``k``.
    """
    cfg = cfg or SeeSawConfig()
    dims = _dims(rho, dims)
    rho = validate_state(rho, dims)
    for k in range(min(dims) - 1, 0, -1):
        best = None
        for kind, w in _candidates(rho, k, dims):
            value = float(np.real(np.trace(w @ rho)))
            if value < -cfg.tol and (best is None or value < best[2]):
                best = (kind, w, value)
        if best is None:
            continue
        kind, w, value = best
        check = _validate_witness(w, k, dims, cfg) if validate else None
        if check is not None and check.violated:
            continue
        return LowerBound(k + 1, Witness(k, w, value, kind, check))
    return LowerBound(1, None)


# --------------------------------------------------------------------------
# upper bounds


@dataclass(frozen=True, eq=False)
class Decomposition:
    """``rho ~ sum_i weights[i] |vectors[i]><vectors[i]|``, each of Schmidt rank <= k."""

    k: int
    weights: np.ndarray
    vectors: np.ndarray
    residual: float

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ia,ib->ab", self.weights, self.vectors, self.vectors.conj())

    @property
    def terms(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.weights.tolist(), self.vectors))


@dataclass(frozen=True, eq=False)
class UpperResult:
    found: bool
    k: int
    decomposition: Decomposition | None
    best_residual: float
    attempts: int


def trace_norm(x: np.ndarray) -> float:
    x = np.asarray(x)
    if is_hermitian(x):
        return float(np.abs(np.linalg.eigvalsh(hermitian_part(x))).sum())
    return float(np.linalg.svd(x, compute_uv=False).sum())


class _Fit:
    """Levenberg-Marquardt fit of ``rho = sum_i J(A_i B_i) J(A_i B_i)^dagger``.

    Term weights are absorbed into the factor norms, so nonnegativity is
    automatic.  ``A_i`` is ``d2 x k`` and ``B_i`` is ``k x d1``.
    """

    def __init__(self, rho, dims, k):
        self.rho = rho
        self.d1, self.d2 = dims
        self.k = k
        self.big = self.d1 * self.d2
        self.iu = np.triu_indices(self.big)

    def vectors(self, a, b):
        x = a @ b
        return x.transpose(0, 2, 1).reshape(x.shape[0], -1)

    def residual(self, a, b):
        w = self.vectors(a, b)
        return self.rho - w.T @ w.conj()

    def _flat(self, r):
        r = r[self.iu]
        return np.concatenate([r.real, r.imag])

    def jacobian(self, a, b):
        m, d1, d2, k, big = a.shape[0], self.d1, self.d2, self.k, self.big
        w = self.vectors(a, b)
        dwa = np.zeros((m, d2, k, d1, d2), complex)
        for r in range(d2):
            dwa[:, r, :, :, r] = b
        dwb = np.zeros((m, k, d1, d1, d2), complex)
        for c in range(d1):
            dwb[:, :, c, c, :] = a.transpose(0, 2, 1)
        cols = []
        for dw in (dwa.reshape(m, -1, big), dwb.reshape(m, -1, big)):
            for ph in (1.0, 1j):
                u = ph * dw
                df = np.einsum("mpa,mb->mpab", u, w.conj())
                df = df + df.conj().transpose(0, 1, 3, 2)
                df = df.reshape(-1, big, big)[:, self.iu[0], self.iu[1]]
                cols.append(-np.concatenate([df.real, df.imag], axis=1))
        return np.concatenate(cols, axis=0).T

    def pack(self, a, b):
        return np.concatenate([a.real.ravel(), a.imag.ravel(), b.real.ravel(), b.imag.ravel()])

    def unpack(self, t, m):
        na, nb = m * self.d2 * self.k, m * self.k * self.d1
        a = (t[:na] + 1j * t[na : 2 * na]).reshape(m, self.d2, self.k)
        b = (t[2 * na : 2 * na + nb] + 1j * t[2 * na + nb :]).reshape(m, self.k, self.d1)
        return a, b

    def solve(self, a, b, max_iters=500, target=1e-12):
        m = a.shape[0]
        t = self.pack(a, b)
        r = self._flat(self.residual(a, b))
        cost = float(r @ r)
        lam = 1e-3
        for _ in range(max_iters):
            if cost < target**2:
                break
            jm = self.jacobian(*self.unpack(t, m))
            # dual form of (J^T J + lam I)^-1 J^T r; the residual space is the smaller one
            gram = jm @ jm.T
            improved = False
            while lam < 1e10:
                step = -jm.T @ np.linalg.solve(gram + lam * np.eye(gram.shape[0]), r)
                tn = t + step
                rn = self._flat(self.residual(*self.unpack(tn, m)))
                cn = float(rn @ rn)
                if cn < cost:
                    t, r, cost = tn, rn, cn
                    lam = max(lam / 3, 1e-12)
                    improved = True
                    break
                lam *= 4
            if not improved:
                break
        return self.unpack(t, m)


def _seed_terms(rho, dims, k, m, rng, jitter):
    d1, d2 = dims
    lam, vecs = np.linalg.eigh(rho)
    order = np.argsort(lam)[::-1]
    a = np.zeros((m, d2, k), complex)
    b = np.zeros((m, k, d1), complex)
    for j in range(m):
        if j < len(order) and lam[order[j]] > 1e-12:
            x = unvec(vecs[:, order[j]] * np.sqrt(lam[order[j]]), dims)
            u, s, wh = np.linalg.svd(x)
            kk = min(k, s.size)
            a[j, :, :kk] = u[:, :kk] * s[:kk]
            b[j, :kk, :] = wh[:kk]
        else:
            a[j] = 1e-2 * (rng.standard_normal((d2, k)) + 1j * rng.standard_normal((d2, k)))
            b[j] = rng.standard_normal((k, d1)) + 1j * rng.standard_normal((k, d1))
    if jitter:
        scale = jitter * np.sqrt(max(lam.max(), 1e-12))
        a = a + scale * (rng.standard_normal(a.shape) + 1j * rng.standard_normal(a.shape))
        b = b + jitter * (rng.standard_normal(b.shape) + 1j * rng.standard_normal(b.shape))
    return a, b


def _range_seed(rho, dims, k, m, rng, iters=300):
    """Alternating projections over decompositions ``v_i = U w_i`` of the range.

    Rows of ``W`` stay orthonormal, so ``sum v_i v_i^dagger`` equals ``rho``
    exactly; each sweep truncates the columns to Schmidt rank k and takes the
    polar factor of the overlap.  The truncated columns seed the fit.
    """
    d1, d2 = dims
    lam, vecs = np.linalg.eigh(rho)
    keep = lam > 1e-12 * lam[-1]
    u_range = vecs[:, keep] * np.sqrt(lam[keep])
    r = u_range.shape[1]
    m = max(m, r)
    q, _ = np.linalg.qr(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    w = q[:r]
    for _ in range(iters):
        x = (u_range @ w).T.reshape(m, d1, d2).transpose(0, 2, 1)
        left, s, right = np.linalg.svd(x, full_matrices=False)
        s[:, k:] = 0
        xk = (left * s[:, None, :]) @ right
        vk = xk.transpose(0, 2, 1).reshape(m, -1).T
        p, _, qh = np.linalg.svd(u_range.conj().T @ vk, full_matrices=False)
        w = p @ qh
    a = left[:, :, :k] * s[:, None, :k]
    b = right[:, :k, :]
    return a, b


def sn_upper(
    rho: np.ndarray,
    k: int,
    cfg: SeeSawConfig | None = None,
    dims: Sequence[int] | None = None,
    attempts: int = 8,
) -> UpperResult:
    """Search for a decomposition of ``rho`` into Schmidt-rank-<=k pure states.

    Seeds from the eigendecomposition with each eigenvector truncated to its
    top-k Schmidt terms, then refines all factors jointly.  ``found`` only
    when the trace-norm residual is below ``1e-6``.
    """
    cfg = cfg or SeeSawConfig()
    dims = _dims(rho, dims)
    rho = validate_state(rho, dims)
    if not 1 <= k <= min(dims):
        raise ValueError(f"k must lie in [1, {min(dims)}], got {k}")
    rng = np.random.default_rng([cfg.seed & (2**64 - 1), 7919, k])
    lam = np.linalg.eigvalsh(rho)
    rank = max(1, int(np.sum(lam > 1e-10 * lam[-1])))
    fit = _Fit(rho, dims, k)
    best = np.inf
    step = max(2, rank // 2)
    cap = max(rank, int(np.prod(dims)) ** 2)
    for attempt in range(attempts):
        # eigenvector seeds and range-projection seeds alternate
        level = attempt // 2
        m = min(rank + level * step, cap)
        if attempt % 2 == 0:
            a, b = _seed_terms(rho, dims, k, m, rng, 0.0 if level == 0 else 0.05 * level)
        else:
            a, b = _range_seed(rho, dims, k, m, rng)
        a, b = fit.solve(a, b)
        res = trace_norm(fit.residual(a, b))
        best = min(best, res)
        if res < UPPER_RESIDUAL:
            w = fit.vectors(a, b)
            weights = np.einsum("ma,ma->m", w, w.conj()).real
            keep = weights > 1e-14
            vectors = w[keep] / np.sqrt(weights[keep])[:, None]
            dec = Decomposition(k, weights[keep], vectors, 0.0)
            res = trace_norm(rho - dec.reconstruct())
            if res < UPPER_RESIDUAL and all(schmidt_rank(v, dims=dims) <= k for v in vectors):
                dec = Decomposition(k, weights[keep], vectors, res)
                return UpperResult(True, k, dec, res, attempt + 1)
    return UpperResult(False, k, None, best, attempts)


@dataclass(frozen=True, eq=False)
class SNBounds:
    lower: int
    upper: int | None
    lower_witness: Witness | None = None
    upper_decomposition: Decomposition | None = None
    notes: dict = field(default_factory=dict)


def schmidt_number_bounds(
    rho: np.ndarray,
    cfg: SeeSawConfig | None = None,
    dims: Sequence[int] | None = None,
) -> SNBounds:
    """Bracket the Schmidt number between a witness and a decomposition."""
    cfg = cfg or SeeSawConfig()
    dims = _dims(rho, dims)
    low = sn_lower(rho, cfg, dims)
    for k in range(low.bound, min(dims) + 1):
        up = sn_upper(rho, k, cfg, dims)
        if up.found:
            return SNBounds(low.bound, k, low.witness, up.decomposition)
    return SNBounds(low.bound, None, low.witness, None)
