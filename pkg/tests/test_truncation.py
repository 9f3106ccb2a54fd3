import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from choi_cones.core import DimensionError, QuantumMap, ad, random_map, random_matrix, vec
from choi_cones.correspondence import CyclicVector, NotCyclicError, choi_C, choi_D
from choi_cones.generators import choi3_map, depolarizing_map, identity_map
from choi_cones.positivity import SeeSawConfig, min_rank_k_form
from choi_cones.schmidt import trace_norm, witness_map
from choi_cones.truncation import (
    COLUMNS,
    Subspace,
    adseq,
    compress,
    compressed_cyclic,
    constant,
    convergence_run,
    diag_cyclic,
    embedding,
    from_list,
    image_basis,
    interpolation,
    iota,
    pi,
    trend,
)

from tests import oracles

seeds = st.integers(min_value=0, max_value=2**32 - 1)
FAST = SeeSawConfig(restarts=8)


def hs(a, b):
    return np.vdot(a, b)


# -- Subspace -------------------------------------------------------------------


def test_subspace_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))


@pytest.mark.parametrize("shape", [(2, 3), (3, 0), (4,)])
def test_subspace_rejects_shapes(shape):
    with pytest.raises(DimensionError):
        Subspace(np.zeros(shape))


def test_span_is_orthonormal_and_ordered(rng):
    v = random_matrix(rng, (6, 3))
    f = Subspace.span(v)
    np.testing.assert_allclose(f.basis.conj().T @ f.basis, np.eye(3), atol=1e-13)
    # first basis vector is the normalised first input column
    first = v[:, 0] / np.linalg.norm(v[:, 0])
    np.testing.assert_allclose(f.basis[:, 0], first, atol=1e-13)


def test_image_basis_spans_x0_image(rng):
    f = Subspace.random(rng, 5, 2)
    x0 = CyclicVector.random(rng, 5)
    q = image_basis(f, x0)
    image = x0.matrix @ f.basis
    # the projection onto span(q) fixes x0 F
    np.testing.assert_allclose(q @ (q.conj().T @ image), image, atol=1e-12)


# -- iota / pi ---------------------------------------------------------------------


def test_full_standard_basis_with_scaled_identity_is_identity_embedding(rng):
    n = 4
    f = Subspace.coordinate(n, range(n))
    x0 = CyclicVector.mes(n)
    y = random_matrix(rng, (n, n))
    np.testing.assert_allclose(iota(y, f, x0), y, atol=1e-15)
    np.testing.assert_allclose(embedding(f, x0), np.eye(n * n), atol=1e-15)


def test_rank_one_keeps_rank_and_norm(rng):
    f = Subspace.random(rng, 6, 3)
    x0 = CyclicVector.random(rng, 6)
    y = np.outer(random_matrix(rng, (3,)), random_matrix(rng, (3,)))
    x = iota(y, f, x0)
    assert np.linalg.matrix_rank(x, tol=1e-10) == 1
    assert np.linalg.norm(x) == pytest.approx(np.linalg.norm(y), rel=1e-13)


@given(seed=seeds, n=st.integers(1, 8), d=st.integers(1, 8))
def test_isometry_round_trip_and_adjointness(seed, n, d):
    rng = np.random.default_rng(seed)
    d = min(d, n)
    f = Subspace.random(rng, n, d)
    x0 = CyclicVector.random(rng, n)
    y = random_matrix(rng, (d, d))
    x = random_matrix(rng, (n, n))
    assert abs(np.linalg.norm(iota(y, f, x0)) - np.linalg.norm(y)) < 1e-12 * max(1.0, np.linalg.norm(y))
    assert np.abs(pi(iota(y, f, x0), f, x0) - y).max() < 1e-12
    assert abs(hs(iota(y, f, x0), x) - hs(y, pi(x, f, x0))) < 1e-12 * max(1.0, np.linalg.norm(x) * np.linalg.norm(y))


def test_pi_kills_operators_orthogonal_to_subspace(rng):
    n = 5
    f = Subspace.coordinate(n, [0, 1])
    x = np.zeros((n, n), complex)
    x[:, 2:] = random_matrix(rng, (n, 3))
    assert np.abs(pi(x, f, CyclicVector.random(rng, n))).max() == 0.0


@given(seed=seeds, r=st.integers(1, 4))
@settings(max_examples=25)
def test_rank_preserved(seed, r):
    rng = np.random.default_rng(seed)
    f = Subspace.random(rng, 7, 4)
    x0 = CyclicVector.random(rng, 7)
    y = random_matrix(rng, (4, r)) @ random_matrix(rng, (r, 4))
    assert np.linalg.matrix_rank(iota(y, f, x0), tol=1e-9) == np.linalg.matrix_rank(y, tol=1e-9) == r


def test_embedding_matches_iota(rng):
    f = Subspace.random(rng, 5, 3)
    x0 = CyclicVector.random(rng, 5)
    y = random_matrix(rng, (3, 3))
    np.testing.assert_allclose(embedding(f, x0) @ vec(y), vec(iota(y, f, x0)), atol=1e-13)


@pytest.mark.parametrize("call", [
    lambda f, x0: iota(np.eye(3), f, x0),
    lambda f, x0: pi(np.eye(3), f, x0),
    lambda f, x0: compress(np.eye(9), f, x0),
])
def test_dimension_mismatch(rng, call):
    f = Subspace.random(rng, 4, 2)
    with pytest.raises(DimensionError):
        call(f, CyclicVector.random(rng, 4))


def test_subspace_and_vector_dimensions_must_agree(rng):
    with pytest.raises(DimensionError):
        image_basis(Subspace.random(rng, 4, 2), CyclicVector.random(rng, 3))


# -- compress ---------------------------------------------------------------------


def test_compress_identity(rng):
    f = Subspace.random(rng, 5, 3)
    np.testing.assert_allclose(compress(np.eye(25), f, CyclicVector.random(rng, 5)), np.eye(9), atol=1e-13)


@given(seed=seeds, d=st.integers(1, 5))
@settings(max_examples=25)
def test_compress_pairing_transfer(seed, d):
    rng = np.random.default_rng(seed)
    n = 5
    f = Subspace.random(rng, n, d)
    x0 = CyclicVector.random(rng, n)
    big = random_matrix(rng, (n * n, n * n))
    y = random_matrix(rng, (d, d))
    lhs = np.vdot(vec(y), compress(big, f, x0) @ vec(y))
    z = vec(iota(y, f, x0))
    rhs = np.vdot(z, big @ z)
    assert abs(lhs - rhs) < 1e-11 * max(1.0, abs(rhs))


def test_compress_preserves_positivity(rng):
    g = random_matrix(rng, (16, 16))
    f = Subspace.random(rng, 4, 2)
    c = compress(g @ g.conj().T, f, CyclicVector.random(rng, 4))
    assert np.linalg.eigvalsh(c)[0] > -1e-12


@pytest.mark.parametrize("phi,k", [
    (witness_map(1.0, 3), 1),
    (witness_map(2.0, 3), 2),
    (choi3_map(), 1),
    (depolarizing_map(0.3, 3), 3),
])
def test_compressed_k_positive_choi_passes_screen(rng, phi, k):
    x0 = CyclicVector.random(rng, 3)
    c = choi_C(phi, x0)
    for d in (2, 3):
        f = Subspace.random(rng, 3, d)
        cf = compress(c, f, x0)
        kk = min(k, d)
        verdict = min_rank_k_form(cf, kk, FAST, dims=(d, d))
        assert verdict.achieved_min > -1e-9
        assert oracles.rank_k_minimum(cf, d, kk, starts=3) > -1e-7


def test_compressed_cyclic_is_triangular(rng):
    f = Subspace.random(rng, 5, 3)
    x0 = CyclicVector.random(rng, 5)
    z = compressed_cyclic(f, x0).matrix
    np.testing.assert_allclose(np.tril(z, -1), 0, atol=1e-13)
    assert np.all(np.abs(np.diag(z)) > 0)


# -- diagonal cyclic vectors -------------------------------------------------------


def test_diag_cyclic_single():
    np.testing.assert_allclose(diag_cyclic(1, 1.0, normalized=True).matrix, [[1.0]])


def test_diag_cyclic_p1():
    np.testing.assert_allclose(np.diag(diag_cyclic(4, 1.0).matrix), [1, 1 / 2, 1 / 3, 1 / 4], rtol=1e-15)


def test_diag_cyclic_normalized():
    assert np.linalg.norm(diag_cyclic(7, 0.5, normalized=True).matrix) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("n,p", [(8, 0.5), (64, 2.0), (200, 3.0)])
def test_diag_cyclic_condition(n, p):
    s = np.linalg.svd(diag_cyclic(n, p).matrix, compute_uv=False)
    assert s[-1] / s[0] == pytest.approx(n ** (-(1 + p) / 2), rel=1e-12)


def test_diag_cyclic_below_floor():
    with pytest.raises(NotCyclicError):
        diag_cyclic(100, 19.0)


@pytest.mark.parametrize("n,p", [(3, 0.0), (3, -1.0), (0, 1.0)])
def test_diag_cyclic_invalid(n, p):
    with pytest.raises(ValueError):
        diag_cyclic(n, p)


# -- convergence experiments ------------------------------------------------------


def test_adseq_column_matches_power_law():
    rows = convergence_run(adseq(2.0, 0.1, 64))
    assert [r.m for r in rows] == list(range(1, 65))
    for r in rows:
        expected = r.m ** (0.1 - 2.0)
        assert abs(r.d_norm - expected) <= 1e-12 * expected
        # the target is zero, so the gap is the norm itself
        assert r.d_gap == r.d_norm
    assert trend([r.d_norm for r in rows]) == "to_zero"


@pytest.mark.parametrize("p,eps,regime", [(2.0, 0.1, "to_zero"), (1.0, 1.0, "constant"), (0.5, 1.0, "to_infinity")])
def test_adseq_regimes(p, eps, regime):
    rows = convergence_run(adseq(p, eps, 16))
    assert trend([r.d_norm for r in rows]) == regime


def test_adseq_weak_gap_stays_bounded_away_from_d_norm():
    # the unit gap grows like m^{1+eps} while the D-norm decays
    rows = convergence_run(adseq(2.0, 0.1, 8))
    assert all(r.unit_gap == pytest.approx(r.m ** 1.1) for r in rows)
    assert trend([r.cb_running_max for r in rows]) == "to_infinity"


def test_constant_family_has_zero_gaps(rng):
    phi = random_map(rng, 3, 2)
    rows = convergence_run(constant(phi, 5), CyclicVector.random(rng, 3))
    for r in rows:
        assert r.d_gap == 0.0 and r.unit_gap == 0.0 and r.weak_gap == 0.0
    assert trend([r.d_norm for r in rows]) == "constant"


def test_interpolation_gap_is_harmonic(rng):
    phi = QuantumMap.from_kraus(list(random_matrix(rng, (2, 3, 3))))
    x0 = CyclicVector.random(rng, 3)
    rows = convergence_run(interpolation(phi, 12), x0)
    full = trace_norm(choi_D(phi, x0))
    for r in rows:
        assert r.d_gap == pytest.approx(full / r.m, rel=1e-10)
        assert r.d_norm == pytest.approx(full * (1 - 1 / r.m), rel=1e-10, abs=1e-14)


def test_from_list_and_threads_agree(rng):
    target = identity_map(3)
    maps = [target + (1 / j) * ad(random_matrix(rng, (3, 3))) for j in range(1, 7)]
    family = from_list(maps, target)
    one = convergence_run(family, CyclicVector.random(np.random.default_rng(5), 3), seed=4)
    many = convergence_run(family, CyclicVector.random(np.random.default_rng(5), 3), seed=4, threads=3)
    assert one == many
    assert [r.m for r in one] == list(range(1, 7))


def test_from_list_rejects_mismatch():
    with pytest.raises(ValueError):
        from_list([identity_map(2)], identity_map(3))
    with pytest.raises(ValueError):
        from_list([], identity_map(3))


def test_weak_gap_bounded_by_unit_gap(rng):
    phi = QuantumMap.from_kraus(list(random_matrix(rng, (2, 3, 3))))
    rows = convergence_run(interpolation(phi, 6), CyclicVector.random(rng, 3))
    for r in rows:
        # |Tr(A T)| <= ||A|| ||T||_1 with ||T||_1 = 1
        assert r.weak_gap <= 3 * r.unit_gap + 1e-12


def test_columns():
    assert COLUMNS == ("m", "d_norm", "d_gap", "unit_gap", "weak_gap", "cb_proxy", "cb_running_max")


@pytest.mark.parametrize("values,label", [
    ([1.0, 1.0, 1.0], "constant"),
    ([3.0, 2.0, 1.0], "to_zero"),
    ([1.0, 2.0, 5.0], "to_infinity"),
    ([1.0, 3.0, 2.0], "mixed"),
])
def test_trend_labels(values, label):
    assert trend(values) == label
