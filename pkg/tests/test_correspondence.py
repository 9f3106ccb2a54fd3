import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from choi_cones.core import (
    DimensionError,
    QuantumMap,
    ad,
    compose,
    elementary,
    kron,
    map_predual,
    matrix_unit,
    max_unit_gap,
    omega,
    random_map,
    random_matrix,
    std_choi,
    vec,
)
from choi_cones.correspondence import (
    CyclicVector,
    NotCyclicError,
    choi_C,
    choi_D,
    commutant_functional,
    e0,
    map_from_C,
    map_from_D,
    pair,
    tilde_apply,
    tilde_predual,
)
from choi_cones.generators import identity_map, trace_map, transpose_map

from tests import oracles

seeds = st.integers(min_value=0, max_value=2**32 - 1)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def rank_one(u, w):
    return np.outer(u, w.conj())


# -- CyclicVector ------------------------------------------------------------


def test_singular_matrix_rejected():
    with pytest.raises(NotCyclicError):
        CyclicVector(np.diag([1.0, 0.0]))


def test_nearly_singular_rejected():
    with pytest.raises(NotCyclicError):
        CyclicVector(np.diag([1.0, 1e-11]))
    CyclicVector(np.diag([1.0, 1e-9]))


def test_normalized_flag_enforced():
    with pytest.raises(ValueError):
        CyclicVector(np.eye(2), normalized=True)
    x0 = CyclicVector.mes(4)
    assert x0.normalized and x0.norm_sq == pytest.approx(1.0, abs=1e-12)


def test_non_square_rejected():
    with pytest.raises(DimensionError):
        CyclicVector(np.ones((2, 3)))


def test_prescribed_condition_number(rng):
    x0 = CyclicVector.random(rng, 4, cond=1e3)
    assert x0.cond == pytest.approx(1e3, rel=1e-8)
    assert x0.normalized


def test_e0_trace_is_norm_squared(rng):
    x0 = CyclicVector.from_matrix(random_matrix(rng, (3, 3)), normalize=False)
    assert np.trace(e0(x0)).real == pytest.approx(x0.norm_sq)
    np.testing.assert_allclose(e0(x0), oracles.e0_projector(x0.matrix), atol=1e-12)


# -- choi_C ------------------------------------------------------------------


def test_choi_C_identity_maximally_entangled():
    c = choi_C(identity_map(2), CyclicVector.mes(2))
    np.testing.assert_allclose(c, np.outer(omega(2), omega(2)) / 2, atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(c), [0, 0, 0, 1], atol=1e-14)


def test_choi_C_of_conjugation_is_rank_one(rng):
    v = random_matrix(rng, (3, 3))
    x0 = CyclicVector.random(rng, 3)
    j = vec(v.conj().T @ x0.matrix)
    np.testing.assert_allclose(choi_C(ad(v), x0), rank_one(j, j), atol=1e-12)


def test_choi_C_transpose_with_diagonal_vector():
    x0 = CyclicVector(np.diag(np.sqrt([0.8, 0.2])), normalized=True)
    c = choi_C(transpose_map(2), x0)
    # independent construction: sum_ij e_ij (x) (x0 e_ij x0^dagger)^T
    m = x0.matrix
    direct = oracles.choi_by_blocks(lambda e: (m @ e @ m.conj().T).T, 2)
    np.testing.assert_allclose(c, direct, atol=1e-14)
    np.testing.assert_allclose(np.linalg.eigvalsh(c), [-0.4, 0.2, 0.4, 0.8], atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_choi_C_matches_blockwise_amplification(rng, n):
    phi = random_map(rng, n, 3)
    x0 = CyclicVector.random(rng, n)
    expected = oracles.block_apply(phi, oracles.e0_projector(x0.matrix), n)
    np.testing.assert_allclose(choi_C(phi, x0), expected, atol=1e-12)


def test_choi_C_dimension_mismatch():
    with pytest.raises(DimensionError):
        choi_C(identity_map(2), CyclicVector.mes(3))


# -- choi_D ------------------------------------------------------------------


def test_choi_D_of_conjugation_is_rank_one(rng):
    v = random_matrix(rng, (3, 3))
    x0 = CyclicVector.random(rng, 3)
    j = vec(v @ x0.matrix)
    np.testing.assert_allclose(choi_D(ad(v), x0), rank_one(j, j), atol=1e-12)


def test_choi_D_identity_equals_choi_C(rng):
    x0 = CyclicVector.random(rng, 3)
    np.testing.assert_allclose(choi_D(identity_map(3), x0), choi_C(identity_map(3), x0))


def test_choi_D_trace_map():
    np.testing.assert_allclose(choi_D(trace_map(2), CyclicVector.mes(2)), np.eye(4) / 2, atol=1e-15)


@given(seed=seeds, n=st.integers(1, 4))
def test_choi_D_is_choi_C_of_predual(seed, n):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, n, 3)
    x0 = CyclicVector.random(rng, n)
    d, c = choi_D(phi, x0), choi_C(map_predual(phi), x0)
    assert np.abs(d - c).max() <= 1e-12 * max(1.0, np.abs(c).max())


def test_choi_D_matches_blockwise_predual(rng):
    phi = random_map(rng, 3, 2)
    x0 = CyclicVector.random(rng, 3)
    expected = oracles.block_apply(map_predual(phi), oracles.e0_projector(x0.matrix), 3)
    np.testing.assert_allclose(choi_D(phi, x0), expected, atol=1e-12)


# -- amplification -----------------------------------------------------------


def test_tilde_identity_leaves_operator(rng):
    x = random_matrix(rng, (9, 9))
    np.testing.assert_allclose(tilde_apply(identity_map(3), x), x)


def test_tilde_on_e0_gives_choi_C(rng):
    phi = random_map(rng, 3, 2)
    x0 = CyclicVector.random(rng, 3)
    np.testing.assert_allclose(tilde_apply(phi, e0(x0)), choi_C(phi, x0), atol=1e-12)


def test_tilde_on_product():
    a, b = matrix_unit(2, 0, 1), matrix_unit(2, 1, 1)
    np.testing.assert_allclose(tilde_apply(transpose_map(2), kron(a, b)), kron(a, b))


def test_tilde_on_generic_product(rng):
    phi = random_map(rng, 3, 2)
    a, b = random_matrix(rng, (2, 2)), random_matrix(rng, (3, 3))
    np.testing.assert_allclose(tilde_apply(phi, kron(a, b)), kron(a, phi(b)), atol=1e-12)


def test_tilde_predual_on_product(rng):
    phi = random_map(rng, 3, 2)
    s, t = random_matrix(rng, (3, 3)), random_matrix(rng, (3, 3))
    np.testing.assert_allclose(tilde_predual(phi, kron(s, t)), kron(s, map_predual(phi)(t)), atol=1e-12)


def test_tilde_predual_identity(rng):
    rho = random_matrix(rng, (4, 4))
    np.testing.assert_allclose(tilde_predual(identity_map(2), rho), rho)


def test_tilde_adjointness(rng):
    for _ in range(20):
        phi = random_map(rng, 3, 3)
        x, rho = random_matrix(rng, (9, 9)), random_matrix(rng, (9, 9))
        lhs = pair(tilde_apply(phi, x), rho)
        rhs = pair(x, tilde_predual(phi, rho))
        assert abs(lhs - rhs) < 1e-11 * max(1.0, abs(lhs))


def test_tilde_rejects_bad_size():
    with pytest.raises(DimensionError):
        tilde_apply(identity_map(3), np.eye(8))


@given(seed=seeds, n=st.integers(1, 3), d=st.integers(1, 3))
def test_bimodule_property(seed, n, d):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, n, 2)
    a, b = random_matrix(rng, (d, d)), random_matrix(rng, (d, d))
    x = random_matrix(rng, (d * n, d * n))
    la, lb = kron(a, np.eye(n)), kron(b, np.eye(n))
    lhs = tilde_apply(phi, la @ x @ lb)
    rhs = la @ tilde_apply(phi, x) @ lb
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * max(1.0, np.abs(rhs).max()))


# -- pairing -----------------------------------------------------------------


def test_pair_identity_conjugations():
    x0 = CyclicVector.mes(2)
    one = ad(np.eye(2))
    assert pair(choi_C(one, x0), choi_D(one, x0)) == pytest.approx(1.0, abs=1e-15)


def test_pair_pauli_conjugations():
    x0 = CyclicVector.mes(2)
    value = pair(choi_C(ad(PAULI_X), x0), choi_D(ad(PAULI_Z), x0))
    # |Tr(X Z) / 2|^2
    assert abs(value - abs(np.trace(PAULI_X @ PAULI_Z) / 2) ** 2) < 1e-15


def test_pair_omega_with_itself():
    w = np.outer(omega(2), omega(2))
    assert pair(w, w) == pytest.approx(4.0)


def test_pair_is_real_on_hermitian(rng):
    g, h = random_matrix(rng, (4, 4)), random_matrix(rng, (4, 4))
    assert abs(pair(g + g.conj().T, h + h.conj().T).imag) < 1e-10


def test_pair_shape_mismatch():
    with pytest.raises(DimensionError):
        pair(np.eye(4), np.eye(9))


# -- reconstruction ----------------------------------------------------------


def test_map_from_C_recovers_transpose(rng):
    x0 = CyclicVector.random(rng, 3)
    phi = map_from_C(choi_C(transpose_map(3), x0), x0)
    assert max_unit_gap(phi, transpose_map(3)) < 1e-10
    assert phi.meta["x0_cond"] == pytest.approx(x0.cond)


def test_map_from_C_of_e0_is_identity(rng):
    x0 = CyclicVector.random(rng, 3)
    assert max_unit_gap(map_from_C(e0(x0), x0), identity_map(3)) < 1e-10


def test_map_from_C_rank_one_is_conjugation(rng):
    a = random_matrix(rng, (3, 3))
    x0 = CyclicVector.random(rng, 3)
    j = vec(a @ x0.matrix)
    assert max_unit_gap(map_from_C(rank_one(j, j), x0), ad(a.conj().T)) < 1e-10


def test_map_from_D_recovers_conjugation(rng):
    v = random_matrix(rng, (3, 3))
    x0 = CyclicVector.random(rng, 3)
    assert max_unit_gap(map_from_D(choi_D(ad(v), x0), x0), ad(v)) < 1e-10


def test_map_from_D_zero(rng):
    x0 = CyclicVector.random(rng, 3)
    phi = map_from_D(np.zeros((9, 9)), x0)
    assert phi.n_pairs == 0
    assert max_unit_gap(phi) == 0.0


def test_map_from_D_random_four_pairs(rng):
    phi = random_map(rng, 3, 4)
    x0 = CyclicVector.random(rng, 3)
    back = map_from_D(choi_D(phi, x0), x0)
    assert max_unit_gap(back, phi) < 1e-9
    np.testing.assert_allclose(choi_D(back, x0), choi_D(phi, x0), atol=1e-9)


def test_injectivity_round_trip(rng):
    # a map vanishing on matrix units has D = 0
    x0 = CyclicVector.random(rng, 2)
    phi = ad(np.eye(2)) - identity_map(2)
    assert np.abs(choi_D(phi, x0)).max() < 1e-15
    assert max_unit_gap(map_from_D(choi_D(phi, x0), x0)) < 1e-14


# -- structural identities ---------------------------------------------------


@given(seed=seeds, n=st.integers(1, 3))
def test_elementary_operator_formulas(seed, n):
    rng = np.random.default_rng(seed)
    m, k = random_matrix(rng, (n, n)), random_matrix(rng, (n, n))
    x0 = CyclicVector.random(rng, n)
    phi = elementary(m, k)
    c = choi_C(phi, x0)
    d = choi_D(phi, x0)
    x = x0.matrix
    np.testing.assert_allclose(c, rank_one(vec(m @ x), vec(k.conj().T @ x)), atol=1e-12)
    np.testing.assert_allclose(d, rank_one(vec(k @ x), vec(m.conj().T @ x)), atol=1e-12)
    assert np.linalg.matrix_rank(c, tol=1e-9 * max(1.0, np.abs(c).max())) <= 1


@given(seed=seeds)
def test_duality_identity(seed):
    rng = np.random.default_rng(seed)
    n = 3
    phi, psi = random_map(rng, n, 2), random_map(rng, n, 2)
    v = random_matrix(rng, (n, n))
    x0 = CyclicVector.random(rng, n)
    lhs = pair(choi_C(compose(psi, ad(v)), x0), choi_D(phi, x0))
    j = vec(v.conj().T @ x0.matrix)
    rhs = np.vdot(j, choi_D(compose(phi, psi), x0) @ j)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


@given(seed=seeds, n=st.integers(1, 4))
def test_vector_functional_identity(seed, n):
    """Pairing a rank-one ``|J(x)><J(y)|`` with ``sigma' (x) tau`` evaluates ``tau`` on ``|x xi><y eta|``."""
    rng = np.random.default_rng(seed)
    x, y, tau = (random_matrix(rng, (n, n)) for _ in range(3))
    xi, eta = random_matrix(rng, (n,)), random_matrix(rng, (n,))
    sigma = commutant_functional(xi, eta)
    lhs = pair(rank_one(vec(x), vec(y)), kron(sigma, tau))
    rhs = np.trace(tau @ np.outer(x @ xi, (y @ eta).conj()))
    assert abs(lhs - rhs) < 1e-11 * max(1.0, abs(rhs))


@given(seed=seeds, n=st.integers(1, 4))
def test_x0_covariance(seed, n):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, n, 2)
    x0 = CyclicVector.random(rng, n)
    expected = std_choi(compose(phi, ad(x0.matrix.conj().T)))
    np.testing.assert_allclose(choi_C(phi, x0), expected, atol=1e-11)


def test_normalisation_scalar_is_exposed():
    # unnormalised x0 scales both Choi matrices by ||x0||^2
    x0 = CyclicVector(2 * np.eye(2))
    assert np.trace(choi_C(identity_map(2), x0)).real == pytest.approx(x0.norm_sq)
    assert x0.norm_sq == pytest.approx(8.0)


def test_zero_map_has_zero_choi():
    np.testing.assert_array_equal(choi_C(QuantumMap.zero(2)), np.zeros((4, 4)))
