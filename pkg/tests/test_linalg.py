import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renyi2 import linalg
from renyi2.linalg import (
    NotHermitianError,
    flip_operator,
    hermitian_eig,
    max_entangled_projector,
    min_eigenvalue,
    partial_transpose,
    singular_values,
    tensor,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def basis(d, i):
    e = np.zeros(d, dtype=complex)
    e[i] = 1
    return e


# ---------------------------------------------------------------- tensor

def test_tensor_identity_and_diagonal():
    np.testing.assert_array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))
    np.testing.assert_array_equal(tensor(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_tensor_index_convention():
    a = np.arange(4).reshape(2, 2) + 1.0
    b = np.arange(9).reshape(3, 3) + 1.0
    t = tensor(a, b)
    for i, j, k, l in np.ndindex(2, 2, 3, 3):
        assert t[i * 3 + k, j * 3 + l] == a[i, j] * b[k, l]


def test_tensor_acts_factorwise(rng):
    a, b = rand_c(rng, 3, 3), rand_c(rng, 3, 3)
    x, y = rand_c(rng, 3), rand_c(rng, 3)
    np.testing.assert_allclose(tensor(a, b) @ tensor(x, y), tensor(a @ x, b @ y), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_tensor_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rand_c(rng, 2, 2) for _ in range(3))
    np.testing.assert_allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-12)


# ---------------------------------------------------------------- flip

def test_flip_small_cases():
    np.testing.assert_array_equal(flip_operator(1), [[1]])
    expected = np.eye(4)[[0, 2, 1, 3]]
    np.testing.assert_array_equal(flip_operator(2), expected)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_flip_swaps_product_vectors(d, rng):
    x, y = rand_c(rng, d), rand_c(rng, d)
    f = flip_operator(d)
    np.testing.assert_allclose(f @ np.kron(x, y), np.kron(y, x), atol=1e-12)
    np.testing.assert_array_equal(f, f.conj().T)
    np.testing.assert_array_equal(f @ f, np.eye(d * d))


def test_flip_multiplicities_d3():
    vals = np.linalg.eigvalsh(flip_operator(3))
    assert np.sum(np.isclose(vals, 1)) == 6
    assert np.sum(np.isclose(vals, -1)) == 3


def test_flip_conjugation_swaps_factors(rng):
    a, b = rand_c(rng, 3, 3), rand_c(rng, 3, 3)
    f = flip_operator(3)
    np.testing.assert_allclose(f @ tensor(a, b) @ f, tensor(b, a), atol=1e-12)


# ---------------------------------------------------------------- projector

def test_max_entangled_projector():
    np.testing.assert_array_equal(max_entangled_projector(1), [[1]])
    p = max_entangled_projector(2)
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 1
    np.testing.assert_array_equal(p, expected)
    assert np.trace(p) == 2
    pn = max_entangled_projector(3, normalized=True)
    assert np.isclose(np.trace(pn), 1)
    np.testing.assert_allclose(pn @ pn, pn, atol=1e-15)


def test_pt_of_normalized_projector_is_flip_over_d():
    d = 3
    pt = partial_transpose(max_entangled_projector(d, normalized=True), d, d)
    # entrywise oracle: <ik|F|jl> = delta_il delta_kj
    oracle = np.zeros((d * d, d * d))
    for i, k, j, l in np.ndindex(d, d, d, d):
        oracle[i * d + k, j * d + l] = (i == l) * (k == j) / d
    np.testing.assert_allclose(pt, oracle, atol=1e-15)


# ---------------------------------------------------------------- partial transpose

def test_partial_transpose_product(rng):
    a, b = rand_c(rng, 2, 2), rand_c(rng, 3, 3)
    np.testing.assert_allclose(partial_transpose(tensor(a, b), 2, 3, "second"), tensor(a, b.T))
    np.testing.assert_allclose(partial_transpose(tensor(a, b), 2, 3, "first"), tensor(a.T, b))


def test_partial_transpose_unnormalized_projector_is_flip():
    d = 2
    p = max_entangled_projector(d)
    oracle = np.zeros((4, 4))
    for i, k, j, l in np.ndindex(2, 2, 2, 2):
        oracle[i * 2 + k, j * 2 + l] = (i == l) * (k == j)
    np.testing.assert_array_equal(partial_transpose(p, d, d), oracle)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(["first", "second"]))
def test_partial_transpose_properties(seed, side):
    rng = np.random.default_rng(seed)
    h = linalg.random_hermitian(6, rng)
    g = rand_c(rng, 6, 6)
    pt = partial_transpose(h, 2, 3, side)
    np.testing.assert_allclose(partial_transpose(pt, 2, 3, side), h)
    assert np.isclose(np.trace(pt), np.trace(h))
    np.testing.assert_allclose(pt, pt.conj().T)
    lin = partial_transpose(2 * h + 3j * g, 2, 3, side)
    np.testing.assert_allclose(lin, 2 * pt + 3j * partial_transpose(g, 2, 3, side), atol=1e-12)


def test_partial_transpose_rejects_bad_dims():
    with pytest.raises(ValueError):
        partial_transpose(np.eye(5), 2, 3)
    with pytest.raises(ValueError):
        partial_transpose(np.eye(6), 2, 3, "third")


def test_permute_subsystems_matches_explicit_permutation(rng):
    dims = [2, 3, 2]
    ops = [rand_c(rng, d, d) for d in dims]
    m = tensor(*ops)
    out = linalg.permute_subsystems(m, dims, [2, 0, 1])
    np.testing.assert_allclose(out, tensor(ops[2], ops[0], ops[1]), atol=1e-12)


# ---------------------------------------------------------------- spectra

def test_hermitian_eig_basic():
    spectrum = hermitian_eig(np.diag([2.0, 1.0]))
    np.testing.assert_allclose(spectrum.eigenvalues, [1, 2])
    np.testing.assert_allclose(hermitian_eig(flip_operator(2)).eigenvalues, [-1, 1, 1, 1], atol=1e-14)


def test_hermitian_eig_reconstruction(rng):
    m = linalg.random_hermitian(7, rng)
    vals, vecs = hermitian_eig(m)
    assert np.all(np.diff(vals) >= 0)
    np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(7), atol=1e-12)
    resid = np.abs(m - vecs @ np.diag(vals) @ vecs.conj().T).max()
    assert resid <= 1e-10 * max(1, np.abs(m).max())


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_hermitian_eig_2x2_analytic(p, q, re, im):
    m = np.array([[p, re + 1j * im], [re - 1j * im, q]])
    mean, rad = (p + q) / 2, np.sqrt(((p - q) / 2) ** 2 + re * re + im * im)
    np.testing.assert_allclose(hermitian_eig(m).eigenvalues, [mean - rad, mean + rad], atol=1e-12)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_min_eigenvalue():
    assert min_eigenvalue(np.eye(3)) == pytest.approx(1)
    for d in (2, 3, 5):
        assert min_eigenvalue(flip_operator(d)) == pytest.approx(-1)


def test_singular_values(rng):
    np.testing.assert_allclose(singular_values(np.eye(3)), [1, 1, 1])
    x, y = rand_c(rng, 4), rand_c(rng, 3)
    sv = singular_values(np.outer(x, y.conj()))
    assert len(sv) == 3
    assert sv[0] == pytest.approx(np.linalg.norm(x) * np.linalg.norm(y))
    np.testing.assert_allclose(sv[1:], 0, atol=1e-12)
    m = rand_c(rng, 5, 3)
    sv = singular_values(m)
    assert np.all(np.diff(sv) <= 0) and np.all(sv >= 0)
    assert np.sum(sv**2) == pytest.approx(np.sum(np.abs(m) ** 2))


def test_as_matrix_rejects_non_finite():
    with pytest.raises(ValueError):
        linalg.as_matrix([[np.nan]])
