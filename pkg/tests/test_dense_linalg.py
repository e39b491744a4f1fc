import math

import numpy as np
import pytest

from conftest import uniform
from oracles import naive_matmul
from polyattn.dense_linalg import (
    as_matrix,
    diag_of_chain,
    entrywise_exp,
    gram_exp,
    hadamard,
    matmul,
    read_csv,
    rowwise_kron,
    write_csv,
)
from polyattn.errors import ExponentOverflowError, ShapeError


def test_matmul_identity(rng):
    A = uniform(rng, (2, 3))
    assert np.array_equal(matmul(np.eye(2), A), A)


def test_matmul_small():
    assert matmul([[1, 2], [3, 4]], [[0], [1]]).tolist() == [[2.0], [4.0]]


def test_matmul_bitwise_vs_naive(rng):
    A, B = uniform(rng, (5, 5)), uniform(rng, (5, 5))
    assert np.array_equal(matmul(A, B), naive_matmul(A.tolist(), B.tolist()))


def test_matmul_rejects_mismatch():
    with pytest.raises(ShapeError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_associative(rng):
    A, B, C = (uniform(rng, (6, 6)) for _ in range(3))
    assert np.max(np.abs(matmul(matmul(A, B), C) - matmul(A, matmul(B, C)))) < 1e-9


def test_matmul_repeatable(rng):
    A, B = uniform(rng, (40, 30)), uniform(rng, (30, 20))
    assert np.array_equal(matmul(A, B), matmul(A, B))


def test_hadamard():
    A = np.array([[1.0, 2], [3, 4]])
    assert hadamard(A, [[5, 6], [7, 8]]).tolist() == [[5, 12], [21, 32]]
    assert np.array_equal(hadamard(A, np.ones((2, 2))), A)
    assert not hadamard(A, np.zeros((2, 2))).any()
    with pytest.raises(ShapeError):
        hadamard(A, np.ones((2, 3)))


def test_rowwise_kron():
    assert rowwise_kron([[1, 2]], [[3, 4], [5, 6]]).tolist() == [[3, 8], [5, 12]]
    A = np.array([[1.0, 2, 3], [4, 5, 6]])
    assert np.array_equal(rowwise_kron(A, np.ones((1, 3))), A)
    assert rowwise_kron(A, np.ones((4, 3))).shape == (8, 3)
    with pytest.raises(ShapeError):
        rowwise_kron(A, np.ones((2, 2)))


def test_rowwise_kron_index_pattern(rng):
    A, B = uniform(rng, (3, 2)), uniform(rng, (4, 2))
    K = rowwise_kron(A, B)
    for i in range(3):
        for j in range(4):
            assert np.array_equal(K[i * 4 + j], A[i] * B[j])


def test_entrywise_exp():
    assert np.array_equal(entrywise_exp(np.zeros((2, 3))), np.ones((2, 3)))
    assert entrywise_exp([[1.0]], 1.0)[0, 0] == math.e


def test_entrywise_exp_matches_scalar(rng):
    A = uniform(rng, (7, 7), 5.0)
    E = entrywise_exp(A, 0.5)
    for a, e in zip(A.ravel(), E.ravel()):
        assert e == pytest.approx(math.exp(0.5 * a), rel=1e-15)


def test_entrywise_exp_overflow_names_value():
    with pytest.raises(ExponentOverflowError) as err:
        entrywise_exp([[800.0, 1.0]])
    assert err.value.value == 800.0
    assert "800" in str(err.value)


def test_gram_exp(rng):
    A, B = uniform(rng, (4, 3)), uniform(rng, (5, 3))
    assert np.max(np.abs(gram_exp(A, B, 3.0) - np.exp(A @ B.T / 3.0))) < 1e-14


def test_diag_of_chain_identity():
    assert np.array_equal(diag_of_chain([np.eye(4), np.eye(4)]), np.ones(4))


@pytest.mark.parametrize("q,n", [(2, 3), (3, 4), (5, 16)])
def test_diag_of_chain_vs_full(rng, q, n):
    Ms = [uniform(rng, (n, n)) for _ in range(q)]
    full = Ms[0]
    for M in Ms[1:]:
        full = full @ M
    assert np.max(np.abs(diag_of_chain(Ms) - np.diag(full))) < 1e-12


def test_diag_of_chain_rejects():
    with pytest.raises(ShapeError):
        diag_of_chain([np.eye(3)])
    with pytest.raises(ShapeError):
        diag_of_chain([np.eye(3), np.eye(2)])


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ShapeError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ShapeError):
        as_matrix(np.zeros((0, 2)))


def test_csv_round_trip(tmp_path, rng):
    M = uniform(rng, (4, 3))
    path = tmp_path / "m.csv"
    write_csv(path, M)
    assert np.array_equal(read_csv(path), M)


def test_csv_ragged(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(ShapeError):
        read_csv(path)
