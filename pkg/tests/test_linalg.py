import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from qudit_reservoir.errors import InvalidDimensionError, ParseError
from qudit_reservoir.linalg import (
    RandomSource,
    dagger,
    frobenius_distance,
    haar_unitary,
    matmul,
    matrix_from_json,
    matrix_to_json,
    unitarity_defect,
)

from conftest import naive_matmul, random_complex


def test_haar_dimension_one_is_a_phase():
    u = haar_unitary(1, RandomSource(7))
    assert u.shape == (1, 1)
    assert abs(abs(u[0, 0]) - 1) <= 1e-12


def test_haar_is_deterministic():
    a = haar_unitary(5, RandomSource(99))
    b = haar_unitary(5, RandomSource(99))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, haar_unitary(5, RandomSource(99).derive(1)))


def test_haar_rejects_zero():
    with pytest.raises(InvalidDimensionError):
        haar_unitary(0, RandomSource(0))


@pytest.mark.parametrize("m", [1, 2, 7, 16, 33, 64])
def test_haar_unitarity(m):
    for s in range(3):
        assert unitarity_defect(haar_unitary(m, RandomSource(s))) <= 1e-12


def test_haar_eigenphases_uniform():
    src = RandomSource(31337)
    phases = np.concatenate(
        [np.angle(np.linalg.eigvals(haar_unitary(16, src.derive(i)))) for i in range(2000)]
    )
    result = stats.kstest(phases, stats.uniform(loc=-np.pi, scale=2 * np.pi).cdf)
    assert result.pvalue > 0.01


def test_haar_first_column_phase_uniform():
    # without phase correction, QR conventions bias diagonal phases
    src = RandomSource(4)
    ph = [np.angle(haar_unitary(4, src.derive(i))[0, 0]) for i in range(3000)]
    assert stats.kstest(ph, stats.uniform(loc=-np.pi, scale=2 * np.pi).cdf).pvalue > 0.01


def test_random_source_derivation_is_order_independent():
    src = RandomSource(5)
    first = src.derive(3).generator().standard_normal(4)
    src.derive(1).generator().standard_normal(100)
    assert np.array_equal(first, src.derive(3).generator().standard_normal(4))


def test_random_source_bounds():
    with pytest.raises(ValueError):
        RandomSource(-1)
    with pytest.raises(ValueError):
        RandomSource(2**64)
    RandomSource(2**64 - 1, (2**64 - 1,)).generator()


def test_dagger_examples(rng):
    assert dagger(np.array([[1j]]))[0, 0] == -1j
    assert np.array_equal(dagger(np.eye(3)), np.eye(3))
    a = random_complex(rng, (4, 4))
    assert np.array_equal(dagger(dagger(a)), a)


def test_matmul_examples(rng):
    a = random_complex(rng, (3, 3))
    assert np.allclose(matmul(np.eye(3), a), a, atol=0)
    u = haar_unitary(6, RandomSource(1))
    assert frobenius_distance(matmul(u, dagger(u)), np.eye(6)) <= 1e-12
    a, b = random_complex(rng, (2, 3)), random_complex(rng, (3, 2))
    assert np.max(np.abs(matmul(a, b) - naive_matmul(a.tolist(), b.tolist()))) <= 1e-14
    v = random_complex(rng, 3)
    assert np.allclose(matmul(a, v), a @ v)


def test_matmul_shape_mismatch(rng):
    with pytest.raises(InvalidDimensionError):
        matmul(random_complex(rng, (2, 3)), random_complex(rng, (2, 3)))


def test_frobenius_examples():
    a = np.arange(4).reshape(2, 2) * (1 + 1j)
    assert frobenius_distance(a, a) == 0
    assert frobenius_distance([[1]], [[0]]) == 1
    assert frobenius_distance([[0, 1j], [0, 0]], np.zeros((2, 2))) == 1
    with pytest.raises(InvalidDimensionError):
        frobenius_distance(np.zeros((2, 2)), np.zeros((2, 3)))


def test_unitarity_defect_examples():
    assert unitarity_defect(np.eye(4)) == 0
    assert unitarity_defect(np.diag([1, 0])) == 1
    with pytest.raises(InvalidDimensionError):
        unitarity_defect(np.zeros((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32))
def test_associativity_and_dagger_product(p, q, r, s, seed):
    rng = np.random.default_rng(seed)
    a, b, c = random_complex(rng, (p, q)), random_complex(rng, (q, r)), random_complex(rng, (r, s))
    scale = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c)
    assert frobenius_distance(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) <= 1e-12 * max(1, scale)
    ab = matmul(a, b)
    assert frobenius_distance(dagger(ab), matmul(dagger(b), dagger(a))) <= 1e-13 * max(1, np.linalg.norm(ab))


def test_json_round_trip_is_bit_exact(rng):
    a = random_complex(rng, (3, 4)) * 1e-7 + np.pi
    text = json.dumps(matrix_to_json(a))
    b = matrix_from_json(json.loads(text))
    assert np.array_equal(a, b)
    assert a.tobytes() == b.tobytes()


def test_json_reads_interleaved_form():
    obj = {"rows": 1, "cols": 2, "data": [1.0, 2.0, -3.0, 0.5]}
    assert np.array_equal(matrix_from_json(obj), np.array([[1 + 2j, -3 + 0.5j]]))


@pytest.mark.parametrize(
    "obj",
    [
        {"rows": 2, "cols": 2, "re": [1, 2, 3]},
        {"rows": 1, "cols": 1},
        {"cols": 1, "re": [1]},
        {"rows": 1, "cols": 1, "re": ["a"], "im": [0]},
        {"rows": 1, "cols": 2, "data": [1.0]},
        [1, 2],
    ],
)
def test_json_malformed(obj):
    with pytest.raises(ParseError):
        matrix_from_json(obj)
