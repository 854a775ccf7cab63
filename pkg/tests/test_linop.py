import numpy as np
import pytest

from core.errors import ConfigurationError, ShapeError
from core.linop import (
    DenseOperator,
    IdentityOperator,
    MaskOperator,
    OperatorKind,
    apply,
    combine_solution,
    contiguous_mask,
    decompose,
    erased_frame_range,
    pinv_apply,
)


def test_mask_keeps_layout_and_zeroes_erased():
    A = MaskOperator(4, [0, 1])
    assert A.kind is OperatorKind.MASK
    assert np.array_equal(apply(A, np.array([1.0, 2.0, 3.0, 4.0])), [1.0, 2.0, 0.0, 0.0])
    assert np.array_equal(A.observed_mask(), [True, True, False, False])
    assert np.array_equal(A.erased, [2, 3])


def test_mask_pinv_ignores_erased_coordinates():
    A = MaskOperator(4, [0, 1])
    y = np.array([5.0, 6.0, 123.0, -7.0])
    assert np.array_equal(pinv_apply(A, y), [5.0, 6.0, 0.0, 0.0])


def test_combine_solution_takes_range_from_y_and_null_from_candidate():
    A = MaskOperator(4, [0, 1])
    y = A.apply(np.array([5.0, 6.0, 3.0, 4.0]))
    merged = combine_solution(A, y, np.array([1.0, 2.0, 9.0, 9.0]))
    assert np.array_equal(merged, [5.0, 6.0, 9.0, 9.0])


def test_identity_operator():
    A = IdentityOperator(3)
    z = np.array([1.0, -2.0, 0.5])
    range_part, null_part = decompose(A, z)
    assert np.array_equal(range_part, z)
    assert np.array_equal(null_part, np.zeros(3))


def test_dense_pseudo_inverse_small_example():
    A = DenseOperator(np.array([[1.0, 0.0], [0.0, 2.0]]))
    assert np.allclose(A.pinv, [[1.0, 0.0], [0.0, 0.5]], atol=1e-14)
    assert np.allclose(A.apply(np.array([3.0, 4.0])), [3.0, 8.0])


def test_dense_penrose_conditions(rng):
    A = DenseOperator(rng.standard_normal((6, 10)))
    M, P = A.matrix, A.pinv
    assert np.allclose(M @ P @ M, M, atol=1e-10)
    assert np.allclose(P @ M @ P, P, atol=1e-10)
    projector = P @ M
    assert np.allclose(projector @ projector, projector, atol=1e-10)


def test_dense_rank_deficient_matrix():
    A = DenseOperator(np.array([[1.0, 1.0], [2.0, 2.0]]))
    z = np.array([3.0, -1.0])
    range_part, null_part = decompose(A, z)
    assert np.allclose(range_part, [1.0, 1.0], atol=1e-12)
    assert np.allclose(A.apply(null_part), 0.0, atol=1e-10)


def test_decompose_is_exact_and_null_part_in_kernel(rng):
    A = DenseOperator(rng.standard_normal((5, 12)))
    z = rng.standard_normal(12)
    range_part, null_part = decompose(A, z)
    assert np.allclose(range_part + null_part, z, atol=1e-12)
    assert np.max(np.abs(A.apply(null_part))) <= 1e-10

    mask = MaskOperator(12, [1, 4, 5, 9])
    range_part, null_part = decompose(mask, z)
    assert np.array_equal(range_part + null_part, z)
    assert np.array_equal(mask.apply(null_part), np.zeros(12))


def test_batched_inputs(rng):
    A = DenseOperator(rng.standard_normal((3, 5)))
    z = rng.standard_normal((4, 5))
    assert A.apply(z).shape == (4, 3)
    assert np.allclose(A.apply(z)[2], A.matrix @ z[2])
    assert A.pinv_apply(A.apply(z)).shape == (4, 5)


def test_shape_errors():
    with pytest.raises(ShapeError):
        IdentityOperator(3).apply(np.zeros(4))
    with pytest.raises(ShapeError):
        DenseOperator(np.ones((2, 3))).pinv_apply(np.zeros(3))
    with pytest.raises(ConfigurationError):
        MaskOperator(4, [4])


def test_contiguous_mask_erases_frames():
    A = contiguous_mask(100, 1, 0.4, 0.1)
    assert np.array_equal(A.erased, np.arange(40, 50))

    A = contiguous_mask(16, 4, 0.5, 0.25)
    assert np.array_equal(A.erased, np.arange(32, 48))


def test_erased_frame_range_rounding():
    # 10% of 160 frames is 16 frames
    start, stop = erased_frame_range(160, 0.45, 0.1)
    assert stop - start == 16
    # short clips still lose at least one frame
    assert erased_frame_range(4, 0.0, 0.05) == (0, 1)
    # the window is pulled back inside the clip
    assert erased_frame_range(10, 0.95, 0.2) == (8, 10)


def test_contiguous_mask_rejects_bad_fractions():
    with pytest.raises(ConfigurationError):
        contiguous_mask(10, 2, 1.5, 0.1)
    with pytest.raises(ConfigurationError):
        contiguous_mask(0, 2, 0.1, 0.1)
