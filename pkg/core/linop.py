"""
LinOp - Linear degradation operators with pseudo-inverses
Identity, Mask (coordinate erasure) and Dense (SVD pseudo-inverse)

Every operator acts on the last axis, so batched inputs of shape (..., d)
are supported throughout.
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Iterable, Tuple

import numpy as np

from .errors import ConfigurationError, InvariantViolation, ShapeError

PINV_RELATIVE_CUTOFF = 1e-12
PENROSE_TOLERANCE = 1e-10


class OperatorKind(Enum):
    IDENTITY = "identity"
    MASK = "mask"
    DENSE = "dense"


class DegradationOperator(ABC):
    """Base class for all degradation operators"""

    def __init__(self, dim_in: int, dim_out: int):
        if dim_in < 1 or dim_out < 1:
            raise ConfigurationError(f"operator dims must be positive, got {dim_in}x{dim_out}")
        self.dim_in = dim_in
        self.dim_out = dim_out

    @property
    @abstractmethod
    def kind(self) -> OperatorKind:
        pass

    @abstractmethod
    def _apply(self, z: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def _pinv_apply(self, y: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def _range_project(self, z: np.ndarray) -> np.ndarray:
        pass

    def _check(self, x: np.ndarray, expected: int, what: str) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 0 or x.shape[-1] != expected:
            raise ShapeError(f"{self.kind.value} operator expects {what} of size {expected}, "
                             f"got shape {x.shape}")
        return x

    def apply(self, z: np.ndarray) -> np.ndarray:
        return self._apply(self._check(z, self.dim_in, "input"))

    def pinv_apply(self, y: np.ndarray) -> np.ndarray:
        return self._pinv_apply(self._check(y, self.dim_out, "observation"))

    def range_project(self, z: np.ndarray) -> np.ndarray:
        """A†A z"""
        return self._range_project(self._check(z, self.dim_in, "input"))

    def observed_mask(self) -> np.ndarray:
        """Boolean mask over observation coordinates that carry signal"""
        return np.ones(self.dim_out, dtype=bool)


class IdentityOperator(DegradationOperator):

    def __init__(self, dim: int):
        super().__init__(dim, dim)

    @property
    def kind(self) -> OperatorKind:
        return OperatorKind.IDENTITY

    def _apply(self, z):
        return z.copy()

    def _pinv_apply(self, y):
        return y.copy()

    def _range_project(self, z):
        return z.copy()


class MaskOperator(DegradationOperator):
    """
    Keeps a subset of coordinates and zeroes the rest.

    The observation keeps the input layout (dim_out == dim_in); erased
    coordinates are present but flagged through ``observed_mask`` and are
    never read by ``pinv_apply``.
    """

    def __init__(self, dim: int, kept: Iterable[int]):
        super().__init__(dim, dim)
        kept = np.unique(np.asarray(list(kept), dtype=np.int64))
        if kept.size and (kept[0] < 0 or kept[-1] >= dim):
            raise ConfigurationError(f"kept indices must lie in [0, {dim})")
        self.kept = kept
        self.kept_mask = np.zeros(dim, dtype=bool)
        self.kept_mask[kept] = True
        self._weights = self.kept_mask.astype(np.float64)

    @property
    def kind(self) -> OperatorKind:
        return OperatorKind.MASK

    @property
    def erased(self) -> np.ndarray:
        return np.flatnonzero(~self.kept_mask)

    def _apply(self, z):
        return z * self._weights

    def _pinv_apply(self, y):
        return y * self._weights

    def _range_project(self, z):
        return z * self._weights

    def observed_mask(self) -> np.ndarray:
        return self.kept_mask.copy()


class DenseOperator(DegradationOperator):
    """General matrix with an SVD pseudo-inverse"""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ConfigurationError("dense operator needs a 2-D matrix")
        super().__init__(matrix.shape[1], matrix.shape[0])
        self.matrix = matrix
        self.pinv = _truncated_pinv(matrix)

        # Penrose conditions
        scale = max(1.0, float(np.abs(matrix).max()), float(np.abs(self.pinv).max()))
        if not np.allclose(matrix @ self.pinv @ matrix, matrix, rtol=0.0,
                           atol=PENROSE_TOLERANCE * scale):
            raise InvariantViolation("A A+ A != A for dense operator")
        if not np.allclose(self.pinv @ matrix @ self.pinv, self.pinv, rtol=0.0,
                           atol=PENROSE_TOLERANCE * scale):
            raise InvariantViolation("A+ A A+ != A+ for dense operator")
        self._projector = self.pinv @ matrix

    @property
    def kind(self) -> OperatorKind:
        return OperatorKind.DENSE

    def _apply(self, z):
        return z @ self.matrix.T

    def _pinv_apply(self, y):
        return y @ self.pinv.T

    def _range_project(self, z):
        return z @ self._projector.T


def _truncated_pinv(matrix: np.ndarray) -> np.ndarray:
    u, sv, vt = np.linalg.svd(matrix, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros(matrix.T.shape)
    keep = sv > PINV_RELATIVE_CUTOFF * sv[0]
    inv = np.zeros_like(sv)
    inv[keep] = 1.0 / sv[keep]
    return (vt.T * inv) @ u.T


# ----------------------------------------------------------------------
# Module-level operations
# ----------------------------------------------------------------------

def apply(A: DegradationOperator, z: np.ndarray) -> np.ndarray:
    return A.apply(z)


def pinv_apply(A: DegradationOperator, y: np.ndarray) -> np.ndarray:
    return A.pinv_apply(y)


def decompose(A: DegradationOperator, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Split z into its range-space part A†A z and null-space part z - A†A z"""
    range_part = A.range_project(z)
    if isinstance(A, MaskOperator):
        null_part = np.asarray(z, dtype=np.float64) * (~A.kept_mask)
    else:
        null_part = np.asarray(z, dtype=np.float64) - range_part
    return range_part, null_part


def combine_solution(A: DegradationOperator, y: np.ndarray, z_tilde: np.ndarray) -> np.ndarray:
    """A†y + (I - A†A) z_tilde"""
    _, null_part = decompose(A, z_tilde)
    return A.pinv_apply(y) + null_part


def contiguous_mask(n_frames: int, frame_dim: int, start_fraction: float,
                    length_fraction: float) -> MaskOperator:
    """
    Erase a contiguous run of frames from a frame-major latent.

    Start and length are rounded to whole frames; a positive length fraction
    always erases at least one frame.
    """
    if n_frames < 1 or frame_dim < 1:
        raise ConfigurationError("n_frames and frame_dim must be positive")
    if not (0.0 <= start_fraction <= 1.0 and 0.0 <= length_fraction <= 1.0):
        raise ConfigurationError("mask fractions must lie in [0, 1]")
    start, stop = erased_frame_range(n_frames, start_fraction, length_fraction)
    dim = n_frames * frame_dim
    erased = np.arange(start * frame_dim, stop * frame_dim)
    kept = np.setdiff1d(np.arange(dim), erased)
    return MaskOperator(dim, kept)


def erased_frame_range(n_frames: int, start_fraction: float,
                       length_fraction: float) -> Tuple[int, int]:
    length = int(round(length_fraction * n_frames))
    if length_fraction > 0:
        length = max(1, length)
    length = min(length, n_frames)
    start = min(int(round(start_fraction * n_frames)), n_frames - length)
    return start, start + length
