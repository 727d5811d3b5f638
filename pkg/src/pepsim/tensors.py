"""Dense complex tensor primitives.

Tensors are plain numpy ``complex128`` arrays stored in C (row-major) order,
the leftmost index varying slowest.  Every function here is pure: inputs are
never mutated.  Results may share memory with their inputs (reshapes are
views), so callers must treat tensor values as immutable.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

#: Default ceiling on the element count of any contraction output
#: (2**30 complex doubles, 16 GiB).  Contraction cost grows exponentially
#: with network size; a failed allocation must be a clean, early error.
DEFAULT_MAX_ELEMENTS = 2**30

BYTES_PER_ELEMENT = 16


class TensorSizeError(Exception):
    """A contraction output would exceed the configured element ceiling."""

    def __init__(self, elements: int, max_elements: int):
        super().__init__(
            f"contraction output of {elements} elements "
            f"({elements * BYTES_PER_ELEMENT} bytes) exceeds the ceiling of "
            f"{max_elements} elements"
        )
        self.elements = elements
        self.max_elements = max_elements


class DecompositionError(Exception):
    """SVD failed: non-finite input or LAPACK non-convergence."""


def as_tensor(values) -> np.ndarray:
    """Coerce ``values`` to a C-contiguous complex128 ndarray."""
    return np.ascontiguousarray(values, dtype=np.complex128)


def permute(t: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder the indices of ``t``; ``order[k]`` names the source axis that
    becomes axis ``k`` of the result."""
    t = as_tensor(t)
    order = tuple(order)
    if sorted(order) != list(range(t.ndim)):
        raise ValueError(
            f"order {order} is not a permutation of the {t.ndim} tensor axes"
        )
    return np.ascontiguousarray(np.transpose(t, order))


def merge_axes(t: np.ndarray, groups: Sequence[Sequence[int]]) -> np.ndarray:
    """Fuse consecutive groups of axes into single axes.

    ``groups`` must partition ``0..rank-1`` in ascending order (permute
    first otherwise); the merge is then a pure reshape and the stored data
    order is unchanged.  Each merged extent is the product of the member
    extents.
    """
    t = as_tensor(t)
    groups = [list(g) for g in groups]
    if any(len(g) == 0 for g in groups):
        raise ValueError("empty axis group")
    flat = [axis for g in groups for axis in g]
    if flat != list(range(t.ndim)):
        raise ValueError(
            f"groups {groups} must cover axes 0..{t.ndim - 1} exactly once, "
            "in ascending order"
        )
    shape = tuple(math.prod(t.shape[axis] for axis in g) for g in groups)
    return t.reshape(shape)


def split_axis(t: np.ndarray, axis: int, extents: Sequence[int]) -> np.ndarray:
    """Inverse of a single-axis merge: factor ``axis`` into ``extents``."""
    t = as_tensor(t)
    extents = tuple(extents)
    if not 0 <= axis < t.ndim:
        raise ValueError(f"axis {axis} out of range for rank-{t.ndim} tensor")
    if math.prod(extents) != t.shape[axis]:
        raise ValueError(
            f"extents {extents} do not factor axis extent {t.shape[axis]}"
        )
    shape = t.shape[:axis] + extents + t.shape[axis + 1 :]
    return t.reshape(shape)


def contract(
    a: np.ndarray,
    b: np.ndarray,
    pairs: Sequence[tuple[int, int]],
    max_elements: int | None = None,
) -> np.ndarray:
    """Sum ``a . b`` over the paired indices.

    The result carries a's unpaired indices (in order) followed by b's
    unpaired indices.  Internally this is permute, merge, one dense matrix
    multiply, split, so the dominant cost is a single matmul.  An empty
    ``pairs`` list gives the outer product.
    """
    a = as_tensor(a)
    b = as_tensor(b)
    pairs = list(pairs)
    a_axes = [p[0] for p in pairs]
    b_axes = [p[1] for p in pairs]
    if len(set(a_axes)) != len(a_axes) or len(set(b_axes)) != len(b_axes):
        raise ValueError(f"repeated axis in contraction pairs {pairs}")
    for ax, bx in pairs:
        if not (0 <= ax < a.ndim and 0 <= bx < b.ndim):
            raise ValueError(f"pair ({ax}, {bx}) out of range")
        if a.shape[ax] != b.shape[bx]:
            raise ValueError(
                f"extent mismatch on pair ({ax}, {bx}): "
                f"{a.shape[ax]} vs {b.shape[bx]}"
            )
    a_free = [i for i in range(a.ndim) if i not in set(a_axes)]
    b_free = [i for i in range(b.ndim) if i not in set(b_axes)]
    out_shape = tuple(a.shape[i] for i in a_free) + tuple(b.shape[i] for i in b_free)
    out_elements = math.prod(out_shape)
    ceiling = DEFAULT_MAX_ELEMENTS if max_elements is None else max_elements
    if out_elements > ceiling:
        raise TensorSizeError(out_elements, ceiling)
    k = math.prod(a.shape[i] for i in a_axes)
    lhs = permute(a, a_free + a_axes).reshape(-1, k)
    rhs = permute(b, b_axes + b_free).reshape(k, -1)
    return np.matmul(lhs, rhs).reshape(out_shape)


def svd(
    t: np.ndarray, row_axes: Sequence[int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition of the (row_axes x remaining) matricization.

    Returns ``(u, s, v)`` with ``s`` sorted descending, ``u`` shaped
    ``row extents + (k,)`` with orthonormal columns and ``v`` shaped
    ``(k,) + column extents`` with orthonormal rows, such that the
    matricization equals ``u . diag(s) . v``.
    """
    t = as_tensor(t)
    row_axes = list(row_axes)
    if len(set(row_axes)) != len(row_axes):
        raise ValueError(f"repeated axis in row_axes {row_axes}")
    if not row_axes or len(row_axes) >= t.ndim:
        raise ValueError("row_axes must be a nonempty proper subset of the axes")
    if any(not 0 <= ax < t.ndim for ax in row_axes):
        raise ValueError(f"row_axes {row_axes} out of range")
    col_axes = [i for i in range(t.ndim) if i not in set(row_axes)]
    if not np.all(np.isfinite(t)):
        raise DecompositionError("tensor contains non-finite values")
    m = math.prod(t.shape[i] for i in row_axes)
    mat = permute(t, row_axes + col_axes).reshape(m, -1)
    try:
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge: {exc}") from exc
    kdim = s.shape[0]
    u = np.ascontiguousarray(
        u.reshape(tuple(t.shape[i] for i in row_axes) + (kdim,))
    )
    v = np.ascontiguousarray(
        vh.reshape((kdim,) + tuple(t.shape[i] for i in col_axes))
    )
    return u, s, v
