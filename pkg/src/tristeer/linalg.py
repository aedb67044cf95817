"""Small dense complex linear algebra on numpy arrays.

Tensor products use the row-major convention with the first factor as the
most significant subsystem, so party order A, B, C matches index order.
"""
from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

# constructor validation / eigenvalue and positivity / end-to-end reconstruction
TOL_CONSTRUCT = 1e-12
TOL_EIG = 1e-10
TOL_RECON = 1e-9


class DimensionError(ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    """Return `m` as a finite 2-d complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains NaN or Inf entries")
    return arr


def tensor(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors)."""
    if not factors:
        raise ValueError("tensor() needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def ketbra(ket, bra=None) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex).ravel()
    bra = ket if bra is None else np.asarray(bra, dtype=complex).ravel()
    return np.outer(ket, bra.conj())


def is_hermitian(m, tol: float = TOL_CONSTRUCT) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def partial_trace(m, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the subsystems in `traced`, keeping the rest in their order.

    Tracing every subsystem returns a 1x1 matrix holding the full trace.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise DimensionError(f"subsystem dims must be positive, got {dims}")
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise DimensionError(f"matrix shape {m.shape} does not match dims {dims} (product {n})")
    traced = sorted(set(traced))
    if any(t < 0 or t >= len(dims) for t in traced):
        raise DimensionError(f"traced indices {traced} out of range for {len(dims)} subsystems")

    k = len(dims)
    t = m.reshape(dims + dims)
    # trace highest index first so lower axis numbers stay valid
    for i in reversed(traced):
        k_now = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + k_now)
    kept = [dims[i] for i in range(k) if i not in traced]
    d = int(np.prod(kept)) if kept else 1
    return t.reshape(d, d)


def _min_eig_2x2(m: np.ndarray) -> float:
    a = m[0, 0].real
    d = m[1, 1].real
    b = m[0, 1]
    half_gap = np.hypot((a - d) / 2.0, abs(b))
    return float((a + d) / 2.0 - half_gap)


def hermitian_min_eigenvalue(m, tol: float = TOL_CONSTRUCT) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Uses the closed form for 2x2 and LAPACK's symmetric solver otherwise.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got {m.shape}")
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    if m.shape == (1, 1):
        return float(m[0, 0].real)
    if m.shape == (2, 2):
        return _min_eig_2x2(m)
    h = (m + m.conj().T) / 2
    return float(np.linalg.eigvalsh(h)[0])
