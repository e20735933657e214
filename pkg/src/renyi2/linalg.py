"""Dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Bipartite index
convention, used everywhere: the basis vector ``|i> (x) |k>`` of a space
``C^dA (x) C^dB`` sits at position ``i * dB + k``.  This is exactly the layout
produced by :func:`numpy.kron` and by C-order reshapes to ``(dA, dB)``.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

HERMITIAN_RTOL = 1e-9
PSD_RTOL = 1e-9


class NotHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


class HermitianSpectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def inf_norm(m: np.ndarray) -> float:
    """Largest absolute entry."""
    return float(np.max(np.abs(m))) if m.size else 0.0


def tensor(*mats) -> np.ndarray:
    """Kronecker product ``A (x) B (x) ...`` in the package index convention."""
    if not mats:
        raise ValueError("tensor needs at least one factor")
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def flip_operator(d: int) -> np.ndarray:
    """The swap ``F`` on ``C^d (x) C^d`` with ``F(x (x) y) = y (x) x``."""
    if d < 1:
        raise ValueError("d must be positive")
    f = np.zeros((d * d, d * d), dtype=complex)
    i, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    f[(k * d + i).ravel(), (i * d + k).ravel()] = 1.0
    return f


def max_entangled_projector(d: int, normalized: bool = False) -> np.ndarray:
    """``sum_ij |ii><jj|`` (trace ``d``), or that divided by ``d`` if normalized."""
    if d < 1:
        raise ValueError("d must be positive")
    psi = np.eye(d, dtype=complex).reshape(d * d)
    proj = np.outer(psi, psi)
    return proj / d if normalized else proj


def permute_subsystems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square operator.

    ``perm[k]`` names the old factor that ends up in slot ``k``, so the result
    acts on ``(x)_k C^{dims[perm[k]]}``.  Equivalent to ``P m P^T`` where ``P``
    is the permutation unitary between the two orderings.
    """
    dims = list(dims)
    n = len(dims)
    total = int(np.prod(dims))
    m = np.asarray(m, dtype=complex)
    if m.shape != (total, total):
        raise ValueError(f"operator of shape {m.shape} does not act on dims {dims}")
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} factors")
    t = m.reshape(dims + dims)
    axes = list(perm) + [n + p for p in perm]
    return t.transpose(axes).reshape(total, total)


def partial_transpose(m, dA: int, dB: int, subsystem: str = "second") -> np.ndarray:
    """Transpose one tensor factor of an operator on ``C^dA (x) C^dB``."""
    m = np.asarray(m, dtype=complex)
    n = dA * dB
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix for dims ({dA}, {dB}), got {m.shape}")
    t = m.reshape(dA, dB, dA, dB)
    if subsystem == "second":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "first":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'first' or 'second', got {subsystem!r}")
    return t.reshape(n, n)


def realign(m, dA: int, dB: int) -> np.ndarray:
    """Realignment ``R(m)[(i,j),(k,l)] = m[(i,k),(j,l)]`` used by the CCNR test."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (dA * dB, dA * dB):
        raise ValueError(f"expected a {dA * dB}x{dA * dB} matrix, got {m.shape}")
    return m.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)


def check_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> None:
    if m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"matrix of shape {m.shape} is not square")
    scale = max(1.0, inf_norm(m))
    err = inf_norm(m - m.conj().T)
    if err > rtol * scale:
        raise NotHermitianError(f"Hermiticity defect {err:.3e} exceeds {rtol:g} * {scale:.3e}")


def hermitian_eig(m) -> HermitianSpectrum:
    """Full spectrum of a Hermitian matrix, eigenvalues ascending."""
    m = as_matrix(m)
    check_hermitian(m)
    h = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(h)
    return HermitianSpectrum(vals, vecs)


def eigvalsh(m) -> np.ndarray:
    m = as_matrix(m)
    check_hermitian(m)
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def min_eigenvalue(m) -> float:
    return float(eigvalsh(m)[0])


def psd_threshold(m) -> float:
    """Tolerance below zero still accepted as positive semidefinite."""
    return PSD_RTOL * max(1.0, inf_norm(np.asarray(m)))


def is_psd(m) -> bool:
    return min_eigenvalue(m) >= -psd_threshold(m)


def singular_values(m) -> np.ndarray:
    """Singular values, nonincreasing; ``min(rows, cols)`` of them."""
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector from a normalized complex Gaussian."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a complex Ginibre matrix (Hilbert-Schmidt measure)."""
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)
