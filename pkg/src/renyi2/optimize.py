"""Maximal output purity / minimal Rényi-2 output entropy over pure inputs.

The objective ``f(rho) = tr channel(rho)^2`` is convex with gradient
``2 dual(channel(rho))``.  Each ascent step replaces the current pure state by
the top eigenvector of ``dual(channel(|phi><phi|))``, the maximizer of the
linearization over pure states, so ``f`` never decreases.  Several random
starts are run and the best one kept.

That step converges only linearly, and very slowly where the objective is
nearly flat along some direction (e.g. Werner-Holevo maps with ``ab`` close
to 0).  Each iteration therefore also tries a Newton step on the unit sphere
(with the global-phase direction removed) and keeps whichever candidate has
the higher purity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .channel import QuantumChannel, apply, apply_dual, tensor_channel

DEFAULT_RESTARTS = 32
DEFAULT_TOL = 1e-10
MAX_ITER = 1000
ADDITIVITY_TOL = 1e-6
MONOTONE_SLACK = 1e-12
DEGENERACY_RTOL = 1e-10


class AscentRegressionError(RuntimeError):
    """The purity decreased during an ascent step (should be impossible)."""


@dataclass(frozen=True)
class OptimizationResult:
    max_purity: float
    argmax_state: np.ndarray
    min_h2: float
    restarts_used: int
    converged: bool
    best_trace: tuple[float, ...]
    """Purity after each iteration of the winning start."""

    @property
    def iterations(self) -> int:
        return len(self.best_trace) - 1


@dataclass(frozen=True)
class AdditivityReport:
    joint_max_purity: float
    product_of_maxima: float
    gap: float
    additive: bool
    joint: OptimizationResult
    first: OptimizationResult
    second: OptimizationResult


def _log(x: float, base: str) -> float:
    if base == "e":
        return math.log(x)
    if base == "2":
        return math.log2(x)
    raise ValueError(f"log base must be 'e' or '2', got {base!r}")


def renyi_entropy(rho, p: float, base: str = "e") -> float:
    """``log(tr rho^p) / (1 - p)`` from the eigenvalues of a density matrix."""
    if p <= 0 or p == 1:
        raise ValueError("order p must be positive and different from 1")
    rho = linalg.as_matrix(rho, "rho")
    vals = linalg.eigvalsh(rho)
    if abs(vals.sum() - 1) > 1e-8 or vals[0] < -linalg.psd_threshold(rho):
        raise ValueError("rho is not a density matrix")
    # rounding noise in null eigenvalues is amplified by x**p for p < 1
    vals = np.where(vals > 1e-14, vals, 0.0)
    return _log(float(np.sum(vals**p)), base) / (1 - p)


def output_purity(ch: QuantumChannel, phi: np.ndarray) -> float:
    out = apply(ch, np.outer(phi, phi.conj()))
    return float(np.vdot(out, out).real)


def _canonical_phase(phi: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(phi) > np.abs(phi).max() * (1 - 1e-9)))
    return phi * (abs(phi[k]) / phi[k])


def _ascent_step(ch: QuantumChannel, phi: np.ndarray) -> np.ndarray:
    grad = apply_dual(ch, apply(ch, np.outer(phi, phi.conj())))
    vals, vecs = np.linalg.eigh(0.5 * (grad + grad.conj().T))
    top = vals[-1]
    # prefer the direction closest to phi inside a degenerate top eigenspace
    span = vecs[:, vals >= top - DEGENERACY_RTOL * max(1.0, abs(top))]
    proj = span @ (span.conj().T @ phi)
    norm = np.linalg.norm(proj)
    new = proj / norm if norm > 1e-8 else vecs[:, -1]
    return new / np.linalg.norm(new)


def _newton_step(ch: QuantumChannel, phi: np.ndarray) -> np.ndarray:
    """Riemannian Newton step for ``f(phi) = tr ch(|phi><phi|)^2`` on the unit sphere.

    Works in real coordinates ``x = (Re phi, Im phi)``.  With ``G`` the gradient
    operator and tangent vectors ``u, v`` orthogonal to ``phi`` and ``i phi``:
    gradient ``4 Re<u|G phi>``, Hessian
    ``2 Re tr[ch(U) ch(V)] + 4 Re<u|G|v> - 4 f <u, v>`` where ``U = u phi^† + phi u^†``.
    Negative curvature is used in absolute value so the step always ascends.
    """
    n = phi.shape[0]
    p = np.outer(phi, phi.conj())
    out = apply(ch, p)
    f = float(np.vdot(out, out).real)
    g_op = apply_dual(ch, out)
    x = np.concatenate([phi.real, phi.imag])
    jx = np.concatenate([-phi.imag, phi.real])
    q, _ = np.linalg.qr(np.column_stack([x, jx, np.eye(2 * n)]))
    basis = q[:, 2 : 2 * n]
    u = basis[:n] + 1j * basis[n:]
    images = np.stack([apply(ch, np.outer(col, phi.conj()) + np.outer(phi, col.conj())) for col in u.T])
    hess = 2 * np.einsum("aij,bji->ab", images, images).real
    hess += 4 * (u.conj().T @ g_op @ u).real - 4 * f * np.eye(u.shape[1])
    grad = 4 * (u.conj().T @ (g_op @ phi)).real
    vals, vecs = np.linalg.eigh(0.5 * (hess + hess.T))
    curv = np.maximum(np.abs(vals), 1e-14)
    step = vecs @ ((vecs.T @ grad) / curv)
    new = phi + u @ step
    return new / np.linalg.norm(new)


def ascend(
    ch: QuantumChannel, phi: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER
) -> tuple[np.ndarray, list[float], bool]:
    """Run the eigenvector ascent from ``phi``; returns (state, purity trace, converged)."""
    phi = np.asarray(phi, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    trace = [output_purity(ch, phi)]
    for _ in range(max_iter):
        cand = _ascent_step(ch, phi)
        value = output_purity(ch, cand)
        newton = _newton_step(ch, phi)
        newton_value = output_purity(ch, newton)
        if newton_value > value:
            cand, value = newton, newton_value
        phi = cand
        trace.append(value)
        delta = trace[-1] - trace[-2]
        if delta < -MONOTONE_SLACK:
            raise AscentRegressionError(f"purity dropped by {-delta:.3e}")
        if abs(delta) < tol:
            return phi, trace, True
    return phi, trace, False


def _multistart(
    ch: QuantumChannel,
    starts: list[np.ndarray],
    tol: float,
    max_iter: int,
    base: str,
) -> OptimizationResult:
    best = None
    for phi0 in starts:
        phi, trace, conv = ascend(ch, phi0, tol, max_iter)
        if best is None or trace[-1] > best[1][-1]:
            best = (phi, trace, conv)
    phi, trace, conv = best
    phi = _canonical_phase(phi)
    purity = output_purity(ch, phi)
    return OptimizationResult(
        max_purity=purity,
        argmax_state=phi,
        min_h2=-_log(purity, base),
        restarts_used=len(starts),
        converged=conv,
        best_trace=tuple(trace),
    )


def max_output_purity(
    ch: QuantumChannel,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int | None = 0,
    max_iter: int = MAX_ITER,
    base: str = "e",
) -> OptimizationResult:
    """Multi-start maximization of ``tr ch(|phi><phi|)^2`` over unit vectors."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    starts = [linalg.random_unit_vector(ch.dim_in, rng) for _ in range(restarts)]
    return _multistart(ch, starts, tol, max_iter, base)


def joint_max_purity(
    ch1: QuantumChannel,
    ch2: QuantumChannel,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int | None = 0,
    max_iter: int = MAX_ITER,
    base: str = "e",
    product_start: tuple[np.ndarray, np.ndarray] | None = None,
) -> OptimizationResult:
    """Maximal output purity of ``ch1 (x) ch2`` over all, possibly entangled, pure inputs.

    ``restarts`` Haar-random joint starts are used.  When ``product_start`` is
    given, the tensor product of those two states is added as one extra start,
    which makes the product-input lower bound attainable by construction.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    joint = tensor_channel(ch1, ch2)
    rng = np.random.default_rng(seed)
    starts = [linalg.random_unit_vector(joint.dim_in, rng) for _ in range(restarts)]
    if product_start is not None:
        starts.append(np.kron(product_start[0], product_start[1]))
    return _multistart(joint, starts, tol, max_iter, base)


def additivity_gap(
    ch1: QuantumChannel,
    ch2: QuantumChannel,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int | None = 0,
    base: str = "e",
) -> AdditivityReport:
    """Joint maximal purity minus the product of the individual maxima."""
    first = max_output_purity(ch1, restarts, tol, seed, base=base)
    second = max_output_purity(ch2, restarts, tol, None if seed is None else seed + 1, base=base)
    joint = joint_max_purity(
        ch1,
        ch2,
        restarts,
        tol,
        None if seed is None else seed + 2,
        base=base,
        product_start=(first.argmax_state, second.argmax_state),
    )
    product = first.max_purity * second.max_purity
    gap = joint.max_purity - product
    return AdditivityReport(
        joint_max_purity=joint.max_purity,
        product_of_maxima=product,
        gap=gap,
        additive=gap <= ADDITIVITY_TOL,
        joint=joint,
        first=first,
        second=second,
    )


def brute_force_max_purity(
    ch: QuantumChannel, samples: int = 1000, seed: int | None = 0, refine_steps: int = 3
) -> float:
    """Best purity over Haar-random inputs, each refined by a few power steps.

    Refinement is ``phi <- G phi / |G phi|`` with ``G = dual(ch(|phi><phi|))``,
    deliberately not the eigenvector step used by :func:`max_output_purity`,
    so this stays an independent lower-bound oracle.
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        phi = linalg.random_unit_vector(ch.dim_in, rng)
        best = max(best, output_purity(ch, phi))
        for _ in range(refine_steps):
            g = apply_dual(ch, apply(ch, np.outer(phi, phi.conj())))
            phi = g @ phi
            phi = phi / np.linalg.norm(phi)
            best = max(best, output_purity(ch, phi))
    return best
