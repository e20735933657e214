"""Replica-trick operators for output purity and the two positivity conditions.

For a channel with Kraus family ``{v_a}`` (``v_a`` maps input to output):

* the purity operator ``K = (sum_ab v_a^† v_b (x) v_b^† v_a) F`` on the doubled
  input space satisfies ``tr channel(rho)^2 = tr[(rho (x) rho) K]``;
* the two-particle operator ``-h = (sum_ab v_a v_b^† (x) v_b v_a^†) F`` lives
  on the doubled output space.  Writing ``M(X) = sum_a v_a X v_a^†`` it equals
  ``(M (x) M∘T)(P)`` with ``P`` the unnormalized maximally entangled projector
  on the input, so it is PSD whenever ``M∘T`` is completely positive.

We store ``-h`` rather than ``h``.  For a product channel
``-h_{Λ⊗Γ} = F23 ((-h_Λ) (x) (-h_Γ)) F23``; the two minus signs cancel, which
is why the joint objective can be written with ``h_Λ (x) h_Γ`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .channel import QuantumChannel, choi_of, tensor_channel

CONSISTENCY_TOL = 1e-9


class ReplicaConsistencyError(RuntimeError):
    """The two independent constructions of a replica operator disagree."""


@dataclass(frozen=True)
class PurityOperator:
    d_in: int
    matrix: np.ndarray

    def expectation(self, rho) -> float:
        rho = np.asarray(rho, dtype=complex)
        return float(np.trace(np.kron(rho, rho) @ self.matrix).real)


@dataclass(frozen=True)
class ReplicaOperator:
    d: int
    matrix: np.ndarray
    flip_product: np.ndarray


@dataclass(frozen=True)
class Theorem2Conditions:
    """Positivity of ``-h`` and of ``(-h) F`` with the eigenvalues behind each verdict."""

    cond_h_positive: bool
    cond_hF_positive: bool
    min_eig_h: float
    min_eig_hF: float

    @property
    def any(self) -> bool:
        return self.cond_h_positive or self.cond_hF_positive


def purity_operator(ch: QuantumChannel) -> PurityOperator:
    v = ch.kraus
    d = ch.dim_in
    t = np.einsum("ami,bmj,bnk,anl->ikjl", v.conj(), v, v.conj(), v, optimize=True)
    k = t.reshape(d * d, d * d) @ linalg.flip_operator(d)
    return PurityOperator(d, k)


def _h_from_kraus(ch: QuantumChannel) -> np.ndarray:
    v = ch.kraus
    d = ch.dim_out
    t = np.einsum("aim,bjm,bkn,aln->ikjl", v, v.conj(), v, v.conj(), optimize=True)
    return t.reshape(d * d, d * d) @ linalg.flip_operator(d)


def _h_from_map(ch: QuantumChannel) -> np.ndarray:
    # (M (x) M∘T)(P) = sum_ij M(E_ij) (x) M(E_ji); M(E_ij) are the Choi blocks.
    din, d = ch.dim_in, ch.dim_out
    blocks = choi_of(ch).matrix.reshape(din, d, din, d).transpose(0, 2, 1, 3)
    return np.einsum("ijmn,jikl->mknl", blocks, blocks).reshape(d * d, d * d)


def _cross_check(a: np.ndarray, b: np.ndarray, what: str) -> None:
    err = linalg.inf_norm(a - b)
    if err > CONSISTENCY_TOL:
        raise ReplicaConsistencyError(f"{what}: constructions differ by {err:.3e}")


def h_operator(ch: QuantumChannel) -> ReplicaOperator:
    """``-h`` for ``ch``, built by the Kraus double sum and by the map route."""
    kraus_route = _h_from_kraus(ch)
    map_route = _h_from_map(ch)
    _cross_check(kraus_route, map_route, "-h operator")
    f = linalg.flip_operator(ch.dim_out)
    return ReplicaOperator(ch.dim_out, kraus_route, kraus_route @ f)


def theorem2_conditions(ch: QuantumChannel) -> Theorem2Conditions:
    op = h_operator(ch)
    lam_h = linalg.min_eigenvalue(op.matrix)
    lam_hf = linalg.min_eigenvalue(op.flip_product)
    return Theorem2Conditions(
        cond_h_positive=lam_h >= -linalg.psd_threshold(op.matrix),
        cond_hF_positive=lam_hf >= -linalg.psd_threshold(op.flip_product),
        min_eig_h=lam_h,
        min_eig_hF=lam_hf,
    )


def flip_23(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Conjugate an operator on ``H (x) H (x) K (x) K`` into ``H (x) K (x) H (x) K``."""
    return linalg.permute_subsystems(m, [d1, d1, d2, d2], [0, 2, 1, 3])


def joint_h_operator(ch1: QuantumChannel, ch2: QuantumChannel) -> np.ndarray:
    """``-h`` of ``ch1 (x) ch2`` on ``H (x) K (x) H (x) K``.

    Built from the product channel's Kraus family and, independently, from the
    single-channel operators via the factor swap; the two must agree.
    """
    direct = h_operator(tensor_channel(ch1, ch2)).matrix
    via_swap = flip_23(np.kron(h_operator(ch1).matrix, h_operator(ch2).matrix), ch1.dim_out, ch2.dim_out)
    _cross_check(direct, via_swap, "joint -h operator")
    return direct
