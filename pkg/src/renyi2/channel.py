"""Quantum channels in Kraus form, abstract linear maps, and Choi matrices.

Choi convention: unnormalized with the input factor first,
``C = sum_ij E_ij (x) map(E_ij)``, so the identity channel has the
unnormalized maximally entangled projector as its Choi matrix and a
trace-preserving map has ``tr C = dim_in``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np

from . import linalg

TP_TOL = 1e-8
KRAUS_CUTOFF = 1e-10


class ChannelValidationError(ValueError):
    """A Kraus family or channel document does not describe a valid channel."""


class NotCompletelyPositiveError(ValueError):
    """A Choi matrix has a negative eigenvalue beyond the PSD threshold."""


@dataclass(frozen=True)
class LinearMap:
    """Any linear map on ``dim_in x dim_in`` matrices, CP or not."""

    fn: Callable[[np.ndarray], np.ndarray]
    dim_in: int
    dim_out: int
    name: str = "map"

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim_in, self.dim_in):
            raise ValueError(f"{self.name} expects a {self.dim_in}x{self.dim_in} input, got {x.shape}")
        return np.asarray(self.fn(x), dtype=complex)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map ``rho -> sum_a v_a rho v_a^dagger``.

    ``kraus`` is stored stacked with shape ``(n_kraus, dim_out, dim_in)``.
    Trace preservation is enforced at construction.
    """

    kraus: np.ndarray
    name: str = "channel"
    dim_in: int = field(init=False)
    dim_out: int = field(init=False)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] == 0 or k.shape[1] == 0 or k.shape[2] == 0:
            raise ChannelValidationError(f"Kraus family must have shape (n, d_out, d_in), got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ChannelValidationError("Kraus operators have non-finite entries")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)
        object.__setattr__(self, "dim_out", k.shape[1])
        object.__setattr__(self, "dim_in", k.shape[2])
        defect = tp_defect(k)
        if defect > TP_TOL:
            raise ChannelValidationError(f"Kraus family is not trace preserving (defect {defect:.3e})")

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def __repr__(self):
        return f"QuantumChannel({self.name!r}, dim_in={self.dim_in}, dim_out={self.dim_out}, n_kraus={self.n_kraus})"


@dataclass(frozen=True)
class ChoiMatrix:
    dim_in: int
    dim_out: int
    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> np.ndarray:
        return self.matrix / np.trace(self.matrix)


MapLike = Union[QuantumChannel, LinearMap]


def tp_defect(kraus: np.ndarray) -> float:
    """``||sum_a v_a^dagger v_a - I||_inf``."""
    s = np.einsum("aji,ajk->ik", kraus.conj(), kraus)
    return linalg.inf_norm(s - np.eye(kraus.shape[2]))


def apply(ch: QuantumChannel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise ValueError(f"channel expects a {ch.dim_in}x{ch.dim_in} input, got {rho.shape}")
    v = ch.kraus
    return (v @ rho @ v.conj().transpose(0, 2, 1)).sum(axis=0)


def apply_dual(ch: QuantumChannel, x) -> np.ndarray:
    """Heisenberg-picture action ``X -> sum_a v_a^dagger X v_a``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (ch.dim_out, ch.dim_out):
        raise ValueError(f"dual expects a {ch.dim_out}x{ch.dim_out} input, got {x.shape}")
    v = ch.kraus
    return (v.conj().transpose(0, 2, 1) @ x @ v).sum(axis=0)


def dual(ch: QuantumChannel) -> LinearMap:
    """Adjoint w.r.t. the trace inner product; unital, dimensions swapped."""
    return LinearMap(lambda x: apply_dual(ch, x), ch.dim_out, ch.dim_in, name=f"dual({ch.name})")


def as_linear_map(m: MapLike) -> LinearMap:
    if isinstance(m, LinearMap):
        return m
    if isinstance(m, QuantumChannel):
        return LinearMap(lambda x: apply(m, x), m.dim_in, m.dim_out, name=m.name)
    raise TypeError(f"cannot treat {type(m).__name__} as a linear map")


def compose_with_transpose(m: MapLike) -> LinearMap:
    """The map ``rho -> m(rho^T)``; generally not completely positive."""
    lm = as_linear_map(m)
    return LinearMap(lambda x: lm(x.T), lm.dim_in, lm.dim_out, name=f"{lm.name}∘T")


def transpose_map(d: int) -> LinearMap:
    return LinearMap(lambda x: x.T, d, d, name="transpose")


def choi_of(m: MapLike) -> ChoiMatrix:
    """``sum_ij E_ij (x) m(E_ij)`` built by evaluating ``m`` on matrix units."""
    if isinstance(m, QuantumChannel):
        # m(E_ij)[p,q] = sum_a v_a[p,i] conj(v_a[q,j]), all units at once
        v = m.kraus
        mat = np.einsum("api,aqj->ipjq", v, v.conj()).reshape(m.dim_in * m.dim_out, -1)
        return ChoiMatrix(m.dim_in, m.dim_out, mat)
    lm = as_linear_map(m)
    din, dout = lm.dim_in, lm.dim_out
    blocks = np.empty((din, din, dout, dout), dtype=complex)
    unit = np.zeros((din, din), dtype=complex)
    for i in range(din):
        for j in range(din):
            unit[i, j] = 1.0
            blocks[i, j] = lm(unit)
            unit[i, j] = 0.0
    # C[(i,m),(j,n)] = m(E_ij)[m,n]
    mat = blocks.transpose(0, 2, 1, 3).reshape(din * dout, din * dout)
    return ChoiMatrix(din, dout, mat)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    flat = v.ravel()
    k = np.argmax(np.abs(flat) > np.abs(flat).max() * (1 - 1e-9))
    return v * (abs(flat[k]) / flat[k])


def choi_to_kraus(choi: ChoiMatrix, name: str = "channel") -> QuantumChannel:
    """Kraus family from the spectral decomposition of a PSD Choi matrix.

    Components with eigenvalue below ``1e-10 * trace`` are dropped.  Each
    Kraus operator's phase is fixed so its first largest entry is real
    positive, which makes the output deterministic.
    """
    din, dout = choi.dim_in, choi.dim_out
    vals, vecs = linalg.hermitian_eig(choi.matrix)
    thresh = linalg.psd_threshold(choi.matrix)
    if vals[0] < -thresh:
        raise NotCompletelyPositiveError(f"Choi matrix has eigenvalue {vals[0]:.3e}; map is not CP")
    cutoff = KRAUS_CUTOFF * max(abs(choi.trace), 1e-300)
    keep = np.flatnonzero(vals > cutoff)[::-1]
    if keep.size == 0:
        raise NotCompletelyPositiveError("Choi matrix has no component above the Kraus cutoff")
    kraus = np.stack([_fix_phase(np.sqrt(vals[k]) * vecs[:, k].reshape(din, dout).T) for k in keep])
    return QuantumChannel(kraus, name=name)


def is_completely_positive(m: MapLike) -> bool:
    return linalg.is_psd(choi_of(m).matrix)


def is_ppt_inducing(m: MapLike) -> bool:
    """True iff ``m`` and ``m∘T`` are both completely positive.

    Only square maps (``dim_in == dim_out``) are accepted.
    """
    lm = as_linear_map(m)
    if lm.dim_in != lm.dim_out:
        raise ValueError("PPT-inducing test is defined for square channels only")
    return is_completely_positive(lm) and is_completely_positive(compose_with_transpose(lm))


def choi_is_ppt(choi: ChoiMatrix) -> bool:
    """Partial-transpose route: PSD Choi whose output-factor transpose is PSD."""
    pt = linalg.partial_transpose(choi.matrix, choi.dim_in, choi.dim_out, "second")
    return linalg.is_psd(choi.matrix) and linalg.is_psd(pt)


def tensor_channel(ch1: QuantumChannel, ch2: QuantumChannel) -> QuantumChannel:
    kraus = np.einsum("aij,bkl->abikjl", ch1.kraus, ch2.kraus).reshape(
        ch1.n_kraus * ch2.n_kraus, ch1.dim_out * ch2.dim_out, ch1.dim_in * ch2.dim_in
    )
    return QuantumChannel(kraus, name=f"{ch1.name}⊗{ch2.name}")


# ---------------------------------------------------------------- constructors


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel(np.eye(d, dtype=complex)[None], name="identity")


def depolarizing_channel(d: int) -> QuantumChannel:
    """Completely depolarizing channel, Kraus family ``{|i><j| / sqrt(d)}``."""
    kraus = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            kraus[i * d + j, i, j] = 1 / np.sqrt(d)
    return QuantumChannel(kraus, name="depolarizing")


def random_channel(
    d_in: int, rng: np.random.Generator, d_out: int | None = None, n_kraus: int | None = None
) -> QuantumChannel:
    """Random CPTP map from an isometry ``G (G^dagger G)^{-1/2}`` with Ginibre ``G``."""
    d_out = d_in if d_out is None else d_out
    n_kraus = d_in * d_out if n_kraus is None else n_kraus
    if n_kraus * d_out < d_in:
        raise ValueError(f"{n_kraus} Kraus operators of size {d_out}x{d_in} cannot be trace preserving")
    g = rng.standard_normal((n_kraus * d_out, d_in)) + 1j * rng.standard_normal((n_kraus * d_out, d_in))
    vals, vecs = np.linalg.eigh(g.conj().T @ g)
    iso = g @ (vecs * vals**-0.5) @ vecs.conj().T
    return QuantumChannel(iso.reshape(n_kraus, d_out, d_in), name="random")


def random_ppt_channel(d: int, rng: np.random.Generator, margin: float = 0.05) -> QuantumChannel:
    """Random PPT-inducing channel.

    A random channel's Choi matrix is mixed with the completely depolarizing
    Choi ``I/d`` at the smallest weight (found by bisection) making its partial
    transpose PSD, then pushed ``margin`` further toward ``I/d``.  The mixture
    stays trace preserving and CP.
    """
    base = choi_of(random_channel(d, rng)).matrix
    flat = np.eye(d * d, dtype=complex) / d

    def pt_min(t):
        c = (1 - t) * base + t * flat
        return np.linalg.eigvalsh(linalg.partial_transpose(c, d, d))[0]

    lo, hi = 0.0, 1.0
    if pt_min(0.0) >= 0:
        hi = 0.0
    else:
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if pt_min(mid) >= 0 else (mid, hi)
    t = hi + margin * (1 - hi)
    choi = ChoiMatrix(d, d, (1 - t) * base + t * flat)
    return choi_to_kraus(choi, name="random-ppt")


# ---------------------------------------------------------------- JSON format


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _decode_matrix(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ChannelValidationError(f"malformed matrix: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ChannelValidationError("each matrix must be an array of rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_dict(ch: QuantumChannel, name: str | None = None) -> dict:
    doc = {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [_encode_matrix(v) for v in ch.kraus],
    }
    if name is not None:
        doc["name"] = name
    return doc


def channel_from_dict(doc: dict) -> QuantumChannel:
    if not isinstance(doc, dict):
        raise ChannelValidationError("channel document must be a JSON object")
    for key in ("dim_in", "dim_out", "kraus"):
        if key not in doc:
            raise ChannelValidationError(f"missing key {key!r}")
    din, dout = doc["dim_in"], doc["dim_out"]
    if not (isinstance(din, int) and isinstance(dout, int) and din > 0 and dout > 0):
        raise ChannelValidationError("dim_in and dim_out must be positive integers")
    if not isinstance(doc["kraus"], list) or not doc["kraus"]:
        raise ChannelValidationError("kraus must be a non-empty array")
    mats = [_decode_matrix(m) for m in doc["kraus"]]
    for m in mats:
        if m.shape != (dout, din):
            raise ChannelValidationError(f"Kraus operator of shape {m.shape}, expected {(dout, din)}")
    return QuantumChannel(np.stack(mats), name=str(doc.get("name", "channel")))


def load_channel(path) -> QuantumChannel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ChannelValidationError(f"invalid JSON: {exc}") from None
    return channel_from_dict(doc)


def save_channel(ch: QuantumChannel, path, name: str | None = None) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(ch, name)) + "\n")
