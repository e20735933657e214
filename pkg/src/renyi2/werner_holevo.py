"""Generalized Werner-Holevo maps ``rho -> a rho + b rho^T + (1-a-b) tr(rho) I/d``.

Every inequality below is written as ``g(a, b) >= 0``:

====  ==========================================
cp1   ``a (d^2-1) + b (d-1) + 1``
cp2   ``b (d-1) - a + 1``
cp3   ``1 - a - b (d+1)``
ppt1  ``b (d^2-1) + a (d-1) + 1``
ppt2  ``a (d-1) - b + 1``
ppt3  ``1 - b - a (d+1)``
====  ==========================================

They are the eigenvalue conditions of the Choi matrix
``a P + b F + (1-a-b)/d I`` (resp. its partial transpose, which swaps
``a`` and ``b``) on the span of the maximally entangled vector and on the
symmetric / antisymmetric complements.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg
from .channel import (
    ChoiMatrix,
    LinearMap,
    QuantumChannel,
    choi_of,
    choi_to_kraus,
)
from .replica import theorem2_conditions

BOUNDARY_BAND = 1e-7
# Slack for exact-arithmetic boundary points (e.g. polytope vertices) evaluated in floats.
INEQ_ATOL = 1e-12
REALIGNMENT_TOL = 1e-9
CLOSED_FORM_TOL = 1e-10


class DegeneratePolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class WHParams:
    a: float
    b: float
    d: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("a and b must be finite")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError("d must be an integer >= 2")

    def swapped(self) -> "WHParams":
        return WHParams(self.b, self.a, self.d)


@dataclass(frozen=True)
class RegionClassification:
    """One grid point; ``cond_h``/``cond_hF`` are ``None`` outside the CP region."""

    a: float
    b: float
    d: int
    is_cp: bool
    is_ppt: bool
    cond_h: bool | None
    cond_hF: bool | None
    boundary: bool


def wh_apply(p: WHParams, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (p.d, p.d):
        raise ValueError(f"expected a {p.d}x{p.d} input, got {rho.shape}")
    return p.a * rho + p.b * rho.T + (1 - p.a - p.b) * np.trace(rho) * np.eye(p.d) / p.d


def wh_map(p: WHParams) -> LinearMap:
    return LinearMap(lambda x: wh_apply(p, x), p.d, p.d, name=f"WH({p.a:g},{p.b:g},{p.d})")


def wh_channel(p: WHParams) -> QuantumChannel:
    """Kraus form, derived from the Choi matrix; raises for non-CP parameters."""
    if not wh_is_cp(p):
        raise ValueError(f"WH parameters {p} are not completely positive")
    return choi_to_kraus(choi_of(wh_map(p)), name=f"WH({p.a:g},{p.b:g},{p.d})")


def _lines(d: int) -> dict[str, tuple[float, float, float]]:
    # name -> (coef_a, coef_b, const) of g = coef_a * a + coef_b * b + const
    return {
        "cp1": (d * d - 1.0, d - 1.0, 1.0),
        "cp2": (-1.0, d - 1.0, 1.0),
        "cp3": (-1.0, -(d + 1.0), 1.0),
        "ppt1": (d - 1.0, d * d - 1.0, 1.0),
        "ppt2": (d - 1.0, -1.0, 1.0),
        "ppt3": (-(d + 1.0), -1.0, 1.0),
    }


def constraint_values(p: WHParams) -> dict[str, float]:
    return {k: ca * p.a + cb * p.b + c for k, (ca, cb, c) in _lines(p.d).items()}


def wh_is_cp(p: WHParams) -> bool:
    g = constraint_values(p)
    return all(g[k] >= -INEQ_ATOL for k in ("cp1", "cp2", "cp3"))


def wh_is_ppt(p: WHParams) -> bool:
    """PPT-inducing: completely positive and the transposed map is too."""
    g = constraint_values(p)
    return wh_is_cp(p) and all(g[k] >= -INEQ_ATOL for k in ("ppt1", "ppt2", "ppt3"))


def boundary_distance(p: WHParams) -> float:
    """Euclidean distance in the (a, b) plane to the nearest of the six lines."""
    return min(
        abs(ca * p.a + cb * p.b + c) / np.hypot(ca, cb) for ca, cb, c in _lines(p.d).values()
    )


def purity_branches(p: WHParams) -> tuple[float, float]:
    """The ``ab >= 0`` and ``ab <= 0`` closed forms, in that order."""
    a, b, d = p.a, p.b, p.d
    same_sign = (1 + (d - 1) * (a + b) ** 2) / d
    opposite_sign = (d * (a * a + b * b) - (a + b) ** 2 + 1) / d
    return same_sign, opposite_sign


def wh_max_purity(p: WHParams) -> float:
    """Maximal output purity over pure inputs (CP parameters only).

    For ``ab >= 0`` the optimum is a real input (``rho^T = rho``); for
    ``ab <= 0`` it is an input orthogonal to its complex conjugate.
    """
    if not wh_is_cp(p):
        raise ValueError(f"WH parameters {p} are not completely positive")
    same, opposite = purity_branches(p)
    prod = p.a * p.b
    if prod == 0:
        if abs(same - opposite) > 1e-12:
            raise AssertionError(f"purity branches disagree on the axis: {same} vs {opposite}")
        return same
    return same if prod > 0 else opposite


def classify(p: WHParams) -> RegionClassification:
    cp = wh_is_cp(p)
    ppt = wh_is_ppt(p)
    cond_h = cond_hf = None
    if cp:
        cond = theorem2_conditions(wh_channel(p))
        cond_h, cond_hf = cond.cond_h_positive, cond.cond_hF_positive
    return RegionClassification(
        a=p.a,
        b=p.b,
        d=p.d,
        is_cp=cp,
        is_ppt=ppt,
        cond_h=cond_h,
        cond_hF=cond_hf,
        boundary=boundary_distance(p) < BOUNDARY_BAND,
    )


def grid_axis(step: float, box: tuple[float, float] = (-1.05, 1.05)) -> np.ndarray:
    lo, hi = box
    if step <= 0 or hi <= lo:
        raise ValueError("grid step must be positive and the box non-empty")
    n = int(round((hi - lo) / step)) + 1
    # round away representation noise so grid values print cleanly and hit the axes
    return np.round(np.linspace(lo, hi, n), 12)


def _classify_chunk(args):
    d, points = args
    return [classify(WHParams(a, b, d)) for a, b in points]


def region_scan(
    d: int,
    step: float = 0.01,
    box: tuple[float, float] = (-1.05, 1.05),
    workers: int = 1,
) -> list[RegionClassification]:
    """Classify every point of a square (a, b) grid; rows sorted by (a, b)."""
    axis = grid_axis(step, box)
    points = [(float(a), float(b)) for a in axis for b in axis]
    if workers <= 1:
        rows = _classify_chunk((d, points))
    else:
        chunks = [(d, points[i::workers]) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [r for part in pool.map(_classify_chunk, chunks) for r in part]
    rows.sort(key=lambda r: (r.a, r.b))
    return rows


def ppt_polytope_vertices(d: int) -> list[tuple[float, float]]:
    """Corners of the PPT-inducing region, counter-clockwise.

    Intersects the six boundary lines pairwise and keeps the feasible points.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    lines = list(_lines(d).values())
    found: list[tuple[float, float]] = []
    for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(lines, 2):
        det = a1 * b2 - a2 * b1
        if abs(det) < 1e-14:
            continue
        a = (-c1 * b2 + c2 * b1) / det
        b = (-a1 * c2 + a2 * c1) / det
        if all(ca * a + cb * b + c >= -1e-10 for ca, cb, c in lines):
            if not any(abs(a - x) < 1e-9 and abs(b - y) < 1e-9 for x, y in found):
                found.append((a, b))
    if len(found) != 4:
        raise DegeneratePolytopeError(f"expected 4 vertices at d={d}, found {len(found)}")
    ca = sum(x for x, _ in found) / 4
    cb = sum(y for _, y in found) / 4
    found.sort(key=lambda v: np.arctan2(v[1] - cb, v[0] - ca))
    return found


def extremal_params(d: int) -> WHParams:
    """The corner of the PPT-inducing region on the cp1 and cp3 lines."""
    return WHParams(-2.0 / (d * (d + 1) - 2), d / (d * d + d - 2.0), d)


@dataclass(frozen=True)
class ExtremalChoiReport:
    params: WHParams
    choi: ChoiMatrix
    residual_normalized: float
    residual_unnormalized: float

    @property
    def match(self) -> str:
        """Which reading of the projector in the closed form reproduces ``choi``."""
        norm_ok = self.residual_normalized <= CLOSED_FORM_TOL
        unnorm_ok = self.residual_unnormalized <= CLOSED_FORM_TOL
        return {(True, False): "normalized", (False, True): "unnormalized", (True, True): "both"}.get(
            (norm_ok, unnorm_ok), "none"
        )


def extremal_closed_form(d: int, normalized: bool) -> np.ndarray:
    """``2d/(d^2+d-2) * ((I + F)/2 - P)`` with ``P`` of trace 1 or trace ``d``."""
    eye = np.eye(d * d)
    f = linalg.flip_operator(d)
    proj = linalg.max_entangled_projector(d, normalized=normalized)
    return 2 * d / (d * d + d - 2) * ((eye + f) / 2 - proj)


def extremal_choi(d: int) -> ExtremalChoiReport:
    """Choi matrix at the extremal corner, from matrix units, plus closed-form residuals."""
    p = extremal_params(d)
    choi = choi_of(wh_map(p))
    return ExtremalChoiReport(
        params=p,
        choi=choi,
        residual_normalized=linalg.inf_norm(choi.matrix - extremal_closed_form(d, True)),
        residual_unnormalized=linalg.inf_norm(choi.matrix - extremal_closed_form(d, False)),
    )


@dataclass(frozen=True)
class RealignmentResult:
    detected: bool
    realignment_sum: float


def realignment_entanglement_check(choi: ChoiMatrix | np.ndarray, dims: tuple[int, int] | None = None) -> RealignmentResult:
    """Computable cross-norm test on the trace-normalized matrix.

    ``detected`` certifies entanglement; a negative result is inconclusive.
    """
    if isinstance(choi, ChoiMatrix):
        m, (da, db) = choi.matrix, (choi.dim_in, choi.dim_out)
    else:
        m = np.asarray(choi, dtype=complex)
        if dims is None:
            raise ValueError("dims are required for a bare matrix")
        da, db = dims
    m = m / np.trace(m)
    total = float(np.sum(linalg.singular_values(linalg.realign(m, da, db))))
    return RealignmentResult(total > 1 + REALIGNMENT_TOL, total)
