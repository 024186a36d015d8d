"""Sample-based evidence for the hypotheses behind the derivative formulas.

Whether an eigenprojection keeps a constant dimension, or is continuous, over
a region cannot be decided from finitely many samples.  The reports here
describe what a grid of samples shows, with the grid recorded, and a verdict
of ``supported``, ``refuted`` or ``inconclusive``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_index, check_vector
from .polyfield import PolyMatrixField
from .spectral import ClusterConfig, SpectralDecomposition, decompose

BISECTION_STEPS = 40

SUPPORTED = "supported"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class IndexReport:
    j_star_lo: int
    j_star_hi: int
    d: int
    s_upto_j: int
    s_total: int
    inv_mult_sum: float


def index_report(decomp: SpectralDecomposition, j: int) -> IndexReport:
    """Integer index functions of eigenvalue ``j`` at one point.

    ``j_star_lo``/``j_star_hi`` are the first and last repeated indices equal
    to ``lambda_j``, ``s_upto_j`` counts distinct eigenvalues up to
    ``lambda_j`` and ``inv_mult_sum`` is ``sum_i 1/d_i``, which equals the
    number of distinct eigenvalues.
    """
    idx = decomp.group_index(j)
    g = decomp.groups[idx]
    lo, hi = g.index_range
    inv = sum(1.0 / decomp.group_of(i).multiplicity for i in range(1, decomp.m + 1))
    if abs(inv - decomp.s) > 1e-9:
        raise AssertionError("sum of inverse multiplicities differs from group count")
    return IndexReport(lo, hi, g.multiplicity, idx + 1, decomp.s, inv)


@dataclass(frozen=True)
class Crossing:
    """A grid edge along which the group structure changes.

    ``bracket`` is a pair of points at most ``edge length / 2**40`` apart
    with different ``(s, d_j)`` on either side.
    """

    segment: tuple[np.ndarray, np.ndarray]
    bracket: tuple[np.ndarray, np.ndarray]
    counts: tuple[int, int]


@dataclass(frozen=True)
class ScanReport:
    sample_points: list
    group_counts: list
    dims_of_j: list
    crossings: list
    constant_dim: bool
    min_gap: float
    grid: tuple = ()
    gaps_of_j: list = field(default_factory=list, repr=False)
    decomps: list = field(default_factory=list, repr=False)

    @property
    def constant_s(self) -> bool:
        return len(set(self.group_counts)) <= 1


def _grid_axes(lows, highs, counts):
    axes = []
    for lo, hi, c in zip(lows, highs, counts):
        if lo == hi:
            axes.append(np.array([lo]))
        else:
            axes.append(np.linspace(lo, hi, c))
    return axes


def _check_region(F, region, grid):
    region = np.asarray(region, dtype=float)
    if region.shape != (F.n, 2):
        raise ValueError(f"region must be {F.n} (low, high) pairs")
    if not np.all(np.isfinite(region)) or np.any(region[:, 0] > region[:, 1]):
        raise ValueError("region bounds must be finite with low <= high")
    grid = np.broadcast_to(np.asarray(grid, dtype=int), (F.n,))
    if np.any(grid < 2):
        raise ValueError("grid counts must be at least 2 per axis")
    return region, tuple(int(g) for g in grid)


def _signature(F, x, j, cfg):
    dec = decompose(F(x), cfg)
    return dec.s, dec.group_of(j).multiplicity


def _bisect(F, p, q, j, cfg):
    sp = _signature(F, p, j, cfg)
    a, b = 0.0, 1.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (a + b)
        if _signature(F, p + mid * (q - p), j, cfg) == sp:
            a = mid
        else:
            b = mid
    return p + a * (q - p), p + b * (q - p)


def scan_constant_dimension(F: PolyMatrixField, region, grid, j: int, cfg: ClusterConfig | None = None) -> ScanReport:
    """Decompose ``F`` on a grid over an axis-aligned box and track ``d_j``.

    ``region`` is a sequence of ``(low, high)`` pairs, one per variable;
    an axis with ``low == high`` is sampled once.  Grid edges whose endpoints
    differ in group count or in ``d_j`` are bisected to bracket the change.
    Samples are listed in C order of the grid.
    """
    region, grid = _check_region(F, region, grid)
    j = check_index(j, F.m)
    axes = _grid_axes(region[:, 0], region[:, 1], grid)
    shape = tuple(len(a) for a in axes)
    points, decomps = [], []
    for idx in itertools.product(*(range(s) for s in shape)):
        x = np.array([axes[a][i] for a, i in enumerate(idx)])
        points.append(x)
        decomps.append(decompose(F(x), cfg))
    counts = [d.s for d in decomps]
    dims = [d.group_of(j).multiplicity for d in decomps]
    gaps = [d.group_gap(j) for d in decomps]

    crossings = []
    flat = np.arange(len(points)).reshape(shape)
    for axis in range(len(shape)):
        if shape[axis] < 2:
            continue
        left = np.take(flat, range(shape[axis] - 1), axis=axis).ravel()
        right = np.take(flat, range(1, shape[axis]), axis=axis).ravel()
        for a, b in zip(left, right):
            if (counts[a], dims[a]) != (counts[b], dims[b]):
                p, q = points[a], points[b]
                crossings.append(Crossing((p, q), _bisect(F, p, q, j, cfg), (counts[a], counts[b])))

    return ScanReport(
        sample_points=points,
        group_counts=counts,
        dims_of_j=dims,
        crossings=crossings,
        constant_dim=len(set(dims)) <= 1,
        min_gap=min(gaps, default=math.inf),
        grid=shape,
        gaps_of_j=gaps,
        decomps=decomps,
    )


@dataclass(frozen=True)
class EquivalenceReport:
    """Evidence for continuity of ``P_j`` over a sampled region.

    ``dimension_constant`` and ``max_projection_jump`` speak to constant
    dimension and continuity of the eigenprojection; ``distinct_count_constant``
    to the stronger condition that the number of distinct eigenvalues never
    changes.  ``witness`` is the sample (or edge midpoint) that decided a
    refutation.
    """

    verdict: str
    dimension_constant: bool
    distinct_count_constant: bool
    max_projection_jump: float
    flagged_edges: int
    witness: np.ndarray | None
    reason: str
    scan: ScanReport = field(repr=False)


def check_equivalence_conditions(F: PolyMatrixField, region, grid, j: int, cfg: ClusterConfig | None = None) -> EquivalenceReport:
    """Sample the region and judge whether ``P_j`` looks continuous there.

    Between neighbouring samples ``x, y`` a jump ``||P_j(y) - P_j(x)||`` is
    flagged when it exceeds ``10 * |y - x| * L / gap``, with ``L`` the slope
    ``||H(y) - H(x)|| / |y - x|`` and ``gap`` the smaller group gap of ``j`` at
    the two samples.  A change of ``d_j`` or a flagged jump refutes; a single
    sample is inconclusive.
    """
    scan = scan_constant_dimension(F, region, grid, j, cfg)
    n_samples = len(scan.sample_points)
    s_const = scan.constant_s
    if n_samples < 2:
        return EquivalenceReport(INCONCLUSIVE, True, s_const, 0.0, 0, scan.sample_points[0],
                                 "a single sample says nothing about a neighbourhood", scan)

    shape = scan.grid
    flat = np.arange(n_samples).reshape(shape)
    max_jump, flagged, worst_edge, worst_ratio = 0.0, 0, None, 0.0
    for axis in range(len(shape)):
        if shape[axis] < 2:
            continue
        left = np.take(flat, range(shape[axis] - 1), axis=axis).ravel()
        right = np.take(flat, range(1, shape[axis]), axis=axis).ravel()
        for a, b in zip(left, right):
            da, db = scan.decomps[a], scan.decomps[b]
            jump = float(np.linalg.norm(db.group_of(j).projection - da.group_of(j).projection))
            max_jump = max(max_jump, jump)
            step = float(np.linalg.norm(scan.sample_points[b] - scan.sample_points[a]))
            slope = float(np.linalg.norm(F(scan.sample_points[b]) - F(scan.sample_points[a]))) / step
            gap = min(scan.gaps_of_j[a], scan.gaps_of_j[b])
            bound = 10.0 * step * slope / gap if gap > 0 else math.inf
            if jump > bound:
                flagged += 1
                ratio = jump / bound if bound > 0 else math.inf
                if ratio > worst_ratio:
                    worst_ratio, worst_edge = ratio, (a, b)

    if not scan.constant_dim:
        dims = np.array(scan.dims_of_j)
        # upper semicontinuity: the largest dimension sits at the jump
        witness = scan.sample_points[int(np.argmax(dims))]
        return EquivalenceReport(REFUTED, False, s_const, max_jump, flagged, witness,
                                 f"d_{j} varies over the samples ({sorted(set(scan.dims_of_j))})", scan)
    if flagged:
        a, b = worst_edge
        witness = 0.5 * (scan.sample_points[a] + scan.sample_points[b])
        return EquivalenceReport(REFUTED, True, s_const, max_jump, flagged, witness,
                                 f"P_{j} jumps between neighbouring samples", scan)
    reason = "constant d_j and no projection jumps"
    if s_const:
        reason += "; number of distinct eigenvalues is constant"
    return EquivalenceReport(SUPPORTED, True, s_const, max_jump, 0, None, reason, scan)


def index_sequence(F: PolyMatrixField, points, j: int, cfg: ClusterConfig | None = None) -> list[IndexReport]:
    """Index reports of ``lambda_j`` along a sequence of points."""
    return [index_report(decompose(F(check_vector(x, F.n, "point")), cfg), j) for x in points]
