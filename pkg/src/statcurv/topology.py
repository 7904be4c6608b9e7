"""k-positivity of curvature-operator spectra and the Betti verdict logic.

A symmetric operator is k-positive when the sum of its k smallest
eigenvalues is strictly positive.  For an n-manifold whose symmetric matrix
is (n-p)-positive at every point, 1 <= p <= floor(n/2):

  * odd n:   b_1 = ... = b_p = 0 and b_{n-p} = ... = b_{n-1} = 0;
  * even n = 2m, p = m: impossible (chi(M) = 0 cannot hold), reported as a
    contradiction between the input and realizability as a closed
    stationary spacetime;
  * even n = 2m, p < m: the same vanishing set, except that in dimensions
    4, 8, 12, ... the case p = m - 1 is also contradictory, while in
    dimensions 6, 10, 14, ... the case p = m - 1 pins the middle Betti
    number to 2 via chi(M) = 0.

A grid verdict is evidence, not proof: positivity is sampled, so every
result carries the minimal margin and its argmin point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature_ops import CurvatureOperatorMatrix, PointOperators, operators_from_data
from .errors import GridPointError, StatcurvError
from .frames import adapted_frames_batch
from .linalg import jacobi_eigh
from .stationary import StationaryStructure, structure_data
from .tolerances import DEFAULT, Tolerances

CHUNK = 2048

REASON_NONE = "no conclusion: positivity is sufficient, not necessary"
REASON_MIDDLE = (
    "no closed stationary Lorentzian manifold can satisfy this: "
    "chi(M) = 0 forces a negative middle Betti number"
)
REASON_PARITY = (
    "input not realizable as a closed stationary spacetime / numerical "
    "hypothesis violated: chi(M) = 0 forces a negative middle Betti number"
)


@dataclass(frozen=True)
class PositivityReport:
    """Ascending eigenvalues with their partial sums and per-k positivity."""

    point: tuple[float, ...]
    eigenvalues: tuple[float, ...]
    partial_sums: tuple[float, ...]
    k_positive: tuple[bool, ...]


@dataclass(frozen=True)
class BettiVerdict:
    dimension: int
    p: int
    holds_everywhere: bool
    vanishing: tuple[int, ...]
    middle_betti: int | None
    contradiction: bool
    reason: str


@dataclass(frozen=True)
class GridScanResult:
    verdict: BettiVerdict
    grid_sizes: tuple[int, ...]
    min_margin: float
    argmin_point: tuple[float, ...]
    max_identity_residual: float
    reports: list[PositivityReport]
    operators: list[PointOperators]


def _symmetric_eigenvalues(matrix, tol: Tolerances) -> np.ndarray:
    if isinstance(matrix, CurvatureOperatorMatrix):
        if matrix.flavor == "lorentzian":
            raise ValueError("k-positivity is undefined for the non-symmetric lorentzian flavor")
        entries = matrix.entries
    else:
        entries = np.asarray(matrix, dtype=float)
    scale = max(1.0, float(np.abs(entries).max(initial=0.0)))
    if float(np.abs(entries - entries.T).max()) > tol.identity * scale:
        raise ValueError("k-positivity requires a symmetric matrix")
    vals, _ = jacobi_eigh(0.5 * (entries + entries.T))
    return vals


def k_positivity(matrix, k: int, tol: Tolerances = DEFAULT) -> tuple[float, bool]:
    """Sum of the k smallest eigenvalues and whether it is strictly positive."""
    vals = _symmetric_eigenvalues(matrix, tol)
    if not 1 <= k <= vals.size:
        raise ValueError(f"k = {k} outside 1..{vals.size}")
    total = float(vals[:k].sum())
    return total, total > tol.positivity


def positivity_report(matrix, point, tol: Tolerances = DEFAULT) -> PositivityReport:
    vals = _symmetric_eigenvalues(matrix, tol)
    sums = np.cumsum(vals)
    return PositivityReport(
        tuple(float(x) for x in np.asarray(point)),
        tuple(float(v) for v in vals),
        tuple(float(v) for v in sums),
        tuple(bool(v > tol.positivity) for v in sums),
    )


def admissible_p(n: int) -> range:
    return range(1, n // 2 + 1)


def betti_conclusions(n: int, p: int, holds_everywhere: bool) -> BettiVerdict:
    """Pure decision logic mapping an (n-p)-positivity scan to conclusions."""
    if n < 3:
        raise ValueError("dimension must be at least 3")
    if p not in admissible_p(n):
        raise ValueError(f"p = {p} outside 1..floor(n/2) = {n // 2}")
    if not holds_everywhere:
        return BettiVerdict(n, p, False, (), None, False, REASON_NONE)
    vanishing = tuple(sorted(set(range(1, p + 1)) | set(range(n - p, n))))
    if n % 2 == 1:
        return BettiVerdict(n, p, True, vanishing, None, False, "")
    m = n // 2
    if p == m:
        return BettiVerdict(n, p, True, (), None, True, REASON_MIDDLE)
    if m % 2 == 0 and p == m - 1:  # dimensions 4, 8, 12, ...
        return BettiVerdict(n, p, True, (), None, True, REASON_PARITY)
    middle = 2 if (m % 2 == 1 and p == m - 1) else None  # dimensions 6, 10, 14, ...
    return BettiVerdict(n, p, True, vanishing, middle, False, "")


def build_grid(spec, sizes) -> tuple[np.ndarray, tuple[int, ...]]:
    """Cartesian interior grid; returns points (B, n) in row-major point order."""
    axes = spec.interior_linspace(sizes)
    shape = tuple(len(a) for a in axes)
    if 0 in shape:
        return np.empty((0, len(axes))), shape
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    return pts, shape


def scan_points(
    s: StationaryStructure, pts: np.ndarray, tol: Tolerances = DEFAULT
) -> list[PointOperators]:
    """Adapted frames and all three operators at each point, in chunks.

    Any failure is re-localized to the offending point and re-raised as
    GridPointError with the coordinates attached.
    """
    out: list[PointOperators] = []
    for start in range(0, pts.shape[0], CHUNK):
        chunk = pts[start : start + CHUNK]
        try:
            data = structure_data(s, chunk, tol)
            frames = adapted_frames_batch(s, data, tol)
            out.extend(operators_from_data(s, data, frames, tol))
        except StatcurvError:
            for row in chunk:  # locate the failing point for the report
                try:
                    data = structure_data(s, row[None, :], tol)
                    frames = adapted_frames_batch(s, data, tol)
                    operators_from_data(s, data, frames, tol)
                except StatcurvError as exc:
                    raise GridPointError(row, exc) from exc
            raise
    return out


def grid_scan(
    s: StationaryStructure, grid_sizes, p: int, tol: Tolerances = DEFAULT
) -> GridScanResult:
    """Adapted frame -> symmetrized matrix -> (n-p)-positivity over a grid."""
    n = s.dimension
    if p not in admissible_p(n):
        raise ValueError(f"p = {p} outside 1..floor(n/2) = {n // 2}")
    pts, shape = build_grid(s.spec, grid_sizes)
    if pts.shape[0] == 0:
        raise ValueError("empty grid")
    ops = scan_points(s, pts, tol)
    k = n - p
    sym = np.stack([op.symmetrized.entries for op in ops])
    vals, _ = jacobi_eigh(sym)
    sums = np.cumsum(vals, axis=1)
    margins = sums[:, k - 1]
    argmin = int(np.argmin(margins))
    min_margin = float(margins[argmin]) + 0.0  # folds -0.0 into 0.0
    reports = [
        PositivityReport(
            tuple(float(x) for x in pts[b]),
            tuple(float(v) for v in vals[b]),
            tuple(float(v) for v in sums[b]),
            tuple(bool(v > tol.positivity) for v in sums[b]),
        )
        for b in range(pts.shape[0])
    ]
    holds = bool(min_margin > tol.positivity)
    verdict = betti_conclusions(n, p, holds)
    return GridScanResult(
        verdict=verdict,
        grid_sizes=shape,
        min_margin=min_margin,
        argmin_point=tuple(float(x) for x in pts[argmin]),
        max_identity_residual=max(op.central_residual for op in ops),
        reports=reports,
        operators=ops,
    )


def margin_quantiles(result: GridScanResult) -> dict[str, list[float]]:
    """Grid quantiles (min/quartiles/max) of the margin and extreme eigenvalues."""
    k = result.verdict.dimension - result.verdict.p
    margins = np.array([r.partial_sums[k - 1] for r in result.reports])
    smallest = np.array([r.eigenvalues[0] for r in result.reports])
    largest = np.array([r.eigenvalues[-1] for r in result.reports])
    qs = (0.0, 0.25, 0.5, 0.75, 1.0)
    return {
        "margin": [float(np.quantile(margins, q)) for q in qs],
        "smallest_eigenvalue": [float(np.quantile(smallest, q)) for q in qs],
        "largest_eigenvalue": [float(np.quantile(largest, q)) for q in qs],
    }


def verdict_json_dict(result: GridScanResult) -> dict:
    """The documented JSON verdict schema (version 1)."""
    v = result.verdict
    return {
        "schema_version": 1,
        "dimension": v.dimension,
        "p": v.p,
        "N": result.operators[0].symmetrized.size if result.operators else 0,
        "grid": list(result.grid_sizes),
        "min_margin": result.min_margin,
        "argmin_point": list(result.argmin_point),
        "holds_everywhere": v.holds_everywhere,
        "vanishing_betti": list(v.vanishing),
        "middle_betti": v.middle_betti,
        "contradiction": v.contradiction,
        "reason": v.reason,
        "max_identity_residual": result.max_identity_residual,
        "eigenvalue_quantiles": margin_quantiles(result),
        "sampling_caveat": "grid verdicts are evidence, not proof, of pointwise positivity",
    }
