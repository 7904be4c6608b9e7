"""The pair (g_L, T): Killing checks, the metric flip, and identity verification.

Given a Lorentzian metric with a timelike Killing field T, the flip

    g = g_L - 2 (T_flat (x) T_flat) / g_L(T,T),        T_flat = g_L(T, .)

produces a Riemannian metric sharing T as a Killing field; applied twice it
returns g_L.  The two Levi-Civita connections and curvature tensors are
related by four connection identities and three curvature identity classes;
``verify_connection_relations`` / ``verify_curvature_relations`` evaluate
both sides of each from independently computed coordinate Christoffels and
Riemann tensors of g and g_L.

Frame-level quantities never require differentiating frame fields: the
identities below only involve connection *differences* (where the frame
derivative cancels), covariant derivatives of T (a genuine vector field with
known jets), and directional derivatives of the scalar g_L(T,T).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonTimelikeError, SpecFormatError
from .expr import Expression, eval_jet_batch
from .linalg import invert
from .metric import (
    KillingField,
    MetricSpec,
    christoffel_batch,
    frame_components_batch,
    metric_batch,
    riemann_batch,
)
from .tolerances import DEFAULT, Tolerances


def flip_spec(spec: MetricSpec, t_exprs) -> MetricSpec:
    """Symbolic metric flip; swaps the declared signature tag."""
    t_exprs = tuple(t_exprs)
    n = spec.dimension
    grid = spec.expression_matrix
    t_flat = [
        sum((grid[i][k] * t_exprs[k] for k in range(n)), Expression.constant(0.0, spec.coords))
        for i in range(n)
    ]
    gtt = sum(
        (t_exprs[i] * t_flat[i] for i in range(n)), Expression.constant(0.0, spec.coords)
    )
    entries = []
    for i in range(n):
        for j in range(i, n):
            e = grid[i][j] - 2.0 * t_flat[i] * t_flat[j] / gtt
            if not e.is_zero():
                entries.append((i, j, e))
    signature = "riemannian" if spec.signature == "lorentzian" else "lorentzian"
    killing = KillingField(t_exprs, spec.killing.unit) if spec.killing else None
    return MetricSpec(spec.coords, spec.intervals, spec.margin, signature, tuple(entries), killing)


@dataclass(frozen=True)
class StationaryStructure:
    """A Lorentzian MetricSpec together with its timelike Killing field."""

    spec: MetricSpec
    t: tuple[Expression, ...]
    unit: bool

    @staticmethod
    def from_spec(spec: MetricSpec) -> "StationaryStructure":
        if spec.signature != "lorentzian":
            raise SpecFormatError("stationary structures require a lorentzian spec")
        if spec.killing is None:
            raise SpecFormatError("spec has no [killing] section")
        return StationaryStructure(spec, spec.killing.components, spec.killing.unit)

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @cached_property
    def counterpart_spec(self) -> MetricSpec:
        """The flipped (Riemannian) metric as composed expressions."""
        return flip_spec(self.spec, self.t)

    @cached_property
    def gtt_expression(self) -> Expression:
        grid = self.spec.expression_matrix
        n = self.dimension
        return sum(
            (grid[i][j] * self.t[i] * self.t[j] for i in range(n) for j in range(n)),
            Expression.constant(0.0, self.spec.coords),
        )


def conformal_normalize(s: StationaryStructure) -> StationaryStructure:
    """Rescale g_L by 1/(-g_L(T,T)) so T becomes unit length."""
    gtt = s.gtt_expression
    entries = []
    for i, j, e in s.spec.entries:
        entries.append((i, j, e / (-gtt)))
    spec = MetricSpec(
        s.spec.coords,
        s.spec.intervals,
        s.spec.margin,
        "lorentzian",
        tuple(entries),
        KillingField(s.t, True),
    )
    return StationaryStructure(spec, s.t, True)


# --- batched geometric data --------------------------------------------------

@dataclass(frozen=True)
class StructureData:
    """Everything the identity checks and operators need, batched over points.

    Index conventions: dg[b,k,i,j] = d_k g_ij; dt[b,i,k] = d_i T^k;
    cov_*[b,k,i] = (nab_{d_i} T)^k; rm_*[b,i,j,k,l] lowered Riemann.
    """

    points: np.ndarray
    gl: np.ndarray
    gl_inv: np.ndarray
    gamma_l: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    gamma_g: np.ndarray
    t: np.ndarray
    dt: np.ndarray
    gtt: np.ndarray
    dgtt: np.ndarray
    cov_t_l: np.ndarray
    cov_t_g: np.ndarray
    rm_l: np.ndarray | None = None
    rm_g: np.ndarray | None = None


def structure_data(
    s: StationaryStructure, pts, tol: Tolerances = DEFAULT, riemann: bool = True
) -> StructureData:
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    batch, n = pts.shape
    cache: dict = {}  # one jet cache for these points, shared across both metrics and T
    gl, gl_inv, dgl, d2gl, _ = metric_batch(s.spec, pts, tol, cache)
    g, g_inv, dg, d2g, _ = metric_batch(s.counterpart_spec, pts, tol, cache)
    t = np.zeros((batch, n))
    dt = np.zeros((batch, n, n))
    for k, expr in enumerate(s.t):
        val, grad, _ = eval_jet_batch(expr, pts, cache)
        t[:, k] = val
        dt[:, :, k] = grad
    gtt = np.einsum("bij,bi,bj->b", gl, t, t)
    if np.any(gtt >= 0.0):
        raise NonTimelikeError("g_L(T,T) >= 0 at a sampled point")
    dgtt = np.einsum("bkij,bi,bj->bk", dgl, t, t) + 2.0 * np.einsum(
        "bij,bki,bj->bk", gl, dt, t
    )
    gamma_l = christoffel_batch(gl_inv, dgl)
    gamma_g = christoffel_batch(g_inv, dg)
    cov_l = dt.transpose(0, 2, 1) + np.einsum("bkim,bm->bki", gamma_l, t)
    cov_g = dt.transpose(0, 2, 1) + np.einsum("bkim,bm->bki", gamma_g, t)
    rm_l = riemann_batch(gl, gl_inv, dgl, d2gl) if riemann else None
    rm_g = riemann_batch(g, g_inv, dg, d2g) if riemann else None
    return StructureData(
        pts, gl, gl_inv, gamma_l, g, g_inv, gamma_g, t, dt, gtt, dgtt, cov_l, cov_g, rm_l, rm_g
    )


# --- pointwise operations ----------------------------------------------------

def killing_defect_batch(s: StationaryStructure, pts, tol: Tolerances = DEFAULT) -> np.ndarray:
    """max_ij |(Lie_T g_L)_ij| per point."""
    pts = np.asarray(pts, dtype=float)
    gl, _, dgl, _, _ = metric_batch(s.spec, pts, tol)
    batch, n = pts.shape
    t = np.zeros((batch, n))
    dt = np.zeros((batch, n, n))
    for k, expr in enumerate(s.t):
        val, grad, _ = eval_jet_batch(expr, pts)
        t[:, k] = val
        dt[:, :, k] = grad
    lie = (
        np.einsum("bk,bkij->bij", t, dgl)
        + np.einsum("bkj,bik->bij", gl, dt)
        + np.einsum("bik,bjk->bij", gl, dt)
    )
    return np.abs(lie).max(axis=(1, 2))


def killing_defect(s: StationaryStructure, point, tol: Tolerances = DEFAULT) -> float:
    return float(killing_defect_batch(s, np.asarray(point, dtype=float)[None, :], tol)[0])


def riemannian_counterpart(s: StationaryStructure, point, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Flipped metric evaluated at one point (positive-definite)."""
    pts = np.asarray(point, dtype=float)[None, :]
    gl, _, _, _, _ = metric_batch(s.spec, pts, tol)
    t = np.array([[float(np.asarray(eval_jet_batch(e, pts)[0])[0]) for e in s.t]])
    gtt = float(np.einsum("bij,bi,bj->b", gl, t, t)[0])
    if gtt >= 0.0:
        raise NonTimelikeError(f"g_L(T,T) = {gtt} is not negative at {pts[0].tolist()}")
    t_flat = np.einsum("bij,bj->bi", gl, t)
    return (gl - 2.0 * np.einsum("bi,bj->bij", t_flat, t_flat) / gtt)[0]


def nabla_t_matrix(s: StationaryStructure, frame, tol: Tolerances = DEFAULT) -> np.ndarray:
    """A with A[j, i] = component of nab^L_{E_i} T along E_j (columns are images)."""
    e = np.asarray(frame.vectors, dtype=float)
    data = structure_data(s, frame.point, tol, riemann=False)
    images = np.einsum("ki,ai->ka", data.cov_t_l[0], e)  # column a = nab_{E_a} T coords
    return invert(e.T) @ images


# --- identity verification ---------------------------------------------------

@dataclass(frozen=True)
class ConnectionReport:
    """Max residual of each of the four connection identities."""

    t_t: float
    x_t: float
    x_x: float
    t_x: float

    def max(self) -> float:
        return max(self.t_t, self.x_t, self.x_x, self.t_x)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.t_t, self.x_t, self.x_x, self.t_x)


@dataclass(frozen=True)
class CurvatureReport:
    """Max residual of the three curvature identity classes."""

    mixed: float
    timelike: float
    spatial: float

    def max(self) -> float:
        return max(self.mixed, self.timelike, self.spatial)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mixed, self.timelike, self.spatial)


def connection_residual_batch(data: StructureData, frames: np.ndarray) -> np.ndarray:
    """Residuals (B, 4) of the connection identities for per-point frames."""
    t = data.t
    x = frames[:, 1:, :]
    dln = np.einsum("bai,bi->ba", x, data.dgtt) / data.gtt[:, None]
    delta = data.gamma_g - data.gamma_l
    u_g = np.einsum("bki,bai->bka", data.cov_t_g, x)
    u_l = np.einsum("bki,bai->bka", data.cov_t_l, x)
    r1 = np.einsum("bki,bi->bk", data.cov_t_g + data.cov_t_l, t)
    r2 = u_g + u_l - t[:, :, None] * dln[:, None, :]
    r3 = np.einsum("bai,bkij,bcj->bkac", x, delta, x)
    r4 = (
        np.einsum("bi,bkij,baj->bka", t, delta, x)
        + 2.0 * u_l
        - t[:, :, None] * dln[:, None, :]
    )
    return np.stack(
        [
            np.abs(r1).max(axis=1),
            np.abs(r2).max(axis=(1, 2)),
            np.abs(r3).max(axis=(1, 2, 3)),
            np.abs(r4).max(axis=(1, 2)),
        ],
        axis=1,
    )


def curvature_residual_batch(data: StructureData, frames: np.ndarray) -> np.ndarray:
    """Residuals (B, 3) of the curvature identity classes for per-point frames."""
    rml = frame_components_batch(data.rm_l, frames)
    rmg = frame_components_batch(data.rm_g, frames)
    x = frames[:, 1:, :]
    u_l = np.einsum("bki,bai->bka", data.cov_t_l, x)  # column a = nab^L_{X_a} T coords
    omega = np.einsum("bka,bkl,bcl->bac", u_l, data.gl, x)
    ip = np.einsum("bka,bkl,blc->bac", u_l, data.gl, u_l)
    sgrad = np.einsum("bai,bi->ba", x, data.dgtt)
    gtt = data.gtt
    res1 = np.abs(rmg[:, 1:, 1:, 0, 1:] + rml[:, 1:, 1:, 0, 1:]).max(axis=(1, 2, 3))
    target = (
        -rml[:, 0, 1:, 0, 1:]
        - 2.0 * ip
        + sgrad[:, :, None] * sgrad[:, None, :] / (2.0 * gtt[:, None, None])
    )
    res2 = np.abs(rmg[:, 0, 1:, 0, 1:] - target).max(axis=(1, 2))
    corr = (2.0 / gtt)[:, None, None, None, None] * (
        np.einsum("bil,bjk->bijkl", omega, omega)
        - np.einsum("bik,bjl->bijkl", omega, omega)
        - 2.0 * np.einsum("bij,bkl->bijkl", omega, omega)
    )
    res3 = np.abs(rmg[:, 1:, 1:, 1:, 1:] - rml[:, 1:, 1:, 1:, 1:] - corr).max(
        axis=(1, 2, 3, 4)
    )
    return np.stack([res1, res2, res3], axis=1)


def verify_connection_relations(
    s: StationaryStructure, frame, tol: Tolerances = DEFAULT
) -> ConnectionReport:
    data = structure_data(s, frame.point, tol, riemann=False)
    res = connection_residual_batch(data, np.asarray(frame.vectors, dtype=float)[None])
    return ConnectionReport(*(float(v) for v in res[0]))


def verify_curvature_relations(
    s: StationaryStructure, frame, tol: Tolerances = DEFAULT
) -> CurvatureReport:
    data = structure_data(s, frame.point, tol)
    res = curvature_residual_batch(data, np.asarray(frame.vectors, dtype=float)[None])
    return CurvatureReport(*(float(v) for v in res[0]))
