"""Independent brute-force oracles backing derived test values.

These exist only for tests; production code paths never import this module.
"""

from __future__ import annotations

import numpy as np

from .expr import Expression, eval_values
from .linalg import invert
from .metric import MetricSpec, RiemannTensor, christoffel_batch


def fd_gradient_hessian(e: Expression, point, step: float = 1e-4):
    """Central finite differences of an expression at one point."""
    point = np.asarray(point, dtype=float)
    n = point.size

    def value(p):
        return float(eval_values(e, p[None, :])[0])

    grad = np.zeros(n)
    hess = np.zeros((n, n))
    f0 = value(point)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        fp, fm = value(point + ei), value(point - ei)
        grad[i] = (fp - fm) / (2 * step)
        hess[i, i] = (fp - 2 * f0 + fm) / step**2
    for i in range(n):
        for j in range(i + 1, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = step
            ej[j] = step
            mixed = (
                value(point + ei + ej)
                - value(point + ei - ej)
                - value(point - ei + ej)
                + value(point - ei - ej)
            ) / (4 * step**2)
            hess[i, j] = hess[j, i] = mixed
    return f0, grad, hess


def _metric_values(spec: MetricSpec, pts: np.ndarray) -> np.ndarray:
    n = spec.dimension
    cache: dict = {}
    g = np.zeros((pts.shape[0], n, n))
    for i, j, expr in spec.entries:
        val = eval_values(expr, pts, cache)
        g[:, i, j] = val
        if i != j:
            g[:, j, i] = val
    return g


def fd_metric_derivative(spec: MetricSpec, pts, step: float = 1e-4) -> np.ndarray:
    """dg[b,k,i,j] = d_k g_ij by central differences, batched."""
    pts = np.asarray(pts, dtype=float)
    batch, n = pts.shape
    shifted = np.repeat(pts[:, None, None, :], n, axis=1).repeat(2, axis=2)
    for k in range(n):
        shifted[:, k, 0, k] += step
        shifted[:, k, 1, k] -= step
    g = _metric_values(spec, shifted.reshape(-1, n)).reshape(batch, n, 2, n, n)
    return (g[:, :, 0] - g[:, :, 1]) / (2 * step)


def fd_christoffel_oracle(spec: MetricSpec, point, step: float = 1e-4) -> np.ndarray:
    """Christoffel symbols from finite-differenced metric derivatives."""
    point = np.asarray(point, dtype=float)
    dg = fd_metric_derivative(spec, point[None, :], step)
    g = _metric_values(spec, point[None, :])
    return christoffel_batch(invert(g), dg)[0]


def constant_curvature_oracle(n: int, kappa: float, frame=None) -> RiemannTensor:
    """Reference tensor of constant sectional curvature kappa in an orthonormal frame.

    With the sign convention used throughout (endomorphism R(X,Y)Z =
    nab_X nab_Y Z - nab_Y nab_X Z - nab_[X,Y] Z) this is
    Rm_abcd = kappa * (g_ad g_bc - g_ac g_bd), so Rm_1212 = -kappa and the
    curvature operator comes out as +kappa * identity.
    """
    delta = np.eye(n)
    comps = kappa * (
        np.einsum("ad,bc->abcd", delta, delta) - np.einsum("ac,bd->abcd", delta, delta)
    )
    point = np.zeros(n) if frame is None else np.asarray(getattr(frame, "point", frame), dtype=float)
    return RiemannTensor(point, "orthonormal", comps)
