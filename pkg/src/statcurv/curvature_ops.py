"""Curvature operators on Lambda^2: Riemannian, Lorentzian, and symmetrized.

The operator of a metric h is defined with a minus sign,

    < op(v ^ w), x ^ y >_h = -Rm_h(v, w, x, y),

against the h-induced inner product on Lambda^2,

    < v ^ w, x ^ y >_h = det [[h(v,x), h(v,y)], [h(w,x), h(w,y)]].

In matrix form over an ordered basis of wedge pairs this is M = G^{-1} S
with S[a, b] = -Rm(pair_b; pair_a) and G the Lambda^2 Gram matrix, which is
computed explicitly from the frame's metric Gram (never assumed diagonal):
for a Lorentzian orthonormal frame the mixed pairs (T, X_i) carry Gram -1,
which is what makes the Lorentzian operator generally non-symmetric.

The symmetrized flavor rebuilds the Riemannian operator purely from
Lorentzian data: it substitutes the adapted frame's rotation blocks into the
curvature identity corrections (unit T), which for n = 3 and n = 4
reproduces the explicit matrices with +2f^2 / -6f^2 diagonal corrections and
for general n derives their analogue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameError
from .frames import OrthonormalFrame
from .linalg import invert
from .metric import RiemannTensor, frame_components_batch
from .stationary import StationaryStructure, StructureData, structure_data
from .tolerances import DEFAULT, Tolerances

FLAVORS = ("riemannian", "lorentzian", "symmetrized")


@dataclass(frozen=True)
class Lambda2Basis:
    """Ordered wedge pairs over frame indices, 0 standing for T."""

    dimension: int
    pairs: tuple[tuple[int, int], ...]

    @staticmethod
    def standard(n: int) -> "Lambda2Basis":
        if n < 3:
            raise ValueError("Lambda^2 bases start at dimension 3")
        if n == 3:
            pairs = ((0, 1), (0, 2), (1, 2))
        elif n == 4:
            # four dimensions use the cross-product-style spatial order,
            # including the reversed (3, 1) pair
            pairs = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))
        else:
            pairs = tuple((0, i) for i in range(1, n)) + tuple(
                (i, j) for i in range(1, n) for j in range(i + 1, n)
            )
        return Lambda2Basis(n, pairs)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def labels(self) -> tuple[tuple[str, str], ...]:
        def name(i: int) -> str:
            return "T" if i == 0 else f"X{i}"

        return tuple((name(a), name(b)) for a, b in self.pairs)


@dataclass(frozen=True)
class CurvatureOperatorMatrix:
    basis: Lambda2Basis
    entries: np.ndarray
    flavor: str
    f_values: tuple[float, ...] = ()

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def asymmetry(self) -> float:
        return float(np.abs(self.entries - self.entries.T).max())


def lambda2_gram(basis: Lambda2Basis, frame_gram: np.ndarray) -> np.ndarray:
    """Gram matrix of the wedge basis from the frame's metric Gram (det formula)."""
    iv = np.array([p[0] for p in basis.pairs])
    iw = np.array([p[1] for p in basis.pairs])
    va, vb = iv[:, None], iv[None, :]
    wa, wb = iw[:, None], iw[None, :]
    g = frame_gram
    return g[..., va, vb] * g[..., wa, wb] - g[..., va, wb] * g[..., wa, vb]


def _gather(rm_frame: np.ndarray, basis: Lambda2Basis) -> np.ndarray:
    """S[..., a, b] = -Rm(pair_b; pair_a) from frame components (..., n,n,n,n)."""
    iv = np.array([p[0] for p in basis.pairs])
    iw = np.array([p[1] for p in basis.pairs])
    va, vb = iv[:, None], iv[None, :]
    wa, wb = iw[:, None], iw[None, :]
    return -rm_frame[..., vb, wb, va, wa]


def assemble_operator(
    rm_frame: np.ndarray,
    frame_gram: np.ndarray,
    basis: Lambda2Basis,
    flavor: str,
    f_values: tuple[float, ...] = (),
) -> CurvatureOperatorMatrix:
    """Operator matrix over ``basis`` from frame components of the 4-tensor."""
    s = _gather(rm_frame, basis)
    gram = lambda2_gram(basis, frame_gram)
    entries = invert(gram) @ s
    return CurvatureOperatorMatrix(basis, entries, flavor, f_values)


def _frame_gram(metric: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return vectors @ metric @ vectors.T


def riemannian_curvature_operator(
    s: StationaryStructure,
    frame: OrthonormalFrame,
    tol: Tolerances = DEFAULT,
    basis: Lambda2Basis | None = None,
) -> CurvatureOperatorMatrix:
    """Operator of the flipped Riemannian metric in a g-orthonormal frame."""
    data = structure_data(s, frame.point, tol)
    rm_frame = frame_components_batch(data.rm_g, frame.vectors[None])[0]
    basis = basis or Lambda2Basis.standard(s.dimension)
    gram = _frame_gram(data.g[0], frame.vectors)
    return assemble_operator(rm_frame, gram, basis, "riemannian", frame.f_values)


def lorentzian_curvature_operator(
    s: StationaryStructure,
    frame: OrthonormalFrame,
    tol: Tolerances = DEFAULT,
    basis: Lambda2Basis | None = None,
) -> CurvatureOperatorMatrix:
    """Operator of g_L itself; generally non-symmetric, recorded for comparison."""
    data = structure_data(s, frame.point, tol)
    rm_frame = frame_components_batch(data.rm_l, frame.vectors[None])[0]
    basis = basis or Lambda2Basis.standard(s.dimension)
    gram = _frame_gram(data.gl[0], frame.vectors)
    return assemble_operator(rm_frame, gram, basis, "lorentzian", frame.f_values)


def _rotation_matrix(frame: OrthonormalFrame, n: int) -> np.ndarray:
    """Omega[i, j] = g_L(nab^L_{X_i} T, X_j) implied by the adapted pairing."""
    omega = np.zeros((n, n))
    for p in frame.pairing:
        omega[p.i, p.j] = p.f
        omega[p.j, p.i] = -p.f
    return omega


def synthesize_riemannian_components(rm_l_frame: np.ndarray, frame: OrthonormalFrame) -> np.ndarray:
    """Components of the flipped metric's 4-tensor from Lorentzian data + pairing.

    Applies the curvature identities with unit T: sign flip on every
    component touching T, the -2 f^2 correction on the diagonal (T, X_i)
    block for paired i, and the rotation-block corrections on the purely
    spatial components.
    """
    n = rm_l_frame.shape[0]
    omega = _rotation_matrix(frame, n)
    idx = np.arange(n)
    touch = (
        (idx[:, None, None, None] == 0)
        | (idx[None, :, None, None] == 0)
        | (idx[None, None, :, None] == 0)
        | (idx[None, None, None, :] == 0)
    )
    # spatial corrections; vanish automatically on T-touching entries (row 0 of omega is 0)
    corr = -2.0 * (
        np.einsum("ad,bc->abcd", omega, omega)
        - np.einsum("ac,bd->abcd", omega, omega)
        - 2.0 * np.einsum("ab,cd->abcd", omega, omega)
    )
    synth = np.where(touch, -rm_l_frame, rm_l_frame) + corr
    tt = -2.0 * omega @ omega.T
    synth[0, 1:, 0, 1:] += tt[1:, 1:]
    synth[1:, 0, 1:, 0] += tt[1:, 1:]
    synth[0, 1:, 1:, 0] -= tt[1:, 1:]
    synth[1:, 0, 0, 1:] -= tt[1:, 1:]
    return synth


def symmetrized_matrix(
    rm_l,
    frame: OrthonormalFrame,
    tol: Tolerances = DEFAULT,
    basis: Lambda2Basis | None = None,
) -> CurvatureOperatorMatrix:
    """The symmetric positivity matrix, built from Rm_L plus the f data.

    ``rm_l`` is the Lorentzian 4-tensor in the adapted frame (RiemannTensor
    or raw components).  Symmetric by construction; coincides with the
    Riemannian operator whenever the frame really is adapted.
    """
    comps = rm_l.comps if isinstance(rm_l, RiemannTensor) else np.asarray(rm_l, dtype=float)
    if not frame.is_adapted:
        raise FrameError("symmetrized matrix requires a frame built by adapted_frame")
    if frame.rotation_residual > tol.pairing:
        raise FrameError(
            f"frame not adapted: rotation-block residual {frame.rotation_residual} "
            f"above tolerance {tol.pairing}"
        )
    n = comps.shape[0]
    synth = synthesize_riemannian_components(comps, frame)
    basis = basis or Lambda2Basis.standard(n)
    entries = _gather(synth, basis)
    entries = 0.5 * (entries + entries.T)  # symmetric up to rounding already
    return CurvatureOperatorMatrix(basis, entries, "symmetrized", frame.f_values)


# --- per-point pipeline -------------------------------------------------------

@dataclass(frozen=True)
class PointOperators:
    frame: OrthonormalFrame
    riemannian: CurvatureOperatorMatrix
    lorentzian: CurvatureOperatorMatrix
    symmetrized: CurvatureOperatorMatrix
    central_residual: float

    @property
    def f_values(self) -> tuple[float, ...]:
        return self.frame.f_values


def operators_from_data(
    s: StationaryStructure,
    data: StructureData,
    frames: list[OrthonormalFrame],
    tol: Tolerances = DEFAULT,
) -> list[PointOperators]:
    """Assemble all three operators per point from precomputed batched data."""
    n = s.dimension
    basis = Lambda2Basis.standard(n)
    stack = np.stack([f.vectors for f in frames])
    rml_f = frame_components_batch(data.rm_l, stack)
    rmg_f = frame_components_batch(data.rm_g, stack)
    gram_g = np.einsum("bai,bij,bcj->bac", stack, data.g, stack)
    gram_l = np.einsum("bai,bij,bcj->bac", stack, data.gl, stack)
    s_g = _gather(rmg_f, basis)
    s_l = _gather(rml_f, basis)
    m_r = invert(lambda2_gram(basis, gram_g)) @ s_g
    m_l = invert(lambda2_gram(basis, gram_l)) @ s_l
    out = []
    for b, frame in enumerate(frames):
        sym = symmetrized_matrix(rml_f[b], frame, tol, basis)
        riem = CurvatureOperatorMatrix(basis, m_r[b], "riemannian", frame.f_values)
        lor = CurvatureOperatorMatrix(basis, m_l[b], "lorentzian", frame.f_values)
        central = float(np.abs(sym.entries - riem.entries).max())
        out.append(PointOperators(frame, riem, lor, sym, central))
    return out


def compute_point_operators(
    s: StationaryStructure, point, tol: Tolerances = DEFAULT
) -> PointOperators:
    """Adapted frame plus all three operators at one point."""
    from .frames import adapted_frames_batch

    data = structure_data(s, point, tol)
    frames = adapted_frames_batch(s, data, tol)
    return operators_from_data(s, data, frames, tol)[0]
