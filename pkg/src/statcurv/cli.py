"""Command-line interface: verify, analyze, export, examples.

Exit codes: 0 success (a conclusive verdict counts), 1 the analysis ran but
positivity failed so no conclusion follows, 2 input error (files, formats,
arguments), 3 numerical invariant failure.

All reports are deterministic: fixed-width text with stable ordering, JSON
with sorted keys and repr floats, grid points enumerated in row-major order.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import topology
from .curvature_ops import operators_from_data
from .errors import (
    EvalDomainError,
    ExprSyntaxError,
    SpecFormatError,
    StatcurvError,
    UnknownIdentifierError,
)
from .frames import adapted_frames_batch, orthonormal_completion
from .generators import FAMILIES, GeneratorRecipe, generate, write_example_specs
from .linalg import jacobi_eigh
from .metric import load_spec_file
from .stationary import (
    StationaryStructure,
    conformal_normalize,
    connection_residual_batch,
    curvature_residual_batch,
    structure_data,
)
from .tolerances import DEFAULT, Tolerances

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_INPUT_ERRORS = (SpecFormatError, ExprSyntaxError, UnknownIdentifierError, OSError, ValueError)


@dataclass(frozen=True)
class RunConfig:
    spec_path: str
    command: str
    grid: tuple[int, ...] | int
    p: int | None
    all_p: bool
    tol_scale: float
    fmt: str
    out: str | None

    def tolerances(self) -> Tolerances:
        return DEFAULT.scaled(self.tol_scale)


def _parse_grid(text: str, dimension: int, minimum: int) -> list[int]:
    parts = [p.strip() for p in text.split(",")]
    sizes = [int(p) for p in parts]
    if len(sizes) == 1:
        sizes = sizes * dimension
    if len(sizes) != dimension:
        raise ValueError(f"--grid needs 1 or {dimension} sizes, got {len(sizes)}")
    if any(m < minimum for m in sizes):
        raise ValueError(f"grid sizes must be >= {minimum} per coordinate")
    return sizes


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_structure(path: str) -> StationaryStructure:
    return StationaryStructure.from_spec(load_spec_file(path))


def _normalized(structure: StationaryStructure, notes: list[str]) -> StationaryStructure:
    if structure.unit:
        return structure
    notes.append(
        "notice: T is not declared unit; analyzing the conformally normalized "
        "metric g_L / (-g_L(T,T)) (curvature changes under rescaling)"
    )
    return conformal_normalize(structure)


def _betti_text(verdict: topology.BettiVerdict) -> str:
    if verdict.contradiction:
        return f"contradiction: {verdict.reason}"
    if not verdict.holds_everywhere:
        return "no conclusion"
    parts = "=".join(f"b{i}" for i in verdict.vanishing) + "=0"
    if verdict.middle_betti is not None:
        parts += f", b{verdict.dimension // 2}={verdict.middle_betti}"
    return parts


# --- verify -------------------------------------------------------------------

_VERIFY_LINES = (
    ("connection nabla_T_T", "pairing"),
    ("connection nabla_X_T", "pairing"),
    ("connection nabla_X_X", "pairing"),
    ("connection nabla_T_X", "pairing"),
    ("curvature  mixed", "oracle"),
    ("curvature  timelike", "oracle"),
    ("curvature  spatial", "oracle"),
    ("frame      rotation_blocks", "pairing"),
    ("frame      eigen_nonpositive", "eigen_nonpositive"),
    ("operator   central_identity", "pairing"),
)


def cmd_verify(config: RunConfig) -> int:
    tol = config.tolerances()
    structure = _load_structure(config.spec_path)
    pts, shape = topology.build_grid(structure.spec, config.grid)
    if pts.shape[0] == 0:
        raise ValueError("empty grid")
    maxima = np.zeros(10)
    argmax = [tuple(pts[0])] * 10

    def record(idx, values, chunk):
        b = int(np.argmax(values))
        if values[b] > maxima[idx]:
            maxima[idx] = float(values[b])
            argmax[idx] = tuple(float(x) for x in chunk[b])

    notes: list[str] = []
    unit_structure = _normalized(structure, notes)
    for start in range(0, pts.shape[0], topology.CHUNK):
        chunk = pts[start : start + topology.CHUNK]
        data = structure_data(structure, chunk, tol)
        frames = np.stack(
            [
                orthonormal_completion(
                    structure, chunk[b], tol, require_unit=False, _data=data, _row=b
                ).vectors
                for b in range(chunk.shape[0])
            ]
        )
        conn = connection_residual_batch(data, frames)
        curv = curvature_residual_batch(data, frames)
        for i in range(4):
            record(i, conn[:, i], chunk)
        for i in range(3):
            record(4 + i, curv[:, i], chunk)
        if unit_structure is structure:
            data_u, chunk_u = data, chunk
        else:
            data_u, chunk_u = structure_data(unit_structure, chunk, tol), chunk
        adapted = adapted_frames_batch(unit_structure, data_u, tol)
        record(7, np.array([f.rotation_residual for f in adapted]), chunk_u)
        record(
            8,
            np.array([max(0.0, max(f.nabla_sq_eigenvalues)) for f in adapted]),
            chunk_u,
        )
        ops = operators_from_data(unit_structure, data_u, adapted, tol)
        record(9, np.array([o.central_residual for o in ops]), chunk_u)

    lines = [f"statcurv verify: {config.spec_path}"]
    lines += notes
    lines.append(f"grid: {'x'.join(str(m) for m in shape)}")
    ok = True
    rows = []
    for idx, (name, tol_field) in enumerate(_VERIFY_LINES):
        bound = getattr(tol, tol_field)
        passed = bool(maxima[idx] <= bound)
        ok = ok and passed
        status = "PASS" if passed else "FAIL"
        rows.append(
            {
                "identity": name.split()[0] + "_" + name.split()[-1],
                "max_residual": float(maxima[idx]),
                "tolerance": bound,
                "argmax_point": list(argmax[idx]),
                "status": status,
            }
        )
        lines.append(
            f"{name:<30} max residual {maxima[idx]:.3e}  tol {bound:.1e}  {status}"
            + ("" if passed else f"  at {list(argmax[idx])}")
        )
    lines.append("all identities verified" if ok else "VERIFICATION FAILED")
    if config.fmt == "json":
        payload = {
            "schema_version": 1,
            "command": "verify",
            "grid": list(shape),
            "identities": rows,
            "passed": ok,
            "notes": notes,
        }
        _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", config.out)
    else:
        _emit("\n".join(lines) + "\n", config.out)
    return EXIT_OK if ok else EXIT_NUMERICAL


# --- analyze ------------------------------------------------------------------

def _analyze_one(structure, grid, p, tol):
    result = topology.grid_scan(structure, grid, p, tol)
    return result


def _strongest(results: list[topology.GridScanResult]) -> topology.GridScanResult:
    # contradictions are conclusive; otherwise the largest vanishing set wins
    contradictions = [r for r in results if r.verdict.contradiction]
    if contradictions:
        return contradictions[-1]
    conclusive = [r for r in results if r.verdict.holds_everywhere]
    if conclusive:
        return max(conclusive, key=lambda r: (len(r.verdict.vanishing), r.verdict.p))
    return results[0]


def cmd_analyze(config: RunConfig) -> int:
    tol = config.tolerances()
    notes: list[str] = []
    structure = _normalized(_load_structure(config.spec_path), notes)
    n = structure.dimension
    ps = list(topology.admissible_p(n)) if config.all_p else [config.p]
    results = [_analyze_one(structure, config.grid, p, tol) for p in ps]
    strongest = _strongest(results)

    if config.fmt == "json":
        payload = {
            "schema_version": 1,
            "command": "analyze",
            "spec": config.spec_path,
            "notes": notes,
            "results": [topology.verdict_json_dict(r) for r in results],
            "strongest": topology.verdict_json_dict(strongest),
        }
        _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", config.out)
    else:
        lines = [f"statcurv analyze: {config.spec_path}"]
        lines += notes
        for r in results:
            v = r.verdict
            k = v.dimension - v.p
            lines.append(
                f"p={v.p} (k={k}): "
                + (
                    f"{k}-positive everywhere (margin {r.min_margin:.6f} at "
                    f"{[round(x, 6) for x in r.argmin_point]}); {_betti_text(v)}"
                    if v.holds_everywhere
                    else f"not {k}-positive (margin {r.min_margin:.6f}); no conclusion"
                )
            )
        if config.all_p:
            lines.append(f"strongest verdict: p={strongest.verdict.p}: {_betti_text(strongest.verdict)}")
        quantiles = topology.margin_quantiles(strongest)
        lines.append(
            "eigenvalue summary over the grid (min/q1/median/q3/max):"
        )
        for name, values in quantiles.items():
            lines.append(f"  {name:<21} " + "  ".join(f"{v: .6f}" for v in values))
        lines.append(
            f"max central-identity residual: {max(r.max_identity_residual for r in results):.3e}"
        )
        lines.append("note: grid verdicts are evidence, not proof, of pointwise positivity")
        _emit("\n".join(lines) + "\n", config.out)
    conclusive = strongest.verdict.holds_everywhere
    return EXIT_OK if conclusive else EXIT_NEGATIVE


# --- export -------------------------------------------------------------------

def cmd_export(config: RunConfig) -> int:
    tol = config.tolerances()
    notes: list[str] = []
    structure = _normalized(_load_structure(config.spec_path), notes)
    for note in notes:
        sys.stderr.write(note + "\n")
    pts, _ = topology.build_grid(structure.spec, config.grid)
    lines = []
    if pts.shape[0]:
        ops = topology.scan_points(structure, pts, tol)
        labels = [list(pair) for pair in ops[0].symmetrized.basis.labels()]
        sym_stack = np.stack([op.symmetrized.entries for op in ops])
        eigen_stack, _ = jacobi_eigh(0.5 * (sym_stack + sym_stack.swapaxes(1, 2)))
        for b, op in enumerate(ops):
            vals = eigen_stack[b]
            record = {
                "schema_version": 1,
                "point": [float(x) for x in op.frame.point],
                "basis": labels,
                "f_values": [float(f) for f in op.f_values],
                "riemannian": op.riemannian.entries.tolist(),
                "lorentzian": op.lorentzian.entries.tolist(),
                "symmetrized": op.symmetrized.entries.tolist(),
                "eigenvalues": [float(v) for v in vals],
                "lorentzian_asymmetry": op.lorentzian.asymmetry(),
                "central_residual": op.central_residual,
            }
            lines.append(json.dumps(record, sort_keys=True))
    _emit("".join(line + "\n" for line in lines), config.out)
    return EXIT_OK


# --- examples -----------------------------------------------------------------

def cmd_examples(args) -> int:
    if args.random:
        if args.seed is None:
            raise ValueError("--random requires --seed")
        recipe = GeneratorRecipe(
            seed=args.seed,
            dimension=args.dimension,
            family=args.family,
            flat_dims=args.flat_dims,
        )
        structure = generate(recipe)
        text = structure.spec.to_text()
        out = args.out or f"random_seed{args.seed}.spec"
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        sys.stdout.write(out + "\n")
        return EXIT_OK
    paths = write_example_specs(args.dir)
    for path in paths:
        sys.stdout.write(str(path) + "\n")
    return EXIT_OK


# --- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statcurv",
        description="Curvature operators and Betti obstructions for stationary Lorentzian metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_default="8"):
        p.add_argument("spec", help="metric spec file")
        p.add_argument("--grid", default=grid_default, help="points per coordinate (int or comma list)")
        p.add_argument("--tol-scale", type=float, default=1.0, help="scale all tolerances")
        p.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")

    common(sub.add_parser("verify", help="verify the connection/curvature identities on a grid"))
    pa = sub.add_parser("analyze", help="positivity scan and Betti verdict")
    common(pa)
    group = pa.add_mutually_exclusive_group(required=True)
    group.add_argument("--p", type=int, default=None, help="test (n-p)-positivity")
    group.add_argument("--all-p", action="store_true", help="scan every admissible p")
    pe = sub.add_parser("export", help="per-point matrices, eigenvalues, f-values as JSON lines")
    common(pe)
    px = sub.add_parser("examples", help="write example spec files")
    px.add_argument("--dir", default="specs", help="directory for the shipped examples")
    px.add_argument("--random", action="store_true", help="generate a random structure instead")
    px.add_argument("--seed", type=int, default=None)
    px.add_argument("--dimension", type=int, default=3)
    px.add_argument("--family", choices=FAMILIES, default="warped-rotational")
    px.add_argument("--flat-dims", type=int, default=0)
    px.add_argument("--out", default=None, help="output path for the random spec")
    return parser


def _config_from(args, minimum_grid: int) -> RunConfig:
    spec = load_spec_file(args.spec)
    if not (1e-2 <= args.tol_scale <= 1e2):
        raise ValueError("--tol-scale must lie in [1e-2, 1e2]")
    grid = tuple(_parse_grid(args.grid, spec.dimension, minimum_grid))
    p = getattr(args, "p", None)
    all_p = bool(getattr(args, "all_p", False))
    if args.command == "analyze" and not all_p and p is not None:
        if p not in topology.admissible_p(spec.dimension):
            raise ValueError(f"p = {p} outside 1..{spec.dimension // 2}")
    return RunConfig(args.spec, args.command, grid, p, all_p, args.tol_scale, args.fmt, args.out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "examples":
            return cmd_examples(args)
        config = _config_from(args, minimum_grid=0 if args.command == "export" else 2)
        if args.command == "verify":
            return cmd_verify(config)
        if args.command == "analyze":
            return cmd_analyze(config)
        if args.command == "export":
            return cmd_export(config)
        raise AssertionError(args.command)
    except _INPUT_ERRORS as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except EvalDomainError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except StatcurvError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
