"""Command-line front end.

Subcommands map one-to-one onto library stages: assemble/solve for the
exact matrices and fixed-exponent spectra, optimize/converge for the
variational tables, density/coupling for state observables, oracle for
the grid cross-check and verify for precision-ladder reports.  Tables go
out as CSV with a header row, grids as JSON; identical arguments plus a
warm cache give byte-identical files, except for the generated_at field
in JSON metadata which is documented as excluded from such comparisons.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .assembly import ExactMatrixSet, assemble_cached, cache_path
from .basis import Parity, as_parity
from .eigen import Precision, spectrum, verified_spectrum
from .errors import (
    BracketExhaustedError,
    CacheError,
    ConvergenceError,
    InternalInconsistencyError,
    InvalidArgumentError,
    QdipoleError,
)
from .observables import coupling_constant, density_grid, state_wavefunction
from .optimize import OptResult, k_sweep, optimize_alpha_auto
from .oracle_fd import FdConfig, fd_spectrum

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_INVALID_ARGUMENT = 3
EXIT_NO_CONVERGENCE = 4
EXIT_CACHE = 5
EXIT_INTERNAL = 6


@dataclass
class RunConfig:
    """Validated per-invocation parameters shared by the subcommands."""

    command: str
    parity: Parity | None = None
    K: int | None = None
    bits: int = 256
    tol: float = 1e-6
    digits: int = 17
    cache_dir: Path | None = None
    output: Path | None = None
    fmt: str = "csv"

    @property
    def precision(self) -> Precision:
        return Precision(self.bits)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdipole",
        description="Bound states of the planar quantum dipole, variational and exact-matrix based.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, parity=True, k=True) -> None:
        if parity:
            p.add_argument("--parity", required=True, choices=["even", "odd"])
        if k:
            p.add_argument("--K", required=True, type=int, help="truncation order")
        p.add_argument("--bits", type=int, default=256, help="working precision (default 256)")
        p.add_argument("--digits", type=int, default=17, help="printed significant digits")
        p.add_argument("--cache-dir", type=Path, default=None)
        p.add_argument("--output", type=Path, default=None, help="write to file instead of stdout")

    p = sub.add_parser("assemble", help="build and cache the exact matrices")
    common(p)
    p.add_argument("--refresh", action="store_true", help="rebuild even if cached")

    p = sub.add_parser("solve", help="all eigenvalues at a fixed exponent")
    common(p)
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--states", type=int, default=None, help="print only the lowest count")
    p.add_argument("--verified", action="store_true", help="re-run at doubled precision, report agreement")

    p = sub.add_parser("optimize", help="per-state optimal exponent table")
    common(p)
    p.add_argument("--states", type=int, default=5, help="optimize states 1..count")
    p.add_argument("--tol", type=float, default=1e-6, help="relative exponent tolerance")
    p.add_argument("--bracket", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    p.add_argument("--full-search", action="store_true", help="full-precision search evaluations")

    p = sub.add_parser("converge", help="one state across truncation orders")
    common(p, k=False)
    p.add_argument("--state", type=int, default=1)
    p.add_argument("--K-list", type=int, nargs="+", required=True)
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("density", help="sample |psi|^2 on a grid")
    common(p)
    p.add_argument("--state", type=int, default=1)
    p.add_argument("--alpha", default="auto", help="exponent, or 'auto' to optimize first")
    p.add_argument("--extent", type=float, nargs=4, required=True, metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--nx", type=int, default=200)
    p.add_argument("--ny", type=int, default=200)
    p.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")

    p = sub.add_parser("coupling", help="quartic coupling of one state")
    common(p)
    p.add_argument("--state", type=int, default=1)
    p.add_argument("--alpha", default="auto")
    p.add_argument("--radial-nodes", type=int, default=None)
    p.add_argument("--angular-points", type=int, default=None)

    p = sub.add_parser("oracle", help="finite-difference cross-check")
    p.add_argument("--L", type=float, default=40.0, help="box half-width")
    p.add_argument("--M", type=int, default=400, help="grid points per axis")
    p.add_argument("--count", type=int, default=6, help="number of eigenvalues")
    p.add_argument("--digits", type=int, default=17)
    p.add_argument("--output", type=Path, default=None)

    p = sub.add_parser("verify", help="optimize, then re-solve at doubled precision")
    common(p)
    p.add_argument("--states", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-6)
    return parser


def _fmt(value, digits: int) -> str:
    if isinstance(value, (int, float)):
        return f"{value:.{digits}g}"
    return format(value, f".{digits}g")


def _csv_table(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        cfg.output.parent.mkdir(parents=True, exist_ok=True)
        cfg.output.write_text(text)
        print(f"wrote {cfg.output}")


def _matrices(cfg: RunConfig, ns) -> ExactMatrixSet:
    return assemble_cached(cfg.parity, cfg.K, cfg.cache_dir, refresh=getattr(ns, "refresh", False))


def _resolve_state(m: ExactMatrixSet, ns, cfg: RunConfig) -> OptResult:
    """Optimize the requested state, or solve at an explicit exponent."""
    n = ns.state
    if not 1 <= n <= m.size:
        raise InvalidArgumentError(f"state index {n} outside 1..{m.size}")
    if ns.alpha == "auto":
        return optimize_alpha_auto(m, n, None, cfg.precision, getattr(ns, "tol", 1e-6))
    try:
        alpha = float(ns.alpha)
    except ValueError:
        raise InvalidArgumentError(f"--alpha must be a number or 'auto', got {ns.alpha!r}") from None
    spec = spectrum(m, alpha, cfg.precision)
    return OptResult(n, alpha, spec.eigenvalues[n - 1], float("nan"), 0, spec)


def _cmd_assemble(cfg: RunConfig, ns) -> int:
    m = _matrices(cfg, ns)
    print(f"cached {cache_path(cfg.parity, cfg.K, cfg.cache_dir)} (N={m.size})")
    return EXIT_OK


def _cmd_solve(cfg: RunConfig, ns) -> int:
    m = _matrices(cfg, ns)
    if ns.verified:
        spec, digits = verified_spectrum(m, ns.alpha, cfg.precision)
    else:
        spec, digits = spectrum(m, ns.alpha, cfg.precision), None
    count = spec.n_states if ns.states is None else min(ns.states, spec.n_states)
    header = ["state", "eigenvalue"] + (["agreement_digits"] if digits else [])
    rows = []
    for i in range(count):
        row = [str(i + 1), _fmt(spec.eigenvalues[i], cfg.digits)]
        if digits:
            row.append(f"{digits[i]:.2f}")
        rows.append(row)
    _emit(_csv_table(header, rows), cfg)
    print(f"residual bound {_fmt(spec.residual_bound, 3)}", file=sys.stderr)
    return EXIT_OK


def _cmd_optimize(cfg: RunConfig, ns) -> int:
    m = _matrices(cfg, ns)
    rows = []
    for n in range(1, ns.states + 1):
        res = optimize_alpha_auto(m, n, ns.bracket, cfg.precision, ns.tol, coarse=not ns.full_search)
        rows.append(
            [
                str(n),
                _fmt(res.alpha_star, cfg.digits),
                _fmt(res.epsilon, cfg.digits),
                _fmt(res.stationarity, 3),
                str(res.evaluations),
            ]
        )
    _emit(_csv_table(["state", "alpha_star", "epsilon", "stationarity", "evaluations"], rows), cfg)
    return EXIT_OK


def _cmd_converge(cfg: RunConfig, ns) -> int:
    table = k_sweep(cfg.parity, ns.state, ns.K_list, cfg.precision, ns.tol, cfg.cache_dir)
    rows = [[str(K), _fmt(a, cfg.digits), _fmt(e, cfg.digits)] for K, a, e in table]
    _emit(_csv_table(["K", "alpha_star", "epsilon"], rows), cfg)
    return EXIT_OK


def _cmd_density(cfg: RunConfig, ns) -> int:
    m = _matrices(cfg, ns)
    res = _resolve_state(m, ns, cfg)
    w = state_wavefunction(m, res.spectrum, ns.state)
    grid = density_grid(w, tuple(ns.extent), ns.nx, ns.ny, state_index=ns.state)
    if ns.fmt == "json":
        doc = {
            "kind": "density_grid",
            "state": {
                "parity": cfg.parity.value,
                "n": ns.state,
                "K": cfg.K,
                "alpha": res.alpha_star,
            },
            "extent": list(grid.extent),
            "nx": grid.nx,
            "ny": grid.ny,
            "order": "values[i*ny + j] is the density at (x_i, y_j)",
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "values": [float(f"{v:.{cfg.digits}g}") for v in grid.values.ravel(order="C")],
        }
        _emit(json.dumps(doc, indent=1) + "\n", cfg)
    else:
        xs, ys = grid.axes()
        rows = [
            [_fmt(xs[i], cfg.digits), _fmt(ys[j], cfg.digits), _fmt(grid.values[i, j], cfg.digits)]
            for i in range(grid.nx)
            for j in range(grid.ny)
        ]
        _emit(_csv_table(["x", "y", "density"], rows), cfg)
    return EXIT_OK


def _cmd_coupling(cfg: RunConfig, ns) -> int:
    m = _matrices(cfg, ns)
    res = _resolve_state(m, ns, cfg)
    w = state_wavefunction(m, res.spectrum, ns.state)
    g = coupling_constant(w, cfg.precision, ns.radial_nodes, ns.angular_points)
    rows = [
        [
            str(ns.state),
            _fmt(res.alpha_star, cfg.digits),
            _fmt(res.epsilon, cfg.digits),
            _fmt(g, cfg.digits),
        ]
    ]
    _emit(_csv_table(["state", "alpha", "epsilon", "g"], rows), cfg)
    return EXIT_OK


def _cmd_oracle(cfg: RunConfig, ns) -> int:
    vals = fd_spectrum(FdConfig(ns.L, ns.M, ns.count))
    rows = [[str(i + 1), _fmt(v, cfg.digits)] for i, v in enumerate(vals)]
    _emit(_csv_table(["index", "eigenvalue"], rows), cfg)
    return EXIT_OK


def _cmd_verify(cfg: RunConfig, ns) -> int:
    m = _matrices(cfg, ns)
    rows = []
    for n in range(1, ns.states + 1):
        res = optimize_alpha_auto(m, n, None, cfg.precision, ns.tol)
        _, digits = verified_spectrum(m, res.alpha_star, cfg.precision)
        rows.append(
            [
                str(n),
                _fmt(res.alpha_star, cfg.digits),
                _fmt(res.epsilon, cfg.digits),
                f"{digits[n - 1]:.2f}",
            ]
        )
    _emit(_csv_table(["state", "alpha_star", "epsilon", "agreement_digits"], rows), cfg)
    return EXIT_OK


_HANDLERS = {
    "assemble": _cmd_assemble,
    "solve": _cmd_solve,
    "optimize": _cmd_optimize,
    "converge": _cmd_converge,
    "density": _cmd_density,
    "coupling": _cmd_coupling,
    "oracle": _cmd_oracle,
    "verify": _cmd_verify,
}


def _config_from(ns) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    if getattr(ns, "parity", None) is not None:
        cfg.parity = as_parity(ns.parity)
    if getattr(ns, "K", None) is not None:
        if ns.K < 1:
            raise InvalidArgumentError(f"K must be positive, got {ns.K}")
        cfg.K = ns.K
    cfg.bits = getattr(ns, "bits", 256)
    cfg.digits = getattr(ns, "digits", 17)
    if cfg.digits < 1:
        raise InvalidArgumentError(f"digits must be positive, got {cfg.digits}")
    cfg.cache_dir = getattr(ns, "cache_dir", None)
    cfg.output = getattr(ns, "output", None)
    cfg.fmt = getattr(ns, "fmt", "csv")
    Precision(cfg.bits)
    return cfg


def _exit_code(err: QdipoleError) -> int:
    if isinstance(err, InvalidArgumentError):
        return EXIT_INVALID_ARGUMENT
    if isinstance(err, (ConvergenceError, BracketExhaustedError)):
        return EXIT_NO_CONVERGENCE
    if isinstance(err, CacheError):
        return EXIT_CACHE
    if isinstance(err, InternalInconsistencyError):
        return EXIT_INTERNAL
    return EXIT_UNEXPECTED


def run(argv: list[str] | None = None) -> int:
    """Parse arguments, dispatch, and map errors to stable exit codes."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    try:
        cfg = _config_from(ns)
        return _HANDLERS[ns.command](cfg, ns)
    except QdipoleError as err:
        print(f"error: {err}", file=sys.stderr)
        return _exit_code(err)
    except Exception as err:  # pragma: no cover - defensive
        print(f"unexpected error: {err!r}", file=sys.stderr)
        return EXIT_UNEXPECTED


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
