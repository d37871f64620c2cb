"""Command-line interface: CSV in, CSV out, reproducible by construction.

Commands: ``fit`` (subspace + spectrum from a data CSV), ``angles``
(principal angles between two basis CSVs), ``bounds`` (closed-form bound
evaluation), ``experiment`` (preset result tables).  Every output starts with
'#'-prefixed metadata echoing the resolved configuration, floats are printed
with 17 significant digits, files are written atomically, and exit codes are
0 (success), 2 (usage or input error), 1 (internal error).

A flat key=value config file can preload flags for any command: section
names match the command ("fit", "angles", "experiment", "bounds.perturbation"
and friends); explicit command-line flags win over file values.  Relative
output paths resolve under $WINPCA_OUT_DIR when it is set.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .bounds import (
    WinsorizedSpectrum,
    breakdown_lower_bounds_from_values,
    concentration_bound_elliptical,
    concentration_bound_subgaussian,
    asymptotic_rate,
    perturbation_bound,
)
from .experiments import (
    PRESETS,
    format_value,
    run_breakdown_bounds,
    run_effect_of_radius,
    run_high_dim,
    run_perturbation_sweep,
)
from .subspace import fit_pc_subspace, principal_angles
from .transform import RadiusSpec

__all__ = ["main", "read_matrix_csv", "parse_radius"]

# Config keys that map to flag presence rather than a value.
_BOOL_KEYS = {"center", "subgaussian"}


def parse_radius(text: str) -> RadiusSpec:
    """Parse a radius flag: none | spherical | median | fixed:<r> | power:<beta>."""
    t = text.strip().lower()
    if t == "none":
        return RadiusSpec.none()
    if t == "spherical":
        return RadiusSpec.spherical()
    if t == "median":
        return RadiusSpec.median_norm()
    if t.startswith("fixed:"):
        return RadiusSpec.fixed(float(t[len("fixed:"):]))
    if t.startswith("power:"):
        return RadiusSpec.power_law(float(t[len("power:"):]))
    raise ValueError(
        f"unknown radius {text!r}; use none, spherical, median, fixed:<r>, power:<beta>"
    )


def _is_numeric_row(cells: list[str]) -> bool:
    try:
        for c in cells:
            float(c)
    except ValueError:
        return False
    return True


def read_matrix_csv(path: str) -> np.ndarray:
    """Read a numeric matrix from CSV: '#' comment lines skipped, header auto-detected."""
    records: list[list[str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            if not rec or not any(c.strip() for c in rec):
                continue
            if rec[0].lstrip().startswith("#"):
                continue
            records.append([c.strip() for c in rec])
    if not records:
        raise ValueError(f"{path}: no data rows")
    start = 0 if _is_numeric_row(records[0]) else 1
    data = records[start:]
    if not data:
        raise ValueError(f"{path}: header present but no data rows")
    width = len(data[0])
    out = np.empty((len(data), width))
    for i, rec in enumerate(data):
        if len(rec) != width:
            raise ValueError(
                f"{path}: ragged CSV, row {i + start + 1} has {len(rec)} cells, expected {width}"
            )
        try:
            out[i] = [float(c) for c in rec]
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric cell in row {i + start + 1}: {exc}") from None
    return out


def _resolve_out_path(out: str) -> str:
    base = os.environ.get("WINPCA_OUT_DIR", "")
    if base and not os.path.isabs(out):
        return os.path.join(base, out)
    return out


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = _resolve_out_path(out)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".winpca-", dir=directory, text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta_lines(pairs: list[tuple[str, object]]) -> list[str]:
    return [f"# {k}={v if isinstance(v, str) else format_value(v)}" for k, v in pairs]


def _parse_float_list(text: str) -> np.ndarray:
    try:
        vals = np.array([float(t) for t in text.split(",") if t.strip() != ""])
    except ValueError:
        raise ValueError(f"could not parse float list {text!r}") from None
    if vals.size == 0:
        raise ValueError("empty float list")
    return vals


def cmd_fit(args: argparse.Namespace) -> int:
    X = read_matrix_csv(args.input)
    n, p = X.shape
    if args.d < 1:
        raise ValueError("d must be at least 1")
    if args.d >= p:
        raise ValueError(f"d={args.d} must be smaller than the column count p={p}")
    if args.center:
        X = X - X.mean(axis=0)
    spec = parse_radius(args.radius)
    fit = fit_pc_subspace(X, args.d, spec)
    lines = _meta_lines([
        ("command", "fit"),
        ("input", args.input),
        ("n", n),
        ("p", p),
        ("d", args.d),
        ("radius", args.radius),
        ("center", str(bool(args.center)).lower()),
        ("mode", fit.mode),
        ("effective_radius",
         fit.effective_radius if fit.effective_radius is not None else "none"),
        ("eigenvalues", ",".join(format_value(v) for v in fit.spectrum.eigenvalues)),
        ("degenerate_gap", str(fit.degenerate_gap).lower()),
    ])
    if fit.degenerate_gap:
        lines.append("# warning=eigen-gap at d is degenerate; the subspace is not unique")
        print("warning: eigen-gap at d is degenerate; the subspace is not unique",
              file=sys.stderr)
    header = ",".join(f"basis_{j + 1}" for j in range(args.d))
    body = [",".join(format_value(v) for v in row) for row in fit.basis]
    _emit("\n".join(lines + [header] + body) + "\n", args.out)
    return 0


def _orthonormalize_if_needed(B: np.ndarray, label: str) -> np.ndarray:
    gram = B.T @ B
    if np.max(np.abs(gram - np.eye(B.shape[1]))) <= 1e-6:
        return B
    print(f"warning: {label} is not orthonormal within 1e-6; re-orthonormalizing",
          file=sys.stderr)
    Q, R = np.linalg.qr(B)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def cmd_angles(args: argparse.Namespace) -> int:
    A = read_matrix_csv(args.basis_a)
    B = read_matrix_csv(args.basis_b)
    if A.shape != B.shape:
        raise ValueError(f"basis shapes differ: {A.shape} vs {B.shape}")
    A = _orthonormalize_if_needed(A, args.basis_a)
    B = _orthonormalize_if_needed(B, args.basis_b)
    report = principal_angles(A, B)
    lines = _meta_lines([
        ("command", "angles"),
        ("basis_a", args.basis_a),
        ("basis_b", args.basis_b),
        ("smallest", report.smallest),
        ("largest", report.largest),
        ("sin_largest", report.sin_largest),
    ])
    body = ["index,angle"]
    for j, ang in enumerate(report.angles):
        body.append(f"{j + 1},{format_value(float(ang))}")
    _emit("\n".join(lines + body) + "\n", args.out)
    return 0


def _emit_quantities(meta: list[tuple[str, object]],
                     quantities: list[tuple[str, object]], out: str | None) -> None:
    lines = _meta_lines(meta)
    body = ["quantity,value"]
    for name, val in quantities:
        body.append(f"{name},{format_value(val)}")
    _emit("\n".join(lines + body) + "\n", out)


def cmd_bounds_perturbation(args: argparse.Namespace) -> int:
    if args.gap < 0:
        raise ValueError("gap must be nonnegative")
    report = perturbation_bound(args.gap, 0.0, args.r, args.eps)
    _emit_quantities(
        [("command", "bounds.perturbation"), ("gap", args.gap), ("r", args.r),
         ("eps", args.eps)],
        [("bound1", report.components["bound1"]),
         ("bound2", report.components.get("bound2")),
         ("min_bound", report.value)],
        args.out,
    )
    return 0


def cmd_bounds_breakdown(args: argparse.Namespace) -> int:
    vals = _parse_float_list(args.eigs)
    weak, strong = breakdown_lower_bounds_from_values(vals, args.r2, args.d)
    _emit_quantities(
        [("command", "bounds.breakdown"), ("eigs", args.eigs), ("r2", args.r2),
         ("d", args.d)],
        [("weak_lb", weak), ("strong_lb", strong)],
        args.out,
    )
    return 0


def cmd_bounds_concentration(args: argparse.Namespace) -> int:
    vals = np.sort(_parse_float_list(args.weigs))[::-1]
    wspec = WinsorizedSpectrum(vals, args.r, "sample")
    if args.sigma is None:
        report = concentration_bound_elliptical(
            args.lam1, args.lamp, wspec, args.d, args.eps, args.n, args.p)
        family = "elliptical"
    else:
        report = concentration_bound_subgaussian(
            args.lam1, args.lamp, args.sigma, wspec, args.d, args.eps,
            args.n, args.p)
        family = "subgaussian"
    _emit_quantities(
        [("command", "bounds.concentration"), ("family", family),
         ("lam1", args.lam1), ("lamp", args.lamp), ("weigs", args.weigs),
         ("r", args.r), ("d", args.d), ("eps", args.eps), ("n", args.n),
         ("p", args.p),
         ("sigma", args.sigma if args.sigma is not None else "none")],
        [("value", report.value),
         ("contamination", report.components["contamination"]),
         ("sampling", report.components["sampling"]),
         ("clipped", report.clipped)],
        args.out,
    )
    return 0


def cmd_bounds_rate(args: argparse.Namespace) -> int:
    term1, term2 = asymptotic_rate(args.beta, args.p, args.n, args.eps,
                                   args.subgaussian)
    _emit_quantities(
        [("command", "bounds.rate"), ("beta", args.beta), ("p", args.p),
         ("n", args.n), ("eps", args.eps),
         ("subgaussian", str(bool(args.subgaussian)).lower())],
        [("contamination_term", term1), ("sampling_term", term2)],
        args.out,
    )
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    preset = args.preset
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    seed = args.seed
    jobs = args.jobs
    if preset == "fig1":
        table = run_effect_of_radius(
            scale=args.scale if args.scale is not None else 1.0,
            seed=seed, jobs=jobs)
    elif preset == "fig2":
        table = run_high_dim(
            scale=args.scale if args.scale is not None else 0.2,
            seed=seed,
            replications=args.replications if args.replications else 10,
            jobs=jobs)
    elif preset == "fig3":
        if args.replications:
            reps = args.replications
        elif args.scale is not None:
            reps = max(1, round(1000 * args.scale))
        else:
            reps = 1000
        table = run_breakdown_bounds(seed=seed, replications=reps, jobs=jobs)
    else:
        if args.scale is not None or args.replications:
            print("note: fig4 is a single-dataset sweep; --scale/--replications ignored",
                  file=sys.stderr)
        table = run_perturbation_sweep(seed=seed)
    _emit(table.csv_text(), args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="winpca",
        description="Winsorized PCA: robust subspace fitting, angle diagnostics, "
                    "bound calculus, and preset experiments.",
    )
    parser.add_argument("--version", action="version", version=f"winpca {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", default=None,
                       help="output path (default stdout); relative paths resolve "
                            "under $WINPCA_OUT_DIR")
        p.add_argument("--config", default=None, help=argparse.SUPPRESS)

    p_fit = sub.add_parser("fit", help="fit a PC subspace from a data CSV")
    p_fit.add_argument("input", help="CSV with n rows and p numeric columns")
    p_fit.add_argument("--d", type=int, required=True, help="subspace dimension")
    p_fit.add_argument("--radius", default="median",
                       help="none | spherical | median | fixed:<r> | power:<beta> "
                            "(default median)")
    p_fit.add_argument("--center", action="store_true",
                       help="subtract column means before winsorizing")
    add_out(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_ang = sub.add_parser("angles", help="principal angles between two basis CSVs")
    p_ang.add_argument("basis_a")
    p_ang.add_argument("basis_b")
    add_out(p_ang)
    p_ang.set_defaults(func=cmd_angles)

    p_bounds = sub.add_parser("bounds", help="evaluate closed-form bounds")
    bsub = p_bounds.add_subparsers(dest="bounds_command", required=True)

    p_pert = bsub.add_parser("perturbation", help="contamination perturbation bounds")
    p_pert.add_argument("--gap", type=float, required=True,
                        help="winsorized sample eigen-gap at d")
    p_pert.add_argument("--r", type=float, default=1.0, help="winsorization radius")
    p_pert.add_argument("--eps", type=float, required=True,
                        help="contamination fraction in [0, 0.5)")
    add_out(p_pert)
    p_pert.set_defaults(func=cmd_bounds_perturbation)

    p_bd = bsub.add_parser("breakdown", help="breakdown-point lower bounds")
    p_bd.add_argument("--eigs", required=True,
                      help="comma-separated descending winsorized sample eigenvalues")
    p_bd.add_argument("--r2", type=float, required=True, help="radius squared")
    p_bd.add_argument("--d", type=int, required=True)
    add_out(p_bd)
    p_bd.set_defaults(func=cmd_bounds_breakdown)

    p_conc = bsub.add_parser("concentration", help="expected-loss concentration bounds")
    p_conc.add_argument("--lam1", type=float, required=True,
                        help="largest population eigenvalue")
    p_conc.add_argument("--lamp", type=float, required=True,
                        help="smallest population eigenvalue")
    p_conc.add_argument("--weigs", required=True,
                        help="comma-separated winsorized eigenvalues (length > d)")
    p_conc.add_argument("--r", type=float, required=True, help="winsorization radius")
    p_conc.add_argument("--d", type=int, required=True)
    p_conc.add_argument("--eps", type=float, required=True)
    p_conc.add_argument("--n", type=int, required=True)
    p_conc.add_argument("--p", type=int, required=True)
    p_conc.add_argument("--sigma", type=float, default=None,
                        help="subgaussian parameter of the whitened vector; "
                             "omit for the elliptical bound")
    add_out(p_conc)
    p_conc.set_defaults(func=cmd_bounds_concentration)

    p_rate = bsub.add_parser("rate", help="asymptotic rate shapes for power-law radii")
    p_rate.add_argument("--beta", type=float, required=True)
    p_rate.add_argument("--p", type=int, required=True)
    p_rate.add_argument("--n", type=int, required=True)
    p_rate.add_argument("--eps", type=float, default=0.0)
    p_rate.add_argument("--subgaussian", action="store_true")
    add_out(p_rate)
    p_rate.set_defaults(func=cmd_bounds_rate)

    p_exp = sub.add_parser("experiment", help="run a preset experiment grid")
    p_exp.add_argument("preset", choices=sorted(PRESETS))
    p_exp.add_argument("--scale", type=float, default=None,
                       help="size multiplier (fig1: n and replications; fig2: p; "
                            "fig3: replications)")
    p_exp.add_argument("--seed", type=int, default=42)
    p_exp.add_argument("--jobs", type=int, default=1,
                       help="worker threads for replication-level parallelism")
    p_exp.add_argument("--replications", type=int, default=None,
                       help="override the preset replication count (fig2, fig3)")
    add_out(p_exp)
    p_exp.set_defaults(func=cmd_experiment)

    return parser


def _extract_config(argv: list[str]) -> tuple[str | None, list[str]]:
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ValueError("--config requires a file path")
            return argv[i + 1], argv[:i] + argv[i + 2:]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1], argv[:i] + argv[i + 1:]
    return None, argv


def _config_tokens(path: str, section: str) -> list[str]:
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_string(fh.read())
    if section not in cp:
        return []
    tokens: list[str] = []
    for key, val in cp[section].items():
        flag = "--" + key.replace("_", "-")
        if key in _BOOL_KEYS:
            if val.strip().lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
        else:
            tokens.extend([flag, val.strip()])
    return tokens


def _apply_config(argv: list[str]) -> list[str]:
    path, rest = _extract_config(argv)
    if path is None or not rest:
        return rest
    cmd = rest[0]
    insert_at = 1
    section = cmd
    if cmd == "bounds" and len(rest) > 1 and not rest[1].startswith("-"):
        section = f"bounds.{rest[1]}"
        insert_at = 2
    elif cmd == "experiment" and len(rest) > 1 and not rest[1].startswith("-"):
        insert_at = 2
    return rest[:insert_at] + _config_tokens(path, section) + rest[insert_at:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        argv = _apply_config(argv)
        parser = _build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
